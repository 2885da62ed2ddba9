"""Permutations of [n], their lifts to vertex pairs, and cycle censuses.

The lift of a vertex permutation pi sends the pair {i,j} to {pi(i),pi(j)};
pair permutations are plain integer arrays over the canonical pair indices.
The census of a permutation records how many cycles of each length it has,
which is all the generating-function layer ever needs.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Dict, Iterator, Sequence

import numpy as np

from .errors import CapExceededError, DomainError, ParameterError
from .model import pair_array, pair_count

#: default guard against accidental factorial blowup in exhaustive scans
DEFAULT_ENUM_CAP = 10


@dataclass(frozen=True)
class Permutation:
    """A bijection [n] -> [n], stored as the image sequence."""

    images: tuple

    def __post_init__(self):
        images = tuple(int(x) for x in self.images)
        if sorted(images) != list(range(len(images))):
            raise ParameterError(f"not a bijection on [{len(images)}]: {images}")
        object.__setattr__(self, "images", images)

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: "Permutation") -> "Permutation":
        """Composition (self * other)(i) = self(other(i))."""
        if self.n != other.n:
            raise ParameterError("cannot compose permutations of different sizes")
        return Permutation(tuple(self.images[other.images[i]] for i in range(self.n)))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, img in enumerate(self.images):
            inv[img] = i
        return Permutation(tuple(inv))

    @property
    def moved(self) -> int:
        """Number of non-fixed vertices (n-tilde)."""
        return sum(1 for i, img in enumerate(self.images) if img != i)

    def is_identity(self) -> bool:
        return self.moved == 0

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def from_string(cls, s: str) -> "Permutation":
        try:
            images = tuple(int(x) for x in s.strip().split(","))
        except ValueError as exc:
            raise ParameterError(f"cannot parse permutation {s!r}") from exc
        return cls(images)

    def to_string(self) -> str:
        return ",".join(str(x) for x in self.images)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Permutation":
        """Uniform permutation via Fisher-Yates on the supplied generator."""
        images = list(range(n))
        for i in range(n - 1, 0, -1):
            j = int(rng.integers(0, i + 1))
            images[i], images[j] = images[j], images[i]
        return cls(tuple(images))


def lex_rank(images: Sequence[int]) -> int:
    """Rank of an image sequence among all permutations in lexicographic order."""
    images = list(images)
    n = len(images)
    rank = 0
    for i in range(n):
        smaller = sum(1 for j in range(i + 1, n) if images[j] < images[i])
        rank += smaller * factorial(n - 1 - i)
    return rank


def lift(pi: Permutation) -> np.ndarray:
    """Pair permutation induced by a vertex permutation: {i,j} -> {pi(i),pi(j)}."""
    n = pi.n
    ii, jj = pair_array(n)
    img = np.asarray(pi.images, dtype=np.int64)
    a, b = img[ii], img[jj]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    return lo * n - lo * (lo + 1) // 2 + (hi - lo - 1)


@dataclass(frozen=True)
class CycleType:
    """Cycle-length census of a permutation: counts[l] cycles of length l."""

    counts: tuple
    size: int

    def __post_init__(self):
        counts = tuple(sorted((int(l), int(c)) for l, c in dict(self.counts).items() if c))
        for l, c in counts:
            if l < 1 or c < 0:
                raise ParameterError(f"bad census entry ({l}, {c})")
        if sum(l * c for l, c in counts) != self.size:
            raise ParameterError(
                f"census {counts} does not cover a domain of size {self.size}"
            )
        object.__setattr__(self, "counts", counts)

    def count(self, length: int) -> int:
        return dict(self.counts).get(length, 0)

    @property
    def t1(self) -> int:
        """Fixed points."""
        return self.count(1)

    @property
    def t_tilde(self) -> int:
        """Domain elements in nontrivial cycles."""
        return self.size - self.t1

    def items(self):
        return self.counts

    @classmethod
    def from_mapping(cls, counts: Dict[int, int], size=None) -> "CycleType":
        total = sum(l * c for l, c in counts.items())
        return cls(tuple(counts.items()), total if size is None else size)


def cycle_type(tau) -> CycleType:
    """Exact cycle census of any bijection given as an image sequence."""
    arr = np.asarray(tau, dtype=np.int64)
    m = arr.shape[0]
    if not np.array_equal(np.sort(arr), np.arange(m)):
        raise ParameterError("not a bijection")
    seen = np.zeros(m, dtype=bool)
    counts: Dict[int, int] = {}
    for start in range(m):
        if seen[start]:
            continue
        length = 0
        e = start
        while not seen[e]:
            seen[e] = True
            e = int(arr[e])
            length += 1
        counts[length] = counts.get(length, 0) + 1
    return CycleType.from_mapping(counts, size=m)


@functools.lru_cache(maxsize=None)
def derangements(k: int) -> int:
    """Permutations of [k] with no fixed point, via the standard recurrence."""
    if k < 0:
        raise ParameterError("derangements need k >= 0")
    if k == 0:
        return 1
    if k == 1:
        return 0
    return (k - 1) * (derangements(k - 1) + derangements(k - 2))


def count_support(n: int, n_tilde: int) -> int:
    """Number of permutations of [n] with exactly n - n_tilde fixed points."""
    if not 0 <= n_tilde <= n:
        raise ParameterError(f"need 0 <= n_tilde <= n, got n_tilde={n_tilde}, n={n}")
    return comb(n, n_tilde) * derangements(n_tilde)


def enumerate_perms(n: int, cap: int = DEFAULT_ENUM_CAP) -> Iterator[Permutation]:
    """All n! permutations in lexicographic order of image sequences, identity first."""
    if n > cap:
        raise CapExceededError(
            f"refusing to enumerate {n}! permutations (n={n} exceeds cap {cap}); "
            f"raise the cap explicitly if you mean it"
        )
    for images in itertools.permutations(range(n)):
        yield Permutation(images)


def perm_gf_check(n: int, z: Fraction):
    """Exact two sides of the fixed-point-count series bound.

    Returns (sum over n_tilde of |S_{n,n_tilde}| z^n_tilde,
             1 + n^2 z^2 / (1 - n z)); the left side never exceeds the right
    for 0 <= z < 1/n.
    """
    z = Fraction(z)
    if not 0 <= z < Fraction(1, n):
        raise DomainError(f"need 0 <= z < 1/{n}, got {z}")
    lhs = sum(count_support(n, k) * z**k for k in range(n + 1))
    rhs = 1 + n**2 * z**2 / (1 - n * z)
    return lhs, rhs


@dataclass(frozen=True)
class MovedPairBounds:
    """Structural bounds on the lift census of one permutation."""

    n: int
    n_tilde: int
    t: int
    t1: int
    t_tilde: int
    t1_lower: int
    t1_upper: Fraction
    t_tilde_lower: Fraction
    t_tilde_upper: int
    t1_ratio: Fraction
    t1_ratio_upper: Fraction

    @property
    def all_hold(self) -> bool:
        return (
            self.t1_lower <= self.t1 <= self.t1_upper
            and self.t_tilde_lower <= self.t_tilde <= self.t_tilde_upper
            and self.t1_ratio <= self.t1_ratio_upper
        )


def t1_bounds_check(pi: Permutation) -> MovedPairBounds:
    """Census of the lift of pi together with all its structural bounds.

    Fixed pairs of the lift come from fixed-vertex pairs or 2-cycles, so
    C(n-nt,2) <= t1 <= C(n-nt,2) + nt/2; dually t_tilde >= nt(n-2)/2 and
    t_tilde <= n*nt, and t1/t <= (1-nu)^2 + nu^2/(n-1) with nu = nt/n.
    """
    n = pi.n
    ct = cycle_type(lift(pi))
    n_tilde = pi.moved
    t = pair_count(n)
    nu = Fraction(n_tilde, n)
    ratio_upper = (1 - nu) ** 2 + (nu**2 / (n - 1) if n > 1 else 0)
    return MovedPairBounds(
        n=n,
        n_tilde=n_tilde,
        t=t,
        t1=ct.t1,
        t_tilde=ct.t_tilde,
        t1_lower=comb(n - n_tilde, 2),
        t1_upper=comb(n - n_tilde, 2) + Fraction(n_tilde, 2),
        t_tilde_lower=Fraction(n_tilde * (n - 2), 2),
        t_tilde_upper=n * n_tilde,
        t1_ratio=Fraction(ct.t1, t) if t else Fraction(0),
        t1_ratio_upper=ratio_upper,
    )
