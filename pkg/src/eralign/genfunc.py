"""Exact generating-function engine for cycle statistics of labeled pairs.

Everything here is exact rational arithmetic.  The central objects:

* ``LaurentPoly`` -- sparse polynomial in one variable z with integer
  (possibly negative) exponents and Fraction coefficients.  z tracks the
  alignment score change of a relabeling.
* ``BiPoly`` -- sparse bivariate polynomial; the first exponent counts
  (1,1)-labeled positions inside nontrivial cycles, the second is the z
  exponent.
* ``cycle_gf(l, w)`` -- weighted enumeration of all label pairs on one
  l-cycle, with matrix weights w tracking the joint type and z tracking
  the score change.  ``cycle_gf_enum`` computes the same thing by direct
  enumeration of all 4^l labelings and exists as an independent oracle.

The closed form routes every cycle length through ``block_gf``, the
generating polynomial of cyclic sequences partitioned into blocks of size
one and two:  block_gf(l, 2u, v) = 2 * sum_i C(l,2i) u^(l-2i) (u^2+v)^i.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Dict, Tuple, Union

from .errors import CapExceededError, DomainError, ParameterError
from .model import PVec
from .perms import CycleType

#: enumeration guard: oracles walk 4^l (or 4^t) labelings
ENUM_CAP = 10

Scalar = Union[int, Fraction]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise ParameterError(f"exact rational required, got {type(x).__name__} {x!r}")


class LaurentPoly:
    """Sparse exact-rational polynomial in z allowing negative exponents."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Dict[int, Scalar] | None = None):
        c = {}
        if coeffs:
            for e, q in coeffs.items():
                q = _frac(q)
                if q:
                    c[int(e)] = q
        self._c = c

    @classmethod
    def const(cls, q) -> "LaurentPoly":
        return cls({0: _frac(q)})

    @classmethod
    def zero(cls) -> "LaurentPoly":
        return cls()

    @classmethod
    def one(cls) -> "LaurentPoly":
        return cls.const(1)

    @classmethod
    def term(cls, coeff, exp: int) -> "LaurentPoly":
        return cls({exp: coeff})

    def coeff(self, e: int) -> Fraction:
        return self._c.get(e, Fraction(0))

    def items(self) -> Tuple[Tuple[int, Fraction], ...]:
        return tuple(sorted(self._c.items()))

    def is_zero(self) -> bool:
        return not self._c

    @property
    def min_exp(self) -> int:
        if not self._c:
            raise DomainError("zero polynomial has no exponent range")
        return min(self._c)

    @property
    def max_exp(self) -> int:
        if not self._c:
            raise DomainError("zero polynomial has no exponent range")
        return max(self._c)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        c = dict(self._c)
        for e, q in other._c.items():
            c[e] = c.get(e, Fraction(0)) + q
        return LaurentPoly(c)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({e: -q for e, q in self._c.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        c: Dict[int, Fraction] = {}
        for e1, q1 in self._c.items():
            for e2, q2 in other._c.items():
                e = e1 + e2
                c[e] = c.get(e, Fraction(0)) + q1 * q2
        return LaurentPoly(c)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ParameterError("polynomial powers must be nonnegative integers")
        result = LaurentPoly.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LaurentPoly.const(other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(self.items())

    def _coerce(self, other):
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return LaurentPoly.const(other)
        return NotImplemented

    def evaluate(self, z):
        """Exact evaluation; z must be nonzero if negative exponents occur."""
        if not self._c:
            return Fraction(0)
        if z == 0 and self.min_exp < 0:
            raise DomainError("cannot evaluate negative exponents at z=0")
        total = Fraction(0) if isinstance(z, (int, Fraction)) else 0.0
        for e, q in self._c.items():
            total += q * z**e
        return total

    def lower_tail(self, j: int) -> Fraction:
        """Sum of coefficients with exponent <= j."""
        return sum((q for e, q in self._c.items() if e <= j), Fraction(0))

    def total(self) -> Fraction:
        return sum(self._c.values(), Fraction(0))

    def has_nonneg_coeffs(self) -> bool:
        return all(q >= 0 for q in self._c.values())

    def to_text(self) -> str:
        """Golden-file form: 'exp:coeff' pairs, exponent-ascending, coeff as p/q."""
        if not self._c:
            return "0:0/1"
        return " ".join(
            f"{e}:{q.numerator}/{q.denominator}" for e, q in self.items()
        )

    @classmethod
    def from_text(cls, text: str) -> "LaurentPoly":
        c: Dict[int, Fraction] = {}
        for tok in text.split():
            e_str, q_str = tok.split(":")
            c[int(e_str)] = Fraction(q_str)
        return cls(c)

    def __repr__(self):
        if not self._c:
            return "LaurentPoly(0)"
        parts = [f"{q}*z^{e}" if e else f"{q}" for e, q in self.items()]
        return "LaurentPoly(" + " + ".join(parts) + ")"


class BiPoly:
    """Sparse exact polynomial in a count marker and z.

    Keys are (m, d): m >= 0 is the marker exponent (number of (1,1) labels
    in the nontrivial region), d the signed z exponent.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Dict[Tuple[int, int], Scalar] | None = None):
        c = {}
        if coeffs:
            for (m, d), q in coeffs.items():
                q = _frac(q)
                if m < 0:
                    raise ParameterError(f"marker exponent must be >= 0, got {m}")
                if q:
                    c[(int(m), int(d))] = q
        self._c = c

    @classmethod
    def const(cls, q) -> "BiPoly":
        return cls({(0, 0): _frac(q)})

    @classmethod
    def one(cls) -> "BiPoly":
        return cls.const(1)

    def coeff(self, m: int, d: int) -> Fraction:
        return self._c.get((m, d), Fraction(0))

    def items(self):
        return tuple(sorted(self._c.items()))

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        c = dict(self._c)
        for k, q in other._c.items():
            c[k] = c.get(k, Fraction(0)) + q
        return BiPoly(c)

    __radd__ = __add__

    def __neg__(self):
        return BiPoly({k: -q for k, q in self._c.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        c: Dict[Tuple[int, int], Fraction] = {}
        for (m1, d1), q1 in self._c.items():
            for (m2, d2), q2 in other._c.items():
                k = (m1 + m2, d1 + d2)
                c[k] = c.get(k, Fraction(0)) + q1 * q2
        return BiPoly(c)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ParameterError("polynomial powers must be nonnegative integers")
        result = BiPoly.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = BiPoly.const(other)
        if not isinstance(other, BiPoly):
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(self.items())

    def _coerce(self, other):
        if isinstance(other, BiPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return BiPoly.const(other)
        return NotImplemented

    def total(self) -> Fraction:
        return sum(self._c.values(), Fraction(0))

    def marker_marginal(self) -> Dict[int, Fraction]:
        """Sum over z exponents at each marker exponent."""
        out: Dict[int, Fraction] = {}
        for (m, _), q in self._c.items():
            out[m] = out.get(m, Fraction(0)) + q
        return out

    def score_marginal(self) -> LaurentPoly:
        """Sum over marker exponents, leaving a polynomial in z."""
        out: Dict[int, Fraction] = {}
        for (_, d), q in self._c.items():
            out[d] = out.get(d, Fraction(0)) + q
        return LaurentPoly(out)

    def score_slice(self, m: int) -> LaurentPoly:
        """The z polynomial multiplying marker exponent m."""
        return LaurentPoly({d: q for (mm, d), q in self._c.items() if mm == m})

    def __repr__(self):
        if not self._c:
            return "BiPoly(0)"
        parts = [f"{q}*w^{m}*z^{d}" for (m, d), q in self.items()]
        return "BiPoly(" + " + ".join(parts) + ")"


@dataclass(frozen=True)
class WMatrix:
    """2x2 matrix of exact rational weights indexed by joint labels."""

    w00: Fraction
    w01: Fraction
    w10: Fraction
    w11: Fraction

    def __post_init__(self):
        for name in ("w00", "w01", "w10", "w11"):
            object.__setattr__(self, name, _frac(getattr(self, name)))

    @classmethod
    def ones(cls) -> "WMatrix":
        return cls(1, 1, 1, 1)

    @classmethod
    def from_pvec(cls, p: PVec) -> "WMatrix":
        p11, p10, p01, p00 = p.as_fractions()
        return cls(w00=p00, w01=p01, w10=p10, w11=p11)

    def total(self) -> Fraction:
        return self.w00 + self.w01 + self.w10 + self.w11

    def all_positive(self) -> bool:
        return min(self.w00, self.w01, self.w10, self.w11) > 0

    def hadamard(self, other: "WMatrix") -> "WMatrix":
        return WMatrix(
            self.w00 * other.w00,
            self.w01 * other.w01,
            self.w10 * other.w10,
            self.w11 * other.w11,
        )

    def matmul_transpose(self, other: "WMatrix") -> "WMatrix":
        """Matrix product self @ other^T."""
        x, y = self, other
        return WMatrix(
            w00=x.w00 * y.w00 + x.w01 * y.w01,
            w01=x.w00 * y.w10 + x.w01 * y.w11,
            w10=x.w10 * y.w00 + x.w11 * y.w01,
            w11=x.w10 * y.w10 + x.w11 * y.w11,
        )

    @property
    def trace(self) -> Fraction:
        return self.w00 + self.w11

    @property
    def det(self) -> Fraction:
        return self.w00 * self.w11 - self.w01 * self.w10

    def as_tuple(self):
        return (self.w00, self.w01, self.w10, self.w11)


def _check_ell(ell: int) -> None:
    if ell < 1:
        raise ParameterError(f"cycle length must be >= 1, got {ell}")
    if ell > ENUM_CAP:
        raise CapExceededError(
            f"enumeration over 4^{ell} labelings exceeds cap {ENUM_CAP}"
        )


def _rot(bits: int, ell: int) -> int:
    """Composition with the cycle shift: output bit e is input bit (e+1) mod ell."""
    return ((bits >> 1) | ((bits & 1) << (ell - 1))) & ((1 << ell) - 1)


def cycle_gf_enum(ell: int, w: WMatrix) -> LaurentPoly:
    """Score/type generating function of one l-cycle by direct enumeration.

    Sums z^(score change) * w^(joint type) over all 4^l labeled pairs (g,h)
    on a single cycle.  Oracle for ``cycle_gf``; they must agree exactly.
    """
    _check_ell(ell)
    mask = (1 << ell) - 1
    groups: Counter = Counter()
    for g in range(1 << ell):
        gs = _rot(g, ell)
        for h in range(1 << ell):
            k11 = (g & h).bit_count()
            k10 = (g & ~h & mask).bit_count()
            k01 = (~g & h & mask).bit_count()
            dd = (gs ^ h).bit_count() - (g ^ h).bit_count()
            groups[(k11, k10, k01, dd // 2)] += 1
    coeffs: Dict[int, Fraction] = {}
    for (k11, k10, k01, d), cnt in groups.items():
        k00 = ell - k11 - k10 - k01
        q = cnt * w.w00**k00 * w.w01**k01 * w.w10**k10 * w.w11**k11
        coeffs[d] = coeffs.get(d, Fraction(0)) + q
    return LaurentPoly(coeffs)


def double_type_sum(ell: int, x: WMatrix, y: WMatrix) -> Fraction:
    """Direct enumeration of sum over (g,h) of x^type(g,h) * y^type(g o shift, h)."""
    _check_ell(ell)
    mask = (1 << ell) - 1
    groups: Counter = Counter()
    for g in range(1 << ell):
        gs = _rot(g, ell)
        for h in range(1 << ell):
            kx = ((g & h).bit_count(), (g & ~h & mask).bit_count(), (~g & h & mask).bit_count())
            ky = ((gs & h).bit_count(), (gs & ~h & mask).bit_count(), (~gs & h & mask).bit_count())
            groups[(kx, ky)] += 1
    total = Fraction(0)
    for ((a11, a10, a01), (b11, b10, b01)), cnt in groups.items():
        a00 = ell - a11 - a10 - a01
        b00 = ell - b11 - b10 - b01
        total += (
            cnt
            * x.w00**a00 * x.w01**a01 * x.w10**a10 * x.w11**a11
            * y.w00**b00 * y.w01**b01 * y.w10**b10 * y.w11**b11
        )
    return total


def shift_type_sum(ell: int, x: WMatrix) -> Fraction:
    """Direct enumeration of sum over f of x^type(f, f o shift) on one l-cycle."""
    _check_ell(ell)
    mask = (1 << ell) - 1
    groups: Counter = Counter()
    for f in range(1 << ell):
        fs = _rot(f, ell)
        k11 = (f & fs).bit_count()
        k10 = (f & ~fs & mask).bit_count()
        k01 = (~f & fs & mask).bit_count()
        groups[(k11, k10, k01)] += 1
    total = Fraction(0)
    for (k11, k10, k01), cnt in groups.items():
        k00 = ell - k11 - k10 - k01
        total += cnt * x.w00**k00 * x.w01**k01 * x.w10**k10 * x.w11**k11
    return total


def block_gf(ell: int, u, v):
    """Closed form for the block-partition generating polynomial.

    Enumerates cyclic binary sequences with no (1,1) adjacency, weighting
    size-one blocks by u and size-two blocks by v:

        block_gf(l, u, v) = 2 * sum_i C(l, 2i) (u/2)^(l-2i) ((u/2)^2 + v)^i

    u and v may be rationals or polynomials; the result follows the richer
    operand type.
    """
    if ell < 1:
        raise ParameterError(f"cycle length must be >= 1, got {ell}")
    half = Fraction(1, 2)
    uh = u * half
    base = uh * uh + v
    total = 0
    for i in range(ell // 2 + 1):
        c = comb(ell, 2 * i)
        if c == 0:
            continue
        total = total + c * uh ** (ell - 2 * i) * base**i
    return 2 * total


def score_weight_poly(w: WMatrix) -> LaurentPoly:
    """The two-block weight v(z) = w00*w11*(z-1) + w01*w10*(1/z - 1)."""
    a = w.w00 * w.w11
    b = w.w01 * w.w10
    return LaurentPoly({1: a, -1: b, 0: -(a + b)})


def cycle_gf(ell: int, w: WMatrix) -> LaurentPoly:
    """Score/type generating function of one l-cycle, closed form.

    Equals ``cycle_gf_enum(ell, w)`` exactly for every l; computed as
    block_gf(l, u, v) with u the total weight and v the two-block weight.
    """
    if ell < 1:
        raise ParameterError(f"cycle length must be >= 1, got {ell}")
    out = block_gf(ell, LaurentPoly.const(w.total()), score_weight_poly(w))
    assert isinstance(out, LaurentPoly)
    return out


def perm_gf(ct: CycleType, w: WMatrix) -> LaurentPoly:
    """Generating function of a full permutation: product of its cycle factors."""
    out = LaurentPoly.one()
    for ell, t_ell in ct.items():
        out = out * cycle_gf(ell, w) ** t_ell
    return out


def nontrivial_gf(ct: CycleType, w: WMatrix) -> LaurentPoly:
    """Product of the cycle factors of length >= 2 only.

    With probability weights this is exactly the distribution of the score
    change, since fixed points contribute a constant factor of total weight 1.
    """
    out = LaurentPoly.one()
    for ell, t_ell in ct.items():
        if ell >= 2:
            out = out * cycle_gf(ell, w) ** t_ell
    return out


def pair_perm_gf_enum(tau, w: WMatrix) -> LaurentPoly:
    """Brute-force score/type generating function of an arbitrary pair permutation.

    Enumerates all 4^t labeled pairs on the full index set; cap t <= ENUM_CAP.
    """
    import numpy as np

    arr = np.asarray(tau, dtype=np.int64)
    t = arr.shape[0]
    if t > ENUM_CAP:
        raise CapExceededError(f"4^{t} labelings exceed cap 4^{ENUM_CAP}")
    if not np.array_equal(np.sort(arr), np.arange(t)):
        raise ParameterError("not a bijection on pair indices")
    mask = (1 << t) - 1
    order = [int(arr[e]) for e in range(t)]
    comp = [0] * (1 << t)
    for a in range(1 << t):
        comp[a] = sum(((a >> order[e]) & 1) << e for e in range(t))
    groups: Counter = Counter()
    for a in range(1 << t):
        at = comp[a]
        for b in range(1 << t):
            k11 = (a & b).bit_count()
            k10 = (a & ~b & mask).bit_count()
            k01 = (~a & b & mask).bit_count()
            dd = (at ^ b).bit_count() - (a ^ b).bit_count()
            groups[(k11, k10, k01, dd // 2)] += 1
    coeffs: Dict[int, Fraction] = {}
    for (k11, k10, k01, d), cnt in groups.items():
        k00 = t - k11 - k10 - k01
        q = cnt * w.w00**k00 * w.w01**k01 * w.w10**k10 * w.w11**k11
        coeffs[d] = coeffs.get(d, Fraction(0)) + q
    return LaurentPoly(coeffs)


def joint_pmf(ct: CycleType, p: PVec) -> BiPoly:
    """Exact joint law of (count of (1,1) pairs in nontrivial cycles, score change).

    Built by marking the (1,1) weight in every cycle factor of length >= 2;
    coefficient (m, d) is the probability of seeing m matched edges in the
    nontrivial region together with score change d.
    """
    p11, p10, p01, p00 = p.as_fractions()
    u = BiPoly({(1, 0): p11, (0, 0): p00 + p01 + p10})
    a = p00 * p11
    b = p01 * p10
    v = BiPoly({(1, 1): a, (1, 0): -a, (0, -1): b, (0, 0): -b})
    out = BiPoly.one()
    for ell, t_ell in ct.items():
        if ell >= 2:
            factor = block_gf(ell, u, v)
            assert isinstance(factor, BiPoly)
            out = out * factor**t_ell
    return out


def joint_enum(tau, p: PVec) -> Dict[Tuple[int, int, int], Fraction]:
    """Brute-force joint law of (total matches, nontrivial matches, score change).

    Enumerates all 4^t outcomes of a correlated pair on the index set of tau;
    cap t <= ENUM_CAP.  Keys are (m, m_nontrivial, d).
    """
    import numpy as np

    p11, p10, p01, p00 = p.as_fractions()
    arr = np.asarray(tau, dtype=np.int64)
    t = arr.shape[0]
    if t > ENUM_CAP:
        raise CapExceededError(f"4^{t} outcomes exceed cap 4^{ENUM_CAP}")
    if not np.array_equal(np.sort(arr), np.arange(t)):
        raise ParameterError("not a bijection on pair indices")
    mask = (1 << t) - 1
    moved = sum(1 << e for e in range(t) if arr[e] != e)
    order = [int(arr[e]) for e in range(t)]
    comp = [0] * (1 << t)
    for a in range(1 << t):
        comp[a] = sum(((a >> order[e]) & 1) << e for e in range(t))
    groups: Counter = Counter()
    for a in range(1 << t):
        at = comp[a]
        for b in range(1 << t):
            k11 = (a & b).bit_count()
            k10 = (a & ~b & mask).bit_count()
            k01 = (~a & b & mask).bit_count()
            mt = (a & b & moved).bit_count()
            dd = (at ^ b).bit_count() - (a ^ b).bit_count()
            groups[(k11, k10, k01, mt, dd // 2)] += 1
    out: Dict[Tuple[int, int, int], Fraction] = {}
    for (k11, k10, k01, mt, d), cnt in groups.items():
        k00 = t - k11 - k10 - k01
        q = cnt * p00**k00 * p01**k01 * p10**k10 * p11**k11
        key = (k11, mt, d)
        out[key] = out.get(key, Fraction(0)) + q
    return {k: v for k, v in out.items() if v}


def hyp_pgf(a: int, b: int, n: int) -> LaurentPoly:
    """PGF of the hypergeometric count: a draws without replacement from n items, b marked."""
    if a < 0 or b < 0 or n < 0:
        raise ParameterError("counts must be nonnegative")
    if a > n or b > n:
        raise ParameterError(f"need a <= n and b <= n, got a={a}, b={b}, n={n}")
    denom = comb(n, a)
    coeffs = {
        k: Fraction(comb(b, k) * comb(n - b, a - k), denom)
        for k in range(max(0, a + b - n), min(a, b) + 1)
    }
    return LaurentPoly(coeffs)


def bin_pgf(a: int, b: int, n: int) -> LaurentPoly:
    """PGF of the binomial count: a draws with replacement, marked fraction b/n."""
    if a < 0 or b < 0 or n < 1:
        raise ParameterError("need a, b >= 0 and n >= 1")
    if a > n or b > n:
        raise ParameterError(f"need a <= n and b <= n, got a={a}, b={b}, n={n}")
    q = Fraction(b, n)
    return LaurentPoly({0: 1 - q, 1: q}) ** a


def chernoff_tail(g: LaurentPoly, j: int, z1) -> Fraction:
    """Exponential-tilt bound on the lower tail: sum_{i<=j} [z^i]g <= z1^(-j) g(z1).

    Requires all coefficients nonnegative and 0 < z1 <= 1.
    """
    if not g.has_nonneg_coeffs():
        raise DomainError("tail bound requires nonnegative coefficients")
    z1 = Fraction(z1)
    if not 0 < z1 <= 1:
        raise DomainError(f"need 0 < z1 <= 1, got {z1}")
    return z1 ** (-j) * g.evaluate(z1)
