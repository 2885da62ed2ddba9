"""Exhaustive alignment estimation over all n! permutations.

The scan works on a cached table of lifted permutations: row k holds the
pair permutation of the k-th permutation in lexicographic order.  Hamming
distances against a reference labeling reduce to one gather over the
smaller of the reference's edge set and non-edge set, so a full scan at
n = 9 touches a few million bytes instead of recomputing every relabeling.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .errors import CapExceededError, ParameterError
from .model import Graph, intersection, pair_array, pair_count
from .perms import DEFAULT_ENUM_CAP, Permutation, lex_rank


@functools.lru_cache(maxsize=3)
def _lex_perm_matrix(n: int) -> np.ndarray:
    """All permutations of [n] in lexicographic order, one per row (int8)."""
    if n == 1:
        return np.zeros((1, 1), dtype=np.int8)
    prev = _lex_perm_matrix(n - 1)
    block = prev.shape[0]
    out = np.empty((n * block, n), dtype=np.int8)
    rest_template = np.arange(n, dtype=np.int8)
    for first in range(n):
        rest = np.delete(rest_template, first)
        seg = out[first * block : (first + 1) * block]
        seg[:, 0] = first
        seg[:, 1:] = rest[prev]
    return out


@functools.lru_cache(maxsize=3)
def _lift_table(n: int) -> np.ndarray:
    """Row k is the lifted pair permutation of the k-th permutation (int8)."""
    perms = _lex_perm_matrix(n)
    ii, jj = pair_array(n)
    pidx = np.zeros((n, n), dtype=np.int8)
    t = pair_count(n)
    pidx[ii, jj] = np.arange(t, dtype=np.int8)
    pidx[jj, ii] = pidx[ii, jj]
    out = np.empty((perms.shape[0], t), dtype=np.int8)
    chunk = 65536
    for lo in range(0, perms.shape[0], chunk):
        hi = min(lo + chunk, perms.shape[0])
        out[lo:hi] = pidx[perms[lo:hi][:, ii], perms[lo:hi][:, jj]]
    return out


def _require_cap(n: int, cap: int) -> None:
    if n > cap:
        raise CapExceededError(
            f"exhaustive scan over {n}! permutations exceeds cap {cap}"
        )


def hamming_scan(xa: np.ndarray, xb: np.ndarray, n: int, cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    """Hamming distance of (xa o lift(pi), xb) for every pi, in lexicographic order.

    xa and xb are 0/1 pair-label vectors.  Row 0 is the identity.
    """
    _require_cap(n, cap)
    t = pair_count(n)
    if xa.shape != (t,) or xb.shape != (t,):
        raise ParameterError("label vectors do not match n")
    lifted = _lift_table(n)
    ea = int(xa.sum())
    eb = int(xb.sum())
    edge_cols = np.flatnonzero(xb)
    if 2 * len(edge_cols) <= t:
        cols, direct = edge_cols, True
    else:
        cols, direct = np.flatnonzero(xb == 0), False
    if len(cols):
        hits = xa[lifted[:, cols]].sum(axis=1, dtype=np.int32)
    else:
        hits = np.zeros(lifted.shape[0], dtype=np.int32)
    mu11 = hits if direct else ea - hits
    return ea + eb - 2 * mu11


@dataclass(frozen=True)
class AlignmentResult:
    """Outcome of one exhaustive alignment scan."""

    best_perm: Permutation
    min_delta_hamming: int
    tie_count: int
    q_size: int
    strict_success: bool
    eta: Fraction


def _alignment_from_deltas(deltas: np.ndarray, n: int, planted: Permutation | None) -> AlignmentResult:
    dmin = int(deltas.min())
    best_idx = int(np.argmin(deltas))  # first minimizer in lexicographic order
    ties = int((deltas == dmin).sum())
    best = Permutation(tuple(int(x) for x in _lex_perm_matrix(n)[best_idx]))
    if planted is None:
        return AlignmentResult(
            best_perm=best,
            min_delta_hamming=dmin,
            tie_count=ties,
            q_size=ties,
            strict_success=False,
            eta=Fraction(0),
        )
    if planted.n != n:
        raise ParameterError("planted permutation does not match n")
    planted_idx = lex_rank(planted.images)
    score = int(deltas[planted_idx])
    q_size = int((deltas <= score).sum())
    strict = score == dmin and ties == 1
    eta = Fraction(1, q_size) if score == dmin else Fraction(0)
    return AlignmentResult(
        best_perm=best,
        min_delta_hamming=dmin,
        tie_count=ties,
        q_size=q_size,
        strict_success=bool(strict),
        eta=eta,
    )


def map_estimate(
    gc: Graph, gb: Graph, planted: Permutation | None = None, cap: int = DEFAULT_ENUM_CAP
) -> AlignmentResult:
    """Best alignment of gc to gb by exhaustive scan of all n! relabelings.

    Minimizes the Hamming distance between the relabeled gc and gb; the
    winner is the first minimizer in lexicographic order.  When the planted
    permutation is supplied, the result also reports whether it was the
    unique minimizer (strict success), the number of permutations scoring
    at least as well as it (q_size), and the uniform-tie-break success
    probability eta (1/q_size when the planted score is minimal, else 0).
    Without it, q_size is the count of minimizers.
    """
    if gc.n != gb.n:
        raise ParameterError(f"vertex counts differ: {gc.n} vs {gb.n}")
    deltas = hamming_scan(gc.bits, gb.bits, gc.n, cap=cap)
    return _alignment_from_deltas(deltas, gc.n, planted)


def q_set_size(ga: Graph, gb: Graph, cap: int = DEFAULT_ENUM_CAP) -> int:
    """Number of permutations aligning ga to gb at least as well as the identity."""
    if ga.n != gb.n:
        raise ParameterError(f"vertex counts differ: {ga.n} vs {gb.n}")
    deltas = hamming_scan(ga.bits, gb.bits, ga.n, cap=cap)
    return int((deltas <= deltas[0]).sum())


def automorphism_count(g: Graph, cap: int = DEFAULT_ENUM_CAP) -> int:
    """Size of the automorphism group, by exhaustive scan."""
    deltas = hamming_scan(g.bits, g.bits, g.n, cap=cap)
    return int((deltas == 0).sum())


def intersection_aut_check(ga: Graph, gb: Graph, cap: int = DEFAULT_ENUM_CAP) -> bool:
    """Every automorphism of ga AND gb must align ga to gb at least as well as id.

    Returns True when the instance satisfies that; False indicates an
    implementation bug, not a property of the input.
    """
    if ga.n != gb.n:
        raise ParameterError(f"vertex counts differ: {ga.n} vs {gb.n}")
    gw = intersection(ga, gb)
    aut_mask = hamming_scan(gw.bits, gw.bits, ga.n, cap=cap) == 0
    deltas = hamming_scan(ga.bits, gb.bits, ga.n, cap=cap)
    return bool((deltas[aut_mask] <= deltas[0]).all())


def isolated_count(g: Graph) -> int:
    """Number of degree-zero vertices."""
    return int((g.degrees() == 0).sum())


def scan_size(n: int) -> int:
    """Number of permutations one scan covers."""
    return factorial(n)
