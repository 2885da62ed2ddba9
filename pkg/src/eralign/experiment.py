"""Reproducible Monte Carlo experiments around the recovery threshold.

A sweep is a grid of joint-label distributions; each cell runs a fixed
number of alignment trials.  Trial t of a cell uses seed (master + t) mod
2^64, and every trial is a pure function of (n, p, seed), so serial and
parallel runs produce byte-identical CSV output.
"""

from __future__ import annotations

import csv
import json
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import log
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from . import genfunc
from .errors import ConfigError, ParameterError
from .estimator import _alignment_from_deltas, hamming_scan
from .genfunc import (
    WMatrix,
    bin_pgf,
    cycle_gf,
    cycle_gf_enum,
    double_type_sum,
    hyp_pgf,
    shift_type_sum,
)
from .model import Graph, PVec, anonymize, rng_from_seed, _sample_bits
from .perms import DEFAULT_ENUM_CAP, Permutation, lex_rank

CSV_HEADER = "n,p11,p10,p01,p00,trials,strict_rate,mean_eta,mean_q,mean_aut,seed"

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one alignment trial."""

    cell: str
    seed: int
    strict_success: bool
    q_size: int
    eta: Fraction
    min_delta_nonid: int
    m_intersection: int
    aut_intersection: int
    wall_time: float


@dataclass(frozen=True)
class SweepCell:
    cell_id: str
    p: PVec


@dataclass(frozen=True)
class CGrid:
    """Cells with p11 = c * ln(n)/n, symmetric noise p01 = p10, rest on p00."""

    c: Tuple[float, ...]
    noise: float = 0.0

    def cells(self, n: int) -> List[SweepCell]:
        out = []
        for c in self.c:
            cell_id = f"c={c:g}"
            p11 = c * log(n) / n
            p00 = 1.0 - p11 - 2 * self.noise
            try:
                out.append(SweepCell(cell_id, PVec(p11, self.noise, self.noise, p00)))
            except ParameterError as exc:
                raise ConfigError(f"grid cell {cell_id!r} is invalid: {exc}") from exc
        return out


@dataclass(frozen=True)
class ExplicitGrid:
    """Cells given directly as (p11, p10, p01, p00) tuples."""

    cells_spec: Tuple[Tuple[float, float, float, float], ...]

    def cells(self, n: int) -> List[SweepCell]:
        out = []
        for k, cell in enumerate(self.cells_spec):
            cell_id = f"p[{k}]"
            try:
                out.append(SweepCell(cell_id, PVec(*cell)))
            except (ParameterError, TypeError) as exc:
                raise ConfigError(f"grid cell {cell_id!r} is invalid: {exc}") from exc
        return out


@dataclass(frozen=True)
class SubsamplingGrid:
    """Product grid over parent density r and retention rates sa, sb."""

    r: Tuple[float, ...]
    sa: Tuple[float, ...]
    sb: Tuple[float, ...]

    def cells(self, n: int) -> List[SweepCell]:
        from .model import SubsamplingParams, subsampling_to_pvec

        out = []
        for r in self.r:
            for sa in self.sa:
                for sb in self.sb:
                    cell_id = f"r={r:g},sa={sa:g},sb={sb:g}"
                    try:
                        out.append(
                            SweepCell(cell_id, subsampling_to_pvec(SubsamplingParams(r, sa, sb)))
                        )
                    except ParameterError as exc:
                        raise ConfigError(f"grid cell {cell_id!r} is invalid: {exc}") from exc
        return out


GridSpec = Union[CGrid, ExplicitGrid, SubsamplingGrid]


@dataclass(frozen=True)
class SweepConfig:
    n: int
    trials: int
    seed: int
    grid: GridSpec
    out: Optional[str] = None
    threads: int = 1
    cap: int = DEFAULT_ENUM_CAP

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")

    def cells(self) -> List[SweepCell]:
        return self.grid.cells(self.n)

    @classmethod
    def from_dict(cls, d: Dict) -> "SweepConfig":
        try:
            grid_spec = d["grid"]
            kind = grid_spec["kind"]
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"config missing grid.kind: {exc}") from exc
        grid: GridSpec
        if kind == "c_grid":
            grid = CGrid(tuple(grid_spec["c"]), float(grid_spec.get("noise", 0.0)))
        elif kind == "pvec":
            grid = ExplicitGrid(tuple(tuple(cell) for cell in grid_spec["cells"]))
        elif kind == "subsampling":
            grid = SubsamplingGrid(
                tuple(grid_spec["r"]), tuple(grid_spec["sa"]), tuple(grid_spec["sb"])
            )
        else:
            raise ConfigError(f"unknown grid kind {kind!r}")
        try:
            return cls(
                n=int(d["n"]),
                trials=int(d["trials"]),
                seed=int(d.get("seed", 0)),
                grid=grid,
                out=d.get("out"),
                threads=int(d.get("threads", 1)),
                cap=int(d.get("cap", DEFAULT_ENUM_CAP)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed sweep config: {exc}") from exc

    @classmethod
    def from_json_file(cls, path) -> "SweepConfig":
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc


def run_trial(n: int, p: PVec, seed: int, cap: int = DEFAULT_ENUM_CAP, cell_id: str = "") -> TrialResult:
    """One alignment trial: sample a pair, anonymize, scan, score.

    The trial generator first draws the pair labels (so the graphs match
    ``sample_pair(n, p, seed)`` exactly) and then the planted permutation by
    Fisher-Yates from the same stream.
    """
    t0 = time.perf_counter()
    rng = rng_from_seed(seed)
    ga_bits, gb_bits = _sample_bits(n, p, rng)
    ga = Graph(n, ga_bits)
    gb = Graph(n, gb_bits)
    pi = Permutation.random(n, rng)
    gc = anonymize(ga, pi)
    deltas = hamming_scan(gc.bits, gb.bits, n, cap=cap)
    res = _alignment_from_deltas(deltas, n, pi)
    planted_score = int(deltas[lex_rank(pi.images)])
    if len(deltas) > 1:
        two = np.partition(deltas, 1)[:2]
        dmin = int(two[0])
        if planted_score == dmin and res.tie_count == 1:
            min_other = int(two[1])
        else:
            min_other = dmin
        min_delta_nonid = (min_other - planted_score) // 2
    else:
        min_delta_nonid = 0
    gw_bits = ga_bits & gb_bits
    m = int(gw_bits.sum())
    if np.array_equal(ga_bits, gb_bits):
        # then ga AND gb = ga and the scan already visited every relabeling of it
        aut = int((deltas == 0).sum())
    else:
        aut = int((hamming_scan(gw_bits, gw_bits, n, cap=cap) == 0).sum())
    return TrialResult(
        cell=cell_id,
        seed=seed,
        strict_success=res.strict_success,
        q_size=res.q_size,
        eta=res.eta,
        min_delta_nonid=min_delta_nonid,
        m_intersection=m,
        aut_intersection=aut,
        wall_time=time.perf_counter() - t0,
    )


@dataclass(frozen=True)
class SweepResult:
    rows: Tuple[Dict, ...]
    csv_text: str
    path: Optional[str]
    trial_results: Tuple[Tuple[TrialResult, ...], ...]


def run_sweep(cfg: SweepConfig) -> SweepResult:
    """Run every cell of the grid and write the aggregate CSV.

    Deterministic for a fixed config and master seed, independent of the
    thread count: results are gathered in (cell, trial) order before any
    aggregation.
    """
    cells = cfg.cells()
    results: List[List[Optional[TrialResult]]] = [[None] * cfg.trials for _ in cells]

    def work(ci: int, ti: int) -> TrialResult:
        cell = cells[ci]
        return run_trial(
            cfg.n, cell.p, (cfg.seed + ti) & _MASK64, cap=cfg.cap, cell_id=cell.cell_id
        )

    tasks = [(ci, ti) for ci in range(len(cells)) for ti in range(cfg.trials)]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
            futures = [ex.submit(work, ci, ti) for ci, ti in tasks]
            for (ci, ti), fut in zip(tasks, futures):
                results[ci][ti] = fut.result()
    else:
        for ci, ti in tasks:
            results[ci][ti] = work(ci, ti)

    rows: List[Dict] = []
    for cell, trs in zip(cells, results):
        trials = cfg.trials
        strict_rate = Fraction(sum(1 for tr in trs if tr.strict_success), trials)
        mean_eta = sum((tr.eta for tr in trs), Fraction(0)) / trials
        mean_q = Fraction(sum(tr.q_size for tr in trs), trials)
        mean_aut = Fraction(sum(tr.aut_intersection for tr in trs), trials)
        p11, p10, p01, p00 = cell.p.as_floats()
        rows.append(
            {
                "cell": cell.cell_id,
                "n": cfg.n,
                "p11": p11,
                "p10": p10,
                "p01": p01,
                "p00": p00,
                "trials": trials,
                "strict_rate": float(strict_rate),
                "mean_eta": float(mean_eta),
                "mean_q": float(mean_q),
                "mean_aut": float(mean_aut),
                "seed": cfg.seed,
            }
        )

    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r['n']},{r['p11']!r},{r['p10']!r},{r['p01']!r},{r['p00']!r},"
            f"{r['trials']},{r['strict_rate']!r},{r['mean_eta']!r},{r['mean_q']!r},"
            f"{r['mean_aut']!r},{r['seed']}"
        )
    csv_text = "\n".join(lines) + "\n"
    path = None
    if cfg.out:
        path = str(cfg.out)
        with open(path, "w", newline="") as fh:
            fh.write(csv_text)
    return SweepResult(
        rows=tuple(rows),
        csv_text=csv_text,
        path=path,
        trial_results=tuple(tuple(trs) for trs in results),
    )


# ---------------------------------------------------------------------------
# SVG emission

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_VIEW_W, _VIEW_H = 800, 600
_ML, _MR, _MT, _MB = 70, 150, 40, 60


def _parse_sweep_csv(path) -> List[Dict]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"line 1: empty CSV {path}")
        if [h.strip() for h in header] != CSV_HEADER.split(","):
            raise ConfigError(f"line 1: header mismatch, expected {CSV_HEADER!r}")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or (len(rec) == 1 and not rec[0].strip()):
                continue
            if len(rec) != 11:
                raise ConfigError(f"line {lineno}: expected 11 fields, got {len(rec)}")
            try:
                rows.append(
                    {
                        "n": int(rec[0]),
                        "p11": float(rec[1]),
                        "trials": int(rec[5]),
                        "strict_rate": float(rec[6]),
                    }
                )
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: {exc}") from exc
    return rows


def emit_plot(csv_path, out_path) -> str:
    """Render a sweep CSV as a self-contained SVG threshold plot.

    x is p11 * n / ln(n) (so the predicted threshold sits at x = 1, marked
    by a dashed reference line), y is the strict recovery rate, one
    polyline per n.
    """
    rows = _parse_sweep_csv(csv_path)
    pts_by_n: Dict[int, List[Tuple[float, float]]] = {}
    for r in rows:
        x = r["p11"] * r["n"] / log(r["n"])
        pts_by_n.setdefault(r["n"], []).append((x, r["strict_rate"]))

    xs = [x for pts in pts_by_n.values() for x, _ in pts] + [1.0]
    x_lo, x_hi = min(xs), max(xs)
    if x_hi - x_lo < 1e-9:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    pad = 0.05 * (x_hi - x_lo)
    x_lo, x_hi = x_lo - pad, x_hi + pad
    if not rows:
        x_lo, x_hi = 0.0, 2.0

    w_in = _VIEW_W - _ML - _MR
    h_in = _VIEW_H - _MT - _MB

    def sx(x: float) -> float:
        return _ML + (x - x_lo) / (x_hi - x_lo) * w_in

    def sy(y: float) -> float:
        return _MT + (1.0 - y) * h_in

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_VIEW_W} {_VIEW_H}" '
        f'width="{_VIEW_W}" height="{_VIEW_H}">',
        f'<rect x="0" y="0" width="{_VIEW_W}" height="{_VIEW_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{w_in}" height="{h_in}" fill="none" '
        f'stroke="#333" stroke-width="1"/>',
    ]
    # axes ticks
    for k in range(5):
        yv = k / 4
        y = sy(yv)
        parts.append(
            f'<line x1="{_ML - 5}" y1="{y:.1f}" x2="{_ML}" y2="{y:.1f}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{_ML - 10}" y="{y + 4:.1f}" text-anchor="end" font-size="12">{yv:.2f}</text>'
        )
    for k in range(6):
        xv = x_lo + k * (x_hi - x_lo) / 5
        x = sx(xv)
        parts.append(
            f'<line x1="{x:.1f}" y1="{_MT + h_in}" x2="{x:.1f}" y2="{_MT + h_in + 5}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{x:.1f}" y="{_MT + h_in + 20}" text-anchor="middle" font-size="12">{xv:.2f}</text>'
        )
    parts.append(
        f'<text x="{_ML + w_in / 2:.1f}" y="{_VIEW_H - 15}" text-anchor="middle" '
        f'font-size="14">p11 &#183; n / ln n</text>'
    )
    parts.append(
        f'<text x="20" y="{_MT + h_in / 2:.1f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 20 {_MT + h_in / 2:.1f})">strict recovery rate</text>'
    )
    # threshold reference
    xr = sx(1.0)
    parts.append(
        f'<line class="threshold-ref" x1="{xr:.1f}" y1="{_MT}" x2="{xr:.1f}" '
        f'y2="{_MT + h_in}" stroke="#d62728" stroke-width="1" stroke-dasharray="6 4"/>'
    )
    parts.append(
        f'<text x="{xr + 4:.1f}" y="{_MT + 14}" font-size="12" fill="#d62728">x=1</text>'
    )
    # data
    legend_y = _MT + 10
    for idx, n in enumerate(sorted(pts_by_n)):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = sorted(pts_by_n[n])
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        if len(pts) > 1:
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>'
            )
        for x, y in pts:
            parts.append(
                f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3.5" fill="{color}"/>'
            )
        lx = _VIEW_W - _MR + 15
        parts.append(
            f'<line x1="{lx}" y1="{legend_y}" x2="{lx + 25}" y2="{legend_y}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{lx + 32}" y="{legend_y + 4}" font-size="12">n={n}</text>'
        )
        legend_y += 18
    parts.append("</svg>")
    svg = "\n".join(parts) + "\n"
    with open(out_path, "w") as fh:
        fh.write(svg)
    return svg


# ---------------------------------------------------------------------------
# Generating-function verification suite

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class VerifyReport:
    checks: Tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> List[str]:
        return [
            f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f"  ({c.detail})" if c.detail else "")
            for c in self.checks
        ]


def _random_wmatrix(rnd: random.Random) -> WMatrix:
    return WMatrix(
        *(Fraction(rnd.randint(1, 9), rnd.randint(1, 9)) for _ in range(4))
    )


def verify_gf(depth: int = 8, block_impl=None) -> VerifyReport:
    """Run the generating-function identity and inequality suites up to `depth`.

    `block_impl` substitutes the block-partition closed form in the checks
    that exercise it (used by mutation tests to confirm a broken form is
    caught and named).
    """
    if not 1 <= depth <= 8:
        raise ParameterError(f"depth must be in [1, 8], got {depth}")
    block = block_impl or genfunc.block_gf
    rnd = random.Random(0x5EED5)
    checks: List[CheckResult] = []

    def run_check(name, fn):
        try:
            detail = fn()
            checks.append(CheckResult(name, True, detail or ""))
        except AssertionError as exc:
            checks.append(CheckResult(name, False, str(exc)))

    def closed_vs_enum():
        for ell in range(1, depth + 1):
            for _ in range(3):
                w = _random_wmatrix(rnd)
                got = cycle_gf(ell, w)
                want = cycle_gf_enum(ell, w)
                assert got == want, f"cycle length {ell}: closed form != enumeration"
        return f"lengths 1..{depth}"

    def double_vs_shift():
        for ell in range(1, depth + 1):
            x, y = _random_wmatrix(rnd), _random_wmatrix(rnd)
            lhs = double_type_sum(ell, x, y)
            rhs = shift_type_sum(ell, x.matmul_transpose(y))
            assert lhs == rhs, f"cycle length {ell}: pair sum != product-matrix sum"
        return f"lengths 1..{depth}"

    def shift_vs_block():
        for ell in range(1, depth + 1):
            x = _random_wmatrix(rnd)
            lhs = shift_type_sum(ell, x)
            rhs = block(ell, x.trace, -x.det)
            assert lhs == rhs, f"cycle length {ell}: shift-type sum != block closed form"
        return f"lengths 1..{depth}"

    def reweight_equiv():
        for ell in range(1, depth + 1):
            x, y = _random_wmatrix(rnd), _random_wmatrix(rnd)
            z = (y.w01 * y.w10) / (y.w00 * y.w11)
            lhs = cycle_gf(ell, x.hadamard(y)).evaluate(z)
            rhs = double_type_sum(ell, x, y)
            assert lhs == rhs, f"cycle length {ell}: reweighted evaluation != pair sum"
        return f"lengths 1..{depth}"

    def two_cycle_domination():
        zs = [Fraction(1, 16), Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3), Fraction(4)]
        for ell in range(2, depth + 1):
            for _ in range(3):
                w = _random_wmatrix(rnd)
                a2 = cycle_gf(2, w)
                al = cycle_gf(ell, w)
                for z in zs:
                    lhs = al.evaluate(z)
                    rhs = a2.evaluate(z)
                    assert lhs >= 0 and rhs >= 0
                    assert lhs**2 <= rhs**ell, (
                        f"cycle length {ell} at z={z}: single-cycle value exceeds "
                        f"two-cycle power"
                    )
        return f"lengths 2..{depth}, 7-point z grid"

    def hyp_vs_bin():
        zs = [Fraction(1, 8), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(8)]
        top = 10
        for m in range(1, top + 1):
            for a in range(m + 1):
                for b in range(m + 1):
                    h = hyp_pgf(a, b, m)
                    g = bin_pgf(a, b, m)
                    for z in zs:
                        assert h.evaluate(z) <= g.evaluate(z), (
                            f"Hyp({a},{b},{m}) > Bin at z={z}"
                        )
        return f"all a,b <= n <= {top}, 5-point z grid"

    run_check("cycle-closed-vs-enum", closed_vs_enum)
    run_check("double-type-vs-shift-type", double_vs_shift)
    run_check("shift-type-vs-block", shift_vs_block)
    run_check("reweight-equivalence", reweight_equiv)
    run_check("two-cycle-domination", two_cycle_domination)
    run_check("hyp-vs-bin", hyp_vs_bin)
    return VerifyReport(tuple(checks))
