"""Corpus generation and the inequality-verification harness.

Each ``check_*`` function evaluates one inequality as a constant-estimation
experiment: it records one row per (function, parameter) case, reports the
largest ratio as ``C_emp``, and repeats the whole computation on the
lattice refined to h/2 to measure drift.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .exponents import ExponentPair, exponent_json, parse_exponent
from .grids import RadiusGrid
from .lattice import Ball, FunctionSpec, GridFunction, Lattice, ball_integral, ball_mask, sample
from .maximal import MaximalConfig, indicator_maximal_oracle_1d, maximal_function
from .norms import (
    _LocalNorms,
    amalgam_continuous,
    amalgam_discrete,
    default_radii,
    generalized_fofana_norm,
)
from .report import EXPERIMENTAL, FAIL, NOT_APPLICABLE, PASS, VACUOUS, CheckReport, Row
from .weights import WeightFunction, check_class, nakai_constant

PROFILES = ("smoke", "standard", "refinement")
SUITES = ("amalgam", "embeddings", "indicator", "fefferman-stein", "maximal")


@dataclass(frozen=True)
class Member:
    case_id: str
    spec: FunctionSpec
    lattice: Lattice

    def sample(self) -> GridFunction:
        return sample(self.spec, self.lattice)

    def to_json(self) -> dict:
        return {"case_id": self.case_id, "function": self.spec.to_json(), "lattice": self.lattice.to_json()}


@dataclass
class Corpus:
    seed: int
    profile: str
    members: list[Member] = field(default_factory=list)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def lattice(self) -> Lattice:
        return self.members[0].lattice

    def refined(self) -> Corpus:
        return Corpus(self.seed, self.profile,
                      [Member(m.case_id, m.spec, m.lattice.refined()) for m in self.members])

    def base(self) -> Corpus:
        """Members at the coarsest lattice only (drops the h/2 copies of a refinement corpus)."""
        h = max(m.lattice.h for m in self.members)
        return Corpus(self.seed, self.profile, [m for m in self.members if m.lattice.h == h])

    def to_json(self) -> dict:
        return {"seed": self.seed, "profile": self.profile, "members": [m.to_json() for m in self.members]}


def _member_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _origin(lattice: Lattice, shift: float = 0.0) -> list[float] | float:
    """A cell centre near ``shift`` along the first axis (and near 0 along the second)."""
    i = int(round((shift + lattice.L) / lattice.h - 0.5))
    i = min(max(i, 0), lattice.n - 1)
    j = lattice.n // 2
    c = lattice.center_of((i, j))
    return c[0] if lattice.d == 1 else [c[0], c[1]]


def _zero_center(d: int):
    return 0.0 if d == 1 else [0.0, 0.0]


def generate_corpus(seed: int, lattice: Lattice, profile: str = "standard",
                    alphas: Sequence[float] = (2.0,), n_random: int = 4) -> Corpus:
    """Deterministic test-function corpus.

    ``smoke``: 6 members; ``standard``: constants, single cells, balls,
    gaussians, power tails (one per alpha) and random steps;
    ``refinement``: the standard members at h and at h/2.
    """
    if profile not in PROFILES:
        raise ValueError(f"profile must be one of {PROFILES}, got {profile!r}")
    d, h, L = lattice.d, lattice.h, lattice.L
    zero = _zero_center(d)
    specs: list[tuple[str, FunctionSpec]] = []

    def add(case_id, kind, **params):
        specs.append((case_id, FunctionSpec(kind, params)))

    step_block = 8 * h
    if profile == "smoke":
        add("constant", "constant", c=1.0)
        add("cell-0", "indicator-ball", center=_origin(lattice), r0=h / 2)
        add("ball-1", "indicator-ball", center=zero, r0=min(1.0, L / 2))
        add("gauss-1", "gaussian", sigma=min(1.0, L / 4))
        add(f"tail-{alphas[0]:g}", "power-tail", alpha=float(alphas[0]), eps=0.5)
        add("step-0", "step-random", seed=_member_seed(seed, 0), block=step_block, support=L / 4)
    else:
        add("constant", "constant", c=1.0)
        add("cell-0", "indicator-ball", center=_origin(lattice), r0=h / 2)
        add("cell-off", "indicator-ball", center=_origin(lattice, L / 4), r0=h / 2)
        for r0 in (0.25, 0.5, 1.0, 2.0):
            if r0 <= L / 2:
                add(f"ball-{r0:g}", "indicator-ball", center=zero, r0=r0)
        for sigma in (0.5, 1.0, 2.0):
            if 4 * sigma <= L:
                add(f"gauss-{sigma:g}", "gaussian", sigma=sigma)
        for a in alphas:
            add(f"tail-{a:g}", "power-tail", alpha=float(a), eps=0.5)
        for k in range(n_random):
            add(f"step-{k}", "step-random", seed=_member_seed(seed, k), block=step_block, support=L / 4)
    members = [Member(cid, spec, lattice) for cid, spec in specs]
    if profile == "refinement":
        fine = lattice.refined()
        members += [Member(cid, spec, fine) for cid, spec in specs]
    return Corpus(seed, profile, members)


def random_corpus(seed: int, lattice: Lattice, count: int) -> Corpus:
    """``count`` randomly parameterized members of every kind except constants."""
    d, L = lattice.d, lattice.L
    members = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        kind = ("indicator-ball", "gaussian", "power-tail", "step-random")[i % 4]
        center = [float(x) for x in rng.uniform(-L / 2, L / 2, size=d)]
        center = center[0] if d == 1 else center
        if kind == "indicator-ball":
            params = {"center": center, "r0": float(rng.uniform(lattice.h, L / 2))}
        elif kind == "gaussian":
            params = {"center": center, "sigma": float(rng.uniform(0.1, L / 4)),
                      "amplitude": float(rng.uniform(-3, 3))}
        elif kind == "power-tail":
            params = {"alpha": float(rng.choice([1.0, 1.5, 2.0, 4.0])), "eps": float(rng.uniform(0.05, 1))}
        else:
            params = {"seed": _member_seed(seed, i),
                      "block": lattice.h * int(rng.integers(1, 16)),
                      "support": float(rng.uniform(lattice.h * 4, L))}
        members.append(Member(f"rand-{i}", FunctionSpec(kind, params), lattice))
    return Corpus(seed, "random", members)


# -- harness plumbing ---------------------------------------------------------


def _pmap(fn: Callable, items: Iterable, threads: int) -> list:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _drift(a: float, b: float) -> float:
    if a == b:
        return 0.0
    if not (math.isfinite(a) and math.isfinite(b)) or a == 0:
        return math.inf
    return abs(b - a) / abs(a)


def _refinement(stat: str, h: float, a: float, b: float) -> dict:
    return {"statistic": stat, "h": h, "c_h": a, "c_h2": b, "drift": _drift(a, b)}


def _spread(rows: list[Row]) -> float:
    vals = [row.ratio for row in rows]
    if not vals:
        return math.nan
    lo = min(vals)
    return max(vals) / lo if lo > 0 else math.inf


def _aligned_radii(corpus: Corpus, radii: RadiusGrid | None) -> RadiusGrid:
    lat = corpus.lattice
    return (radii or default_radii(lat)).aligned(lat.h)


def _t_grid(radii: RadiusGrid) -> RadiusGrid:
    if len(radii) >= 16:
        return radii
    return RadiusGrid.geometric(radii.radii[0], radii.radii[-1], 33)


def octave_radii(r_min: float, r_max: float, per_octave: int = 4) -> RadiusGrid:
    """Geometric grid between powers of two that contains every power of two in range."""
    lo = 2.0 ** math.floor(math.log2(r_min))
    hi = 2.0 ** math.ceil(math.log2(r_max))
    octaves = round(math.log2(hi / lo))
    return RadiusGrid.geometric(lo, hi, octaves * per_octave + 1)


# -- checks ---------------------------------------------------------------------


def check_norm_equivalence(corpus: Corpus, qp, radii: RadiusGrid | None = None, cap: float | None = None,
                           drift_bound: float = 0.1, threads: int = 1) -> CheckReport:
    """Rows ``_r||f||_{q,p} / (r^{d/p} _r||f||~_{q,p})`` over members and aligned radii."""
    corpus = corpus.base()
    qp = qp if isinstance(qp, ExponentPair) else ExponentPair(*qp)
    d = corpus.lattice.d
    cap = 4.0**d if cap is None else cap
    radii = _aligned_radii(corpus, radii)
    scale = float(d * qp.inv_p)

    def rows_for(m: Member) -> tuple[list[Row], int]:
        f = m.sample()
        local = _LocalNorms(f, qp.q)
        rows, skipped = [], 0
        for r in radii:
            cont = amalgam_continuous(f, r, qp, local)
            disc = amalgam_discrete(f, r, qp)
            rhs = r**scale * disc
            if cont == 0 and rhs == 0:
                skipped += 1
                continue
            ratio = cont / rhs if rhs > 0 else math.inf
            rows.append(Row(m.case_id, m.spec.describe(), r, cont, rhs, ratio))
        return rows, skipped

    def level(c: Corpus):
        out = _pmap(rows_for, c.members, threads)
        return [row for rows, _ in out for row in rows], sum(s for _, s in out)

    rows, skipped = level(corpus)
    rows2, _ = level(corpus.refined())
    report = CheckReport("amalgam-equivalence", rows, cap=cap, skipped=skipped)
    report.spread = _spread(rows)
    report.refinement = _refinement("spread", corpus.lattice.h, report.spread, _spread(rows2))
    for row in rows:
        row.passed = math.isfinite(row.ratio) and row.ratio > 0
    ok = report.spread <= cap and report.refinement["drift"] <= drift_bound
    report.status = PASS if ok else FAIL
    report.notes = {**qp.to_json(), "radii": radii.spec, "drift_bound": drift_bound}
    return report


def check_embeddings(corpus: Corpus, q1, q2, p1, p2, w: WeightFunction, radii: RadiusGrid | None = None,
                     cap: float = 100.0, drift_bound: float = 0.1, threads: int = 1,
                     t_grid: RadiusGrid | None = None) -> CheckReport:
    """Rows ``||f||_{(q1,p1)} / ||f||_{(q2,p1)}`` and ``||f||_{(q2,p2)} / ||f||_{(q2,p1)}``.

    Needs ``q1 <= q2 <= p1 <= p2`` and phi in G_{q2,p1}, which implies both
    class hypotheses.
    """
    corpus = corpus.base()
    q1, q2, p1, p2 = (parse_exponent(x) for x in (q1, q2, p1, p2))
    if not q1 <= q2 <= p1 <= p2:
        raise ValueError("need q1 <= q2 <= p1 <= p2")
    w = w.with_dimension(corpus.lattice.d)
    radii = radii or default_radii(corpus.lattice)
    report = CheckReport("embeddings", cap=cap)
    report.notes = {"q1": exponent_json(q1), "q2": exponent_json(q2), "p1": exponent_json(p1),
                    "p2": exponent_json(p2), "phi": w.to_json(), "radii": radii.spec}
    cls = check_class(w, q2, p1, t_grid or _t_grid(radii))
    report.notes["class"] = cls.to_json()
    if not cls.passed:
        report.status = VACUOUS
        return report

    def rows_for(m: Member) -> tuple[list[Row], int]:
        f = m.sample()
        if f.is_zero():
            return [], 2
        base = generalized_fofana_norm(f, (q2, p1), w, radii).value
        n_q = base if q1 == q2 else generalized_fofana_norm(f, (q1, p1), w, radii).value
        n_p = base if p1 == p2 else generalized_fofana_norm(f, (q2, p2), w, radii).value
        return [Row(m.case_id, m.spec.describe() + " q-embedding", None, n_q, base, n_q / base),
                Row(m.case_id, m.spec.describe() + " p-embedding", None, n_p, base, n_p / base)], 0

    def level(c: Corpus):
        out = _pmap(rows_for, c.members, threads)
        return [row for rows, _ in out for row in rows], sum(s for _, s in out)

    rows, report.skipped = level(corpus)
    rows2, _ = level(corpus.refined())
    report.rows = rows
    for row in rows:
        row.passed = row.ratio <= cap
    report.refinement = _refinement("c_emp", corpus.lattice.h, report.c_emp,
                                    max((r.ratio for r in rows2), default=math.nan))
    ok = report.c_emp <= cap and report.refinement["drift"] <= drift_bound
    report.status = PASS if ok else FAIL
    return report


def check_ball_indicator(w: WeightFunction, qp, r0_list: Sequence[float], radii: RadiusGrid,
                         lattice: Lattice, cap: float = 16.0, stability: float = 0.05,
                         t_grid: RadiusGrid | None = None, threads: int = 1) -> CheckReport:
    """Rows ``phi(r0) * ||chi_{B(0,r0)}||``; stable under radius-grid refinement and
    with bounded spread over ``r0_list``."""
    qp = qp if isinstance(qp, ExponentPair) else ExponentPair(*qp)
    w = w.with_dimension(lattice.d)
    report = CheckReport("ball-indicator", cap=cap)
    report.notes = {**qp.to_json(), "phi": w.to_json(), "radii": radii.spec, "stability": stability}
    cls = check_class(w, qp.q, qp.p, t_grid or _t_grid(radii))
    report.notes["class"] = cls.to_json()
    if not cls.passed:
        report.status = VACUOUS
        return report
    fine = radii.refined()
    zero = _zero_center(lattice.d)

    def row_for(r0: float) -> Row:
        chi = sample(FunctionSpec("indicator-ball", {"center": zero, "r0": r0}), lattice)
        norm = generalized_fofana_norm(chi, qp, w, radii).value
        norm2 = generalized_fofana_norm(chi, qp, w, fine).value
        phi = w(float(r0))
        row = Row(f"r0={r0:g}", f"chi_B(0,{r0:g})", float(r0), phi, norm, phi * norm)
        row.passed = _drift(norm, norm2) <= stability
        return row

    report.rows = _pmap(row_for, r0_list, threads)
    report.spread = _spread(report.rows)
    report.refinement = {"statistic": "radius-grid", "radii": radii.spec, "radii_refined": fine.spec}
    ok = report.spread <= cap and all(row.passed for row in report.rows)
    report.status = PASS if ok else FAIL
    return report


def _ball_indicator_maximal(lattice: Lattice, ball: Ball, cfg: MaximalConfig) -> np.ndarray:
    if lattice.d == 1:
        return indicator_maximal_oracle_1d(ball.center[0], ball.radius, lattice.centers())
    sl, mask = ball_mask(lattice, ball)
    chi = np.zeros(lattice.shape)
    chi[sl] = mask
    return maximal_function(GridFunction(lattice, chi), cfg).values


def check_fefferman_stein(corpus: Corpus, q, ball_list: Sequence[tuple], cfg: MaximalConfig | None = None,
                          cap: float = math.inf, drift_bound: float = 0.1, threads: int = 1) -> CheckReport:
    """Rows ``int_B (Mf)^q / int |f|^q M chi_B`` over members and balls."""
    corpus = corpus.base()
    q = parse_exponent(q)
    if not q > 1 or math.isinf(q):
        raise ValueError("q must satisfy 1 < q < inf")
    cfg = cfg or MaximalConfig()
    balls = [Ball(c, r) for c, r in ball_list]

    def level(c: Corpus):
        lat = c.lattice
        mchi = [_ball_indicator_maximal(lat, b, cfg) for b in balls]

        def rows_for(m: Member):
            f = m.sample()
            if f.is_zero():
                return [], len(balls)
            mf = maximal_function(f, cfg)
            fq = np.abs(f.values) ** q
            rows, skipped = [], 0
            for b, mc in zip(balls, mchi):
                lhs = ball_integral(mf, q, b)
                rhs = lat.cell_volume * math.fsum((fq * mc).ravel())
                if rhs == 0:
                    skipped += 1
                    continue
                rows.append(Row(m.case_id, f"{m.spec.describe()} B({_fmt_center(b.center)},{b.radius:g})",
                                b.radius, lhs, rhs, lhs / rhs))
            return rows, skipped

        out = _pmap(rows_for, c.members, threads)
        return [row for rows, _ in out for row in rows], sum(s for _, s in out)

    rows, skipped = level(corpus)
    rows2, _ = level(corpus.refined())
    report = CheckReport("fefferman-stein", rows, cap=cap, skipped=skipped)
    for row in rows:
        row.passed = math.isfinite(row.ratio) and row.ratio <= cap
    report.refinement = _refinement("c_emp", corpus.lattice.h, report.c_emp,
                                    max((r.ratio for r in rows2), default=math.nan))
    ok = (math.isfinite(report.c_emp) and report.c_emp <= cap
          and report.refinement["drift"] <= drift_bound)
    report.status = PASS if ok else FAIL
    report.notes = {"q": exponent_json(q), "balls": [[list(b.center), b.radius] for b in balls],
                    "maximal": cfg.describe()}
    return report


def _fmt_center(c: tuple) -> str:
    return ",".join(f"{x:g}" for x in c)


def check_maximal_boundedness(corpus: Corpus, qp, w: WeightFunction, radii: RadiusGrid | None = None,
                              cfg: MaximalConfig | None = None, cap: float = 100.0, drift_bound: float = 0.1,
                              threads: int = 1, experimental_q1: bool = False,
                              t_grid: RadiusGrid | None = None) -> CheckReport:
    """Rows ``||Mf||_{(L^q,L^p)^phi} / ||f||_{(L^q,L^p)^phi}``.

    Marked not-applicable when phi fails the class check or the integral
    condition diverges; q = 1 runs only with ``experimental_q1`` and then
    carries no pass semantics.
    """
    corpus = corpus.base()
    qp = qp if isinstance(qp, ExponentPair) else ExponentPair(*qp)
    if qp.q == 1 and not experimental_q1:
        raise ValueError("q must exceed 1 (use the experimental q=1 flag to run anyway)")
    w = w.with_dimension(corpus.lattice.d)
    cfg = cfg or MaximalConfig()
    radii = radii or default_radii(corpus.lattice)
    report = CheckReport("maximal-boundedness", cap=cap)
    report.notes = {**qp.to_json(), "phi": w.to_json(), "radii": radii.spec, "maximal": cfg.describe()}
    cls = check_class(w, qp.q, qp.p, t_grid or _t_grid(radii))
    report.notes["class"] = cls.to_json()
    if not cls.passed:
        report.status = NOT_APPLICABLE
        report.notes["reason"] = "phi fails the class check"
        return report
    nakai = nakai_constant(w, qp.q, qp.p, r_probes=radii, allow_q1=experimental_q1)
    report.notes["nakai"] = {"C_hat": nakai.c_hat, "divergent": nakai.divergent, "reason": nakai.reason}
    if nakai.divergent:
        report.status = NOT_APPLICABLE
        report.notes["reason"] = "integral condition diverges"
        return report

    def rows_for(m: Member):
        f = m.sample()
        if f.is_zero():
            return [], 1
        nf = generalized_fofana_norm(f, qp, w, radii)
        nm = generalized_fofana_norm(maximal_function(f, cfg), qp, w, radii)
        return [Row(m.case_id, m.spec.describe(), nm.argmax_r, nm.value, nf.value, nm.value / nf.value)], 0

    def level(c: Corpus):
        out = _pmap(rows_for, c.members, threads)
        return [row for rows, _ in out for row in rows], sum(s for _, s in out)

    rows, report.skipped = level(corpus)
    rows2, _ = level(corpus.refined())
    report.rows = rows
    for row in rows:
        row.passed = row.ratio <= cap
    report.refinement = _refinement("c_emp", corpus.lattice.h, report.c_emp,
                                    max((r.ratio for r in rows2), default=math.nan))
    if qp.q == 1:
        report.status = EXPERIMENTAL
    else:
        ok = report.c_emp <= cap and report.refinement["drift"] <= drift_bound
        report.status = PASS if ok else FAIL
    return report


# -- suite runner -----------------------------------------------------------------


@dataclass
class SuiteConfig:
    lattice: Lattice
    phi: WeightFunction
    q: float = 2.0
    p: float = 4.0
    seed: int = 0
    profile: str = "standard"
    threads: int = 1
    experimental_q1: bool = False

    def to_json(self) -> dict:
        return {"lattice": self.lattice.to_json(), "phi": self.phi.to_json(), "q": exponent_json(self.q),
                "p": exponent_json(self.p), "seed": self.seed, "profile": self.profile,
                "experimental_q1": self.experimental_q1}


def default_balls(lattice: Lattice) -> list[tuple]:
    d, L = lattice.d, lattice.L
    z = (0.0,) * d
    off = (L / 4,) + (0.0,) * (d - 1)
    return [(z, 0.25), (z, 1.0), (off, 0.5)]


def run_suites(suites: Sequence[str], cfg: SuiteConfig) -> list[CheckReport]:
    """Run the named suites (or ``all``) with one shared corpus."""
    if "all" in suites:
        suites = SUITES
    for s in suites:
        if s not in SUITES:
            raise ValueError(f"suite: unknown suite '{s}'")
    lat = cfg.lattice
    phi = cfg.phi.with_dimension(lat.d)
    alphas = (phi.alpha,) if phi.alpha is not None else (2.0,)
    profile = "standard" if cfg.profile == "refinement" else cfg.profile
    corpus = generate_corpus(cfg.seed, lat, profile, alphas=alphas)
    qp = ExponentPair(cfg.q, cfg.p)
    radii = default_radii(lat).aligned(lat.h)
    mcfg = MaximalConfig() if lat.d == 1 else MaximalConfig(octave_radii(lat.h, lat.L * 2 * math.sqrt(2)).aligned(lat.h))
    reports = []
    for suite in suites:
        if suite == "amalgam":
            reports.append(check_norm_equivalence(corpus, qp, radii, threads=cfg.threads))
        elif suite == "embeddings":
            reports.append(check_embeddings(corpus, 1.0, qp.q, qp.p, math.inf, phi, radii, threads=cfg.threads))
        elif suite == "indicator":
            r0s = [r for r in (0.25, 0.5, 1.0, 2.0, 4.0) if r <= lat.L / 2 and r >= 4 * lat.h]
            grid = octave_radii(4 * lat.h, 2 * lat.L)
            reports.append(check_ball_indicator(phi, qp, r0s, grid, lat, threads=cfg.threads))
        elif suite == "fefferman-stein":
            if qp.q == 1:
                report = CheckReport("fefferman-stein", status=NOT_APPLICABLE)
                report.notes = {"reason": "q = 1 is outside the range of the inequality"}
                reports.append(report)
            else:
                reports.append(check_fefferman_stein(corpus, qp.q, default_balls(lat), mcfg, threads=cfg.threads))
        elif suite == "maximal":
            if qp.q == 1 and not cfg.experimental_q1:
                report = CheckReport("maximal-boundedness", status=NOT_APPLICABLE)
                report.notes = {"reason": "q = 1 needs the experimental flag"}
                reports.append(report)
            else:
                reports.append(check_maximal_boundedness(corpus, qp, phi, radii, mcfg, threads=cfg.threads,
                                                         experimental_q1=cfg.experimental_q1))
    return reports
