"""Centred Hardy-Littlewood maximal operator on grid functions.

Averages use the discrete cell count of each ball (on the infinite lattice,
with f = 0 outside the box) as denominator, and radius 0 (the cell itself)
always enters the maximum, so ``M c = c`` and ``Mf >= |f|`` hold exactly.

Two evaluation paths:

* ``naive``: direct enumeration of ball cells, exact discrete ball maximal
  function.
* ``prefix-cube``: O(1) cube averages from a summed-area table over the
  inscribed and circumscribed cubes of each ball. This is a different
  operator (``M_cube``); :func:`compare_methods` measures how far apart the
  two are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grids import RadiusGrid
from .lattice import GridFunction, Lattice, ball_cell_count, sorted_offsets
from .report import FAIL, PASS, CheckReport, Row

METHODS = ("naive", "prefix-cube")


@dataclass(frozen=True)
class MaximalConfig:
    """``radii=None`` means every multiple of h up to the lattice diameter."""

    radii: RadiusGrid | None = None
    method: str = "naive"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")

    def cell_radii(self, lattice: Lattice) -> np.ndarray:
        """Radii in cell units, capped at the lattice diameter ``2 L sqrt(d)``."""
        cap = lattice.n * math.sqrt(lattice.d)
        if self.radii is None:
            rho = np.arange(1, math.floor(cap) + 1, dtype=float)
        else:
            rho = np.array([lattice.radius_cells(r) for r in self.radii])
            rho = rho[rho <= cap * (1 + 1e-12)]
        if self.method == "prefix-cube" and np.any(rho != np.round(rho)):
            raise ValueError("prefix-cube needs radii that are multiples of h")
        return rho

    def describe(self) -> str:
        return f"{self.method}:{'all-aligned' if self.radii is None else self.radii.spec}"


def _naive(f: GridFunction, rho: np.ndarray, keep: bool):
    d = f.lattice.d
    absf = np.ascontiguousarray(np.abs(f.as2d()))
    if rho.size == 0:
        return absf.copy(), np.zeros((0,) + absf.shape), np.zeros(0, dtype=np.int64)
    oy, ox, s = sorted_offsets(float(rho.max()), d)
    ends = np.array([ball_cell_count(r, d) for r in rho], dtype=np.int64)
    assert np.all(ends <= len(s))
    out, avgs = _kernels.maximal_naive(absf, oy, ox, ends, keep)
    return out, avgs, ends


def _cube_sides(rho: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    outer = np.round(rho).astype(np.int64)
    inner = np.floor(rho / math.sqrt(d) + 1e-12).astype(np.int64)
    return inner, outer


def _cubes(f: GridFunction, rho: np.ndarray, keep: bool):
    absf = np.ascontiguousarray(np.abs(f.as2d()))
    hi, lo = _kernels.table_prefix(absf)
    inner, outer = _cube_sides(rho, f.lattice.d)
    return _kernels.maximal_cubes(absf, hi, lo, inner, outer, f.lattice.d, keep)


def maximal_function(f: GridFunction, cfg: MaximalConfig | None = None) -> GridFunction:
    cfg = cfg or MaximalConfig()
    rho = cfg.cell_radii(f.lattice)
    if cfg.method == "naive":
        out = _naive(f, rho, False)[0]
    else:
        out = _cubes(f, rho, False)[0]
    return GridFunction(f.lattice, out.reshape(f.lattice.shape))


def indicator_maximal_oracle_1d(center: float, r: float, x):
    """Continuum ``M chi_{B(center, r)}(x)`` on the real line.

    For ``t = |x - center| >= r`` the average over ``B(x, s)`` is
    ``(s - t + r) / (2 s)`` on ``t - r <= s <= t + r`` and ``r / s`` beyond;
    the maximum is at ``s = t + r``.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    t = np.abs(np.asarray(x, dtype=float) - center)
    out = np.where(t < r, 1.0, r / (t + r))
    return float(out) if out.ndim == 0 else out


def pointwise_properties_check(f: GridFunction, g: GridFunction, cfg: MaximalConfig | None = None,
                               c: float = -2.0, rel_tol: float = 1e-12) -> CheckReport:
    """Cellwise ``Mf >= |f|``, ``M(f+g) <= Mf + Mg`` and ``M(cf) = |c| Mf``."""
    if f.lattice != g.lattice:
        raise ValueError("f and g must share a lattice")
    cfg = cfg or MaximalConfig()
    mf = maximal_function(f, cfg).values
    mg = maximal_function(g, cfg).values
    mfg = maximal_function(f + g, cfg).values
    mcf = maximal_function(c * f, cfg).values
    report = CheckReport("maximal-pointwise", cap=1 + rel_tol)

    def worst(case, lhs, rhs, bound):
        nz = rhs > 0
        if not np.any(nz):
            ok = bool(np.all(lhs == 0))
            if not ok:
                report.rows.append(Row(case, "", None, float(lhs.max()), 0.0, math.inf, False))
            else:
                report.skipped += 1
            return
        ratio = np.where(nz, lhs / np.where(nz, rhs, 1.0), 0.0)
        k = int(np.argmax(ratio))
        bad = np.any(lhs[~nz] != 0)
        r = float(ratio.flat[k])
        report.rows.append(Row(case, f"cell={k}", None, float(lhs.flat[k]), float(rhs.flat[k]), r,
                               r <= bound and not bad))

    worst("|f| <= Mf", np.abs(f.values), mf, 1.0)
    worst("M(f+g) <= Mf+Mg", mfg, mf + mg, 1 + rel_tol)
    worst("M(cf) <= |c|Mf", mcf, abs(c) * mf, 1 + rel_tol)
    worst("|c|Mf <= M(cf)", abs(c) * mf, mcf, 1 + rel_tol)
    report.status = PASS if all(row.passed for row in report.rows) else FAIL
    return report


def compare_methods(f: GridFunction, cfg: MaximalConfig | None = None, rel_tol: float = 1e-12) -> CheckReport:
    """Cross-validate the ball maximal function against ``M_cube``.

    Per radius, the ball average must lie in the sandwich
    ``avg_in * N_in / N_ball <= avg_ball <= avg_out * N_out / N_ball``;
    globally ``M`` and ``M_cube`` must agree up to ``K = max_r N_out / N_in``.
    """
    cfg = cfg or MaximalConfig()
    lat = f.lattice
    rho = MaximalConfig(cfg.radii, "prefix-cube").cell_radii(lat)
    m_ball, ball_avgs, _ = _naive(f, rho, True)
    m_cube, cube_avgs = _cubes(f, rho, True)
    inner, outer = _cube_sides(rho, lat.d)
    report = CheckReport("maximal-methods", cap=1 + rel_tol)
    k_max = 1.0
    for j, r in enumerate(rho):
        n_ball = ball_cell_count(r, lat.d)
        n_in = (2 * int(inner[j]) + 1) ** lat.d
        n_out = (2 * int(outer[j]) + 1) ** lat.d
        k_max = max(k_max, n_out / n_in)
        upper = cube_avgs[1, j] * n_out / n_ball
        lower = cube_avgs[0, j] * n_in / n_ball
        b = ball_avgs[j]
        up = float(np.max(b - upper * (1 + rel_tol)))
        dn = float(np.max(lower - b * (1 + rel_tol)))
        ok = up <= 0 and dn <= 0
        report.rows.append(Row(f"rho={r:g}", "sandwich", float(r) * lat.h, up, dn, n_out / n_in, ok))
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(m_cube > 0, m_ball / m_cube, np.where(m_ball > 0, np.inf, 1.0))
        r2 = np.where(m_ball > 0, m_cube / m_ball, np.where(m_cube > 0, np.inf, 1.0))
    worst = float(max(r1.max(), r2.max()))
    report.notes = {"K": k_max, "max_ratio": worst, "method_spec": cfg.describe()}
    report.rows.append(Row("global", "M vs M_cube", None, float(r1.max()), float(r2.max()), worst,
                           worst <= k_max * (1 + rel_tol)))
    report.status = PASS if all(row.passed for row in report.rows) else FAIL
    return report
