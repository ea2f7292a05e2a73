"""Lebesgue, amalgam, Fofana, generalized Fofana and generalized Morrey norms.

Suprema over r > 0 become maxima over a finite :class:`RadiusGrid`; the
per-radius values are kept as a trace so under-resolution is visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .exponents import ExponentPair, parse_exponent, reciprocal
from .grids import RadiusGrid
from .lattice import CubePartition, GridFunction, Lattice, SummedTable, ball_halfwidths
from .weights import WeightFunction

__all__ = [
    "ExponentPair",
    "NormValue",
    "RadiusGrid",
    "amalgam_continuous",
    "amalgam_discrete",
    "default_radii",
    "fofana_norm",
    "generalized_fofana_norm",
    "lebesgue_norm",
    "lp_sum",
    "morrey_norm",
]


@dataclass
class NormValue:
    value: float
    argmax_r: float | None
    trace: list[tuple[float, float]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"value": self.value, "argmax_r": self.argmax_r, "trace": [list(t) for t in self.trace]}


def default_radii(lattice: Lattice, count: int = 25) -> RadiusGrid:
    """``geometric:4h:L:count``."""
    return RadiusGrid.geometric(4 * lattice.h, lattice.L, count)


def lp_sum(a: np.ndarray, p: float, weight: float = 1.0) -> float:
    """``(weight * sum a^p)^(1/p)`` for ``a >= 0``; ``max a`` when ``p = inf``.

    Terms are scaled by the maximum first, so the largest term contributes
    exactly 1 and the result never drops below ``max a``.
    """
    a = np.asarray(a, dtype=float).ravel()
    if a.size == 0:
        return 0.0
    top = float(a.max())
    if top == 0.0:
        return 0.0
    if math.isinf(p):
        return top
    return top * (weight * math.fsum((a / top) ** p)) ** (1 / p)


def lebesgue_norm(f: GridFunction, q) -> float:
    q = parse_exponent(q)
    return lp_sum(np.abs(f.values), q, f.lattice.cell_volume)


def _qp(qp) -> ExponentPair:
    if isinstance(qp, ExponentPair):
        return qp
    return ExponentPair(*qp)


class _LocalNorms:
    """Ball-local ``L^q`` norms of one function, reusable across radii."""

    def __init__(self, f: GridFunction, q: float):
        self.f, self.q = f, q
        a = np.ascontiguousarray(np.abs(f.as2d()))
        if math.isinf(q):
            self._table = _kernels.sparse_max_table(a)
        else:
            self._hi, self._lo = _kernels.row_prefix(a**q)

    def on_padded(self, r: float) -> np.ndarray:
        """``||f chi_B(y,r)||_q`` for every cell centre ``y`` of the padded lattice."""
        lat = self.f.lattice
        rho = lat.radius_cells(r)
        pad = math.ceil(rho)
        hw = ball_halfwidths(rho, lat.d)
        pad_y = pad if lat.d == 2 else 0
        if math.isinf(self.q):
            return _kernels.disk_maxima(self._table, hw, pad_y, pad)
        sums = _kernels.disk_sums(self._hi, self._lo, hw, pad_y, pad)
        return (lat.cell_volume * sums) ** (1 / self.q)


def amalgam_continuous(f: GridFunction, r: float, qp, _local: _LocalNorms | None = None) -> float:
    """``_r||f||_{q,p}``: the ``L^p(dy)`` norm of ``||f chi_B(y,r)||_q``."""
    qp = _qp(qp)
    if not r > 0:
        raise ValueError("r must be positive")
    local = _local if _local is not None else _LocalNorms(f, qp.q)
    return lp_sum(local.on_padded(r), qp.p, f.lattice.cell_volume)


def _cube_norms(f: GridFunction, r: float, q: float, table: SummedTable | None = None) -> np.ndarray:
    part = CubePartition(f.lattice, r)
    if math.isinf(q):
        starts = np.array([part.index_bounds(k)[0] for k in part.k_range()])
        a = np.abs(f.values)
        for axis in range(f.lattice.d):
            a = np.maximum.reduceat(a, starts, axis=axis)
        return a.ravel()
    if table is None:
        table = SummedTable.of_power(f, q)
    lo, hi = part.all_bounds()
    sums = table.box_sums(lo, hi)
    return (f.lattice.cell_volume * sums) ** (1 / q)


def amalgam_discrete(f: GridFunction, r: float, qp, _table: SummedTable | None = None) -> float:
    """``ell^p`` norm over k of ``||f chi_{Q_k^r}||_q``; ``r`` must be a multiple of h."""
    qp = _qp(qp)
    return lp_sum(_cube_norms(f, r, qp.q, _table), qp.p)


def _sup(radii: RadiusGrid, values: list[float]) -> NormValue:
    trace = [(float(r), float(v)) for r, v in zip(radii, values)]
    k = int(np.argmax(values))
    return NormValue(float(values[k]), float(radii.radii[k]), trace)


def fofana_norm(f: GridFunction, qp, alpha: float, radii: RadiusGrid | None = None) -> NormValue:
    """``max_r r^{d(1/alpha - 1/q - 1/p)} _r||f||_{q,p}``."""
    qp = _qp(qp)
    alpha = parse_exponent(alpha)
    if not qp.q <= alpha <= qp.p:
        raise ValueError(f"alpha={alpha!r} must lie in [q, p] = [{qp.q!r}, {qp.p!r}]")
    radii = radii or default_radii(f.lattice)
    e = f.lattice.d * (reciprocal(alpha) - qp.inv_q - qp.inv_p)
    local = _LocalNorms(f, qp.q)
    vals = [r ** float(e) * amalgam_continuous(f, r, qp, local) for r in radii]
    return _sup(radii, vals)


def generalized_fofana_norm(f: GridFunction, qp, w: WeightFunction, radii: RadiusGrid | None = None,
                            variant: str = "continuous") -> NormValue:
    """``max_r phi(r)^{-1} r^{-d/q - d/p} _r||f||_{q,p}`` (continuous), or
    ``max_r phi(r)^{-1} r^{-d/q}`` times the cube norm (discrete)."""
    qp = _qp(qp)
    d = f.lattice.d
    w = w.with_dimension(d)
    radii = radii or default_radii(f.lattice)
    if variant == "continuous":
        e = -d * (qp.inv_q + qp.inv_p)
        local = _LocalNorms(f, qp.q)
        vals = [w.divided(r, e) * amalgam_continuous(f, r, qp, local) for r in radii]
    elif variant == "discrete":
        e = -d * qp.inv_q
        table = None if math.isinf(qp.q) else SummedTable.of_power(f, qp.q)
        vals = [w.divided(r, e) * amalgam_discrete(f, r, qp, table) for r in radii]
    else:
        raise ValueError(f"variant must be 'continuous' or 'discrete', got {variant!r}")
    return _sup(radii, vals)


def morrey_norm(f: GridFunction, q, w: WeightFunction, radii: RadiusGrid | None = None) -> NormValue:
    """Generalized Morrey norm: the ``p = inf`` continuous generalized Fofana norm."""
    q = parse_exponent(q)
    if math.isinf(q):
        raise ValueError("morrey_norm needs q < inf")
    return generalized_fofana_norm(f, (q, math.inf), w, radii, "continuous")

