"""Uniform lattices, sampled functions, and box/ball integration.

A :class:`Lattice` covers the box ``[-L, L]^d`` with ``n`` cells per axis of
width ``h``; functions are sampled at cell centres and are taken to vanish
outside the box. All integrals use the midpoint rule on cell centres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels

MAX_CELLS = 1 << 24

# Relative slack on squared radii, so a cell centre sitting on the sphere
# up to rounding counts as inside.
_RADIUS_SLACK = 1e-12
_SNAP = 1e-9

FUNCTION_KINDS = ("constant", "indicator-ball", "gaussian", "power-tail", "step-random")


@dataclass(frozen=True)
class Lattice:
    d: int
    h: float
    n: int

    @property
    def L(self) -> float:
        return self.n * self.h / 2

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    def centers(self) -> np.ndarray:
        """Cell-centre coordinates along one axis."""
        return -self.L + (np.arange(self.n) + 0.5) * self.h

    def mesh(self) -> list[np.ndarray]:
        c = self.centers()
        if self.d == 1:
            return [c]
        return list(np.meshgrid(c, c, indexing="ij"))

    def center_of(self, index: Sequence[int]) -> tuple[float, ...]:
        return tuple(-self.L + (i + 0.5) * self.h for i in index)

    def refined(self) -> Lattice:
        return Lattice(self.d, self.h / 2, 2 * self.n)

    def radius_cells(self, r: float) -> float:
        """``r / h``, snapped to the nearest integer when within rounding."""
        rho = r / self.h
        k = round(rho)
        if abs(rho - k) <= _SNAP * max(1.0, rho):
            return float(k)
        return rho

    def aligned_cells(self, r: float) -> int:
        """Number of cells in the length ``r``; raises if ``r`` is not a multiple of ``h``."""
        rho = self.radius_cells(r)
        if rho != int(rho) or rho < 1:
            raise ValueError(f"radius {r!r} is not a positive integer multiple of h={self.h!r}")
        return int(rho)

    def to_json(self) -> dict:
        return {"d": self.d, "h": self.h, "L": self.L}

    @classmethod
    def from_json(cls, obj: dict) -> Lattice:
        for key in ("d", "h", "L"):
            if key not in obj:
                raise ValueError(f"lattice: missing field '{key}'")
        return make_lattice(int(obj["d"]), float(obj["h"]), float(obj["L"]))


def make_lattice(d: int, h: float, L: float, max_cells: int = MAX_CELLS) -> Lattice:
    if d not in (1, 2):
        raise ValueError(f"lattice: d must be 1 or 2, got {d!r}")
    if not h > 0:
        raise ValueError(f"lattice: h must be positive, got {h!r}")
    if not L > 0:
        raise ValueError(f"lattice: L must be positive, got {L!r}")
    if L < 2 * h:
        raise ValueError(f"lattice: L={L!r} is smaller than 2h={2 * h!r}")
    n = 2 * round(L / h)
    if n**d > max_cells:
        raise ValueError(f"lattice: {n}^{d} cells exceeds the cap of {max_cells}")
    return Lattice(d, float(h), n)


@dataclass(frozen=True, eq=False)
class GridFunction:
    lattice: Lattice
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.lattice.shape:
            raise ValueError(f"values have shape {v.shape}, lattice needs {self.lattice.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def as2d(self) -> np.ndarray:
        return self.values.reshape(1, -1) if self.lattice.d == 1 else self.values

    def abs(self) -> GridFunction:
        return GridFunction(self.lattice, np.abs(self.values))

    def _check(self, other: GridFunction):
        if other.lattice != self.lattice:
            raise ValueError("grid functions live on different lattices")

    def __add__(self, other: GridFunction) -> GridFunction:
        self._check(other)
        return GridFunction(self.lattice, self.values + other.values)

    def __sub__(self, other: GridFunction) -> GridFunction:
        self._check(other)
        return GridFunction(self.lattice, self.values - other.values)

    def __mul__(self, c: float) -> GridFunction:
        return GridFunction(self.lattice, c * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> GridFunction:
        return GridFunction(self.lattice, -self.values)

    def shifted(self, cells: Sequence[int] | int) -> GridFunction:
        """Translate by whole cells; values leaving the box are dropped, new ones are 0."""
        if isinstance(cells, (int, np.integer)):
            cells = (int(cells),) * self.lattice.d
        out = np.zeros_like(self.values)
        src, dst = [], []
        for k in cells:
            n = self.lattice.n
            if abs(k) >= n:
                return GridFunction(self.lattice, out)
            src.append(slice(max(-k, 0), n - max(k, 0)))
            dst.append(slice(max(k, 0), n - max(-k, 0)))
        out[tuple(dst)] = self.values[tuple(src)]
        return GridFunction(self.lattice, out)

    def is_zero(self) -> bool:
        return not np.any(self.values)


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        c = self.center
        if isinstance(c, (int, float, np.floating, np.integer)):
            c = (float(c),)
        object.__setattr__(self, "center", tuple(float(x) for x in c))
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius!r}")


@dataclass(frozen=True)
class FunctionSpec:
    """A test-function descriptor, e.g. ``{"kind": "gaussian", "sigma": 1.0}``."""

    kind: str
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_json(cls, obj: dict) -> FunctionSpec:
        if "kind" not in obj:
            raise ValueError("function: missing field 'kind'")
        params = {k: v for k, v in obj.items() if k != "kind"}
        spec = cls(str(obj["kind"]), params)
        spec.validate()
        return spec

    def describe(self) -> str:
        inner = ",".join(f"{k}={_fmt(v)}" for k, v in sorted(self.params.items()))
        return f"{self.kind}({inner})"

    def validate(self):
        p = self.params
        if self.kind not in FUNCTION_KINDS:
            raise ValueError(f"function: unknown kind '{self.kind}'")
        required = {
            "constant": ("c",),
            "indicator-ball": ("r0",),
            "gaussian": ("sigma",),
            "power-tail": ("alpha", "eps"),
            "step-random": ("seed", "block"),
        }[self.kind]
        for key in required:
            if key not in p:
                raise ValueError(f"function: {self.kind} needs field '{key}'")
        if self.kind == "gaussian" and not p["sigma"] > 0:
            raise ValueError("function: sigma must be positive")
        if self.kind == "power-tail":
            if not p["eps"] > 0:
                raise ValueError("function: eps must be positive")
            if not p["alpha"] > 0:
                raise ValueError("function: alpha must be positive")
        if self.kind == "indicator-ball" and not p["r0"] > 0:
            raise ValueError("function: r0 must be positive")
        if self.kind == "step-random" and not p["block"] > 0:
            raise ValueError("function: block must be positive")


def _fmt(v) -> str:
    if isinstance(v, (list, tuple)):
        return "(" + ",".join(_fmt(x) for x in v) + ")"
    if isinstance(v, float):
        return f"{v:g}"
    return str(v)


def _center(params: dict, d: int) -> np.ndarray:
    c = params.get("center", 0.0)
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if c.size == 1:
        c = np.repeat(c, d)
    if c.size != d:
        raise ValueError(f"function: center must have {d} coordinates")
    return c


def sample(spec: FunctionSpec | dict, lattice: Lattice) -> GridFunction:
    """Evaluate a descriptor at the cell centres of ``lattice``."""
    if isinstance(spec, dict):
        spec = FunctionSpec.from_json(spec)
    spec.validate()
    p, d = spec.params, lattice.d
    X = lattice.mesh()
    if spec.kind == "constant":
        v = np.full(lattice.shape, float(p["c"]))
    elif spec.kind in ("indicator-ball", "gaussian"):
        c = _center(p, d)
        r2 = sum((x - ci) ** 2 for x, ci in zip(X, c))
        if spec.kind == "indicator-ball":
            v = (r2 < float(p["r0"]) ** 2).astype(float)
        else:
            v = float(p.get("amplitude", 1.0)) * np.exp(-r2 / (2 * float(p["sigma"]) ** 2))
    elif spec.kind == "power-tail":
        e = d / float(p["alpha"])
        r = np.sqrt(sum(x**2 for x in X))
        v = np.power(np.maximum(r, float(p["eps"])), -e)
    else:
        block = float(p["block"])
        nb = math.ceil(2 * lattice.L / block - _SNAP)
        rng = np.random.default_rng(int(p["seed"]))
        table = rng.uniform(-1.0, 1.0, size=(nb,) * d)
        idx = [np.minimum(((x + lattice.L) / block).astype(int), nb - 1) for x in X]
        v = table[tuple(idx)]
        support = p.get("support")
        if support is not None:
            inside = np.ones(lattice.shape, dtype=bool)
            for x in X:
                inside &= np.abs(x) < float(support)
            v = np.where(inside, v, 0.0)
    return GridFunction(lattice, v)


# -- ball geometry ----------------------------------------------------------


def _slack(rho: float) -> float:
    return rho * rho * (1 + _RADIUS_SLACK)


def ball_halfwidths(rho: float, d: int) -> np.ndarray:
    """Row half-widths of the index ball of radius ``rho`` (cells) about a cell centre.

    Entry ``k`` belongs to vertical offset ``k - R``; in 1D a single entry.
    """
    lim = _slack(rho)
    R = int(math.floor(math.sqrt(lim)))
    if d == 1:
        return np.array([R], dtype=np.int64)
    out = np.empty(2 * R + 1, dtype=np.int64)
    for k, dy in enumerate(range(-R, R + 1)):
        w = math.isqrt(max(int(lim) - dy * dy, 0))
        while (w + 1) ** 2 + dy * dy <= lim:
            w += 1
        while w > 0 and w * w + dy * dy > lim:
            w -= 1
        out[k] = w
    return out


def ball_cell_count(rho: float, d: int) -> int:
    return int(np.sum(2 * ball_halfwidths(rho, d) + 1))


def sorted_offsets(rho_max: float, d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All integer offsets within ``rho_max``, ordered by squared distance.

    Ties are broken by (dy, dx) so the order is deterministic.
    """
    R = int(math.floor(math.sqrt(_slack(rho_max))))
    r = np.arange(-R, R + 1)
    if d == 1:
        oy, ox = np.zeros_like(r), r
    else:
        oy, ox = (a.ravel() for a in np.meshgrid(r, r, indexing="ij"))
    s = oy * oy + ox * ox
    keep = s <= _slack(rho_max)
    oy, ox, s = oy[keep], ox[keep], s[keep]
    order = np.lexsort((ox, oy, s))
    return oy[order].astype(np.int64), ox[order].astype(np.int64), s[order]


def _index_coords(lattice: Lattice, center: Sequence[float]) -> list[float]:
    """Ball centre in fractional cell-index coordinates, snapped near integers."""
    out = []
    for c in center:
        u = (c + lattice.L) / lattice.h - 0.5
        k = round(u)
        out.append(float(k) if abs(u - k) <= _SNAP else u)
    return out


def ball_mask(lattice: Lattice, ball: Ball) -> tuple[tuple[slice, ...], np.ndarray]:
    """Window of the lattice touching ``ball`` and the membership mask inside it."""
    if len(ball.center) != lattice.d:
        raise ValueError(f"ball centre needs {lattice.d} coordinates")
    rho = lattice.radius_cells(ball.radius)
    lim = _slack(rho)
    u = _index_coords(lattice, ball.center)
    sl, grids = [], []
    for ui in u:
        lo = max(int(math.floor(ui - rho)) - 1, 0)
        hi = min(int(math.ceil(ui + rho)) + 2, lattice.n)
        if hi <= lo:
            return tuple(slice(0, 0) for _ in u), np.zeros((0,) * lattice.d, dtype=bool)
        sl.append(slice(lo, hi))
        grids.append(np.arange(lo, hi) - ui)
    if lattice.d == 1:
        dist2 = grids[0] ** 2
    else:
        dist2 = grids[0][:, None] ** 2 + grids[1][None, :] ** 2
    return tuple(sl), dist2 <= lim


def ball_integral(f: GridFunction, q: float, ball: Ball) -> float:
    """``h^d * sum |f|^q`` over cells whose centre lies in the closed ball.

    For ``q = inf`` the maximum of ``|f|`` over the same cells.
    """
    sl, mask = ball_mask(f.lattice, ball)
    vals = np.abs(f.values[sl][mask])
    if vals.size == 0:
        return 0.0
    if math.isinf(q):
        return float(vals.max())
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q!r}")
    return f.lattice.cell_volume * math.fsum(vals**q)


# -- cubes and summed tables -----------------------------------------------


class SummedTable:
    """Double-double summed-area table of a nonnegative field on a lattice."""

    def __init__(self, lattice: Lattice, field: np.ndarray):
        self.lattice = lattice
        f2 = np.ascontiguousarray(np.asarray(field, dtype=float).reshape(-1, lattice.n))
        self._hi, self._lo = _kernels.table_prefix(f2)

    @classmethod
    def of_power(cls, f: GridFunction, q: float) -> SummedTable:
        return cls(f.lattice, np.abs(f.values) ** q)

    def box_sums(self, lo: Sequence[np.ndarray], hi: Sequence[np.ndarray]) -> np.ndarray:
        """Sums over half-open index boxes ``[lo, hi)``, one per row of bounds."""
        lo = [np.clip(np.atleast_1d(np.asarray(a, dtype=np.int64)), 0, self.lattice.n) for a in lo]
        hi = [np.clip(np.atleast_1d(np.asarray(a, dtype=np.int64)), 0, self.lattice.n) for a in hi]
        if self.lattice.d == 1:
            zero = np.zeros_like(lo[0])
            lo, hi = [zero, lo[0]], [zero + 1, hi[0]]
        return _kernels.table_query(self._hi, self._lo, lo[0], hi[0], lo[1], hi[1])

    def box_sum(self, lo: Sequence[int], hi: Sequence[int]) -> float:
        return float(self.box_sums([[a] for a in lo], [[b] for b in hi])[0])


@dataclass(frozen=True)
class CubePartition:
    """Tiling of space by cubes ``prod [r k_i, r (k_i + 1))`` aligned to cell edges."""

    lattice: Lattice
    scale: float

    def __post_init__(self):
        self.lattice.aligned_cells(self.scale)

    @property
    def cells(self) -> int:
        return self.lattice.aligned_cells(self.scale)

    def k_range(self) -> range:
        """Cube indices per axis whose cube meets the sampled box."""
        m, half = self.cells, self.lattice.n // 2
        return range((-half) // m, (half - 1) // m + 1)

    def index_bounds(self, k: int) -> tuple[int, int]:
        m, half = self.cells, self.lattice.n // 2
        lo = half + k * m
        return max(lo, 0), min(lo + m, self.lattice.n)

    def all_bounds(self) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Bounds of every cube meeting the box, flattened in C order over k."""
        ks = np.array(list(self.k_range()))
        b = np.array([self.index_bounds(int(k)) for k in ks])
        if self.lattice.d == 1:
            return [b[:, 0]], [b[:, 1]]
        ii, jj = np.meshgrid(np.arange(len(ks)), np.arange(len(ks)), indexing="ij")
        ii, jj = ii.ravel(), jj.ravel()
        return [b[ii, 0], b[jj, 0]], [b[ii, 1], b[jj, 1]]


def cube_integral(f: GridFunction, q: float, partition: CubePartition,
                  k: Sequence[int] | int, table: SummedTable | None = None) -> float:
    """``||f chi_{Q_k^r}||_q`` with the midpoint rule."""
    if isinstance(k, (int, np.integer)):
        k = (int(k),)
    if len(k) != f.lattice.d:
        raise ValueError(f"cube index needs {f.lattice.d} components")
    bounds = [partition.index_bounds(ki) for ki in k]
    if any(b <= a for a, b in bounds):
        return 0.0
    if math.isinf(q):
        sl = tuple(slice(a, b) for a, b in bounds)
        return float(np.abs(f.values[sl]).max())
    if table is None:
        table = SummedTable.of_power(f, q)
    s = table.box_sum([a for a, _ in bounds], [b for _, b in bounds])
    return (f.lattice.cell_volume * s) ** (1 / q)
