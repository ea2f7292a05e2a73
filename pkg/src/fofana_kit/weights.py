"""Weight functions phi on (0, inf) and the conditions imposed on them.

Covers membership in the class G_{q,p} (almost-monotonicity of
``t^{d/p} phi`` and ``t^{d/q} phi``), the doubling condition, the integral
(Nakai) condition and the dyadic lower bound used in the maximal estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exponents import exponent_json, parse_exponent, reciprocal
from .grids import RadiusGrid
from .report import FAIL, PASS, CheckReport, Row

WEIGHT_KINDS = ("power", "power-log", "tabulated")

# 8-point Gauss-Legendre panels; 8 panels per decade gives 64 nodes/decade.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True, eq=False)
class WeightFunction:
    kind: str
    d: int = 1
    alpha: float | None = None
    beta: float = 0.0
    knots: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    _log_knots: np.ndarray = field(init=False, repr=False, default=None)
    _log_values: np.ndarray = field(init=False, repr=False, default=None)

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ValueError(f"phi: unknown kind '{self.kind}'")
        if self.d not in (1, 2):
            raise ValueError(f"phi: dimension must be 1 or 2, got {self.d!r}")
        if self.kind in ("power", "power-log"):
            if self.alpha is None or not self.alpha > 0 or math.isinf(self.alpha):
                raise ValueError("phi: alpha must be a positive finite number")
        else:
            k = np.asarray(self.knots, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if k.size < 4 or k.shape != v.shape:
                raise ValueError("phi: tabulated weights need >= 4 knots and matching values")
            if np.any(k <= 0) or np.any(np.diff(k) <= 0):
                raise ValueError("phi: knots must be positive and strictly increasing")
            if np.any(v <= 0) or not np.all(np.isfinite(v)):
                raise ValueError("phi: tabulated values must be positive and finite")
            object.__setattr__(self, "_log_knots", np.log(k))
            object.__setattr__(self, "_log_values", np.log(v))

    @classmethod
    def power(cls, alpha: float, d: int = 1) -> WeightFunction:
        return cls("power", d, alpha=float(alpha))

    @classmethod
    def power_log(cls, alpha: float, beta: float, d: int = 1) -> WeightFunction:
        return cls("power-log", d, alpha=float(alpha), beta=float(beta))

    @classmethod
    def tabulated(cls, knots, values, d: int = 1) -> WeightFunction:
        return cls("tabulated", d, knots=tuple(map(float, knots)), values=tuple(map(float, values)))

    @classmethod
    def from_json(cls, obj: dict, d: int = 1) -> WeightFunction:
        kind = obj.get("kind")
        if kind == "power":
            return cls.power(_field(obj, "alpha"), d)
        if kind == "power-log":
            return cls.power_log(_field(obj, "alpha"), _field(obj, "beta"), d)
        if kind == "tabulated":
            return cls.tabulated(_field(obj, "knots"), _field(obj, "values"), d)
        raise ValueError(f"phi: unknown kind '{kind}'")

    def to_json(self) -> dict:
        if self.kind == "power":
            return {"kind": "power", "alpha": self.alpha}
        if self.kind == "power-log":
            return {"kind": "power-log", "alpha": self.alpha, "beta": self.beta}
        return {"kind": "tabulated", "knots": list(self.knots), "values": list(self.values)}

    def with_dimension(self, d: int) -> WeightFunction:
        if d == self.d:
            return self
        return WeightFunction(self.kind, d, self.alpha, self.beta, self.knots, self.values)

    @property
    def decay(self) -> Fraction | None:
        """``d / alpha`` for the power families."""
        if self.alpha is None:
            return None
        return Fraction(self.d) / Fraction(self.alpha)

    @property
    def domain(self) -> tuple[float, float]:
        if self.kind == "tabulated":
            return self.knots[0] / 2, self.knots[-1] * 2
        return 0.0, math.inf

    def _check_t(self, t: np.ndarray):
        if np.any(~(t > 0)):
            raise ValueError("phi: t must be positive")
        lo, hi = self.domain
        if self.kind == "tabulated" and (np.any(t < lo * (1 - 1e-12)) or np.any(t > hi * (1 + 1e-12))):
            raise ValueError(f"phi: t outside the tabulated window [{lo!r}, {hi!r}]")

    def _log_tab(self, lt: np.ndarray) -> np.ndarray:
        lk, lv = self._log_knots, self._log_values
        out = np.interp(lt, lk, lv)
        left, right = lt < lk[0], lt > lk[-1]
        out[left] = lv[0] + (lt[left] - lk[0]) * (lv[1] - lv[0]) / (lk[1] - lk[0])
        out[right] = lv[-1] + (lt[right] - lk[-1]) * (lv[-1] - lv[-2]) / (lk[-1] - lk[-2])
        return out

    def times_power(self, t, e: Fraction | float = 0):
        """``t**e * phi(t)``; for the power family the exponents are combined exactly."""
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        self._check_t(t)
        e = Fraction(e)
        if self.kind == "power":
            out = t ** float(e - self.decay)
        elif self.kind == "power-log":
            out = t ** float(e - self.decay) * (1 + np.abs(np.log(t))) ** self.beta
        else:
            out = t ** float(e) * np.exp(self._log_tab(np.log(t)))
        return float(out[0]) if scalar else out

    def __call__(self, t):
        return self.times_power(t, 0)

    def divided(self, t, e: Fraction | float = 0):
        """``t**e / phi(t)``, combined exactly for the power family."""
        if self.kind == "power":
            tt = np.asarray(t, dtype=float)
            self._check_t(np.atleast_1d(tt))
            k = float(Fraction(e) + self.decay)
            return float(t) ** k if tt.ndim == 0 else tt**k
        return np.asarray(t, dtype=float)[()] ** float(e) / self(t)


def _field(obj: dict, key: str):
    if key not in obj:
        raise ValueError(f"phi: missing field '{key}'")
    return obj[key]


def phi_eval(w: WeightFunction, t: float) -> float:
    return w(float(t))


# -- class G_{q,p} ------------------------------------------------------------


@dataclass
class ClassCheckResult:
    c_dec: float
    c_inc: float
    passed: bool
    dec_witness: tuple[float, float]
    inc_witness: tuple[float, float]
    dec_growing: bool = False
    inc_growing: bool = False

    def to_json(self) -> dict:
        return {
            "C_dec": self.c_dec,
            "C_inc": self.c_inc,
            "pass": self.passed,
            "dec_witness": list(self.dec_witness),
            "inc_witness": list(self.inc_witness),
            "dec_growing": self.dec_growing,
            "inc_growing": self.inc_growing,
        }


def _almost_decreasing(t: np.ndarray, a: np.ndarray) -> tuple[float, int, int]:
    """max over i <= j of a[j] / a[i], with the attaining pair."""
    best, wi, wj = 1.0, 0, 0
    imin = 0
    for j in range(len(a)):
        if a[j] < a[imin]:
            imin = j
        ratio = a[j] / a[imin]
        if ratio > best:
            best, wi, wj = ratio, imin, j
    return best, wi, wj


def _almost_increasing(t: np.ndarray, b: np.ndarray) -> tuple[float, int, int]:
    """max over i <= j of b[i] / b[j]."""
    best, wi, wj = 1.0, 0, 0
    jmin = len(b) - 1
    for i in range(len(b) - 1, -1, -1):
        if b[i] < b[jmin]:
            jmin = i
        ratio = b[i] / b[jmin]
        if ratio > best:
            best, wi, wj = ratio, i, jmin
    return best, wi, wj


def _central(t: np.ndarray) -> slice:
    """Index range covering the middle half of the grid's log-span."""
    lt = np.log(t)
    mid, half = (lt[0] + lt[-1]) / 2, (lt[-1] - lt[0]) / 4
    idx = np.nonzero(np.abs(lt - mid) <= half + 1e-12)[0]
    return slice(int(idx[0]), int(idx[-1]) + 1)


def check_class(w: WeightFunction, q, p, t_grid: RadiusGrid, cap: float = 1e6,
                growth_tol: float = 1e-3) -> ClassCheckResult:
    """Estimate the almost-monotonicity constants of ``t^{d/p} phi`` and ``t^{d/q} phi``.

    Besides the cap, a constant is flagged as unbounded when it still grows by
    more than ``growth_tol`` (relative) between the central half of the grid
    and the full grid with the witness touching a grid end.
    """
    q, p = parse_exponent(q), parse_exponent(p)
    if q > p:
        raise ValueError("need q <= p")
    t = np.asarray(t_grid.radii, dtype=float)
    if len(t) < 16:
        raise ValueError("t_grid needs at least 16 points")
    d = w.d
    a = w.times_power(t, d * reciprocal(p))
    b = w.times_power(t, d * reciprocal(q))
    c_dec, di, dj = _almost_decreasing(t, a)
    c_inc, ii, ij = _almost_increasing(t, b)
    mid = _central(t)
    end = len(t) - 1
    dec_growing = (c_dec > _almost_decreasing(t[mid], a[mid])[0] * (1 + growth_tol)
                   and (di == 0 or dj == end))
    inc_growing = (c_inc > _almost_increasing(t[mid], b[mid])[0] * (1 + growth_tol)
                   and (ii == 0 or ij == end))
    passed = c_dec <= cap and c_inc <= cap and not dec_growing and not inc_growing
    return ClassCheckResult(float(c_dec), float(c_inc), bool(passed),
                            (float(t[di]), float(t[dj])), (float(t[ii]), float(t[ij])),
                            bool(dec_growing), bool(inc_growing))


def check_doubling(w: WeightFunction, t_grid: RadiusGrid) -> float:
    """Largest ``max(phi(r)/phi(s), phi(s)/phi(r))`` over pairs with ``r/s`` in [1/2, 2].

    Pairs are grid pairs plus ``(t, 2t)`` for every grid point ``t``.
    """
    t = np.asarray(t_grid.radii, dtype=float)
    if len(t) < 16:
        raise ValueError("t_grid needs at least 16 points")
    phi_t = w(t)
    rr = t[:, None] / t[None, :]
    ok = (rr >= 0.5 * (1 - 1e-12)) & (rr <= 2 * (1 + 1e-12))
    ratio = phi_t[:, None] / phi_t[None, :]
    best = float(np.max(np.where(ok, np.maximum(ratio, 1 / ratio), 1.0)))
    lo, hi = w.domain
    t2 = t[2 * t <= hi]
    if t2.size:
        r2 = w(2 * t2) / w(t2)
        best = max(best, float(np.max(np.maximum(r2, 1 / r2))))
    return best


# -- integral conditions --------------------------------------------------------


def log_quadrature(g, a: float, b: float, panels: int) -> float:
    """``int_a^b g(t) dt`` by composite Gauss-Legendre in ``u = ln t``.

    ``g`` receives an array of nodes ``t`` and must return ``t * integrand``.
    """
    if b <= a:
        return 0.0
    ua, ub = math.log(a), math.log(b)
    edges = ua + (ub - ua) * np.arange(panels + 1) / panels
    mid = (edges[:-1] + edges[1:]) / 2
    half = (edges[1:] - edges[:-1]) / 2
    u = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    vals = np.asarray(g(np.exp(u))).reshape(panels, -1)
    return math.fsum((half[:, None] * _GL_W[None, :] * vals).ravel())


def _panels(a: float, b: float, nodes_per_decade: int) -> int:
    return max(1, math.ceil(math.log10(b / a) * nodes_per_decade / len(_GL_X)))


@dataclass
class NakaiResult:
    c_hat: float | None
    divergent: bool
    table: list[tuple[float, float, float]]
    argmax_r: float | None = None
    reason: str = ""

    def to_json(self) -> dict:
        return {
            "C_hat": self.c_hat,
            "divergent": self.divergent,
            "argmax_r": self.argmax_r,
            "reason": self.reason,
            "table": [list(row) for row in self.table],
        }


def _check_q(q: float, allow_q1: bool):
    if q == 1 and not allow_q1:
        raise ValueError("q must exceed 1 (pass allow_q1=True to evaluate anyway)")


def nakai_constant(w: WeightFunction, q, p, d: int | None = None,
                   r_probes: RadiusGrid | None = None, T_max: float | None = None,
                   nodes_per_decade: int = 64, allow_q1: bool = False) -> NakaiResult:
    """Smallest C on the probe grid with ``int_r^inf phi^q t^{dq/p-1} dt <= C phi^q(r) r^{dq/p}``."""
    q, p = parse_exponent(q), parse_exponent(p)
    if q > p:
        raise ValueError("need q <= p")
    _check_q(q, allow_q1)
    if d is not None:
        w = w.with_dimension(d)
    d = w.d
    if r_probes is None:
        r_probes = RadiusGrid.geometric(1e-2, 1e2, 17)
    probes = np.asarray(r_probes.radii, dtype=float)
    r_top = float(probes[-1])
    if T_max is None:
        T_max = 1e4 * r_top
    if T_max < 100 * r_top * (1 - 1e-12):
        raise ValueError("T_max must be at least 100 times the largest probe")
    dp = d * reciprocal(p)

    def integrand(t):
        return w.times_power(t, dp) ** q

    tail = 0.0
    if w.kind == "power":
        e = q * (dp - w.decay) - 1
        if e >= -1:
            return NakaiResult(None, True, [], reason=f"integrand t^{float(e):g} is not integrable at infinity")
        tail = -T_max ** float(e + 1) / float(e + 1)

    table = []
    last_decade = log_quadrature(integrand, T_max / 10, T_max, nodes_per_decade // len(_GL_X))
    for r in probes:
        head = log_quadrature(integrand, r, T_max / 10, _panels(r, T_max / 10, nodes_per_decade))
        total = head + last_decade + tail
        bound = float(integrand(float(r)))
        table.append((float(r), total, bound))
        if w.kind != "power" and total > 0 and last_decade / total > 0.1:
            return NakaiResult(None, True, table,
                               reason=f"last decade carries {last_decade / total:.1%} of the integral at r={r:g}")
    ratios = [v / b for _, v, b in table]
    k = int(np.argmax(ratios))
    return NakaiResult(float(ratios[k]), False, table, float(probes[k]))


def lemma_dyadic_lower_bound(w: WeightFunction, q, p, d: int | None = None, r: float = 1.0,
                             i_max: int = 8, panels: int = 4, allow_q1: bool = False) -> CheckReport:
    """Ratio ``(2^i r)^{dq/p} phi^q(2^{i+1} r) / int_{2^i r}^{2^{i+1} r} phi^q t^{dq/p-1} dt`` for i = 1..i_max."""
    q, p = parse_exponent(q), parse_exponent(p)
    _check_q(q, allow_q1)
    if i_max < 1:
        raise ValueError("i_max must be >= 1")
    if d is not None:
        w = w.with_dimension(d)
    dp = w.d * reciprocal(p)

    def integrand(t):
        return w.times_power(t, dp) ** q

    report = CheckReport("lemma-dyadic", cap=math.inf)
    for i in range(1, i_max + 1):
        a = 2.0**i * r
        lhs = a ** float(q * dp) * w(2 * a) ** q
        rhs = log_quadrature(integrand, a, 2 * a, panels)
        ratio = lhs / rhs if rhs > 0 else math.inf
        report.rows.append(Row(f"i={i}", f"phi={w.kind}", a, lhs, rhs, ratio, math.isfinite(ratio)))
    report.status = PASS if all(row.passed for row in report.rows) else FAIL
    report.notes = {"q": exponent_json(q), "p": exponent_json(p), "r": r, "i_max": i_max}
    return report
