"""Acceptance criteria, one test each, at the stated tolerances.

Every test records a one-line PASS/FAIL verdict (printed immediately and
repeated in the terminal summary). Timings exclude numba compilation: each
timed section is run once on a tiny input first.
"""

import json
import math
import os
import subprocess
import sys
import time

import numpy as np

from fofana_kit.grids import RadiusGrid
from fofana_kit.lattice import GridFunction, Lattice, make_lattice, sample
from fofana_kit.maximal import MaximalConfig, indicator_maximal_oracle_1d, maximal_function
from fofana_kit.norms import (
    amalgam_continuous,
    amalgam_discrete,
    default_radii,
    fofana_norm,
    generalized_fofana_norm,
    lebesgue_norm,
)
from fofana_kit.report import NOT_APPLICABLE
from fofana_kit.verify import (
    SuiteConfig,
    check_ball_indicator,
    check_maximal_boundedness,
    check_norm_equivalence,
    generate_corpus,
    octave_radii,
    random_corpus,
    run_suites,
)
from fofana_kit.weights import (
    WeightFunction,
    check_class,
    check_doubling,
    lemma_dyadic_lower_bound,
    nakai_constant,
)

RESULTS: list[str] = []
INF = math.inf


def record(num: int, title: str, ok: bool, detail: str):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {title} | {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _warm(fn):
    lat = Lattice(1, 1.0, 8)
    fn(GridFunction(lat, np.arange(8.0)))


def test_01_maximal_fixes_constants():
    _warm(maximal_function)
    lat = Lattice(1, 1.0 / 1024, 4096)
    c = 0.7315
    f = GridFunction(lat, np.full(lat.shape, c))
    t0 = time.perf_counter()
    mf = maximal_function(f).values
    dt = time.perf_counter() - t0
    err = float(np.max(np.abs(mf - c)) / c)
    exact = bool(np.all(mf == c))
    record(1, "M(const) = const, d=1, n=4096", err <= 1e-15 and dt < 1.0,
           f"max rel err={err:.2e} (bit-exact={exact}), runtime={dt:.3f}s")


def test_02_indicator_oracle():
    _warm(maximal_function)
    lat = make_lattice(1, 0.01, 4.0)
    f = sample({"kind": "indicator-ball", "r0": 1.0}, lat)
    t0 = time.perf_counter()
    mf = maximal_function(f, MaximalConfig(method="naive")).values
    dt = time.perf_counter() - t0
    x = lat.centers()
    band = np.abs(np.abs(x) - 1.0) <= 5 * lat.h
    err = float(np.max(np.abs(mf - indicator_maximal_oracle_1d(0.0, 1.0, x))[~band]))
    record(2, "M chi_B(0,1) vs 1D oracle, h=0.01", err <= 0.05 and dt < 10.0,
           f"max abs err={err:.2e} outside 5h band, runtime={dt:.3f}s")


def test_03_spike():
    _warm(maximal_function)
    lat = Lattice(1, 1.0, 64)
    v = np.zeros(64)
    v[32] = 1.0
    t0 = time.perf_counter()
    mf = maximal_function(GridFunction(lat, v)).values
    dt = time.perf_counter() - t0
    expected = np.array([1.0 / (2 * abs(i - 32) + 1) for i in range(64)])
    ok = bool(np.array_equal(mf, expected))
    record(3, "spike gives 1, 1/3, 1/5, ...", ok and dt < 1.0,
           f"exact={ok}, centre window={np.round(mf[29:36], 4).tolist()}, runtime={dt:.3f}s")


def test_04_continuous_amalgam_closed_form():
    exact = (16 / 3) ** 0.5
    errs = {}
    for h in (0.01, 0.005, 0.0025):
        lat = make_lattice(1, h, 4.0)
        chi = sample({"kind": "indicator-ball", "r0": 1.0}, lat)
        errs[h] = abs(amalgam_continuous(chi, 1.0, (1, 2)) - exact) / exact
    order = [math.log2(errs[0.01] / errs[0.005]), math.log2(errs[0.005] / errs[0.0025])]
    ok = errs[0.01] <= 0.02 and errs[0.0025] <= 0.005 and all(0.7 <= o <= 1.3 for o in order)
    record(4, "amalgam_continuous(chi, r=1, q=1, p=2) = sqrt(16/3)", ok,
           "rel err " + ", ".join(f"h={h}: {e:.3%}" for h, e in errs.items())
           + f"; observed orders {order[0]:.2f}, {order[1]:.2f}")


def _random_members(count=200):
    lat = make_lattice(1, 1 / 16, 8.0)
    return [m.sample() for m in random_corpus(2024, lat, count)]


def test_05_discrete_identities():
    funcs = _random_members()
    worst = 0.0
    mono_bad = 0
    checks = 0
    pairs = [(1.0, 1.0, 2.0), (1.0, 2.0, 3.0), (2.0, 2.0, 4.0), (2.0, 4.0, INF), (1.5, 3.0, INF)]
    for f in funcs:
        h = f.lattice.h
        for q in (1.0, 2.0, 3.0, INF):
            for m in (1, 4, 16):
                a, b = amalgam_discrete(f, m * h, (q, q)), lebesgue_norm(f, q)
                worst = max(worst, abs(a - b) / b)
        for q, p1, p2 in pairs:
            for m in (1, 3, 8, 32):
                checks += 1
                if amalgam_discrete(f, m * h, (q, p2)) > amalgam_discrete(f, m * h, (q, p1)):
                    mono_bad += 1
    record(5, "p=q gives Lebesgue; ell^p monotone (200 members)", worst <= 1e-12 and mono_bad == 0,
           f"max rel diff={worst:.2e}; monotonicity violations={mono_bad}/{checks}")


def test_06_holder_cube_bound():
    funcs = _random_members()
    worst = 0.0
    checks = 0
    for f in funcs:
        h = f.lattice.h
        for q1, q2, p in [(1, 2, 2), (1, 3, INF), (2, 4, 4), (1.5, INF, INF), (1, 1.5, 3)]:
            for m in (1, 4, 16):
                r = m * h
                lhs = amalgam_discrete(f, r, (q1, p))
                rhs = r ** (1 / q1 - 1 / q2) * amalgam_discrete(f, r, (q2, p))
                worst = max(worst, lhs / rhs)
                checks += 1
    record(6, "Hoelder cube bound q1 <= q2 (200 members)", worst <= 1 + 1e-12,
           f"max lhs/rhs={worst:.15f} over {checks} cases")


def test_07_norm_equivalence():
    details, ok = [], True
    for d, lat in ((1, make_lattice(1, 1 / 32, 16.0)), (2, make_lattice(2, 1 / 8, 4.0))):
        corpus = generate_corpus(0, lat, "standard")
        for qp in ((2, 2), (1, 4), (2, INF)):
            rep = check_norm_equivalence(corpus, qp)
            good = rep.spread <= 4**d and rep.refinement["drift"] <= 0.1
            ok &= good
            details.append(f"d={d} (q,p)={qp}: spread={rep.spread:.3f} drift={rep.refinement['drift']:.3f}")
    record(7, "amalgam norm equivalence, spread <= 4^d, drift <= 10%", ok, "; ".join(details))


def test_08_power_weight_collapse():
    lat = make_lattice(1, 1 / 32, 16.0)
    corpus = generate_corpus(0, lat, "standard", alphas=(2.0, 3.0))
    radii = default_radii(lat)
    total = same = 0
    for m in corpus:
        f = m.sample()
        for q, p, alpha in ((2, 4, 2.0), (2, 4, 3.0), (1, INF, 2.0), (1.5, 6, 4.0)):
            a = fofana_norm(f, (q, p), alpha, radii)
            b = generalized_fofana_norm(f, (q, p), WeightFunction.power(alpha), radii)
            total += 1
            same += a.value == b.value and a.trace == b.trace
    record(8, "generalized norm with power weight == Fofana norm bit-for-bit", same == total,
           f"{same}/{total} identical")


def test_09_nakai_oracle():
    w = WeightFunction.power(2.0)
    nakai_constant(w, 2, 4)
    t0 = time.perf_counter()
    a = nakai_constant(w, 2, 4)
    b = nakai_constant(w, 2, INF)
    c = nakai_constant(WeightFunction.power(4.0), 2, 4)
    dt = time.perf_counter() - t0
    ok = (abs(a.c_hat - 2.0) <= 0.1 and abs(b.c_hat - 1.0) <= 0.05 and c.divergent and dt < 1.0)
    record(9, "Nakai constant 2.0 / 1.0 / divergent", ok,
           f"C_hat(p=4)={a.c_hat:.6f}, C_hat(p=inf)={b.c_hat:.6f}, alpha=p divergent={c.divergent}, "
           f"runtime={dt:.3f}s")


def test_10_class_checker_and_doubling():
    grid = RadiusGrid.geometric(1e-4, 1e4, 161)
    worst = 0.0
    for q, alpha, p in ((1, 1, 2), (2, 2, 4), (2, 3, 4), (2, 4, 4), (1, 2, INF), (1.5, 6, 8)):
        res = check_class(WeightFunction.power(alpha), q, p, grid)
        worst = max(worst, abs(res.c_dec - 1), abs(res.c_inc - 1))
    bad = check_class(WeightFunction.power(6.0), 2, 4, grid)
    dbl = max(abs(check_doubling(WeightFunction.power(a), grid) - 2 ** (1 / a)) for a in (1, 2, 3, 4.5))
    ok = worst <= 1e-12 and not bad.passed and bad.dec_witness[0] < bad.dec_witness[1] and dbl <= 1e-12
    record(10, "G_{q,p} checker and doubling constant", ok,
           f"max |C-1|={worst:.1e}; power(6) at p=4 fails with witness {bad.dec_witness}, "
           f"C_dec={bad.c_dec:.3g}; doubling err={dbl:.1e}")


def test_11_lemma_scale_invariance():
    worst = 0.0
    for alpha, q, p in ((2, 2, 4), (3, 2, 8), (2, 1.5, INF)):
        w = WeightFunction.power(alpha)
        a = lemma_dyadic_lower_bound(w, q, p, r=1.0, i_max=8)
        b = lemma_dyadic_lower_bound(w, q, p, r=2.0, i_max=8)
        ratios = [row.ratio for row in a.rows] + [row.ratio for row in b.rows]
        worst = max(worst, max(ratios) / min(ratios) - 1)
    record(11, "dyadic lemma constant invariant over i = 1..8 and r -> 2r", worst <= 1e-10,
           f"max relative spread={worst:.2e}")


def test_12_ball_indicator():
    lat = make_lattice(1, 1 / 64, 16.0)
    rep = check_ball_indicator(WeightFunction.power(2.0), (1, INF), [0.25, 0.5, 1, 2, 4],
                               octave_radii(1 / 16, 32), lat)
    values = ", ".join(f"{r.ratio:.4f}" for r in rep.rows)
    stable = all(r.passed for r in rep.rows)
    record(12, "phi(r0) ||chi_B(0,r0)|| spread <= 16, stable under radius doubling",
           rep.spread <= 16 and stable, f"values [{values}], spread={rep.spread:.4f}, stable={stable}")


def test_13_maximal_boundedness():
    lat = make_lattice(1, 1 / 32, 16.0)
    assert lat.refined().n <= 2048
    corpus = generate_corpus(0, lat, "standard")
    t0 = time.perf_counter()
    rep = check_maximal_boundedness(corpus, (2, 4), WeightFunction.power(2.0))
    neg = check_maximal_boundedness(corpus, (2, 4), WeightFunction.power(4.0))
    suite = run_suites(["all"], SuiteConfig(lat, WeightFunction.power(2.0), 2.0, 4.0))
    dt = time.perf_counter() - t0
    ok = (rep.c_emp <= 100 and rep.refinement["drift"] <= 0.1 and neg.status == NOT_APPLICABLE
          and dt < 300 and all(s.passed for s in suite))
    record(13, "maximal operator bounded for power(2), (d,q,p)=(1,2,4)", ok,
           f"C_emp={rep.c_emp:.4f}, drift={rep.refinement['drift']:.2e}, power(4) -> {neg.status}, "
           f"full suite {[s.status for s in suite]} in {dt:.1f}s")


def _verify_cli(tmp_path, name, threads):
    out = tmp_path / name
    env = dict(os.environ, PYTHONHASHSEED="0")
    proc = subprocess.run([sys.executable, "-m", "fofana_kit", "--threads", str(threads), "verify",
                           "--suite", "all", "--seed", "7", "--report", str(out), "--csv", str(out) + ".csv"],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    return out.read_bytes(), (tmp_path / (name + ".csv")).read_bytes()


def test_14_determinism(tmp_path):
    a = _verify_cli(tmp_path, "a.json", 1)
    b = _verify_cli(tmp_path, "b.json", 1)
    c = _verify_cli(tmp_path, "c.json", 4)
    rows = [[r["rows"] for r in json.loads(x[0])["reports"]] for x in (a, c)]
    byte_same = a == b
    value_same = rows[0] == rows[1]
    record(14, "verify --suite all reproducible", byte_same and value_same,
           f"threads=1 byte-identical={byte_same}, threads=4 value-identical rows={value_same}")

