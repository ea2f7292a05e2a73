import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fofana_kit.lattice import (
    Ball,
    CubePartition,
    FunctionSpec,
    GridFunction,
    Lattice,
    SummedTable,
    ball_cell_count,
    ball_integral,
    ball_mask,
    cube_integral,
    make_lattice,
    sample,
    sorted_offsets,
)


def test_make_lattice_shape_and_edges():
    lat = make_lattice(1, 0.25, 2.0)
    assert lat.n == 16 and lat.L == 2.0
    np.testing.assert_allclose(lat.centers()[:2], [-1.875, -1.625])
    lat2 = make_lattice(2, 0.5, 1.0)
    assert lat2.shape == (4, 4)
    assert lat2.cell_volume == 0.25


@pytest.mark.parametrize("args, field", [((3, 0.1, 1.0), "d"), ((1, 0.0, 1.0), "h"),
                                         ((1, 0.1, -1.0), "L"), ((1, 1.0, 0.5), "L")])
def test_make_lattice_rejects(args, field):
    with pytest.raises(ValueError, match=field):
        make_lattice(*args)


def test_cell_cap():
    with pytest.raises(ValueError, match="cap"):
        make_lattice(2, 1e-3, 10.0)


def test_lattice_json_roundtrip():
    lat = make_lattice(2, 1 / 8, 3.0)
    assert Lattice.from_json(lat.to_json()) == lat
    with pytest.raises(ValueError, match="'h'"):
        Lattice.from_json({"d": 1, "L": 1})


def test_refined_lattice_keeps_box():
    lat = make_lattice(1, 0.1, 2.0)
    fine = lat.refined()
    assert fine.n == 2 * lat.n and math.isclose(fine.L, lat.L)


def test_radius_alignment():
    lat = make_lattice(1, 0.01, 4.0)
    assert lat.aligned_cells(1.0) == 100
    assert lat.aligned_cells(0.03) == 3
    with pytest.raises(ValueError, match="multiple"):
        lat.aligned_cells(0.015)


def test_sample_indicator_is_strict():
    lat = make_lattice(1, 1.0, 4.0)
    v = sample(FunctionSpec("indicator-ball", {"r0": 1.5}), lat).values
    # centres -3.5..3.5; |x| = 1.5 is outside
    np.testing.assert_array_equal(v, [0, 0, 0, 1, 1, 0, 0, 0])


def test_sample_kinds():
    lat = make_lattice(1, 0.5, 2.0)
    c = sample({"kind": "constant", "c": 3.0}, lat).values
    assert np.all(c == 3.0)
    g = sample({"kind": "gaussian", "sigma": 1.0, "amplitude": 2.0}, lat).values
    np.testing.assert_allclose(g, 2 * np.exp(-lat.centers() ** 2 / 2))
    t = sample({"kind": "power-tail", "alpha": 2.0, "eps": 0.5}, lat).values
    np.testing.assert_allclose(t, np.maximum(np.abs(lat.centers()), 0.5) ** -0.5)


def test_step_random_blocks_are_physical():
    coarse = make_lattice(1, 0.125, 4.0)
    spec = FunctionSpec("step-random", {"seed": 7, "block": 0.5})
    a = sample(spec, coarse).values
    b = sample(spec, coarse.refined()).values
    np.testing.assert_array_equal(np.repeat(a, 2), b)
    assert len(np.unique(a)) == 16


def test_step_random_support():
    lat = make_lattice(1, 0.125, 4.0)
    v = sample({"kind": "step-random", "seed": 1, "block": 0.25, "support": 1.0}, lat).values
    assert np.all(v[np.abs(lat.centers()) >= 1.0] == 0)


@pytest.mark.parametrize("obj, field", [({"kind": "nope"}, "kind"), ({"kind": "gaussian"}, "sigma"),
                                        ({"kind": "power-tail", "alpha": 2}, "eps"),
                                        ({"c": 1}, "kind")])
def test_function_spec_errors(obj, field):
    with pytest.raises(ValueError, match=field):
        FunctionSpec.from_json(obj)


def test_grid_function_validation():
    lat = make_lattice(1, 1.0, 2.0)
    with pytest.raises(ValueError, match="shape"):
        GridFunction(lat, np.zeros(3))
    with pytest.raises(ValueError, match="finite"):
        GridFunction(lat, [0, np.nan, 0, 0])
    f = GridFunction(lat, [1, 2, 3, 4])
    with pytest.raises(ValueError):
        f.values[0] = 5


def test_shifted_zero_fills():
    lat = make_lattice(1, 1.0, 2.0)
    f = GridFunction(lat, [1, 2, 3, 4])
    np.testing.assert_array_equal(f.shifted(1).values, [0, 1, 2, 3])
    np.testing.assert_array_equal(f.shifted(-2).values, [3, 4, 0, 0])
    assert f.shifted(9).is_zero()


@pytest.mark.parametrize("rho, d, count", [(0, 1, 1), (1, 1, 3), (2.5, 1, 5), (1, 2, 5),
                                            (math.sqrt(2), 2, 9), (2, 2, 13), (3, 2, 29)])
def test_ball_cell_count(rho, d, count):
    assert ball_cell_count(rho, d) == count


@given(st.floats(0, 12), st.sampled_from([1, 2]))
def test_ball_count_matches_enumeration(rho, d):
    R = int(rho) + 1
    r = np.arange(-R, R + 1)
    if d == 1:
        brute = int(np.sum(r * r <= rho * rho * (1 + 1e-12)))
    else:
        brute = int(np.sum(r[:, None] ** 2 + r[None, :] ** 2 <= rho * rho * (1 + 1e-12)))
    assert ball_cell_count(rho, d) == brute
    assert len(sorted_offsets(rho, d)[2]) == brute


def test_sorted_offsets_order():
    oy, ox, s = sorted_offsets(2.0, 2)
    assert np.all(np.diff(s) >= 0)
    assert (oy[0], ox[0]) == (0, 0)


def test_ball_integral_examples():
    lat = make_lattice(1, 1.0, 4.0)
    f = GridFunction(lat, np.arange(8.0))
    # centres -3.5..3.5; ball B(0.5, 1) holds centres -0.5, 0.5, 1.5
    assert ball_integral(f, 1.0, Ball((0.5,), 1.0)) == 3 + 4 + 5
    assert ball_integral(f, math.inf, Ball((0.5,), 1.0)) == 5
    assert ball_integral(f, 2.0, Ball((100.0,), 1.0)) == 0.0


def test_ball_mask_2d_symmetric():
    lat = make_lattice(2, 0.25, 2.0)
    sl, mask = ball_mask(lat, Ball((0.125, 0.125), 0.5))
    assert mask.sum() == ball_cell_count(2.0, 2)


def test_cube_integral_examples():
    lat = make_lattice(1, 0.25, 2.0)
    f = sample({"kind": "indicator-ball", "r0": 1.0}, lat)
    part = CubePartition(lat, 1.0)
    assert list(part.k_range()) == [-2, -1, 0, 1]
    assert cube_integral(f, 1.0, part, 0) == 1.0
    assert cube_integral(f, 1.0, part, -2) == 0.0
    assert cube_integral(f, math.inf, part, -1) == 1.0


@given(st.integers(1, 40), st.integers(0, 2**31 - 1))
def test_summed_table_matches_fsum(n, seed):
    rng = np.random.default_rng(seed)
    lat = Lattice(2, 1.0, 2 * n)
    field = rng.random(lat.shape) * 10.0 ** rng.integers(-8, 8, size=lat.shape)
    t = SummedTable(lat, field)
    a, b = sorted(rng.integers(0, lat.n + 1, size=2))
    c, e = sorted(rng.integers(0, lat.n + 1, size=2))
    exact = math.fsum(field[a:b, c:e].ravel())
    assert t.box_sum([a, c], [b, e]) == pytest.approx(exact, rel=1e-15, abs=1e-300)


def test_small_examples():
    lat = make_lattice(1, 0.5, 2.0)
    np.testing.assert_allclose(lat.centers(), np.arange(-1.75, 2, 0.5))
    np.testing.assert_array_equal(sample({"kind": "indicator-ball", "r0": 1.0}, lat).values,
                                  [0, 0, 1, 1, 1, 1, 0, 0])
    one = sample({"kind": "constant", "c": 1.0}, lat)
    assert ball_integral(one, 1.0, Ball((0.0,), 1.0)) == 2.0
    chi = sample({"kind": "indicator-ball", "r0": 1.0}, lat)
    assert ball_integral(chi, 1.0, Ball((2.0,), 1.0)) == 0.0
    assert make_lattice(2, 1.0, 2.0).shape == (4, 4)
    with pytest.raises(ValueError):
        make_lattice(1, 0.5, 0.25)
    tail = sample({"kind": "power-tail", "alpha": 1.0, "eps": 0.5}, make_lattice(1, 1.0, 4.0))
    assert tail.values[5] == pytest.approx(1 / 1.5) and tail.values[7] == pytest.approx(1 / 3.5)


def test_unit_interval_cubes():
    lat = make_lattice(1, 0.5, 2.0)
    f = GridFunction(lat, (np.abs(lat.centers() - 0.5) < 0.5).astype(float))
    part = CubePartition(lat, 1.0)
    assert cube_integral(f, 1.0, part, 0) == 1.0
    assert cube_integral(f, 1.0, part, -1) == 0.0


def _random_function(seed, d=1, n=24):
    rng = np.random.default_rng(seed)
    lat = Lattice(d, 0.25, n)
    v = rng.standard_normal(lat.shape) * (rng.random(lat.shape) < 0.6)
    return GridFunction(lat, v)


@given(st.integers(0, 10_000), st.sampled_from([1, 2]), st.floats(0.01, 3), st.floats(0.01, 3),
       st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_ball_integral_monotone_in_radius(seed, d, r1, r2, q):
    f = _random_function(seed, d, 16)
    r1, r2 = sorted((r1, r2))
    c = tuple(np.random.default_rng(seed).uniform(-2, 2, size=d))
    assert ball_integral(f, q, Ball(c, r1)) <= ball_integral(f, q, Ball(c, r2))


@given(st.integers(0, 10_000), st.sampled_from([1, 2]), st.integers(1, 9), st.sampled_from([1.0, 2.0, 3.5]))
def test_cube_tiling_sums_to_lebesgue(seed, d, m, q):
    f = _random_function(seed, d, 18)
    part = CubePartition(f.lattice, m * f.lattice.h)
    ks = list(part.k_range())
    idx = [(k,) for k in ks] if d == 1 else [(a, b) for a in ks for b in ks]
    total = math.fsum(cube_integral(f, q, part, k) ** q for k in idx)
    direct = f.lattice.cell_volume * math.fsum((np.abs(f.values) ** q).ravel())
    assert total == pytest.approx(direct, rel=1e-12, abs=0)


@given(st.integers(0, 10_000), st.integers(-5, 5), st.floats(0.1, 2.0))
def test_ball_integral_translation(seed, k, r):
    lat = Lattice(1, 0.25, 40)
    rng = np.random.default_rng(seed)
    v = np.zeros(lat.n)
    v[10:30] = rng.standard_normal(20)
    f = GridFunction(lat, v)
    c = float(rng.uniform(-1, 1))
    a = ball_integral(f, 2.0, Ball((c,), r))
    b = ball_integral(f.shifted(k), 2.0, Ball((c + k * lat.h,), r))
    assert a == b


def test_summed_table_thousand_boxes():
    rng = np.random.default_rng(3)
    lat = Lattice(2, 1.0, 64)
    field = rng.random(lat.shape) * 10.0 ** rng.integers(-6, 6, size=lat.shape)
    t = SummedTable(lat, field)
    lo0, hi0 = np.sort(rng.integers(0, 65, size=(2, 1000)), axis=0)
    lo1, hi1 = np.sort(rng.integers(0, 65, size=(2, 1000)), axis=0)
    got = t.box_sums([lo0, lo1], [hi0, hi1])
    for i in range(1000):
        exact = math.fsum(field[lo0[i]:hi0[i], lo1[i]:hi1[i]].ravel())
        assert abs(got[i] - exact) <= 1e-12 * abs(exact)


def test_box_sums_never_negative_on_tiny_tails():
    # gaussian tails far below the table total must not come back negative
    lat = make_lattice(2, 1 / 8, 4.0)
    f = sample({"kind": "gaussian", "sigma": 0.5}, lat)
    table = SummedTable.of_power(f, 2)
    idx = np.arange(lat.n)
    lo = [np.repeat(idx, lat.n), np.tile(idx, lat.n)]
    hi = [a + 1 for a in lo]
    sums = table.box_sums(lo, hi)
    assert np.all(sums >= 0)
