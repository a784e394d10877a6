import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vburgers.fields import GridSpec, ScalarField, Trajectory, VectorField, make_trig_field
from vburgers.forcing import TrigForcing, ZeroForcing
from vburgers.heat import heat_apply
from vburgers.norms import (
    KConstants,
    compute_k_constants,
    grad_sup,
    holder_seminorm,
    interpolation_gap,
    iso_seminorm_array,
    opnorm_sup,
    sup_norm,
)

TWO_PI = 2 * np.pi


def test_sup_norm_euclidean(grid2d):
    v = VectorField.constant(grid2d, [3.0, 4.0])
    assert sup_norm(v) == pytest.approx(5.0)


def test_grad_sup_sin(sin_field):
    assert grad_sup(sin_field) == pytest.approx(1.0, abs=1e-12)


def test_opnorm_is_largest_singular_value():
    m = np.array([[3.0, 0.0], [4.0, 0.0]])
    assert opnorm_sup(m) == pytest.approx(5.0)
    # fields of matrices: take the max over nodes
    stack = np.stack([np.eye(2), 2 * np.eye(2)], axis=-1)
    assert opnorm_sup(stack) == pytest.approx(2.0)


def test_holder_seminorm_constant_is_zero(grid1d):
    v = VectorField.constant(grid1d, [2.5])
    assert holder_seminorm(v, 0.5).value == 0.0


def test_holder_seminorm_sin_dense_pairs():
    # alpha = 1/2 seminorm of sin: max of 2 sin(delta/2)/sqrt(delta), ~1.2038
    g = GridSpec(1, 512, TWO_PI)
    x = g.axis_coords()
    v = VectorField.from_arrays(g, [np.sin(x)])
    est = holder_seminorm(v, 0.5)
    assert est.value == pytest.approx(1.2038, abs=5e-3)
    assert est.value <= 1.2039  # sampled value is a lower bound


def test_holder_alpha_one_approaches_gradient_sup():
    g = GridSpec(1, 512, TWO_PI)
    v = make_trig_field(g, seed=3, kmax=8, amplitude=1.0)
    est = holder_seminorm(v, 0.999)
    gs = grad_sup(v)
    assert est.value <= gs * 1.001
    assert est.value > 0.98 * gs


@given(st.integers(min_value=0, max_value=50))
@settings(max_examples=15, deadline=None)
def test_seminorm_scales_linearly(seed):
    g = GridSpec(1, 64, TWO_PI)
    v = make_trig_field(g, seed=seed, kmax=4, amplitude=1.0)
    a = holder_seminorm(v, 0.5).value
    b = holder_seminorm(v * 3.0, 0.5).value
    assert b == pytest.approx(3 * a, rel=1e-12)


def test_seminorm_monotone_in_pairs(grid1d, random_field):
    # more strata never lowers the sampled value
    vals = np.stack([c.values for c in random_field.components])
    lo = iso_seminorm_array(vals, grid1d, 0.5, seed=0, per_stratum=2)
    hi = iso_seminorm_array(vals, grid1d, 0.5, seed=0, per_stratum=8)
    assert hi.value >= lo.value - 1e-15


def test_parabolic_equals_iso_for_static_trajectory(grid1d, random_field):
    frames = tuple(random_field for _ in range(4))
    traj = Trajectory(grid1d, 0.0, 0.1, frames)
    par = holder_seminorm(traj, 0.5).value
    vals = np.stack([c.values for c in random_field.components])
    iso = iso_seminorm_array(vals, grid1d, 0.5, seed=0).value
    assert par == pytest.approx(iso, rel=1e-12)


def test_k_constants_sin_closed_form(grid1d, sin_field):
    kc = compute_k_constants(sin_field, ZeroForcing(grid1d), t=0.5, c=1.0, alpha=0.5)
    assert kc.K0 == pytest.approx(1.0, abs=1e-12)
    assert kc.K1 == pytest.approx(1.0, abs=1e-12)
    # K2 = ||hess u0|| + ||u0|| ||grad u0|| = 1 + 1 = 2 (g = 0)
    assert kc.K2 == pytest.approx(2.0, abs=1e-12)
    s = holder_seminorm(sin_field, 0.5).value
    assert kc.K2plusAlpha == pytest.approx(s, rel=1e-12)
    base = kc.K0**2 + kc.K1 + kc.K2 ** (2 / 3) + kc.K2plusAlpha ** (2 / 3.5)
    assert kc.K == pytest.approx(base, rel=1e-12)


def test_k_constants_time_independent_without_forcing(grid1d, random_field):
    a = compute_k_constants(random_field, ZeroForcing(grid1d), t=0.1)
    b = compute_k_constants(random_field, ZeroForcing(grid1d), t=2.0)
    assert a.K == b.K and a.K0 == b.K0 and a.K2 == b.K2


def test_k_constants_grow_with_forcing(grid1d, random_field):
    g = TrigForcing(grid1d, seed=9, kmax=2, amplitude=0.5)
    a = compute_k_constants(random_field, g, t=0.1)
    b = compute_k_constants(random_field, g, t=1.0)
    assert b.K0 > a.K0
    assert b.K >= a.K


def test_k_constants_json_keys(grid1d, sin_field):
    kc = compute_k_constants(sin_field, ZeroForcing(grid1d), t=0.5)
    d = json.loads(kc.to_json())
    assert set(d) == {"t", "c", "alpha", "nu", "K0", "K1", "K2", "K2alpha", "K"}


def test_k_constants_at_c_rescaling(grid1d, sin_field):
    kc = compute_k_constants(sin_field, ZeroForcing(grid1d), t=0.5, c=1.0)
    k2 = kc.at_c(2.0)
    assert k2.K == pytest.approx(4.0 * kc.base, rel=1e-12)
    assert k2.Kbar == pytest.approx(8.0 * kc.base, rel=1e-12)


def test_k_constants_require_c_at_least_one():
    with pytest.raises(ValueError):
        KConstants(t=1.0, c=0.5, alpha=0.5, nu=1.0, K0=0, K1=0, K2=0, K2plusAlpha=0, K=0)


def test_interpolation_gap_constant_field(grid1d):
    v = VectorField.constant(grid1d, [1.0])
    assert interpolation_gap(v, 0.5, "space") == pytest.approx(0.0, abs=1e-14)


def test_interpolation_gap_space_nonnegative():
    g = GridSpec(1, 64, TWO_PI)
    for seed in range(40):
        u = make_trig_field(g, seed=seed, kmax=8, amplitude=1.0)
        assert interpolation_gap(u, 0.5, "space") >= -1e-10 * sup_norm(u)


def test_interpolation_gap_spacetime_nonnegative(grid1d):
    for seed in range(10):
        u = make_trig_field(grid1d, seed=seed, kmax=6, amplitude=1.0)
        frames = tuple(heat_apply(u, 0.02 * k) for k in range(5))
        traj = Trajectory(grid1d, 0.0, 0.02, frames)
        assert interpolation_gap(traj, 0.5, "spacetime") >= -1e-10 * sup_norm(u)


def test_k_scaling_covariance():
    # u0 -> lam*u0 with x -> x/lam (grid L -> L/lam): K0 scales by lam, K by lam^2
    lam = 2.0
    g1 = GridSpec(1, 128, TWO_PI)
    g2 = GridSpec(1, 128, TWO_PI / lam)
    x1 = g1.axis_coords()
    u1 = VectorField.from_arrays(g1, [np.sin(x1)])
    x2 = g2.axis_coords()
    u2 = VectorField.from_arrays(g2, [lam * np.sin(lam * x2)])
    a = compute_k_constants(u1, ZeroForcing(g1), t=0.5, alpha=0.5)
    b = compute_k_constants(u2, ZeroForcing(g2), t=0.5 / lam**2, alpha=0.5)
    assert b.K0 == pytest.approx(lam * a.K0, rel=1e-10)
    assert b.K == pytest.approx(lam**2 * a.K, rel=2e-2)  # seminorm term sampled


def test_sin_seminorm_feeds_k2alpha(grid1d, sin_field):
    kc = compute_k_constants(sin_field, ZeroForcing(grid1d), t=0.25, alpha=0.5)
    direct = holder_seminorm(sin_field, 0.5).value
    assert kc.K2plusAlpha == pytest.approx(direct, rel=1e-12)
