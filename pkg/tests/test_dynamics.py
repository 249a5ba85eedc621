"""Vector field, conserved quantities, and the log-coordinate integrator.

The integrator is cross-checked against a plain fixed-step RK4 in share
coordinates (tests/oracles.py) on a short horizon, and against itself
under time reversal on a longer one.
"""

import numpy as np
import pytest

from replicator4 import (DriftBudgetExceeded, PayoffMatrix,
                         PreconditionFailed, canonical_matrix, integrate,
                         kernel_line_section, phi, phi_drift, vector_field)
from replicator4.dynamics import check_simplex_point
from oracles import rk4_shares

X0 = np.array([0.4, 0.3, 0.2, 0.1])


def test_vector_field_frozen_value(MV):
    f = vector_field(MV, [0.4, 0.1, 0.3, 0.2])
    assert np.allclose(f, [0.04, -0.01, -0.09, 0.06], atol=1e-15)


def test_vector_field_vanishes_at_equilibria(MIV):
    z = np.array([0.5, 1 / 6, 1 / 6, 1 / 6])
    assert np.abs(vector_field(MIV, z)).max() <= 1e-16
    for i in range(4):
        e = np.zeros(4)
        e[i] = 1.0
        assert np.abs(vector_field(MIV, e)).max() == 0.0


def test_vector_field_mass_conservation(rng):
    # skewness keeps the field tangent to the simplex
    for name in ("I", "II", "III", "IV", "V"):
        A = canonical_matrix(name).array
        xs = rng.dirichlet(np.ones(4), size=10_000)
        f = xs * (xs @ A.T)
        assert np.abs(f.sum(axis=1)).max() <= 1e-14


def test_phi_minimum_and_frozen_value():
    z = np.full(4, 0.25)
    assert phi(z, z) == 0.0
    x = np.array([0.5, 1 / 6, 1 / 6, 1 / 6])
    expected = -(0.25 * np.log(2.0) + 0.75 * np.log(2.0 / 3.0))
    assert phi(x, z) == pytest.approx(expected, abs=1e-15)
    assert f"{phi(x, z):.6f}" == "0.130812"


def test_phi_monotone_blowup_toward_boundary():
    z = np.full(4, 0.25)
    vals = []
    for eps in (0.2, 0.1, 0.01, 1e-4, 1e-8):
        x = np.array([eps, 1 - eps - 0.4, 0.2, 0.2])
        vals.append(phi(x, z))
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 4.0


def test_phi_rejects_boundary_argument():
    z = np.full(4, 0.25)
    with pytest.raises(PreconditionFailed):
        phi([0.0, 0.5, 0.3, 0.2], z)


def test_phi_masks_unsupported_coordinates():
    z = np.array([0.5, 0.5, 0.0, 0.0])
    x = np.array([0.25, 0.25, 0.5, 0.0])
    # x4 = 0 is fine: z puts no weight there
    assert np.isfinite(phi(x, z))


def test_check_simplex_point_contracts():
    with pytest.raises(PreconditionFailed):
        check_simplex_point([0.5, 0.5, 0.1, -0.1])
    with pytest.raises(PreconditionFailed):
        check_simplex_point([0.5, 0.5, 0.5, 0.5])
    with pytest.raises(PreconditionFailed):
        check_simplex_point([0.0, 0.5, 0.3, 0.2], require_interior=True)
    p = check_simplex_point([0.4, 0.3, 0.2, 0.1])
    assert p.sum() == pytest.approx(1.0, abs=1e-12)


def test_integrate_constant_at_equilibrium(MIV):
    z = np.array([0.5, 1 / 6, 1 / 6, 1 / 6])
    traj = integrate(MIV, z, 10.0, monitors=[("z", z)])
    assert np.abs(traj.xs - z).max() <= 1e-12
    assert traj.drift["z"] <= 1e-12


def test_integrate_matches_fixed_step_oracle(MI):
    traj = integrate(MI, X0, 5.0, rtol=1e-12, atol=1e-14)
    ref = rk4_shares(MI.array, X0, 5.0, 1e-4)
    assert np.abs(traj.x_at(5.0) - ref).max() <= 1e-9


def test_interior_minimum_stays_bounded(MI):
    traj = integrate(MI, [0.1, 0.3, 0.3, 0.3], 50.0, rtol=1e-8)
    ts, xs = traj.sample(0.05)
    assert xs.min() >= 1e-3


def test_nonpermanent_matrix_decays():
    bumped = PayoffMatrix.from_upper([0, 1, -1, -1, 2, 0])
    traj = integrate(bumped, np.full(4, 0.25), 200.0, rtol=1e-8)
    assert traj.x_at(200.0).min() <= 1e-4


def test_unit_mass_and_positivity_along_flow(MI):
    traj = integrate(MI, X0, 100.0, rtol=1e-10)
    assert np.abs(traj.xs.sum(axis=1) - 1.0).max() <= 1e-12
    assert traj.xs.min() > 0.0
    assert np.all(np.diff(traj.ts) > 0)


def test_time_reversal_returns_home(MI):
    traj = integrate(MI, X0, 20.0, rtol=1e-10)
    x1 = traj.x_at(20.0)
    neg = PayoffMatrix.from_rows([[-v for v in row] for row in MI.rows],
                                 exact=True)
    back = integrate(neg, x1, 20.0, rtol=1e-10)
    assert np.abs(back.x_at(20.0) - X0).max() <= 1e-6


def test_phi_drift_over_five_periods(MIV):
    # the orbit of X0 has period near 20.4; five of them
    section = kernel_line_section(MIV)
    z = np.asarray(section.midpoint(), dtype=float)
    traj = integrate(MIV, X0, 102.0, rtol=1e-10, monitors=[("z", z)])
    assert traj.drift["z"] <= 1e-8
    assert phi_drift(traj, z) <= 1e-8


def test_phi_drift_scales_with_tolerance(MIV):
    section = kernel_line_section(MIV)
    z = np.asarray(section.midpoint(), dtype=float)
    loose = integrate(MIV, X0, 102.0, rtol=1e-6, atol=1e-9,
                      monitors=[("z", z)])
    assert loose.drift["z"] <= 1e-4


def test_drift_budget_enforced(MIV):
    section = kernel_line_section(MIV)
    z = np.asarray(section.midpoint(), dtype=float)
    with pytest.raises(DriftBudgetExceeded) as exc:
        integrate(MIV, X0, 102.0, rtol=1e-6, atol=1e-9,
                  monitors=[("z", z)], drift_budget=1e-12)
    assert exc.value.label == "z"
    assert exc.value.drift > exc.value.budget


def test_dense_output_consistency(MI):
    traj = integrate(MI, X0, 10.0, rtol=1e-10)
    # dense evaluation reproduces the stored nodes exactly
    k = len(traj.ts) // 2
    assert np.abs(traj.x_at(traj.ts[k]) - traj.xs[k]).max() <= 1e-14
    ts, xs = traj.sample(0.25)
    assert ts[0] == 0.0 and ts[-1] == pytest.approx(10.0)
    assert np.abs(xs[0] - X0).max() <= 1e-12


def test_integrate_rejects_boundary_start(MI):
    with pytest.raises(PreconditionFailed):
        integrate(MI, [0.0, 0.5, 0.3, 0.2], 1.0)
