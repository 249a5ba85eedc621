"""Replicator flow integration in log-simplex coordinates.

The replicator field on the simplex is x_i' = x_i (Ax)_i.  Integrating
x directly risks stepping through the boundary; in log coordinates
u = log x the field becomes u' = A softmax(u) and the state space is all
of R^n, with softmax(u) interior and unit-sum by construction.  For a
skew matrix the mean payoff x'Ax vanishes, so logsumexp(u) is conserved
by the exact flow; after each accepted step the gauge is renormalized,
u <- u - logsumexp(u), which keeps x = exp(u) literally.

Relative entropy with respect to any interior equilibrium z,

    phi_z(x) = - sum_i z_i log(x_i / z_i),

is a first integral of the flow.  Its numerical drift is the integration
quality signal everything downstream trusts, so :func:`integrate` can
watch a set of monitor points and abort past a drift budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _rk
from .errors import DriftBudgetExceeded, PreconditionFailed
from .payoff import PayoffMatrix


def softmax(u: np.ndarray) -> np.ndarray:
    m = u.max(axis=-1, keepdims=True)
    e = np.exp(u - m)
    return e / e.sum(axis=-1, keepdims=True)


def check_simplex_point(x, atol: float = 1e-9,
                        require_interior: bool = False) -> np.ndarray:
    """Validate and return x as a float simplex point.

    Coordinates must be nonnegative (positive when interior is required)
    and sum to one within ``atol``.  The returned copy is renormalized
    to unit sum exactly (to rounding).
    """
    p = np.asarray(x, dtype=float).copy()
    if p.ndim != 1:
        raise PreconditionFailed("a simplex point is a 1-d vector")
    if require_interior:
        if not np.all(p > 0):
            raise PreconditionFailed(f"point {p.tolist()} is not interior")
    elif not np.all(p >= 0):
        raise PreconditionFailed(f"point {p.tolist()} has a negative "
                                 "coordinate")
    s = float(p.sum())
    if abs(s - 1.0) > atol:
        raise PreconditionFailed(f"coordinates sum to {s!r}, not 1")
    return p / s


def _as_array(M) -> np.ndarray:
    if isinstance(M, PayoffMatrix):
        return M.array
    return np.asarray(M, dtype=float)


def vector_field(M, x) -> np.ndarray:
    """Replicator field x * (Ax) at one simplex point."""
    A = _as_array(M)
    p = np.asarray(x, dtype=float)
    return p * (A @ p)


def phi(x, z) -> float:
    """Relative entropy -sum z_i log(x_i / z_i).

    Defined for interior x; coordinates where z_i = 0 contribute
    nothing.  Strictly convex in x with minimum 0 at x = z, and tends to
    infinity as x approaches a part of the boundary that z does not
    share, which is what makes joint level sets compact.
    """
    xv = np.asarray(x, dtype=float)
    zv = np.asarray(z, dtype=float)
    mask = zv > 0
    if np.any(xv[mask] <= 0):
        raise PreconditionFailed(
            "phi needs positive shares wherever z is supported")
    return float(-(zv[mask] * np.log(xv[mask] / zv[mask])).sum())


def phi_gradient(x, z) -> np.ndarray:
    """Gradient of phi_z at x, which is -z / x."""
    xv = np.asarray(x, dtype=float)
    zv = np.asarray(z, dtype=float)
    return -zv / xv


@dataclass
class Trajectory:
    """Accepted integration nodes plus dense evaluation between them.

    ``ts``, ``us``, ``fs`` hold time, log state, and log-space
    derivative at every accepted step (including t0).  Dense evaluation
    is cubic Hermite on the bracketing step.
    """

    A: np.ndarray
    ts: np.ndarray
    us: np.ndarray
    fs: np.ndarray
    naccept: int
    nreject: int
    rtol: float
    atol: float
    monitors: tuple = ()
    drift: dict = field(default_factory=dict)

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])

    @property
    def xs(self) -> np.ndarray:
        return softmax(self.us)

    def u_at(self, t):
        """Dense log-state at scalar time t inside the integrated range."""
        ts = self.ts
        k = int(np.searchsorted(ts, t, side="right")) - 1
        k = min(max(k, 0), len(ts) - 2)
        return _rk.hermite(float(t), ts[k], ts[k + 1], self.us[k],
                           self.us[k + 1], self.fs[k], self.fs[k + 1])

    def x_at(self, t) -> np.ndarray:
        return softmax(self.u_at(t))

    def sample(self, dt: float):
        """Uniform grid (ts, xs) with spacing dt, endpoint included."""
        n = int(round(self.t_end / dt))
        grid = np.arange(n + 1) * dt
        if grid[-1] > self.t_end:
            grid[-1] = self.t_end
        xs = np.empty((len(grid), self.us.shape[1]))
        k = 0
        ts = self.ts
        for idx, t in enumerate(grid):
            while k < len(ts) - 2 and ts[k + 1] < t:
                k += 1
            u = _rk.hermite(float(t), ts[k], ts[k + 1], self.us[k],
                            self.us[k + 1], self.fs[k], self.fs[k + 1])
            xs[idx] = softmax(u)
        return grid, xs


def default_drift_budget(rtol: float, t_end: float, A: np.ndarray) -> float:
    """100 * rtol * t_end * |A|_inf, floored at 100 * rtol."""
    norm = float(np.abs(A).sum(axis=1).max())
    return 100.0 * rtol * max(1.0, t_end) * max(1.0, norm)


def integrate(M, x0, t_end: float, rtol: float = 1e-10,
              atol: float = 1e-12, monitors: Sequence = (),
              drift_budget: float | None = None, h0: float | None = None,
              max_step: float = np.inf) -> Trajectory:
    """Integrate the replicator flow from an interior point.

    Parameters
    ----------
    M : PayoffMatrix or array-like
        Payoff matrix; any order n >= 2 (boundary subsystems reuse this).
    x0 : array-like
        Strictly interior simplex point of matching dimension.
    monitors : sequence of (label, z)
        Interior or boundary equilibria whose relative entropy is
        checked at every accepted node.  If any drifts beyond
        ``drift_budget`` (default :func:`default_drift_budget`),
        DriftBudgetExceeded is raised; the monitor values end up in
        ``Trajectory.drift``.

    Raises
    ------
    StepSizeUnderflow
        When the controller cannot resolve the flow above the minimum
        step (state heading into the boundary too fast).
    DriftBudgetExceeded
        See above; signals the tolerance was too loose for this run.
    """
    A = _as_array(M)
    n = A.shape[0]
    p = check_simplex_point(x0, require_interior=True)
    if p.size != n:
        raise PreconditionFailed(f"x0 has {p.size} coordinates, matrix "
                                 f"order is {n}")
    if t_end <= 0:
        raise PreconditionFailed("t_end must be positive")

    def fun(u):
        return softmax(u) @ A.T

    def project(u):
        m = u.max()
        return u - (m + np.log(np.exp(u - m).sum()))

    mon = [(str(label), check_simplex_point(z)) for (label, z) in monitors]
    base = [phi(p, z) for (_, z) in mon]
    budget = drift_budget
    if budget is None:
        budget = default_drift_budget(rtol, t_end, A)

    stepper = _rk.DormandPrince54(fun, 0.0, project(np.log(p)), rtol, atol,
                                  project=project, h0=h0, max_step=max_step)
    ts = [0.0]
    us = [stepper.u.copy()]
    fs = [stepper.f.copy()]
    drift = {label: 0.0 for (label, _) in mon}
    while stepper.t < t_end:
        _, _, _, t_new, u_new, f_new = stepper.step(t_end)
        ts.append(t_new)
        us.append(u_new.copy())
        fs.append(f_new.copy())
        if mon:
            x_new = softmax(u_new)
            for (label, z), p0 in zip(mon, base):
                d = abs(phi(x_new, z) - p0)
                if d > drift[label]:
                    drift[label] = d
                if d > budget:
                    raise DriftBudgetExceeded(
                        f"monitor {label!r} drifted {d:.3e} past budget "
                        f"{budget:.3e} at t = {t_new:.6g}",
                        label=label, drift=d, budget=budget, t=t_new)
    return Trajectory(A=A, ts=np.array(ts), us=np.array(us),
                      fs=np.array(fs), naccept=stepper.naccept,
                      nreject=stepper.nreject, rtol=rtol, atol=atol,
                      monitors=tuple((l, z.copy()) for (l, z) in mon),
                      drift=dict(drift))


def phi_drift(traj: Trajectory, z) -> float:
    """Max deviation of phi_z from its initial value over accepted nodes."""
    zv = check_simplex_point(z)
    xs = traj.xs
    mask = zv > 0
    vals = -(zv[mask] * np.log(xs[:, mask] / zv[mask])).sum(axis=1)
    return float(np.abs(vals - vals[0]).max())
