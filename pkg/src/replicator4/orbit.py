"""Certification of interior trajectories as periodic orbits.

Interior trajectories of a permanent conservative game lie on joint
level sets of two independent relative entropies and are closed curves.
Certification is numerical and split in three:

1. pick two reference equilibria z', z'' on the segment K whose
   entropies cut the trajectory transversally (the level-set Jacobian
   keeps a safe smallest singular value along the orbit),
2. detect the first return to a Poincare section through the start
   point and refine it on dense output until the state closes to
   within ``closure_tol``,
3. probe Lyapunov stability: perturbed starts must stay inside a thin
   tube around the certified orbit for three periods while the
   quadratic level-set function V barely moves.

The section's normal is the initial velocity, so the section is
transversal at the start by construction; returns are detected as
upward sign changes of the section coordinate after the orbit has gone
properly to the far side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import Trajectory, integrate, phi, phi_gradient, softmax, \
    vector_field
from .errors import (EquilibriumStart, NoClosureFound, PreconditionFailed,
                     ProbeEscaped, SelectionExhausted)
from .kernelgeom import NullLineSection, distance_to_K
from . import _rk

#: fixed orthonormal basis of the sum-zero hyperplane in R^4 (columns)
TANGENT_BASIS = np.array([
    [1 / np.sqrt(2), 1 / np.sqrt(6), 1 / np.sqrt(12)],
    [-1 / np.sqrt(2), 1 / np.sqrt(6), 1 / np.sqrt(12)],
    [0.0, -2 / np.sqrt(6), 1 / np.sqrt(12)],
    [0.0, 0.0, -3 / np.sqrt(12)],
])

_CANDIDATES = (0.25, 0.75, 0.4, 0.6, 0.3, 0.7, 0.2, 0.8,
               0.45, 0.55, 0.35, 0.65, 0.15, 0.85, 0.1, 0.9)


@dataclass(frozen=True)
class ReferencePair:
    """Two reference equilibria z(c1), z(c2) on K with their margin.

    ``margin`` is the smallest singular value, along a short arc of the
    actual trajectory, of the 2x3 Jacobian of (phi_z', phi_z'')
    restricted to the simplex tangent plane.  A healthy margin means the
    two entropies are independent constraints near the orbit.
    """

    z1: np.ndarray
    z2: np.ndarray
    c1: float
    c2: float
    margin: float


@dataclass
class StabilityProbe:
    delta: float
    n_probes: int
    max_tube_distance: float
    v_drift_max: float
    probes: tuple
    escaped: tuple

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "n_probes": self.n_probes,
            "max_tube_distance": self.max_tube_distance,
            "v_drift_max": self.v_drift_max,
            "escaped": list(self.escaped),
            "probes": [dict(p) for p in self.probes],
        }


@dataclass
class OrbitReport:
    """Everything the certification produced for one start point."""

    x0: np.ndarray
    period: float
    closure_residual: float
    time_average: np.ndarray
    avg_distance_to_K: float | None
    phi_drift: dict
    refs: ReferencePair | None
    rtol: float
    stability: StabilityProbe | None = None
    sample_ts: np.ndarray = field(default=None, repr=False)
    orbit_samples: np.ndarray = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "x0": [float(v) for v in self.x0],
            "period": self.period,
            "closure_residual": self.closure_residual,
            "time_average": [float(v) for v in self.time_average],
            "avg_distance_to_K": self.avg_distance_to_K,
            "phi_drift": {k: float(v) for k, v in self.phi_drift.items()},
            "rtol": self.rtol,
            "stability": self.stability.to_json() if self.stability
            else None,
        }


def _phi_values(xs: np.ndarray, z: np.ndarray) -> np.ndarray:
    mask = z > 0
    return -(z[mask] * np.log(xs[:, mask] / z[mask])).sum(axis=1)


def select_reference_points(M, section: NullLineSection, x0,
                            arc_time: float = 2.0, arc_rtol: float = 1e-8,
                            skip_tol: float = 1e-6,
                            margin_tol: float = 1e-8,
                            candidates: Sequence[float] = _CANDIDATES
                            ) -> ReferencePair:
    """Choose z' = z(1/2) and a transversal partner z'' on K.

    The forbidden parameter values are where a candidate's entropy
    cannot separate x0 from the two points where the phi_z' level set
    of x0 meets K; the map c -> phi_z(c)(x0) - phi_z(c)(alpha) is affine
    in c, so each intersection alpha rules out at most one root.
    Candidates near a root (or near 1/2 itself) are skipped, the rest
    are ranked by trying them in order and accepting the first whose
    margin along a short integrated arc clears ``margin_tol``.

    Raises
    ------
    PreconditionFailed
        If x0 is not interior or sits on K (no orbit to certify).
    SelectionExhausted
        If every candidate is skipped or fails the margin.
    """
    p = np.asarray(x0, dtype=float)
    if not np.all(p > 0):
        raise PreconditionFailed("x0 must be interior")
    if distance_to_K(p, section) <= 1e-8:
        raise PreconditionFailed("x0 lies on the equilibrium segment; "
                                 "there is no orbit through it")
    zm, zp = section.as_array()

    def z_of(c: float) -> np.ndarray:
        return (1.0 - c) * zm + c * zp

    z1 = z_of(0.5)
    target = phi(p, z1)

    def g(c: float) -> float:
        return phi(z_of(c), z1) - target

    def bracket_root(c_in: float, c_out_start: float, shrink_toward: float
                     ) -> float:
        # walk c_out toward the endpoint until g changes sign, then bisect
        c_out = c_out_start
        for _ in range(60):
            if g(c_out) > 0:
                break
            c_out = shrink_toward + (c_out - shrink_toward) * 0.5
        else:
            raise PreconditionFailed(
                "could not bracket the level-set intersection with K")
        lo, hi = (c_out, c_in) if c_out < c_in else (c_in, c_out)
        # g(lo) and g(hi) have opposite signs by construction
        glo = g(lo)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            gm = g(mid)
            if (gm > 0) == (glo > 0):
                lo, glo = mid, gm
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        return 0.5 * (lo + hi)

    c_alpha = (bracket_root(0.5, 0.25, 0.0), bracket_root(0.5, 0.75, 1.0))

    # forbidden c: phi_z(c) cannot separate x0 from alpha
    lx = np.log(p)
    bad = []
    for ca in c_alpha:
        alpha = z_of(ca)
        la = np.log(alpha)
        pc0 = float(-(zm * (lx - la)).sum())
        pc1 = float(-(zp * (lx - la)).sum())
        q = pc1 - pc0
        if abs(q) > 1e-14:
            root = -pc0 / q
            if 0.0 < root < 1.0:
                bad.append(root)

    arc = integrate(M, p, arc_time, rtol=arc_rtol, atol=1e-11)
    xs_arc = softmax(arc.us)
    grad1 = (-z1 / xs_arc) @ TANGENT_BASIS

    for c in candidates:
        if abs(c - 0.5) < skip_tol:
            continue
        if any(abs(c - b) < skip_tol for b in bad):
            continue
        z2 = z_of(c)
        grad2 = (-z2 / xs_arc) @ TANGENT_BASIS
        margin = np.inf
        for g1, g2 in zip(grad1, grad2):
            s = np.linalg.svd(np.stack((g1, g2)), compute_uv=False)
            if s[-1] < margin:
                margin = float(s[-1])
        if margin > margin_tol:
            return ReferencePair(z1=z1, z2=z2, c1=0.5, c2=float(c),
                                 margin=margin)
    raise SelectionExhausted(
        f"no candidate among {len(candidates)} cleared margin "
        f"{margin_tol:.1e} (forbidden roots at {bad})")


def _first_return(ts, ss):
    """Index k of the first upward crossing after the section coordinate
    has visited its minimum, or None."""
    if len(ss) < 3:
        return None
    kmin = int(np.argmin(ss))
    if ss[kmin] >= 0:
        return None
    for k in range(kmin, len(ss) - 1):
        if ss[k] < 0 <= ss[k + 1]:
            return k
    return None


def _scout_period(M, x0, horizon: float, rtol: float = 1e-6) -> float | None:
    """Cheap estimate of the first-return time, or None inside horizon."""
    chunk = 25.0
    t_off = 0.0
    state = np.asarray(x0, dtype=float)
    A = M.array if hasattr(M, "array") else np.asarray(M, float)
    n = state * (A @ state)
    ts_all = []
    ss_all = []
    while t_off < horizon:
        span = min(chunk, horizon - t_off)
        traj = integrate(M, state, span, rtol=rtol, atol=1e-9)
        xs = traj.xs
        start = 1 if t_off > 0 else 0
        ts_all.extend((t_off + traj.ts[start:]).tolist())
        ss_all.extend(((xs[start:] - x0) @ n).tolist())
        k = _first_return(np.array(ts_all), np.array(ss_all))
        if k is not None:
            t0, t1 = ts_all[k], ts_all[k + 1]
            s0, s1 = ss_all[k], ss_all[k + 1]
            return t0 + (t1 - t0) * (-s0) / (s1 - s0)
        state = xs[-1] / xs[-1].sum()
        t_off += span
    return None


def detect_period(M, x0, section: NullLineSection | None = None,
                  refs: ReferencePair | None = None, rtol: float = 1e-10,
                  atol: float = 1e-12, closure_tol: float = 1e-6,
                  horizon: float = 200.0, n_samples: int = 2048
                  ) -> OrbitReport:
    """Certify the trajectory through x0 as a closed orbit.

    A scout pass at loose tolerance brackets the first return, then a
    single integration at the requested tolerance carries the orbit just
    past it; the crossing is refined by bisection on cubic Hermite dense
    output.  The report carries the period, the closure residual
    |x(T) - x0|, the trapezoid time average with its distance to K, and
    the monitored entropy drifts.

    Raises
    ------
    EquilibriumStart
        If the field at x0 is numerically zero.
    NoClosureFound
        If no return closes within ``closure_tol`` inside the horizon;
        the best candidate period and residual ride on the exception.
    """
    p = np.asarray(x0, dtype=float)
    f0 = vector_field(M, p)
    if float(np.abs(f0).max()) <= 1e-12:
        raise EquilibriumStart(f"field at {p.tolist()} is numerically zero")

    t_approx = _scout_period(M, p, horizon)
    if t_approx is None:
        raise NoClosureFound(
            f"no section return inside horizon {horizon}")
    t_run = min(horizon, max(1.05 * t_approx, t_approx + 0.5))

    monitors = []
    if refs is not None:
        monitors = [("z1", refs.z1), ("z2", refs.z2)]
    traj = integrate(M, p, t_run, rtol=rtol, atol=atol, monitors=monitors)

    xs = traj.xs
    ss = (xs - p) @ f0
    k = _first_return(traj.ts, ss)
    if k is None:
        raise NoClosureFound(
            f"scout predicted a return near t = {t_approx:.6g} but the "
            "refined run shows none", candidate_period=t_approx)

    lo, hi = float(traj.ts[k]), float(traj.ts[k + 1])
    tk, tk1 = traj.ts[k], traj.ts[k + 1]
    uk, uk1, fk, fk1 = traj.us[k], traj.us[k + 1], traj.fs[k], traj.fs[k + 1]
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        um = _rk.hermite(mid, tk, tk1, uk, uk1, fk, fk1)
        if float((softmax(um) - p) @ f0) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, hi):
            break
    period = 0.5 * (lo + hi)
    x_close = softmax(_rk.hermite(period, tk, tk1, uk, uk1, fk, fk1))
    residual = float(np.linalg.norm(x_close - p))
    if residual > closure_tol:
        raise NoClosureFound(
            f"first return at t = {period:.6g} misses x0 by {residual:.3e} "
            f"(tolerance {closure_tol:.1e})",
            candidate_period=period, candidate_residual=residual)

    grid = np.linspace(0.0, period, n_samples + 1)
    samples = np.empty((len(grid), p.size))
    kk = 0
    for idx, t in enumerate(grid):
        while kk < len(traj.ts) - 2 and traj.ts[kk + 1] < t:
            kk += 1
        u = _rk.hermite(float(t), traj.ts[kk], traj.ts[kk + 1],
                        traj.us[kk], traj.us[kk + 1],
                        traj.fs[kk], traj.fs[kk + 1])
        samples[idx] = softmax(u)
    w = np.ones(len(grid))
    w[0] = w[-1] = 0.5
    x_avg = (w[:, None] * samples).sum(axis=0) / w.sum()
    dist = distance_to_K(x_avg, section) if section is not None else None

    return OrbitReport(
        x0=p, period=float(period), closure_residual=residual,
        time_average=x_avg, avg_distance_to_K=dist,
        phi_drift=dict(traj.drift), refs=refs, rtol=rtol,
        sample_ts=grid, orbit_samples=samples)


def _min_distance_to_samples(points: np.ndarray,
                             ref: np.ndarray) -> np.ndarray:
    """For each row of ``points``, min euclidean distance to ``ref`` rows."""
    out = np.empty(len(points))
    block = 256
    for s in range(0, len(points), block):
        chunk = points[s:s + block]
        d2 = ((chunk[:, None, :] - ref[None, :, :]) ** 2).sum(axis=2)
        out[s:s + block] = np.sqrt(d2.min(axis=1))
    return out


def stability_probe(M, report: OrbitReport, refs: ReferencePair,
                    delta: float = 1e-3, n_probes: int = 16, seed: int = 0,
                    rtol: float = 1e-10, atol: float = 1e-12,
                    acceptance_factor: float = 50.0,
                    samples_per_period: int = 512) -> StabilityProbe:
    """Integrate perturbed starts for three periods and measure escape.

    Perturbations are ``delta`` times random unit vectors in the simplex
    tangent plane (seeded, reproducible).  For each probe the report
    records the worst distance to the certified orbit's sample cloud and
    the drift of V(x) = (phi_z'(x) - c')^2 + (phi_z''(x) - c'')^2, whose
    level c', c'' values are pinned at the unperturbed start.

    Raises
    ------
    PreconditionFailed
        If some perturbed start leaves the open simplex (delta too
        large for this orbit's clearance).
    ProbeEscaped
        If a probe's tube distance exceeds ``acceptance_factor * delta``.
        The full probe record is attached to the exception.
    """
    x0 = report.x0
    T = report.period
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n_probes, TANGENT_BASIS.shape[1]))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    dirs = g @ TANGENT_BASIS.T

    c1 = phi(x0, refs.z1)
    c2 = phi(x0, refs.z2)
    # The tube distance is measured against a discrete sample cloud, so
    # even an unperturbed start sits a fraction of one sample gap away
    # from it.  Allow that much on top of the acceptance bound, else
    # delta = 0 would be rejected on discretization noise alone.
    gaps = np.linalg.norm(np.diff(report.orbit_samples, axis=0), axis=1)
    slack = float(gaps.max(initial=0.0))
    records = []
    escaped = []
    max_tube = 0.0
    max_vdrift = 0.0
    for k in range(n_probes):
        start = x0 + delta * dirs[k]
        if not np.all(start > 0):
            raise PreconditionFailed(
                f"probe {k} start leaves the simplex; delta = {delta} "
                "is too large for this orbit")
        traj = integrate(M, start, 3.0 * T, rtol=rtol, atol=atol)
        _, xs = traj.sample(3.0 * T / (3 * samples_per_period))
        v = ((_phi_values(xs, refs.z1) - c1) ** 2
             + (_phi_values(xs, refs.z2) - c2) ** 2)
        v_drift = float(np.abs(v - v[0]).max())
        tube = float(_min_distance_to_samples(xs, report.orbit_samples).max())
        records.append({"probe": k, "v0": float(v[0]),
                        "v_drift": v_drift, "tube_distance": tube})
        max_tube = max(max_tube, tube)
        max_vdrift = max(max_vdrift, v_drift)
        if tube > acceptance_factor * delta + slack:
            escaped.append(k)
    probe = StabilityProbe(delta=delta, n_probes=n_probes,
                           max_tube_distance=max_tube,
                           v_drift_max=max_vdrift,
                           probes=tuple(records), escaped=tuple(escaped))
    if escaped:
        raise ProbeEscaped(
            f"{len(escaped)} of {n_probes} probes left the "
            f"{acceptance_factor} * delta tube", probe=probe)
    return probe
