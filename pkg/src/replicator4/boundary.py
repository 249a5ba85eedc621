"""Boundary behaviour: what happens on faces and edges, and checking it.

The boundary of the simplex is invariant under the replicator flow, and
for a singular conservative game every face and edge restriction is
again a (smaller) conservative game.  The outcomes are read directly off
the sign structure:

* an edge with a_ij = 0 consists of equilibria; otherwise the flow runs
  to the winner's vertex (a_ij > 0 means strategy i gains against j, so
  x_i -> 1 on that edge),
* a face whose induced tournament is a 3-cycle carries periodic orbits
  around the face equilibrium,
* a transitive tournament face funnels everything to its source vertex,
* a face with one neutral pair {j, k} converges to a point of the edge
  E_jk selected by the third strategy m: if m beats both it wins
  outright; if m beats one and loses to the other, the limit's winning
  coordinate exceeds a_ml / (a_ml - a_mw) (w beats m, m beats l); if m
  loses to both, the limit preserves the start's x_j : x_k ratio, a
  claim that is only measured, not certified,
* a face with two neutral pairs (one strategy neutral on the face)
  preserves that spectator's coordinate and converges to an edge point.

:func:`verify_boundary` turns the prediction table into simulations of
the face and edge subsystems and scores each region.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dynamics import integrate, softmax, vector_field
from .errors import NoClosureFound, PredictionViolated
from .orbit import detect_period
from .payoff import PayoffMatrix, Scalar, format_matrix, scalar_to_json
from .signgraph import build_digraph


@dataclass(frozen=True)
class CoordinatePreserved:
    """Limit keeps the start's coordinate of one strategy."""

    strategy: int

    def to_json(self):
        return {"kind": "coordinate_preserved", "strategy": self.strategy}


@dataclass(frozen=True)
class IntervalMembership:
    """Limit's coordinate of ``strategy`` lies in (lower, 1)."""

    strategy: int
    lower: Scalar

    def to_json(self):
        return {"kind": "interval_membership", "strategy": self.strategy,
                "lower": scalar_to_json(self.lower)}


@dataclass(frozen=True)
class RatioClaimed:
    """Limit is claimed to preserve x_num : x_den; measured only."""

    num: int
    den: int

    def to_json(self):
        return {"kind": "ratio_claimed", "ratio": [self.num, self.den]}


@dataclass(frozen=True)
class EdgeOutcome:
    edge: tuple
    kind: str  # "all_equilibria" or "vertex"
    vertex: int | None = None

    def to_json(self):
        out = {"edge": list(self.edge), "kind": self.kind}
        if self.vertex is not None:
            out["vertex"] = self.vertex
        return out


@dataclass(frozen=True)
class FaceOutcome:
    face: int
    kind: str  # "periodic", "vertex", "edge_point", "all_equilibria"
    vertex: int | None = None
    edge: tuple | None = None
    constraint: object | None = None

    def to_json(self):
        out = {"face": self.face, "kind": self.kind}
        if self.vertex is not None:
            out["vertex"] = self.vertex
        if self.edge is not None:
            out["edge"] = list(self.edge)
        if self.constraint is not None:
            out["constraint"] = self.constraint.to_json()
        return out


@dataclass(frozen=True)
class BoundaryPrediction:
    edges: tuple
    faces: tuple
    equilibria: dict
    unstable_vertices: tuple

    def to_json(self):
        return {
            "edges": [e.to_json() for e in self.edges],
            "faces": [f.to_json() for f in self.faces],
            "equilibria": self.equilibria,
            "unstable_vertices": list(self.unstable_vertices),
        }


@dataclass
class RegionResult:
    region: str
    status: str  # "pass", "fail", "measured"
    predicted: dict
    measured: dict

    def to_json(self):
        return {"region": self.region, "status": self.status,
                "predicted": self.predicted, "measured": self.measured}


@dataclass
class BoundaryReport:
    regions: tuple
    passed: bool
    seed: int
    t_end: float
    rtol: float

    def to_json(self):
        return {
            "regions": {r.region: r.to_json() for r in self.regions},
            "passed": self.passed,
            "seed": self.seed,
            "t_end": self.t_end,
            "rtol": self.rtol,
        }


def _sign(v, exact: bool, atol: float) -> int:
    if exact:
        return 0 if v == 0 else (1 if v > 0 else -1)
    fv = float(v)
    if abs(fv) <= atol:
        return 0
    return 1 if fv > 0 else -1


def face_nodes(i: int) -> tuple:
    """Strategies of face x_i = 0, ascending, 1-based."""
    return tuple(k for k in (1, 2, 3, 4) if k != i)


def face_subsystem(M: PayoffMatrix, i: int) -> PayoffMatrix:
    """Principal 3x3 payoff matrix of the face x_i = 0.

    Row and column order follows :func:`face_nodes`; skewness and
    exactness carry over entry by entry.
    """
    keep = [k - 1 for k in face_nodes(i)]
    return M.submatrix(keep)


def predict_edge(M: PayoffMatrix, i: int, j: int,
                 zero_atol: float = 1e-12) -> EdgeOutcome:
    """Outcome of the flow restricted to edge conv(e_i, e_j)."""
    if i > j:
        i, j = j, i
    s = _sign(M.rows[i - 1][j - 1], M.exact, zero_atol)
    if s == 0:
        return EdgeOutcome(edge=(i, j), kind="all_equilibria")
    return EdgeOutcome(edge=(i, j), kind="vertex",
                       vertex=i if s > 0 else j)


def predict_face(M: PayoffMatrix, i: int,
                 zero_atol: float = 1e-12) -> FaceOutcome:
    """Outcome of the flow on the interior of face x_i = 0.

    Derived from the face's sign structure alone (see the module
    docstring for the case split), so it applies in any labeling.
    """
    p, q, r = face_nodes(i)
    a = M.rows

    def s(m, n):
        return _sign(a[m - 1][n - 1], M.exact, zero_atol)

    pairs = ((p, q), (p, r), (q, r))
    signs = {pair: s(*pair) for pair in pairs}
    zero_pairs = [pair for pair in pairs if signs[pair] == 0]

    if len(zero_pairs) == 0:
        spq, spr, sqr = signs[(p, q)], signs[(p, r)], signs[(q, r)]
        cyclic = (spq == sqr) and (spr == -spq)
        if cyclic:
            return FaceOutcome(face=i, kind="periodic")
        # transitive tournament: the source beats both others
        for src in (p, q, r):
            others = [n for n in (p, q, r) if n != src]
            if all(s(src, n) > 0 for n in others):
                return FaceOutcome(face=i, kind="vertex", vertex=src)
        raise AssertionError("tournament on 3 nodes is cyclic or has "
                             "a source")

    if len(zero_pairs) == 1:
        j, k = zero_pairs[0]
        m = next(n for n in (p, q, r) if n not in (j, k))
        sj, sk = s(m, j), s(m, k)
        if sj > 0 and sk > 0:
            return FaceOutcome(face=i, kind="vertex", vertex=m)
        if sj < 0 and sk < 0:
            return FaceOutcome(face=i, kind="edge_point", edge=(j, k),
                               constraint=RatioClaimed(j, k))
        # chain: w beats m, m beats l; the limit's w-share is bounded
        # below by where the dying strategy's growth rate turns negative
        w = j if sj < 0 else k
        l = k if w == j else j
        aml = a[m - 1][l - 1]
        amw = a[m - 1][w - 1]
        lower = aml / (aml - amw)
        return FaceOutcome(face=i, kind="edge_point", edge=(j, k),
                           constraint=IntervalMembership(w, lower))

    if len(zero_pairs) == 2:
        shared = set(zero_pairs[0]) & set(zero_pairs[1])
        spectator = shared.pop()
        u, v = (n for n in (p, q, r) if n != spectator)
        winner = u if s(u, v) > 0 else v
        edge = tuple(sorted((spectator, winner)))
        return FaceOutcome(face=i, kind="edge_point", edge=edge,
                           constraint=CoordinatePreserved(spectator))

    return FaceOutcome(face=i, kind="all_equilibria")


def unstable_vertices(M: PayoffMatrix, zero_atol: float = 1e-12) -> tuple:
    """Vertices with a repelling incident edge (some a_kj < 0)."""
    out = []
    for k in (1, 2, 3, 4):
        if any(_sign(M.rows[k - 1][j], M.exact, zero_atol) < 0
               for j in range(4) if j != k - 1):
            out.append(k)
    return tuple(out)


def equilibria_description(M: PayoffMatrix,
                           zero_atol: float = 1e-12) -> dict:
    """Structural description of the full equilibrium set.

    Every vertex is an equilibrium; an edge with a_ij = 0 is pointwise
    stationary; interior equilibria form the null segment K when the
    matrix is singular.
    """
    zero_edges = [[i, j] for i in (1, 2, 3) for j in range(i + 1, 5)
                  if _sign(M.rows[i - 1][j - 1], M.exact, zero_atol) == 0]
    return {
        "vertices": [1, 2, 3, 4],
        "equilibrium_edges": zero_edges,
        "interior_segment": bool(M.is_singular()),
    }


def boundary_prediction(M: PayoffMatrix,
                        zero_atol: float = 1e-12) -> BoundaryPrediction:
    """Assemble the full 10-region prediction table."""
    edges = tuple(predict_edge(M, i, j, zero_atol)
                  for i in (1, 2, 3) for j in range(i + 1, 5))
    faces = tuple(predict_face(M, i, zero_atol) for i in (1, 2, 3, 4))
    return BoundaryPrediction(
        edges=edges, faces=faces,
        equilibria=equilibria_description(M, zero_atol),
        unstable_vertices=unstable_vertices(M, zero_atol))


def _edge_region(e: EdgeOutcome) -> str:
    return f"edge:{e.edge[0]}-{e.edge[1]}"


def _face_region(f: FaceOutcome) -> str:
    return f"face:-{f.face}"


def _verify_edge(M, outcome: EdgeOutcome, t_end, rtol, atol,
                 vertex_tol, stationarity_tol) -> RegionResult:
    i, j = outcome.edge
    sub = M.submatrix([i - 1, j - 1]).to_float()
    region = _edge_region(outcome)
    if outcome.kind == "all_equilibria":
        worst_field = 0.0
        worst_drift = 0.0
        for frac in (0.25, 0.5, 0.75):
            x0 = np.array([frac, 1.0 - frac])
            worst_field = max(worst_field,
                              float(np.abs(vector_field(sub, x0)).max()))
            traj = integrate(sub, x0, min(50.0, t_end), rtol=rtol, atol=atol)
            worst_drift = max(worst_drift, float(
                np.abs(traj.xs - x0).max()))
        ok = worst_field <= stationarity_tol and worst_drift <= 1e-9
        return RegionResult(region, "pass" if ok else "fail",
                            outcome.to_json(),
                            {"max_field": worst_field,
                             "max_drift": worst_drift})
    # vertex convergence; start the predicted winner from behind too
    target_pos = 0 if outcome.vertex == i else 1
    worst_share = 1.0
    winners = []
    for frac in (0.2, 0.5, 0.8):
        x0 = np.empty(2)
        x0[target_pos] = frac
        x0[1 - target_pos] = 1.0 - frac
        traj = integrate(sub, x0, t_end, rtol=rtol, atol=atol)
        xT = traj.xs[-1]
        winners.append(int(np.argmax(xT)))
        worst_share = min(worst_share, float(xT[target_pos]))
    ok = (all(w == target_pos for w in winners)
          and worst_share >= 1.0 - vertex_tol)
    return RegionResult(region, "pass" if ok else "fail",
                        outcome.to_json(),
                        {"min_winner_share": worst_share})


def _face_starts(outcome: FaceOutcome, sub: PayoffMatrix, rng,
                 n: int) -> list:
    """Interior starts for one face region.

    Periodic faces jitter the face equilibrium multiplicatively so the
    orbit stays well inside; the rest use a Dirichlet draw biased away
    from the corners.
    """
    if outcome.kind == "periodic":
        A = sub.to_float().rows
        v = np.array([A[1][2], -A[0][2], A[0][1]])
        z = np.abs(v) / np.abs(v).sum()
        starts = []
        for _ in range(n):
            x = z * np.exp(0.3 * rng.standard_normal(3))
            starts.append(x / x.sum())
        return starts
    return [rng.dirichlet((2.0, 2.0, 2.0)) for _ in range(n)]


def _verify_face(M, outcome: FaceOutcome, rng, samples, t_end, rtol, atol,
                 off_edge_tol, constraint_tol, vertex_tol, closure_tol,
                 stationarity_tol) -> RegionResult:
    region = _face_region(outcome)
    nodes = face_nodes(outcome.face)
    sub = face_subsystem(M, outcome.face).to_float()
    pos = {s: k for k, s in enumerate(nodes)}
    starts = _face_starts(outcome, sub, rng, samples)

    if outcome.kind == "periodic":
        worst = 0.0
        periods = []
        for x0 in starts:
            try:
                rep = detect_period(sub, x0, rtol=max(rtol, 1e-10),
                                    atol=atol, closure_tol=closure_tol)
            except NoClosureFound as exc:
                return RegionResult(
                    region, "fail", outcome.to_json(),
                    {"closure_residual": exc.candidate_residual,
                     "candidate_period": exc.candidate_period})
            worst = max(worst, rep.closure_residual)
            periods.append(rep.period)
        return RegionResult(region, "pass", outcome.to_json(),
                            {"max_closure_residual": worst,
                             "periods": periods})

    if outcome.kind == "vertex":
        tp = pos[outcome.vertex]
        worst_share = 1.0
        ok = True
        for x0 in starts:
            traj = integrate(sub, x0, t_end, rtol=rtol, atol=atol)
            xT = traj.xs[-1]
            ok = ok and int(np.argmax(xT)) == tp
            worst_share = min(worst_share, float(xT[tp]))
        ok = ok and worst_share >= 1.0 - vertex_tol
        return RegionResult(region, "pass" if ok else "fail",
                            outcome.to_json(),
                            {"min_winner_share": worst_share})

    if outcome.kind == "all_equilibria":
        worst = max(float(np.abs(vector_field(sub, x0)).max())
                    for x0 in starts)
        return RegionResult(region, "pass" if worst <= stationarity_tol
                            else "fail", outcome.to_json(),
                            {"max_field": worst})

    # edge_point
    j, k = outcome.edge
    m = next(s for s in nodes if s not in (j, k))
    mp, jp, kp = pos[m], pos[j], pos[k]
    cons = outcome.constraint
    measured_only = isinstance(cons, RatioClaimed)
    worst_off = 0.0
    worst_dev = 0.0
    min_slack = np.inf
    ratios = []
    ok = True
    for x0 in starts:
        traj = integrate(sub, x0, t_end, rtol=rtol, atol=atol)
        xT = traj.xs[-1]
        off = float(xT[mp])
        worst_off = max(worst_off, off)
        if off > off_edge_tol:
            ok = False
        edge_mass = float(xT[jp] + xT[kp])
        zj, zk = float(xT[jp]) / edge_mass, float(xT[kp]) / edge_mass
        if isinstance(cons, CoordinatePreserved):
            dev = abs(float(xT[pos[cons.strategy]]) - float(x0[pos[
                cons.strategy]]))
            worst_dev = max(worst_dev, dev)
            if dev > constraint_tol:
                ok = False
        elif isinstance(cons, IntervalMembership):
            zw = zj if cons.strategy == j else zk
            slack = zw - float(cons.lower)
            min_slack = min(min_slack, slack)
            if slack < -constraint_tol or zw > 1.0:
                ok = False
        elif isinstance(cons, RatioClaimed):
            started = float(x0[pos[cons.num]]) / float(x0[pos[cons.den]])
            limit = (zj if cons.num == j else zk) / \
                (zk if cons.num == j else zj)
            ratios.append({"start_ratio": started, "limit_ratio": limit})
    measured = {"max_off_edge_mass": worst_off}
    if isinstance(cons, CoordinatePreserved):
        measured["max_coordinate_deviation"] = worst_dev
    elif isinstance(cons, IntervalMembership):
        measured["min_interval_slack"] = float(min_slack)
        measured["lower_bound"] = float(cons.lower)
    elif isinstance(cons, RatioClaimed):
        measured["ratios"] = ratios
    if measured_only:
        status = "measured" if ok else "fail"
    else:
        status = "pass" if ok else "fail"
    return RegionResult(region, status, outcome.to_json(), measured)


def verify_boundary(M: PayoffMatrix,
                    prediction: BoundaryPrediction | None = None,
                    seed: int = 0, samples_per_region: int = 3,
                    t_end: float = 200.0, rtol: float = 1e-8,
                    atol: float = 1e-10, off_edge_tol: float = 1e-4,
                    constraint_tol: float = 1e-3,
                    vertex_tol: float = 1e-4,
                    stationarity_tol: float = 1e-12,
                    closure_tol: float = 1e-6,
                    raise_on_violation: bool = True) -> BoundaryReport:
    """Simulate every face and edge region and score the predictions.

    Scoring: vertex convergence needs the predicted winner within
    ``vertex_tol`` of 1 at t_end; edge-point convergence needs off-edge
    mass at most ``off_edge_tol`` and the constraint satisfied within
    ``constraint_tol``; periodic faces need a closure residual at most
    ``closure_tol``; ratio claims are recorded as measured, never
    failed on the ratio itself.

    Raises PredictionViolated (report attached) when any region fails
    and ``raise_on_violation`` is set.
    """
    if prediction is None:
        prediction = boundary_prediction(M)
    rng = np.random.default_rng(seed)
    results = []
    for e in prediction.edges:
        results.append(_verify_edge(M, e, t_end, rtol, atol, vertex_tol,
                                    stationarity_tol))
    for f in prediction.faces:
        results.append(_verify_face(M, f, rng, samples_per_region, t_end,
                                    rtol, atol, off_edge_tol,
                                    constraint_tol, vertex_tol,
                                    closure_tol, stationarity_tol))
    passed = all(r.status != "fail" for r in results)
    report = BoundaryReport(regions=tuple(results), passed=passed,
                            seed=seed, t_end=t_end, rtol=rtol)
    if not passed and raise_on_violation:
        bad = [r.region for r in results if r.status == "fail"]
        raise PredictionViolated(
            f"simulation contradicts predictions in {bad}", report=report)
    return report
