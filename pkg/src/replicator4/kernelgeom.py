"""Geometry of the interior equilibrium segment.

For a singular conservative game the null space of A is a plane; its
intersection with the affine hull of the simplex is a line L, and the
interior equilibria form the open segment K = L in the open simplex.
The segment's closure has exactly two endpoints on the boundary, and the
five digraph classes pin down where they sit: on face interiors (above
an induced 3-cycle), on edge interiors (above a zero payoff pair whose
cross ratios agree), or at a vertex (when one strategy is neutral
against everything).

Two independent routes to the endpoints live here.  The closed forms
below read them off the matrix entries; :func:`section_by_clipping`
recovers them from a numerical null-space basis clipped against the
simplex and is used only to cross-check the closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (EmptyKernelSection, InconsistentClass,
                     PreconditionFailed, RankError)
from .payoff import PayoffMatrix, Scalar, scalar_to_json
from .signgraph import ClassLabel, build_digraph, classify

_KIND_RANK = {"face": 0, "edge": 1, "vertex": 2}

#: endpoint composition (faces, edges, vertices) demanded by each class
_CLASS_COMPOSITION = {
    "I": (2, 0, 0),
    "II": (2, 0, 0),
    "III": (1, 1, 0),
    "IV": (1, 0, 1),
    "V": (0, 2, 0),
}


@dataclass(frozen=True)
class Locus:
    """Boundary location of a segment endpoint.

    ``kind`` is ``"face"``, ``"edge"``, or ``"vertex"``.  For a face the
    single strategy index is the missing one (the face x_i = 0); for an
    edge the pair is the support; for a vertex it is the support.
    Indices are 1-based, as everywhere in reports.
    """

    kind: str
    strategies: tuple

    def to_json(self):
        if self.kind == "face":
            return {"face": self.strategies[0]}
        if self.kind == "edge":
            return {"edge": list(self.strategies)}
        return {"vertex": self.strategies[0]}

    def sort_key(self):
        return (_KIND_RANK[self.kind], self.strategies)


@dataclass(frozen=True)
class NullLineSection:
    """The segment K: two boundary endpoints of the null line clipped to
    the simplex, with their loci and the digraph classification.

    Endpoints are stored in deterministic order (faces before edges
    before vertices, then by index) and keep exact entries when the
    matrix is exact.
    """

    endpoints: tuple
    loci: tuple
    label: ClassLabel
    exact: bool

    def point_at(self, c):
        """Affine parameterization z(c) = (1-c) * a + c * b."""
        a, b = self.endpoints
        return tuple((1 - c) * ai + c * bi for ai, bi in zip(a, b))

    def midpoint(self):
        half = Fraction(1, 2) if self.exact else 0.5
        return self.point_at(half)

    def as_array(self) -> np.ndarray:
        """Endpoints as a (2, 4) float array."""
        return np.array([[float(v) for v in e] for e in self.endpoints])

    def to_json(self) -> dict:
        return {
            "endpoints": [
                {"x": [scalar_to_json(v) for v in e], "locus": l.to_json()}
                for e, l in zip(self.endpoints, self.loci)],
            "K_nonempty": True,
            "class": self.label.name,
            "relabeling": list(self.label.relabeling),
            "arithmetic": "exact" if self.exact else "float",
        }


def _is_zero(v: Scalar, exact: bool, atol: float) -> bool:
    return (v == 0) if exact else (abs(float(v)) <= atol)


def kernel_basis(M: PayoffMatrix, rtol: float = 1e-10):
    """Basis of the null space of A, which must be two dimensional.

    Exact matrices are reduced over the rationals and return tuples of
    Fractions; float matrices go through the SVD and return the two
    trailing right singular vectors.  A skew matrix has even rank, so
    anything other than rank 2 (the zero matrix, or a nonsingular A)
    raises ``RankError``.
    """
    if M.exact:
        basis = _rational_nullspace([list(r) for r in M.rows])
        if len(basis) != 2:
            raise RankError(f"null space has dimension {len(basis)}, "
                            "expected 2")
        return [tuple(v) for v in basis]
    A = M.array
    _, s, vt = np.linalg.svd(A)
    scale = s[0] if s[0] > 0 else 1.0
    rank = int(np.sum(s > rtol * scale))
    if rank != 2:
        raise RankError(f"numerical rank {rank}, expected 2 "
                        f"(singular values {s.tolist()})")
    return [vt[2], vt[3]]


def _rational_nullspace(rows):
    """Null-space basis by Gauss-Jordan elimination over Fraction."""
    n = len(rows)
    m = [[Fraction(v) for v in row] for row in rows]
    pivots = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, n) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        pv = m[r][c]
        m[r] = [v / pv for v in m[r]]
        for i in range(n):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [vi - f * vr for vi, vr in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == n:
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for pr, pc in enumerate(pivots):
            v[pc] = -m[pr][fc]
        basis.append(v)
    return basis


def face_kernel_point(M: PayoffMatrix, i: int):
    """Closed-form equilibrium in the interior of face x_i = 0.

    With (p, q, r) the remaining strategies in increasing order, the
    vector (a_qr, -a_pr, a_pq) has all entries of one strict sign
    exactly when the face carries an induced 3-cycle, and normalizing it
    gives the unique face equilibrium.  It lies in the null space of the
    full matrix precisely when A is singular.

    Parameters use 1-based strategy indices.  Returns a 4-tuple summing
    to one, exact when M is exact.
    """
    if M.n != 4 or i not in (1, 2, 3, 4):
        raise PreconditionFailed("face index must be 1..4 on a 4x4 matrix")
    p, q, r = (k for k in range(4) if k != i - 1)
    a = M.rows
    v = (a[q][r], -a[p][r], a[p][q])
    if any(c == 0 for c in v) or not (all(c > 0 for c in v)
                                      or all(c < 0 for c in v)):
        raise PreconditionFailed(
            f"face {i} carries no induced 3-cycle (witness {v})")
    total = v[0] + v[1] + v[2]
    zero = Fraction(0) if M.exact else 0.0
    out = [zero] * 4
    for pos, c in zip((p, q, r), v):
        out[pos] = c / total
    return tuple(out)


def edge_kernel_point(M: PayoffMatrix, i: int, j: int,
                      rtol: float = 1e-10, zero_atol: float = 1e-12):
    """Closed-form equilibrium in the interior of edge conv(e_i, e_j).

    Requires a_ij = 0 and a positive ratio rho = -a_jk / a_ik that is the
    same for both off-edge strategies k; then
    (rho e_i + e_j) / (1 + rho) kills both off-edge growth rates.  The
    two ratios agree exactly when the Pfaffian vanishes, so an
    inconsistent pair means the matrix was not singular.

    Indices are 1-based.  Returns a 4-tuple, exact when M is exact.
    """
    if M.n != 4 or i == j or not all(k in (1, 2, 3, 4) for k in (i, j)):
        raise PreconditionFailed("edge needs two distinct indices in 1..4")
    if i > j:
        i, j = j, i
    a = M.rows
    ii, jj = i - 1, j - 1
    if not _is_zero(a[ii][jj], M.exact, zero_atol):
        raise PreconditionFailed(
            f"a[{i}][{j}] = {a[ii][jj]} must vanish for an edge equilibrium")
    k, l = (p for p in range(4) if p not in (ii, jj))
    if _is_zero(a[ii][k], M.exact, zero_atol) or \
            _is_zero(a[ii][l], M.exact, zero_atol):
        raise PreconditionFailed(
            f"edge ({i},{j}) has a neutral off-edge strategy; "
            "no unique interior edge point")
    r1 = -a[jj][k] / a[ii][k]
    r2 = -a[jj][l] / a[ii][l]
    if M.exact:
        consistent = (r1 == r2)
    else:
        consistent = abs(float(r1) - float(r2)) <= rtol * max(
            1.0, abs(float(r1)))
    if not consistent:
        raise PreconditionFailed(
            f"cross ratios disagree ({r1} vs {r2}); "
            "matrix is not singular over this edge")
    if not (r1 > 0):
        raise PreconditionFailed(
            f"ratio {r1} is not positive; edge ({i},{j}) carries no "
            "interior equilibrium")
    one = Fraction(1) if M.exact else 1.0
    denom = one + r1
    zero = Fraction(0) if M.exact else 0.0
    out = [zero] * 4
    out[ii] = r1 / denom
    out[jj] = one / denom
    return tuple(out)


def kernel_line_section(M: PayoffMatrix, rtol: float = 1e-10,
                        zero_atol: float = 1e-12) -> NullLineSection:
    """Compute K's endpoints and loci from the matrix structure.

    The digraph is classified first; the class dictates how many
    endpoints of each kind must exist (two faces for I and II, face and
    edge for III, face and vertex for IV, two edges for V).  Endpoints
    are then found structurally: faces with induced 3-cycles, zero pairs
    with consistent positive cross ratios, and identically zero rows.
    A mismatch between structure and class raises InconsistentClass.
    """
    if not M.is_singular(rtol):
        raise PreconditionFailed(
            "matrix is not singular; the null line misses the simplex")
    label = classify(build_digraph(M, zero_atol))

    found = []
    for i in (1, 2, 3, 4):
        try:
            z = face_kernel_point(M, i)
        except PreconditionFailed:
            continue
        found.append((Locus("face", (i,)), z))
    for i in (1, 2, 3, 4):
        for j in range(i + 1, 5):
            if not _is_zero(M.rows[i - 1][j - 1], M.exact, zero_atol):
                continue
            try:
                z = edge_kernel_point(M, i, j, rtol, zero_atol)
            except PreconditionFailed:
                continue
            found.append((Locus("edge", (i, j)), z))
    one = Fraction(1) if M.exact else 1.0
    zero = Fraction(0) if M.exact else 0.0
    for i in range(4):
        if all(_is_zero(v, M.exact, zero_atol) for v in M.rows[i]):
            z = tuple(one if p == i else zero for p in range(4))
            found.append((Locus("vertex", (i + 1,)), z))

    counts = tuple(sum(1 for (l, _) in found if l.kind == k)
                   for k in ("face", "edge", "vertex"))
    if counts != _CLASS_COMPOSITION[label.name]:
        raise InconsistentClass(
            f"class {label.name} expects endpoint composition "
            f"{_CLASS_COMPOSITION[label.name]} (faces, edges, vertices) "
            f"but found {counts}")
    found.sort(key=lambda t: t[0].sort_key())
    loci = tuple(l for (l, _) in found)
    endpoints = tuple(z for (_, z) in found)

    mid = [(a + b) / 2 for a, b in zip(*endpoints)]
    if not all((v > 0) if M.exact else (float(v) > 0) for v in mid):
        raise EmptyKernelSection(
            "segment midpoint is not interior; endpoints "
            f"{endpoints} do not bound an interior segment")
    return NullLineSection(endpoints, loci, label, M.exact)


def section_by_clipping(M: PayoffMatrix, rtol: float = 1e-10) -> np.ndarray:
    """Endpoints of K by clipping the null line against the simplex.

    Generic route, independent of the per-class closed forms: take a
    numerical null-space basis (u, v), form the direction
    d = (1'v) u - (1'u) v lying in the sum-zero hyperplane, anchor at a
    basis combination with unit coordinate sum, and clip the parameter
    range against x >= 0.  Returns a (2, 4) float array sorted by the
    same locus-free rule used for display (lexicographic).
    """
    u, v = (np.asarray(b, dtype=float) for b in kernel_basis(M.to_float(),
                                                             rtol))
    su, sv = u.sum(), v.sum()
    if max(abs(su), abs(sv)) <= rtol:
        raise EmptyKernelSection("null plane is parallel to the affine "
                                 "hull of the simplex")
    d = sv * u - su * v
    if np.abs(d).max() <= rtol:
        raise EmptyKernelSection("null plane meets the affine simplex "
                                 "hull in a point or not at all")
    if abs(su) >= abs(sv):
        p = u / su
    else:
        p = v / sv
    lo, hi = -np.inf, np.inf
    for pi, di in zip(p, d):
        if abs(di) <= 1e-15:
            if pi < -1e-12:
                raise EmptyKernelSection("null line misses the simplex")
            continue
        t = -pi / di
        if di > 0:
            lo = max(lo, t)
        else:
            hi = min(hi, t)
    if not (lo < hi):
        raise EmptyKernelSection("null line misses the simplex interior")
    mid = p + 0.5 * (lo + hi) * d
    if mid.min() <= rtol:
        raise EmptyKernelSection("null line touches the simplex only on "
                                 "its boundary")
    ends = np.array([p + lo * d, p + hi * d])
    ends[np.abs(ends) < 1e-14] = 0.0
    order = np.lexsort(ends.T[::-1])
    return ends[order]


def distance_to_K(x, section: NullLineSection) -> float:
    """Euclidean distance from a point to the closed segment K."""
    p = np.asarray(x, dtype=float)
    a, b = section.as_array()
    d = b - a
    denom = float(d @ d)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = float((p - a) @ d) / denom
    t = min(1.0, max(0.0, t))
    return float(np.linalg.norm(p - (a + t * d)))


def section_residual(M: PayoffMatrix, section: NullLineSection) -> float:
    """max_i |(A z)_i| over the two endpoints, in float arithmetic."""
    A = M.array
    return float(max(np.abs(A @ e).max() for e in section.as_array()))
