"""Discrete conjugate nets (quadrilateral lattices) and Jonas transformations.

The first-order system is

    delta_i x   = w_i
    delta_i w_j = c_ji w_i + c_ij w_j                      (i != j)
    delta_i c_kj = (tau_j c_ik) c_kj + (tau_j c_ki) c_ij - (tau_i c_kj) c_ij

whose last family is linearly implicit: per unordered index triple the six
difference quotients delta_a c_cb couple through a 6x6 block (1 - Q(c)),
solved directly with partial pivoting.  Tail directions (mesh size 1) model
Jonas transforms; for those blocks degeneracy additionally shows up as the
exact vanishing of the factors (1 + c_{Mi}).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .config import TOL
from .errors import DegenerateEdges, DegenerateHexahedron, NonPlanarQuad
from .lattice import Component, HyperbolicSystem, LatticeField, MeshSpec, goursat_solve

__all__ = [
    "cname",
    "curve_to_axis_data",
    "ConjugateSystem",
    "CornerState",
    "dcn_step_c",
    "shift_state",
    "elementary_hexahedron",
    "hexahedron_algebraic",
    "extract_rotation_coeffs",
    "solve_conjugate_net",
    "check_4d_consistency",
    "coplanarity_residual",
    "net_planarity_residual",
]


def cname(i: int, j: int) -> str:
    """Component name of the rotation coefficient c_{ij} (1-based indices)."""
    return f"c{i}_{j}"


# index tables of the 6x6 block over the permutations of one index triple:
# row (a, b, k) holds the equation for delta_a c_kb and couples to the rows
# (b, k, a) and (b, a, k); indices below are positions within the sorted triple
_PERMS = list(itertools.permutations(range(3)))
_P_INDEX = {p: r for r, p in enumerate(_PERMS)}
_ROW_A = np.array([p[0] for p in _PERMS])
_ROW_B = np.array([p[1] for p in _PERMS])
_ROW_K = np.array([p[2] for p in _PERMS])
_COL_BKA = np.array([_P_INDEX[(p[1], p[2], p[0])] for p in _PERMS])
_COL_BAK = np.array([_P_INDEX[(p[1], p[0], p[2])] for p in _PERMS])
_ROWS = np.arange(6)


def dcn_step_c(c: np.ndarray, eps, triple=None, tail_dirs=()) -> dict:
    """Solve the implicit blocks for the difference quotients delta_a c_cb.

    c is an (M, M) array of rotation coefficients at the cube corner (diagonal
    ignored, 0-based).  `triple` selects one unordered index triple, a list of
    them, or all (None); the blocks are assembled and factored as one stacked
    batch.  Returns {(a, b, c): delta_a c_bc} covering every ordered pair
    inside the requested triple(s).  Raises DegenerateHexahedron when a block
    determinant falls below tolerance, or when a tail-direction block has a
    vanishing admissibility factor 1 + c_{Mi}.
    """
    c = np.asarray(c, dtype=float)
    M = c.shape[0]
    if triple is None:
        triples = list(itertools.combinations(range(M), 3))
    elif isinstance(triple[0], (int, np.integer)):
        triples = [tuple(sorted(triple))]
    else:
        triples = [tuple(sorted(t)) for t in triple]
    T = np.array(triples)
    c3 = c[T[:, :, None], T[:, None, :]]             # (ntrip, 3, 3)
    e3 = np.asarray(eps, dtype=float)[T]             # (ntrip, 3)
    cmax = np.max(np.abs(c3), axis=(1, 2))
    if tail_dirs:
        for t_idx, trip in enumerate(triples):
            for pos, d in enumerate(trip):
                if d in tail_dirs:
                    others = [p for p in range(3) if p != pos]
                    fac = (1.0 + c3[t_idx, pos, others[0]]) * (1.0 + c3[t_idx, pos, others[1]])
                    if abs(fac) < TOL.degeneracy * (1.0 + cmax[t_idx]) ** 2:
                        raise DegenerateHexahedron(
                            f"transform block {trip} is inadmissible: (1+c[{d},i]) factors vanish"
                        )
    cab = c3[:, _ROW_A, _ROW_B]
    ckb = c3[:, _ROW_K, _ROW_B]
    A = np.zeros((len(triples), 6, 6))
    A[:, _ROWS, _ROWS] = 1.0 + e3[:, _ROW_A] * cab
    A[:, _ROWS, _COL_BKA] -= e3[:, _ROW_B] * ckb
    A[:, _ROWS, _COL_BAK] -= e3[:, _ROW_B] * cab
    F = c3[:, _ROW_A, _ROW_K] * ckb + c3[:, _ROW_K, _ROW_A] * cab - ckb * cab
    scale = np.maximum(1.0, np.max(np.abs(A), axis=(1, 2)))
    dets = np.abs(np.linalg.det(A))
    if np.any(dets < TOL.degeneracy * scale**6):
        bad = triples[int(np.argmin(dets / scale**6))]
        raise DegenerateHexahedron(f"implicit block for triple {bad} is singular")
    delta = np.linalg.solve(A, F[..., None])[..., 0]
    out: dict[tuple[int, int, int], float] = {}
    for t_idx, trip in enumerate(triples):
        row = delta[t_idx]
        for r, p in enumerate(_PERMS):
            out[(trip[p[0]], trip[p[2]], trip[p[1]])] = row[r]
    return out


class ConjugateSystem(HyperbolicSystem):
    """Hyperbolic system of an M-dimensional discrete conjugate net in R^N."""

    def __init__(self, M: int, N: int, tail_dirs: tuple[int, ...] = ()):
        self.N = N
        self.tail_dirs = tuple(tail_dirs)
        comps = [
            Component(
                "x", (N,), (),
                {j: ("x", f"w{j + 1}") for j in range(M)},
            )
        ]
        for i in range(M):
            reads = {}
            for j in range(M):
                if j == i:
                    continue
                reads[j] = (f"w{i + 1}", f"w{j + 1}", cname(i + 1, j + 1), cname(j + 1, i + 1))
            comps.append(Component(f"w{i + 1}", (N,), (i,), reads))
        for i, j in itertools.permutations(range(M), 2):
            reads = {}
            for k in range(M):
                if k in (i, j):
                    continue
                tri = (i, j, k)
                reads[k] = tuple(cname(p + 1, q + 1) for p, q in itertools.permutations(tri, 2))
            comps.append(Component(cname(i + 1, j + 1), (), tuple(sorted((i, j))), reads))
        super().__init__(M, comps)

    def _cmatrix(self, vals) -> np.ndarray:
        M = self.M
        c = np.zeros((M, M))
        for i, j in itertools.permutations(range(M), 2):
            c[i, j] = vals[cname(i + 1, j + 1)]
        return c

    def step(self, direction: int, vals, eps, outputs=None):
        j = direction
        want = None if outputs is None else set(outputs)

        def wanted(*names):
            return want is None or any(n in want for n in names)

        c = self._cmatrix(vals)
        out = {}
        if wanted("x"):
            out["x"] = np.asarray(vals["x"], dtype=float) + eps[j] * np.asarray(vals[f"w{j + 1}"], dtype=float)
        for i in range(self.M):
            if i == j or not wanted(f"w{i + 1}"):
                continue
            wi = np.asarray(vals[f"w{i + 1}"], dtype=float)
            wj = np.asarray(vals[f"w{j + 1}"], dtype=float)
            out[f"w{i + 1}"] = wi + eps[j] * (c[i, j] * wj + c[j, i] * wi)
        pairs = [
            (a, b) for a, b in itertools.combinations(range(self.M), 2)
            if j not in (a, b) and wanted(cname(a + 1, b + 1), cname(b + 1, a + 1))
        ]
        if pairs:
            delta = dcn_step_c(c, eps, triple=[(j, a, b) for a, b in pairs],
                               tail_dirs=self.tail_dirs)
            for a, b in pairs:
                out[cname(a + 1, b + 1)] = c[a, b] + eps[j] * delta[(j, a, b)]
                out[cname(b + 1, a + 1)] = c[b, a] + eps[j] * delta[(j, b, a)]
        return out


@dataclass
class CornerState:
    """Values of (x, w, c) attached to one lattice vertex."""

    x: np.ndarray          # (N,)
    w: np.ndarray          # (M, N); rows that are unknown hold nan
    c: np.ndarray          # (M, M); diagonal and unknown entries hold nan

    @property
    def M(self) -> int:
        return self.w.shape[0]

    def copy(self) -> "CornerState":
        return CornerState(self.x.copy(), self.w.copy(), self.c.copy())


def shift_state(state: CornerState, direction: int, eps, tail_dirs=()) -> CornerState:
    """Advance a corner state by one lattice step; entries that would need
    fresh Goursat data become nan."""
    a = direction
    M = state.M
    x = state.x + eps[a] * state.w[a]
    w = np.full_like(state.w, np.nan)
    c = np.full_like(state.c, np.nan)
    for i in range(M):
        if i == a:
            continue
        w[i] = state.w[i] + eps[a] * (state.c[i, a] * state.w[a] + state.c[a, i] * state.w[i])
    pairs = [
        (p, q) for p, q in itertools.combinations(range(M), 2)
        if a not in (p, q)
        and not np.isnan(state.c[[p, p, q, q, a, a], [q, a, p, a, p, q]]).any()
    ]
    if pairs:
        delta = dcn_step_c(state.c, eps, triple=[(a, p, q) for p, q in pairs],
                           tail_dirs=tail_dirs)
        for p, q in pairs:
            c[p, q] = state.c[p, q] + eps[a] * delta[(a, p, q)]
            c[q, p] = state.c[q, p] + eps[a] * delta[(a, q, p)]
    return CornerState(x, w, c)


def hexahedron_algebraic(state: CornerState, eps) -> np.ndarray:
    """Far vertex of the elementary hexahedron through the first-order system."""
    if state.M != 3:
        raise ValueError("elementary hexahedron needs exactly three directions")
    s = shift_state(state, 0, eps)
    s = shift_state(s, 1, eps)
    s = shift_state(s, 2, eps)
    return s.x


def elementary_hexahedron(state: CornerState, eps) -> np.ndarray:
    """Far vertex as the intersection point of the three shifted face planes.

    Works in any ambient dimension by solving inside the three-space spanned
    by the corner edges.
    """
    if state.M != 3:
        raise ValueError("elementary hexahedron needs exactly three directions")
    basis, rdiag = np.linalg.qr(state.w.T)  # (N, 3) orthonormal span of the edges
    edge_scale = float(np.max(np.abs(rdiag)))
    if np.min(np.abs(np.diagonal(rdiag))) < 1e-10 * max(1.0, edge_scale):
        raise DegenerateHexahedron("corner edges do not span a three-space")
    shifted = [shift_state(state, a, eps) for a in range(3)]
    A = np.zeros((3, 3))
    rhs = np.zeros(3)
    for a in range(3):
        jj, kk = [d for d in range(3) if d != a]
        u = basis.T @ shifted[a].w[jj]
        v = basis.T @ shifted[a].w[kk]
        normal3 = np.array([
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ])
        norm = np.linalg.norm(normal3)
        if norm < 1e-300:
            raise DegenerateHexahedron("shifted face plane is degenerate")
        A[a] = normal3 / norm
        rhs[a] = A[a] @ (basis.T @ (shifted[a].x - state.x))
    scale = max(1.0, float(np.max(np.abs(A))))
    if abs(np.linalg.det(A)) < TOL.degeneracy * scale**3:
        raise DegenerateHexahedron("face planes are (nearly) parallel")
    y = np.linalg.solve(A, rhs)
    return state.x + basis @ y


def extract_rotation_coeffs(x, xi, xj, xij, eps_i: float, eps_j: float):
    """Invert the planarity relation on one quadrilateral.

    Returns (c_ij, c_ji) with delta_i delta_j x = c_ji delta_i x + c_ij delta_j x.
    """
    x, xi, xj, xij = (np.asarray(p, dtype=float) for p in (x, xi, xj, xij))
    di = (xi - x) / eps_i
    dj = (xj - x) / eps_j
    m = (xij - xi - xj + x) / (eps_i * eps_j)
    scale = max(np.linalg.norm(di), np.linalg.norm(dj), 1e-300)
    E = np.stack([di, dj], axis=1)
    sv = np.linalg.svd(E, compute_uv=False)
    if sv[-1] < 1e-10 * scale:
        raise DegenerateEdges("quadrilateral edges are collinear")
    if len(x) >= 3:
        planar = np.stack([di, dj, m], axis=1)
        if np.linalg.svd(planar, compute_uv=False)[2] > TOL.planarity * max(scale, np.linalg.norm(m)):
            raise NonPlanarQuad("quadrilateral is not planar to tolerance")
    coef, *_ = np.linalg.lstsq(E, m, rcond=None)
    c_ji, c_ij = float(coef[0]), float(coef[1])
    return c_ij, c_ji


def solve_conjugate_net(
    mesh: MeshSpec,
    x0: np.ndarray,
    w_axis: dict[int, np.ndarray],
    c_data: dict[tuple[int, int], np.ndarray],
    N: int,
    request=None,
) -> dict[str, LatticeField]:
    """Goursat solve of the conjugate-net system.

    w_axis[i] samples w_i along its axis, shape (npts_i, N); c_data[(i, j)]
    samples c_ij on the coordinate plane P_ij with axes in increasing
    direction order, shape (npts_min(i,j), npts_max(i,j)); scalars broadcast.
    Directions are 0-based; tail directions are taken from the mesh.
    """
    tail_dirs = tuple(range(mesh.M - mesh.tail, mesh.M))
    system = ConjugateSystem(mesh.M, N, tail_dirs=tail_dirs)
    data = {"x": np.asarray(x0, dtype=float)}
    for i in range(mesh.M):
        data[f"w{i + 1}"] = np.asarray(w_axis[i], dtype=float)
    for i, j in itertools.permutations(range(mesh.M), 2):
        data[cname(i + 1, j + 1)] = np.asarray(c_data[(i, j)], dtype=float)
    return goursat_solve(system, mesh, data, request=request)


def curve_to_axis_data(points: np.ndarray, eps: float) -> np.ndarray:
    """Forward differences delta X of sampled curve points (needs one spare sample)."""
    pts = np.asarray(points, dtype=float)
    return (pts[1:] - pts[:-1]) / eps


def check_4d_consistency(state: CornerState, eps) -> float:
    """Max pairwise distance between the four constructions of the 4-cube far vertex."""
    if state.M != 4:
        raise ValueError("the consistency check runs on four directions")
    far = []
    for lead in range(4):
        s = shift_state(state, lead, eps, tail_dirs=())
        rest = [d for d in range(4) if d != lead]
        sub = CornerState(
            s.x,
            s.w[rest],
            s.c[np.ix_(rest, rest)],
        )
        far.append(elementary_hexahedron(sub, [eps[d] for d in rest]))
    far = np.array(far)
    dists = [np.linalg.norm(a - b) for a, b in itertools.combinations(far, 2)]
    return float(max(dists))


def coplanarity_residual(points: np.ndarray) -> float:
    """Rank-2 residual of difference vectors among 4 points (smallest singular value)."""
    p = np.asarray(points, dtype=float)
    d = p[1:] - p[0]
    sv = np.linalg.svd(d, compute_uv=False)
    return float(sv[-1]) if len(sv) == 3 else 0.0


def net_planarity_residual(x: LatticeField, i: int, j: int) -> float:
    """Largest planarity defect over all elementary (i, j)-quads of a solved net."""
    vals = x.values
    sl = [slice(None)] * x.mesh.M

    def shifted(di, dj):
        s = list(sl)
        s[i] = slice(1, None) if di else slice(0, -1)
        s[j] = slice(1, None) if dj else slice(0, -1)
        return vals[tuple(s)]

    a, b, c, d = shifted(0, 0), shifted(1, 0), shifted(0, 1), shifted(1, 1)
    e1, e2, e3 = b - a, c - a, d - a
    E = np.stack([e1, e2, e3], axis=-2)  # (..., 3, N)
    sv = np.linalg.svd(E, compute_uv=False)
    scale = np.maximum(sv[..., 0], 1e-300)
    return float(np.max(sv[..., -1] / scale)) if E.shape[-1] >= 3 else 0.0
