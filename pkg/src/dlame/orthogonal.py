"""Discrete orthogonal systems in the Clifford frame formalism.

The two-dimensional frame system evolves an adapted frame psi together with
metric coefficients h_i and rotation coefficients beta_{ki}:

    tau_i psi = (N_i - (eps_i/2) sum_k beta_{ki} e_k e_{d_i}
                     + eps_i h_i einf e_{d_i}) psi,
    N_i^2 = 1 - (eps_i^2/4) sum_{k != d_i} beta_{ki}^2,

with the h/beta transport driven by auxiliary quantities rho_{12}, rho_{21}
obtained from a splitting of the circularity constraint:

  * surface splitting ("gamma"):  rho_12 = eps N_1 b_12 - (eps^2/2)(Theta - g),
                                  rho_21 = eps N_2 b_21 - (eps^2/2)(Theta + g);
  * transform splitting ("alpha"): rho_21 = eps a,
                                   rho_12 = N_1 b_12 + eps (N_2 b_21 - Theta - a),

where Theta = (1/2) sum_{k notin {d1,d2}} beta_{k1} beta_{k2}.  Points are read
off the frame as the Euclidean drop of psi^{-1} e0 psi.  Higher-dimensional
orthogonal systems are assembled from their coordinate surfaces and propagated
as conjugate nets; concircularity of the bulk is then a theorem, not an
imposed equation, and is verified a posteriori.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .circles import circularity_residual_batch
from .clifford import Algebra
from .config import TOL
from .conjugate import extract_rotation_coeffs, solve_conjugate_net
from .curves import SmoothCurve
from .errors import (
    DegenerateBasis,
    DegenerateCircle,
    FrameDrift,
    ImmersionFailure,
    OutsideDomain,
    SqrtDomain,
)
from .lattice import Component, HyperbolicSystem, LatticeField, MeshSpec, goursat_solve

__all__ = [
    "FrameSurfaceSystem",
    "CurveData",
    "DiscreteCurve",
    "CSurfaceData",
    "CSurfaceResult",
    "read_off_curve",
    "canonical_discretization",
    "csurface_solve",
    "orthosys_assemble",
    "OrthoSurfaceSpec",
    "OrthosysResult",
    "ribaucour_solve",
    "RibaucourResult",
    "ribaucour_pair_3d",
    "frame_to_point",
    "frame_points",
    "lame_residuals",
    "quad_stack",
    "enveloping_residual",
]


# -- frame stepping kernels ---------------------------------------------------


def normal_factor(eps: float, beta: np.ndarray, skip: int) -> float:
    """N_i = sqrt(1 - eps^2/4 * sum_{k != skip} beta_k^2); raises SqrtDomain."""
    s = float(np.sum(np.delete(beta, skip) ** 2))
    val = 1.0 - eps * eps / 4.0 * s
    if val <= 0.0:
        raise SqrtDomain("mesh too coarse for the curvature of the data")
    return math.sqrt(val)


def sigma_vector(alg: Algebra, d: int, eps: float, h: float, beta: np.ndarray, n_fac: float) -> np.ndarray:
    """Coordinates of Sigma_i = N_i e_d + (eps/2) sum beta_k e_k - eps h einf."""
    u = np.zeros(alg.dim)
    u[: alg.n] = (eps / 2.0) * beta
    u[d - 1] = n_fac
    u += -eps * h * alg.einf
    return u


def frame_step_multiplier(alg: Algebra, d: int, eps: float, h: float, beta: np.ndarray, n_fac: float,
                          biv: np.ndarray, einf_ed: np.ndarray) -> np.ndarray:
    """Multivector G with tau psi = G psi, equal to -Sigma_i e_d as a product."""
    G = -(eps / 2.0) * (beta @ biv) + (eps * h) * einf_ed
    G[0] += n_fac
    return G


def _direction_tables(alg: Algebra, d: int):
    """(bivector stack e_k e_d for k = 1..N with row d zeroed, einf e_d)."""
    ed = alg.vector(alg.basis_vector(d))
    biv = np.zeros((alg.n, alg.size))
    for k in range(1, alg.n + 1):
        if k == d:
            continue
        biv[k - 1] = alg.geometric_product(alg.vector(alg.basis_vector(k)), ed)
    einf_ed = alg.geometric_product(alg.vector(alg.einf), ed)
    return biv, einf_ed


class FrameSurfaceSystem(HyperbolicSystem):
    """Hyperbolic form of the two-dimensional discrete orthogonal system.

    Lattice direction a (0 or 1) carries the Clifford label dirs[a]; `split`
    holds the gamma (surface) or alpha (transform) splitting field, static in
    both directions.
    """

    def __init__(self, alg: Algebra, dirs=(1, 2), splitting: str = "gamma"):
        if splitting not in ("gamma", "alpha"):
            raise ValueError("splitting must be 'gamma' or 'alpha'")
        self.alg = alg
        self.dirs = tuple(dirs)
        self.splitting = splitting
        self._tables = [_direction_tables(alg, d) for d in self.dirs]
        comps = [
            Component("psi", (alg.size,), (), {0: ("psi", "h1", "b1"), 1: ("psi", "h2", "b2")}),
            Component("h1", (), (0,), {1: ("h1", "h2", "b1", "b2", "split")}),
            Component("h2", (), (1,), {0: ("h1", "h2", "b1", "b2", "split")}),
            Component("b1", (alg.n,), (0,), {1: ("b1", "b2", "split")}),
            Component("b2", (alg.n,), (1,), {0: ("b1", "b2", "split")}),
            Component("split", (), (0, 1), {}),
        ]
        super().__init__(2, comps)

    def splitting_rhos(self, vals, eps):
        """(rho_12, rho_21, n, N_1, N_2) at one site; checks all domain gates."""
        d1, d2 = self.dirs
        b1 = np.asarray(vals["b1"], dtype=float)
        b2 = np.asarray(vals["b2"], dtype=float)
        n1 = normal_factor(eps[0], b1, d1 - 1)
        try:
            n2 = normal_factor(eps[1], b2, d2 - 1)
        except SqrtDomain:
            if self.splitting == "alpha":
                raise OutsideDomain("transform data left the admissible set (sum beta^2 >= 4)")
            raise
        beta12 = b2[d1 - 1]
        beta21 = b1[d2 - 1]
        mask = np.ones(self.alg.n, dtype=bool)
        mask[[d1 - 1, d2 - 1]] = False
        theta = 0.5 * float(b1[mask] @ b2[mask])
        s = float(vals["split"])
        if self.splitting == "gamma":
            e = eps[0]
            rho12 = e * n1 * beta12 - e * e / 2.0 * (theta - s)
            rho21 = e * n2 * beta21 - e * e / 2.0 * (theta + s)
        else:
            e = eps[0]
            rho21 = e * s
            rho12 = n1 * beta12 + e * (n2 * beta21 - theta - s)
        nsq = 1.0 - rho12 * rho21
        if nsq <= 0.0:
            raise SqrtDomain("normalizer n^2 = 1 - rho12 rho21 left the positive domain")
        if abs(-(rho12 + rho21) / 2.0 - 1.0) < TOL.line_circle:
            raise DegenerateCircle("elementary circle degenerated to a line")
        return rho12, rho21, math.sqrt(nsq), n1, n2

    def step(self, direction: int, vals, eps, outputs=None):
        d1, d2 = self.dirs
        e1, e2 = eps[0], eps[1]
        want = None if outputs is None else set(outputs)

        def wanted(*names):
            return want is None or any(nm in want for nm in names)

        out = {}
        transport = wanted("h1", "h2", "b1", "b2")
        if transport:
            rho12, rho21, n, n1, n2 = self.splitting_rhos(vals, eps)
        if direction == 0:
            if wanted("psi"):
                psi = np.asarray(vals["psi"], dtype=float)
                b1 = np.asarray(vals["b1"], dtype=float)
                n1p = normal_factor(e1, b1, d1 - 1)
                biv, einf_ed = self._tables[0]
                G = frame_step_multiplier(self.alg, d1, e1, float(vals["h1"]), b1, n1p, biv, einf_ed)
                out["psi"] = self.alg.geometric_product(G, psi)
            if transport:
                h1, h2 = float(vals["h1"]), float(vals["h2"])
                b1 = np.asarray(vals["b1"], dtype=float)
                b2 = np.asarray(vals["b2"], dtype=float)
                out["h2"] = h2 + e1 * (rho12 / (e2 * n) * h1 + (1.0 - n) / (e1 * n) * h2)
                new_b2 = b2.copy()
                new_b2[d1 - 1] = b2[d1 - 1] + e1 * (
                    2.0 * n1 * rho12 / (e1 * e2 * n) - (1.0 + n) / (e1 * n) * b2[d1 - 1]
                )
                for k in range(self.alg.n):
                    if k in (d1 - 1, d2 - 1):
                        continue
                    new_b2[k] = b2[k] + e1 * ((1.0 - n) / (e1 * n) * b2[k] + rho12 / (e2 * n) * b1[k])
                out["b2"] = new_b2
            return out
        if wanted("psi"):
            psi = np.asarray(vals["psi"], dtype=float)
            b2 = np.asarray(vals["b2"], dtype=float)
            n2p = normal_factor(e2, b2, d2 - 1)
            biv, einf_ed = self._tables[1]
            G = frame_step_multiplier(self.alg, d2, e2, float(vals["h2"]), b2, n2p, biv, einf_ed)
            out["psi"] = self.alg.geometric_product(G, psi)
        if transport:
            h1, h2 = float(vals["h1"]), float(vals["h2"])
            b1 = np.asarray(vals["b1"], dtype=float)
            b2 = np.asarray(vals["b2"], dtype=float)
            out["h1"] = h1 + e2 * (rho21 / (e1 * n) * h2 + (1.0 - n) / (e2 * n) * h1)
            new_b1 = b1.copy()
            new_b1[d2 - 1] = b1[d2 - 1] + e2 * (
                2.0 * n2 * rho21 / (e1 * e2 * n) - (1.0 + n) / (e2 * n) * b1[d2 - 1]
            )
            for k in range(self.alg.n):
                if k in (d1 - 1, d2 - 1):
                    continue
                new_b1[k] = b1[k] + e2 * ((1.0 - n) / (e2 * n) * b1[k] + rho21 / (e1 * n) * b2[k])
            out["b1"] = new_b1
        return out


# -- reading data off smooth curves -------------------------------------------


@dataclass
class CurveData:
    """Metric and rotation coefficients sampled along a curve."""

    t: np.ndarray       # (S,)
    h: np.ndarray       # (S,)
    beta: np.ndarray    # (S, N); column for the curve direction is zero


def _curve_lift(alg: Algebra, curve: SmoothCurve, t: float):
    """Lifted point, velocity and acceleration with speed and its derivative."""
    x = np.asarray(curve.x(t), dtype=float)
    dx = np.asarray(curve.dx(t), dtype=float)
    d2x = np.asarray(curve.d2x(t), dtype=float)
    h = float(np.linalg.norm(dx))
    if h < 1e-12:
        raise ImmersionFailure(f"curve speed vanished at t={t}")
    dh = float(dx @ d2x) / h
    xhat = alg.lift_point(x)
    dxhat = alg.tangent_lift(x, dx)
    c = float(dx @ dx + x @ d2x)
    d2xhat = np.zeros(alg.dim)
    d2xhat[: alg.n] = d2x
    d2xhat[alg.dim - 2] = -c
    d2xhat[alg.dim - 1] = c
    return xhat, dxhat, d2xhat, h, dh


def read_off_curve(
    alg: Algebra,
    curve: SmoothCurve,
    psi0: np.ndarray,
    direction: int,
    samples: np.ndarray,
    substep: float | None = None,
) -> CurveData:
    """Integrate the orthonormal companion vectors along the curve and sample
    the metric coefficient h and the rotation coefficients beta_{k,direction}.

    psi0 must be suited to the curve at t = 0 (it maps e0 to the lifted start
    point and e_direction to the unit tangent).  Classical RK4 with per-step
    re-orthonormalization keeps the read-off error well below the O(eps)
    budget of the discretizations it feeds.
    """
    samples = np.asarray(samples, dtype=float)
    d = direction
    others = [k for k in range(1, alg.n + 1) if k != d]

    xhat0, dxhat0, _, h0, _ = _curve_lift(alg, curve, 0.0)
    vref = dxhat0 / h0
    if np.max(np.abs(alg.adjoint(psi0, alg.e0) - xhat0)) > 1e-8 * (1 + np.abs(xhat0).max()):
        raise DegenerateBasis("initial frame does not sit at the start of the curve")
    if np.max(np.abs(alg.adjoint(psi0, alg.basis_vector(d)) - vref)) > 1e-8:
        raise DegenerateBasis("initial frame is not aligned with the curve tangent")

    V = np.stack([alg.adjoint(psi0, alg.basis_vector(k)) for k in others])

    def tangent_data(t):
        xhat, dxhat, d2xhat, h, dh = _curve_lift(alg, curve, t)
        vd = dxhat / h
        a = d2xhat / h - dxhat * (dh / h / h)
        return xhat, vd, a, h

    def rhs(V, t):
        _, vd, a, _ = tangent_data(t)
        betas = -np.sum(V * (a * alg._metric), axis=1)
        return np.outer(betas, vd)

    def renorm(V, t):
        xhat, vd, _, _ = tangent_data(t)
        gram = V * alg._metric @ V.T
        if np.max(np.abs(gram - np.eye(len(others)))) > 1e-6:
            raise FrameDrift("companion frame lost orthonormality")
        for r in range(V.shape[0]):
            u = V[r]
            u = u - (-2.0 * alg.dot_einf(u)) * xhat - (-2.0 * alg.lorentz_dot(u, xhat)) * alg.einf
            u = u - alg.lorentz_dot(u, vd) * vd
            for s in range(r):
                u = u - alg.lorentz_dot(u, V[s]) * V[s]
            V[r] = u / math.sqrt(alg.lorentz_dot(u, u))
        return V

    if substep is None:
        gaps = np.diff(samples)
        substep = float(np.min(gaps[gaps > 0]) / 4.0) if len(gaps) else 0.25

    h_out = np.zeros(len(samples))
    beta_out = np.zeros((len(samples), alg.n))
    t = 0.0
    s_idx = 0
    # record any samples at (or numerically before) the start
    while s_idx < len(samples) and samples[s_idx] <= t + 1e-14:
        _, _, a, h = tangent_data(samples[s_idx])
        h_out[s_idx] = h
        beta_out[s_idx, [k - 1 for k in others]] = -np.sum(V * (a * alg._metric), axis=1)
        s_idx += 1
    while s_idx < len(samples):
        target = samples[s_idx]
        nsub = max(1, int(math.ceil((target - t) / substep - 1e-12)))
        dt = (target - t) / nsub
        for _ in range(nsub):
            k1 = rhs(V, t)
            k2 = rhs(V + dt / 2 * k1, t + dt / 2)
            k3 = rhs(V + dt / 2 * k2, t + dt / 2)
            k4 = rhs(V + dt * k3, t + dt)
            V = V + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += dt
            V = renorm(V, t)
        t = target
        _, _, a, h = tangent_data(t)
        h_out[s_idx] = h
        beta_out[s_idx, [k - 1 for k in others]] = -np.sum(V * (a * alg._metric), axis=1)
        s_idx += 1
    return CurveData(samples.copy(), h_out, beta_out)


@dataclass
class DiscreteCurve:
    """Canonical discretization: lattice points with their adapted frames."""

    eps: float
    points: np.ndarray    # (R+1, N)
    frames: np.ndarray    # (R+1, size)
    data: CurveData


def canonical_discretization(
    alg: Algebra,
    curve: SmoothCurve | None,
    psi0: np.ndarray,
    direction: int,
    eps: float,
    r: float,
    stagger: bool = False,
    data: CurveData | None = None,
) -> DiscreteCurve:
    """Discrete curve driven by coefficients read off the smooth curve.

    Pre-sampled coefficients can be passed through `data` (closed-form
    oracles); the curve itself is then not consulted.
    """
    npts = int(np.floor(r / eps + 1e-9)) + 1
    t = np.arange(npts) * eps + (eps / 2.0 if stagger else 0.0)
    if data is None:
        if curve is None:
            raise ValueError("either a curve or pre-sampled data is required")
        data = read_off_curve(alg, curve, psi0, direction, t, substep=eps / 4.0)
    biv, einf_ed = _direction_tables(alg, direction)
    frames = np.zeros((npts, alg.size))
    frames[0] = psi0
    for s in range(npts - 1):
        n_fac = normal_factor(eps, data.beta[s], direction - 1)
        G = frame_step_multiplier(alg, direction, eps, data.h[s], data.beta[s], n_fac, biv, einf_ed)
        frames[s + 1] = alg.geometric_product(G, frames[s])
    points = alg.drop_to_euclidean(alg.adjoint(frames, alg.e0))
    return DiscreteCurve(eps, points, frames, data)


# -- two-dimensional solves ----------------------------------------------------


@dataclass
class CSurfaceData:
    """Goursat data of a two-dimensional frame solve."""

    alg: Algebra
    psi0: np.ndarray
    eps: tuple[float, float]
    npts: tuple[int, int]
    dirs: tuple[int, int]
    h1: np.ndarray          # (n1,)
    b1: np.ndarray          # (n1, N)
    h2: np.ndarray          # (n2,)
    b2: np.ndarray          # (n2, N)
    split: np.ndarray       # (n1, n2)
    splitting: str = "gamma"


@dataclass
class CSurfaceResult:
    alg: Algebra
    mesh: MeshSpec
    dirs: tuple[int, int]
    splitting: str
    fields: dict[str, LatticeField]
    x: np.ndarray           # (n1, n2, N)

    @property
    def psi(self) -> np.ndarray:
        return self.fields["psi"].values


def csurface_solve(data: CSurfaceData, request=None) -> CSurfaceResult:
    """Solve the two-dimensional frame system from axis data and a splitting field.

    Transform solves (alpha splitting) only request the frame field: values on
    the transform layer that would describe a second, unspecified transform are
    left nan instead of being propagated from placeholder data.
    """
    alg = data.alg
    tail = 1 if data.splitting == "alpha" else 0
    if data.splitting == "gamma" and abs(data.eps[0] - data.eps[1]) > 1e-15:
        raise ValueError("the surface splitting assumes equal mesh sizes")
    if request is None and data.splitting == "alpha":
        request = ("psi",)
    mesh = MeshSpec(eps=data.eps, npts=data.npts, tail=tail)
    system = FrameSurfaceSystem(alg, dirs=data.dirs, splitting=data.splitting)
    fields = goursat_solve(
        system,
        mesh,
        {
            "psi": data.psi0,
            "h1": data.h1,
            "b1": data.b1,
            "h2": data.h2,
            "b2": data.b2,
            "split": data.split,
        },
        request=request,
    )
    x = frame_points(alg, fields["psi"].values)
    return CSurfaceResult(alg, mesh, data.dirs, data.splitting, fields, x)


def frame_to_point(alg: Algebra, psi: np.ndarray) -> np.ndarray:
    """Euclidean position encoded by an adapted frame."""
    return alg.drop_to_euclidean(alg.adjoint(psi, alg.e0))


def frame_points(alg: Algebra, psi_values: np.ndarray) -> np.ndarray:
    return alg.drop_to_euclidean(alg.adjoint(psi_values, alg.e0))


def quad_stack(x: np.ndarray, axis_i: int = 0, axis_j: int = 1) -> np.ndarray:
    """All elementary (i, j)-quads of a point field as an array (..., 4, N)."""
    sl = [slice(None)] * (x.ndim - 1)

    def s(di, dj):
        out = list(sl)
        out[axis_i] = slice(1, None) if di else slice(0, -1)
        out[axis_j] = slice(1, None) if dj else slice(0, -1)
        return x[tuple(out)]

    return np.stack([s(0, 0), s(1, 0), s(1, 1), s(0, 1)], axis=-2)


def lame_residuals(res: CSurfaceResult) -> dict[str, float]:
    """A-posteriori residuals of the frame-system invariants on a solved surface."""
    alg = res.alg
    d1, d2 = res.dirs
    system = FrameSurfaceSystem(alg, res.dirs, res.splitting)
    psi = res.fields["psi"].values
    h1 = res.fields["h1"].values
    h2 = res.fields["h2"].values
    b1 = res.fields["b1"].values
    b2 = res.fields["b2"].values
    split = res.fields["split"].values
    n1c, n2c = res.mesh.npts
    eps = res.mesh.eps

    rho12 = np.zeros((n1c, n2c))
    rho21 = np.zeros_like(rho12)
    nfac = np.zeros_like(rho12)
    N1 = np.zeros_like(rho12)
    N2 = np.zeros_like(rho12)
    for i in range(n1c):
        for j in range(n2c):
            vals = {"h1": h1[i, j], "h2": h2[i, j], "b1": b1[i, j], "b2": b2[i, j], "split": split[i, j]}
            rho12[i, j], rho21[i, j], nfac[i, j], N1[i, j], N2[i, j] = system.splitting_rhos(vals, eps)

    sig1 = np.zeros((n1c, n2c, alg.dim))
    sig2 = np.zeros_like(sig1)
    for i in range(n1c):
        for j in range(n2c):
            sig1[i, j] = sigma_vector(alg, d1, eps[0], h1[i, j], b1[i, j], N1[i, j])
            sig2[i, j] = sigma_vector(alg, d2, eps[1], h2[i, j], b2[i, j], N2[i, j])
    e1psi = alg.geometric_product(alg.vector(alg.basis_vector(d1)), psi)
    e2psi = alg.geometric_product(alg.vector(alg.basis_vector(d2)), psi)
    v1 = alg.adjoint(e1psi, sig1)
    v2 = alg.adjoint(e2psi, sig2)
    xhat = alg.adjoint(psi, alg.e0)

    out = {}
    out["pin_drift"] = float(np.max(np.abs(alg.adjoint(psi, alg.einf) - alg.einf)))
    # frame residual tau_1 psi - G psi at every interior site
    biv, einf_ed = _direction_tables(alg, d1)
    G = np.zeros((n1c - 1, n2c, alg.size))
    for i in range(n1c - 1):
        for j in range(n2c):
            G[i, j] = frame_step_multiplier(alg, d1, eps[0], h1[i, j], b1[i, j], N1[i, j], biv, einf_ed)
    out["frame_residual"] = float(np.max(np.abs(psi[1:] - alg.geometric_product(G, psi[:-1]))))
    # edge law tau_1 xhat = xhat + eps h1 v1
    out["edge_law"] = float(np.max(np.abs(xhat[1:] - (xhat + eps[0] * h1[..., None] * v1)[:-1])))
    out["edge_law_2"] = float(np.max(np.abs(xhat[:, 1:] - (xhat + eps[1] * h2[..., None] * v2)[:, :-1])))
    # circularity constraint rho12 + rho21 + 2 <v1, v2> = 0
    out["rho_identity"] = float(np.max(np.abs(rho12 + rho21 + 2.0 * alg.lorentz_dot(v1, v2))))
    # normalizer law n^2 = 1 - rho12 rho21 holds by construction; rotation law:
    rot1 = nfac[:-1, :, None] * v2[1:] - (v2 + rho21[..., None] * v1)[:-1]
    rot2 = nfac[:, :-1, None] * v1[:, 1:] - (v1 + rho12[..., None] * v2)[:, :-1]
    out["rotation_law"] = float(max(np.max(np.abs(rot1)), np.max(np.abs(rot2))))
    out["sigma_unit"] = float(np.max(np.abs(alg.lorentz_dot(sig1, sig1) - 1.0)))
    out["circularity"] = float(np.max(circularity_residual_batch(quad_stack(res.x))))
    return out


# -- data preparation and assembly ---------------------------------------------


def suited_frame(alg: Algebra, x0: np.ndarray, tangents: list[np.ndarray], slots=None) -> np.ndarray:
    """Frame at the Euclidean point x0 aligned with the given unit tangents."""
    xhat = alg.lift_point(np.asarray(x0, dtype=float))
    basis = [alg.tangent_lift(x0, t) for t in tangents]
    return alg.frame_from_adapted_basis(xhat, basis, slots=slots)


@dataclass
class OrthoSurfaceSpec:
    """Axis read-offs and splitting fields for a triple of coordinate surfaces."""

    alg: Algebra
    psi0: np.ndarray
    eps: float
    npts: int                       # sites per direction of the extended box
    axis: dict[int, CurveData]      # per Clifford label 1..3
    gamma: dict[tuple[int, int], np.ndarray]   # per pair (i < j): (npts, npts)
    x0: np.ndarray


@dataclass
class OrthosysResult:
    spec: OrthoSurfaceSpec
    surfaces: dict[tuple[int, int], CSurfaceResult]
    cdata: dict[tuple[int, int], np.ndarray]
    fields: dict[str, LatticeField]
    x: np.ndarray                   # (n, n, n, N)
    curves: dict[int, DiscreteCurve]


def orthosys_assemble(spec: OrthoSurfaceSpec) -> OrthosysResult:
    """Assemble a three-dimensional discrete orthogonal system from its
    coordinate surfaces: solve each surface in frame form, read its conjugate
    coefficients off the quads, and propagate into the bulk as a conjugate net.
    """
    alg = spec.alg
    eps = spec.eps
    npts = spec.npts            # includes one spare site for differences/quads
    labels = (1, 2, 3)

    curves = {}
    for i in labels:
        curves[i] = canonical_discretization(
            alg, None, spec.psi0, i, eps, (npts - 1) * eps, data=spec.axis[i]
        )

    surfaces = {}
    cdata = {}
    for i, j in itertools.combinations(labels, 2):
        data = CSurfaceData(
            alg=alg,
            psi0=spec.psi0,
            eps=(eps, eps),
            npts=(npts, npts),
            dirs=(i, j),
            h1=spec.axis[i].h,
            b1=spec.axis[i].beta,
            h2=spec.axis[j].h,
            b2=spec.axis[j].beta,
            split=spec.gamma[(i, j)],
        )
        surf = csurface_solve(data)
        surfaces[(i, j)] = surf
        nq = npts - 1
        cij = np.zeros((nq, nq))
        cji = np.zeros((nq, nq))
        for a in range(nq):
            for b in range(nq):
                cij[a, b], cji[a, b] = extract_rotation_coeffs(
                    surf.x[a, b], surf.x[a + 1, b], surf.x[a, b + 1], surf.x[a + 1, b + 1], eps, eps
                )
        cdata[(i, j)] = cij
        cdata[(j, i)] = cji

    n = npts - 1                 # the requested box
    mesh = MeshSpec(eps=(eps,) * 3, npts=(n,) * 3)
    w_axis = {}
    for a, i in enumerate(labels):
        pts = curves[i].points
        w_axis[a] = (pts[1:n + 1] - pts[:n]) / eps
    c_in = {}
    for a, b in itertools.permutations(range(3), 2):
        c_in[(a, b)] = cdata[(labels[a], labels[b])][:n, :n]
    fields = solve_conjugate_net(mesh, spec.x0, w_axis, c_in, N=alg.n)
    return OrthosysResult(spec, surfaces, cdata, fields, fields["x"].values, curves)


# -- Ribaucour transforms --------------------------------------------------------


@dataclass
class RibaucourResult:
    alg: Algebra
    result: CSurfaceResult
    x: np.ndarray          # (n1, 2, N): base curve and transform curve
    dirs: tuple[int, int]

    @property
    def base(self) -> np.ndarray:
        return self.x[:, 0]

    @property
    def transform(self) -> np.ndarray:
        return self.x[:, 1]


def ribaucour_data(
    alg: Algebra,
    axis: CurveData,
    alpha: np.ndarray,
    x0: np.ndarray,
    xplus0: np.ndarray,
    psi0: np.ndarray,
    dirs: tuple[int, int],
    eps: float,
) -> CSurfaceData:
    """Goursat data for a curve/transform pair from read-off data and a seed point."""
    d1, d2 = dirs
    h20 = float(np.linalg.norm(np.asarray(xplus0) - np.asarray(x0)))
    if h20 <= 0:
        raise OutsideDomain("transform seed coincides with the curve start")
    # lifted edge direction (lambda(x+) - lambda(x)) / |x+ - x|; it has no e0 part
    v2hat = (alg.lift_point(np.asarray(xplus0, dtype=float)) - alg.lift_point(np.asarray(x0, dtype=float))) / h20
    b2 = np.zeros(alg.n)
    n2_expect = None
    for k in range(1, alg.n + 1):
        vk = alg.adjoint(psi0, alg.basis_vector(k))
        if k == d2:
            n2_expect = float(alg.lorentz_dot(v2hat, vk))
            continue
        b2[k - 1] = -2.0 * float(alg.lorentz_dot(v2hat, vk))
    if float(np.sum(b2 ** 2)) >= 4.0:
        raise OutsideDomain("transform data left the admissible set (sum beta^2 >= 4)")
    if n2_expect is not None and n2_expect < 0:
        raise OutsideDomain(
            "transform direction points against the frame slot; re-suit the frame"
        )
    n1 = len(axis.h)
    split = np.broadcast_to(np.asarray(alpha, dtype=float)[:, None], (n1, 2)).copy()
    return CSurfaceData(
        alg=alg,
        psi0=psi0,
        eps=(eps, 1.0),
        npts=(n1, 2),
        dirs=dirs,
        h1=axis.h,
        b1=axis.beta,
        h2=np.full(2, h20),
        b2=np.broadcast_to(b2, (2, alg.n)).copy(),
        split=split,
        splitting="alpha",
    )


def ribaucour_solve(
    alg: Algebra,
    curve: SmoothCurve,
    alpha_fn,
    xplus0: np.ndarray,
    eps: float,
    r: float,
    psi0: np.ndarray | None = None,
    dirs: tuple[int, int] = (1, 2),
    axis: CurveData | None = None,
) -> RibaucourResult:
    """Discrete curve pair enveloping a circle congruence.

    alpha_fn(t) prescribes the splitting function along the curve; xplus0 is
    the seed of the transform curve.  When psi0 is omitted a suited frame is
    built whose second slot leans towards the transform direction, which fixes
    the positive branch of N_2.
    """
    d1, d2 = dirs
    npts = int(np.floor(r / eps + 1e-9)) + 1
    t = np.arange(npts) * eps
    x0 = np.asarray(curve.x(0.0), dtype=float)
    dx0 = np.asarray(curve.dx(0.0), dtype=float)
    t1 = dx0 / np.linalg.norm(dx0)
    if psi0 is None:
        u2 = np.asarray(xplus0, dtype=float) - x0
        u2 = u2 / np.linalg.norm(u2)
        w = u2 - (u2 @ t1) * t1
        nw = np.linalg.norm(w)
        if nw < 1e-10:
            raise OutsideDomain("transform seed lies along the tangent line")
        if alg.n == 2:
            # orientation pins the normal slot; wrong-side seeds trip the data gate
            w = np.array([-t1[1], t1[0]])
            nw = 1.0
        psi0 = suited_frame(alg, x0, [t1, w / nw], slots=[d1, d2])
    if axis is None:
        axis = read_off_curve(alg, curve, psi0, d1, t, substep=eps / 4.0)
    alpha = np.asarray([alpha_fn(tt) for tt in t], dtype=float)
    data = ribaucour_data(alg, axis, alpha, x0, xplus0, psi0, dirs, eps)
    res = csurface_solve(data)
    return RibaucourResult(alg, res, res.x, dirs)


def enveloping_residual(base: np.ndarray, transform: np.ndarray, eps: float) -> float:
    """Defect of the circle-congruence enveloping condition of a curve pair.

    Discretization of (d x+ / |d x+| + d x / |d x|) . (x+ - x) / |x+ - x|.
    """
    db = (base[1:] - base[:-1]) / eps
    dt = (transform[1:] - transform[:-1]) / eps
    db = db / np.linalg.norm(db, axis=1, keepdims=True)
    dt = dt / np.linalg.norm(dt, axis=1, keepdims=True)
    mid = transform[:-1] - base[:-1]
    mid = mid / np.linalg.norm(mid, axis=1, keepdims=True)
    return float(np.max(np.abs(np.sum((db + dt) * mid, axis=1))))


def double_ribaucour_net(
    alg: Algebra,
    curve: SmoothCurve,
    alpha_fns,
    seeds,
    corner_angle: float,
    eps: float,
    r: float,
):
    """Curve with two Ribaucour transforms and their common iterate.

    Builds the two curve/transform pairs, places the double-transform corner
    on the circumcircle of the three seed points (realizing one member of the
    one-parameter family), and propagates the three-directional conjugate net.
    Returns the point field of shape (n, 2, 2, N).
    """
    from .circles import point_on_circumcircle

    npts = int(np.floor(r / eps + 1e-9)) + 1
    pairs = [
        ribaucour_solve(alg, curve, alpha_fns[a], seeds[a], eps, r + eps)
        for a in range(2)
    ]
    n = npts
    x0 = pairs[0].base[0]
    seeds = [np.asarray(s, dtype=float) for s in seeds]
    corner = point_on_circumcircle(x0, seeds[0], seeds[1], corner_angle)
    c12, c21 = extract_rotation_coeffs(x0, seeds[0], seeds[1], corner, 1.0, 1.0)

    c_axis = {}
    for a, pair in enumerate(pairs):
        ciM = np.zeros(n)
        cMi = np.zeros(n)
        for s in range(n):
            ciM[s], cMi[s] = extract_rotation_coeffs(
                pair.base[s], pair.base[s + 1], pair.transform[s], pair.transform[s + 1], eps, 1.0
            )
        c_axis[a] = (ciM, cMi)

    mesh = MeshSpec(eps=(eps, 1.0, 1.0), npts=(n, 2, 2), tail=2)
    w_axis = {
        0: (pairs[0].base[1:n + 1] - pairs[0].base[:n]) / eps,
        1: np.broadcast_to(seeds[0] - x0, (2, alg.n)).copy(),
        2: np.broadcast_to(seeds[1] - x0, (2, alg.n)).copy(),
    }
    c_in = {
        (0, 1): np.stack([c_axis[0][0]] * 2, axis=1),
        (1, 0): np.stack([c_axis[0][1]] * 2, axis=1),
        (0, 2): np.stack([c_axis[1][0]] * 2, axis=1),
        (2, 0): np.stack([c_axis[1][1]] * 2, axis=1),
        (1, 2): np.full((2, 2), c12),
        (2, 1): np.full((2, 2), c21),
    }
    fields = solve_conjugate_net(mesh, x0, w_axis, c_in, N=alg.n, request=("x",))
    return fields["x"].values


def triple_ribaucour_net(
    alg: Algebra,
    curve: SmoothCurve,
    alpha_fns,
    seeds,
    corner_angles,
    eps: float,
    r: float,
):
    """Curve with three Ribaucour transforms and all iterated transforms.

    The three double-transform corners are placed on the circumcircles of the
    respective seed triples; the final corner of the transform cube is then
    determined by the lattice equations alone.  Returns the point field of
    shape (n, 2, 2, 2, N).
    """
    from .circles import point_on_circumcircle

    npts = int(np.floor(r / eps + 1e-9)) + 1
    pairs = [
        ribaucour_solve(alg, curve, alpha_fns[a], seeds[a], eps, r + eps)
        for a in range(3)
    ]
    n = npts
    x0 = pairs[0].base[0]
    seeds = [np.asarray(s, dtype=float) for s in seeds]

    c_axis = {}
    for a, pair in enumerate(pairs):
        ciM = np.zeros(n)
        cMi = np.zeros(n)
        for s in range(n):
            ciM[s], cMi[s] = extract_rotation_coeffs(
                pair.base[s], pair.base[s + 1], pair.transform[s], pair.transform[s + 1], eps, 1.0
            )
        c_axis[a] = (ciM, cMi)

    c_corner = {}
    for (a, b), ang in zip(((0, 1), (0, 2), (1, 2)), corner_angles):
        corner = point_on_circumcircle(x0, seeds[a], seeds[b], ang)
        c_corner[(a, b)] = extract_rotation_coeffs(x0, seeds[a], seeds[b], corner, 1.0, 1.0)

    mesh = MeshSpec(eps=(eps, 1.0, 1.0, 1.0), npts=(n, 2, 2, 2), tail=3)
    w_axis = {0: (pairs[0].base[1:n + 1] - pairs[0].base[:n]) / eps}
    for a in range(3):
        w_axis[a + 1] = np.broadcast_to(seeds[a] - x0, (2, alg.n)).copy()
    c_in = {}
    for a in range(3):
        ciM, cMi = c_axis[a]
        c_in[(0, a + 1)] = np.broadcast_to(ciM[:, None], (n, 2)).copy()
        c_in[(a + 1, 0)] = np.broadcast_to(cMi[:, None], (n, 2)).copy()
    for (a, b), (cab, cba) in c_corner.items():
        c_in[(a + 1, b + 1)] = np.full((2, 2), cab)
        c_in[(b + 1, a + 1)] = np.full((2, 2), cba)
    fields = solve_conjugate_net(mesh, x0, w_axis, c_in, N=alg.n, request=("x",))
    return fields["x"].values


@dataclass
class RibaucourPair3D:
    base: OrthosysResult
    pairs: dict[int, RibaucourResult]
    fields: dict[str, LatticeField]
    x: np.ndarray          # (n, n, n, 2, N)


def ribaucour_pair_3d(
    spec: OrthoSurfaceSpec,
    alpha_fns: dict[int, object],
    xplus0: np.ndarray,
) -> RibaucourPair3D:
    """Ribaucour transform of an assembled orthogonal system.

    Per axis, a two-dimensional curve/transform solve supplies the transform
    coefficients; the four-directional conjugate net then propagates the
    transform layer across the bulk, and concircularity of all mixed quads is
    inherited from the coordinate data.
    """
    alg = spec.alg
    eps = spec.eps
    base = orthosys_assemble(spec)
    labels = (1, 2, 3)
    n = spec.npts - 1

    pairs = {}
    c_tail = {}
    for a, i in enumerate(labels):
        d2 = labels[(a + 1) % 3]
        data = ribaucour_data(
            alg,
            spec.axis[i],
            np.asarray([alpha_fns[i](s * eps) for s in range(spec.npts)], dtype=float),
            spec.x0,
            xplus0,
            spec.psi0,
            (i, d2),
            eps,
        )
        res = csurface_solve(data)
        pair = RibaucourResult(alg, res, res.x, (i, d2))
        pairs[i] = pair
        ciM = np.zeros(n)
        cMi = np.zeros(n)
        for s in range(n):
            ciM[s], cMi[s] = extract_rotation_coeffs(
                pair.base[s], pair.base[s + 1], pair.transform[s], pair.transform[s + 1], eps, 1.0
            )
        c_tail[(a, 3)] = np.stack([ciM, ciM], axis=1)[:n]
        c_tail[(3, a)] = np.stack([cMi, cMi], axis=1)[:n]

    mesh = MeshSpec(eps=(eps,) * 3 + (1.0,), npts=(n,) * 3 + (2,), tail=1)
    w_axis = {}
    for a, i in enumerate(labels):
        pts = base.curves[i].points
        w_axis[a] = (pts[1:n + 1] - pts[:n]) / eps
    w_axis[3] = np.broadcast_to(np.asarray(xplus0, dtype=float) - spec.x0, (2, alg.n)).copy()
    c_in = {}
    for a, b in itertools.permutations(range(3), 2):
        c_in[(a, b)] = base.cdata[(labels[a], labels[b])][:n, :n]
    for a in range(3):
        c_in[(a, 3)] = c_tail[(a, 3)]
        c_in[(3, a)] = c_tail[(3, a)]
    fields = solve_conjugate_net(mesh, spec.x0, w_axis, c_in, N=alg.n, request=("x",))
    return RibaucourPair3D(base, pairs, fields, fields["x"].values)
