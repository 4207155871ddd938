"""Analytic orthogonal coordinate systems used as convergence oracles.

Each oracle evaluates the map F on lattice coordinates (an interior offset
keeps the runs away from coordinate singularities) together with the closed
forms of its metric coefficients h_i, rotation coefficients beta_ij and the
splitting field needed by the surface solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clifford import algebra
from .curves import SmoothCurve
from .errors import SingularPoint
from .orthogonal import CurveData, OrthoSurfaceSpec, suited_frame

__all__ = ["EllipticOracle", "SphericalOracle", "FlatOracle", "oracle_by_name"]


@dataclass(frozen=True)
class EllipticOracle:
    """Planar elliptic coordinates (confocal ellipses and hyperbolas).

    F(u1, u2) = (cosh u1 cos u2, sinh u1 sin u2) evaluated at u = offset + xi.
    The coordinate net is conformal: h = |d1 F| = |d2 F|, d1 F . d2 F = 0.
    """

    offset: tuple[float, float] = (0.3, 0.3)
    n: int = 2

    def _u(self, xi1, xi2):
        return self.offset[0] + np.asarray(xi1, dtype=float), self.offset[1] + np.asarray(xi2, dtype=float)

    def F(self, xi1, xi2):
        u1, u2 = self._u(xi1, xi2)
        return np.stack([np.cosh(u1) * np.cos(u2), np.sinh(u1) * np.sin(u2)], axis=-1)

    def h(self, xi1, xi2):
        u1, u2 = self._u(xi1, xi2)
        hsq = np.sinh(u1) ** 2 + np.sin(u2) ** 2
        if np.any(hsq < 1e-24):
            raise SingularPoint("elliptic coordinates are singular at the foci")
        return np.sqrt(hsq)

    def beta12(self, xi1, xi2):
        u1, u2 = self._u(xi1, xi2)
        return np.sinh(2.0 * u1) / (2.0 * self.h(xi1, xi2) ** 2)

    def beta21(self, xi1, xi2):
        u1, u2 = self._u(xi1, xi2)
        return np.sin(2.0 * u2) / (2.0 * self.h(xi1, xi2) ** 2)

    def gamma(self, xi1, xi2):
        # equals d1 beta12 = -d2 beta21 for this conformal net
        u1, u2 = self._u(xi1, xi2)
        return (1.0 - np.cosh(2.0 * u1) * np.cos(2.0 * u2)) / (2.0 * self.h(xi1, xi2) ** 4)

    # conjugate-net coefficients c_ij = h_i beta_ij / h_j; here h_1 = h_2
    def c12(self, xi1, xi2):
        return self.beta12(xi1, xi2)

    def c21(self, xi1, xi2):
        return self.beta21(xi1, xi2)

    def curve(self, axis: int) -> SmoothCurve:
        o1, o2 = self.offset

        if axis == 1:
            def x(t):
                return np.array([np.cosh(o1 + t) * np.cos(o2), np.sinh(o1 + t) * np.sin(o2)])

            def dx(t):
                return np.array([np.sinh(o1 + t) * np.cos(o2), np.cosh(o1 + t) * np.sin(o2)])

            def d2x(t):
                return x(t)
        else:
            def x(t):
                return np.array([np.cosh(o1) * np.cos(o2 + t), np.sinh(o1) * np.sin(o2 + t)])

            def dx(t):
                return np.array([-np.cosh(o1) * np.sin(o2 + t), np.sinh(o1) * np.cos(o2 + t)])

            def d2x(t):
                return -x(t)
        return SmoothCurve(2, x, dx, d2x)


@dataclass(frozen=True)
class SphericalOracle:
    """Spherical coordinates (radius, polar angle, azimuth) in R^3.

    Each coordinate family is traversed with smoothly varying speed
    (r = rho(u1) etc. with rho(u) = r0 + u + a sin u); affine parametrizations
    make all coordinate curves constant-coefficient and the discretization
    superconvergent, which would hide the generic first-order rate.
    """

    offset: tuple[float, float, float] = (1.0, 0.8, 0.6)
    amps: tuple[float, float, float] = (0.3, 0.25, -0.2)
    n: int = 3

    def _warp(self, k, u):
        u = np.asarray(u, dtype=float)
        return self.offset[k] + u + self.amps[k] * np.sin(u)

    def _dwarp(self, k, u):
        return 1.0 + self.amps[k] * np.cos(np.asarray(u, dtype=float))

    def _d2warp(self, k, u):
        return -self.amps[k] * np.sin(np.asarray(u, dtype=float))

    def F(self, xi1, xi2, xi3):
        r = self._warp(0, xi1)
        th = self._warp(1, xi2)
        ph = self._warp(2, xi3)
        return np.stack(
            [r * np.sin(th) * np.cos(ph), r * np.sin(th) * np.sin(ph), r * np.cos(th)],
            axis=-1,
        )

    def h_i(self, i, xi1, xi2, xi3):
        if i == 1:
            return self._dwarp(0, xi1) * np.ones(np.broadcast_shapes(np.shape(xi2), np.shape(xi3)) or ())
        if i == 2:
            return self._warp(0, xi1) * self._dwarp(1, xi2)
        return self._warp(0, xi1) * np.sin(self._warp(1, xi2)) * self._dwarp(2, xi3)

    def beta(self, k, i, xi1, xi2, xi3):
        """Rotation coefficient beta_{ki} (d_i v_k = beta_{ki} v_i)."""
        shape = np.broadcast_shapes(np.shape(xi1), np.shape(xi2), np.shape(xi3))
        if (k, i) == (1, 2):
            return np.broadcast_to(self._dwarp(1, xi2), shape).astype(float)
        if (k, i) == (1, 3):
            return np.broadcast_to(np.sin(self._warp(1, xi2)) * self._dwarp(2, xi3), shape).astype(float)
        if (k, i) == (2, 3):
            return np.broadcast_to(np.cos(self._warp(1, xi2)) * self._dwarp(2, xi3), shape).astype(float)
        return np.zeros(shape)

    def gamma_ij(self, i, j, xi_i, xi_j):
        """Splitting field (d_i beta_ij - d_j beta_ji)/2 on the (i, j)-plane."""
        shape = np.broadcast_shapes(np.shape(xi_i), np.shape(xi_j))
        if (i, j) == (2, 3):
            g = -np.sin(self._warp(1, xi_i)) * self._dwarp(1, xi_i) * self._dwarp(2, xi_j) / 2.0
            return np.broadcast_to(g, shape).astype(float)
        return np.zeros(shape)

    def c_ij(self, i, j, xi1, xi2, xi3):
        return self.h_i(i, xi1, xi2, xi3) * self.beta(i, j, xi1, xi2, xi3) / self.h_i(j, xi1, xi2, xi3)

    def curve(self, axis: int) -> SmoothCurve:
        r0, th0, ph0 = self.offset

        if axis == 1:
            d = np.array([np.sin(th0) * np.cos(ph0), np.sin(th0) * np.sin(ph0), np.cos(th0)])

            return SmoothCurve(
                3,
                lambda t: self._warp(0, t) * d,
                lambda t: self._dwarp(0, t) * d,
                lambda t: self._d2warp(0, t) * d,
            )
        if axis == 2:
            def pos(th):
                return np.array([np.sin(th) * np.cos(ph0), np.sin(th) * np.sin(ph0), np.cos(th)])

            def vel(th):
                return np.array([np.cos(th) * np.cos(ph0), np.cos(th) * np.sin(ph0), -np.sin(th)])

            def x(t):
                return r0 * pos(self._warp(1, t))

            def dx(t):
                return r0 * vel(self._warp(1, t)) * self._dwarp(1, t)

            def d2x(t):
                th = self._warp(1, t)
                return r0 * (vel(th) * self._d2warp(1, t) - pos(th) * self._dwarp(1, t) ** 2)
            return SmoothCurve(3, x, dx, d2x)

        rho_s = r0 * np.sin(th0)
        z0 = r0 * np.cos(th0)

        def x(t):
            ph = self._warp(2, t)
            return np.array([rho_s * np.cos(ph), rho_s * np.sin(ph), z0])

        def dx(t):
            ph = self._warp(2, t)
            return rho_s * self._dwarp(2, t) * np.array([-np.sin(ph), np.cos(ph), 0.0])

        def d2x(t):
            ph = self._warp(2, t)
            return rho_s * (self._d2warp(2, t) * np.array([-np.sin(ph), np.cos(ph), 0.0])
                            - self._dwarp(2, t) ** 2 * np.array([np.cos(ph), np.sin(ph), 0.0]))
        return SmoothCurve(3, x, dx, d2x)

    def surface_spec(self, eps: float, r: float, stagger: bool = False) -> OrthoSurfaceSpec:
        """Closed-form axis data and splitting fields on an extended box."""
        alg = algebra(3)
        npts = int(np.floor(r / eps + 1e-9)) + 2   # one spare site
        t = np.arange(npts) * eps + (eps / 2.0 if stagger else 0.0)
        zeros = np.zeros_like(t)

        def on_axis(i, arr_t):
            xi = [zeros, zeros, zeros]
            xi[i - 1] = arr_t
            return xi

        axis = {}
        for i in (1, 2, 3):
            xi = on_axis(i, t)
            h = np.broadcast_to(self.h_i(i, *xi), t.shape).astype(float)
            beta = np.zeros((npts, 3))
            for k in (1, 2, 3):
                if k == i:
                    continue
                beta[:, k - 1] = np.broadcast_to(self.beta(k, i, *xi), t.shape)
            axis[i] = CurveData(t.copy(), h, beta)

        gamma = {}
        for (i, j) in ((1, 2), (1, 3), (2, 3)):
            ti, tj = np.meshgrid(t, t, indexing="ij")
            gamma[(i, j)] = self.gamma_ij(i, j, ti, tj)

        x0 = self.F(0.0, 0.0, 0.0)
        tangents = []
        for i in (1, 2, 3):
            c = self.curve(i)
            d = c.dx(0.0)
            tangents.append(d / np.linalg.norm(d))
        psi0 = suited_frame(algebra(3), x0, tangents)
        return OrthoSurfaceSpec(alg, psi0, eps, npts, axis, gamma, x0)


@dataclass(frozen=True)
class FlatOracle:
    """Identity coordinates; every discretization reproduces the grid exactly."""

    n: int = 2
    offset: tuple = ()

    def F(self, *xi):
        return np.stack([np.asarray(x, dtype=float) for x in xi], axis=-1)

    def h(self, *xi):
        return np.ones(np.broadcast_shapes(*(np.shape(x) for x in xi)))

    def beta12(self, *xi):
        return np.zeros(np.broadcast_shapes(*(np.shape(x) for x in xi)))

    beta21 = beta12
    gamma = beta12
    c12 = beta12
    c21 = beta12

    def curve(self, axis: int) -> SmoothCurve:
        d = np.eye(self.n)[axis - 1]
        return SmoothCurve(self.n, lambda t: t * d, lambda t: d.copy(), lambda t: np.zeros(self.n))


def csurface_data_from_oracle(oracle, eps: float, r: float, stagger: bool = False,
                              extra: int = 0, r2: float | None = None):
    """Goursat data of the surface solve for a planar (N = 2) oracle."""
    from .orthogonal import CSurfaceData

    alg = algebra(2)
    n1 = int(np.floor(r / eps + 1e-9)) + 1 + extra
    n2 = n1 if r2 is None else int(np.floor(r2 / eps + 1e-9)) + 1 + extra
    shift = eps / 2.0 if stagger else 0.0
    t1 = np.arange(n1) * eps + shift
    t2 = np.arange(n2) * eps + shift

    h1 = np.broadcast_to(oracle.h(t1, 0.0), t1.shape).astype(float)
    b1 = np.zeros((n1, 2))
    b1[:, 1] = oracle.beta21(t1, 0.0)
    h2 = np.broadcast_to(oracle.h(0.0, t2), t2.shape).astype(float)
    b2 = np.zeros((n2, 2))
    b2[:, 0] = oracle.beta12(0.0, t2)
    g1, g2 = np.meshgrid(t1, t2, indexing="ij")
    gam = np.broadcast_to(oracle.gamma(g1, g2), (n1, n2)).astype(float)

    x0 = oracle.F(0.0, 0.0)
    tangents = []
    for axis in (1, 2):
        d = oracle.curve(axis).dx(0.0)
        tangents.append(d / np.linalg.norm(d))
    psi0 = suited_frame(alg, x0, tangents)
    return CSurfaceData(
        alg=alg, psi0=psi0, eps=(eps, eps), npts=(n1, n2), dirs=(1, 2),
        h1=h1, b1=b1, h2=h2, b2=b2, split=gam, splitting="gamma",
    )


def oracle_by_name(name: str):
    """Builtin oracle lookup for the command line ('elliptic', 'spherical', 'flat')."""
    table = {"elliptic": EllipticOracle, "spherical": SphericalOracle, "flat": FlatOracle}
    if name not in table:
        raise KeyError(name)
    return table[name]()
