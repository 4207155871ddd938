"""Smooth curves with two derivatives, as used for reading off frame data."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["SmoothCurve", "line_curve", "circle_curve", "warped_circle_curve"]


@dataclass(frozen=True)
class SmoothCurve:
    """Arc x(t) in R^N together with its first two derivatives."""

    dim: int
    x: Callable[[float], np.ndarray]
    dx: Callable[[float], np.ndarray]
    d2x: Callable[[float], np.ndarray]


def line_curve(point, direction) -> SmoothCurve:
    p = np.asarray(point, dtype=float)
    d = np.asarray(direction, dtype=float)
    zero = np.zeros_like(p)
    return SmoothCurve(len(p), lambda t: p + t * d, lambda t: d.copy(), lambda t: zero.copy())


def circle_curve(radius: float, dim: int = 2, center=None, phase: float = 0.0) -> SmoothCurve:
    """Unit-speed circle of the given radius in the first two coordinates."""
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)

    def embed(a, b):
        out = np.zeros(dim)
        out[0], out[1] = a, b
        return out

    def x(t):
        s = t / radius + phase
        return c + embed(radius * np.cos(s), radius * np.sin(s))

    def dx(t):
        s = t / radius + phase
        return embed(-np.sin(s), np.cos(s))

    def d2x(t):
        s = t / radius + phase
        return embed(-np.cos(s) / radius, -np.sin(s) / radius)

    return SmoothCurve(dim, x, dx, d2x)


def warped_circle_curve(radius: float = 1.0, amp: float = 0.35, dim: int = 2) -> SmoothCurve:
    """Circle traversed with smoothly varying speed.

    The arclength-parametrized circle is a superconvergent special case of the
    canonical discretization (the step motion is a single fixed rotation and
    the vertices land exactly on the circle); a warped parameter exposes the
    generic first-order rate.
    """
    def phi(t):
        return t / radius + amp * np.sin(t / radius)

    def dphi(t):
        return (1.0 + amp * np.cos(t / radius)) / radius

    def d2phi(t):
        return -amp * np.sin(t / radius) / radius**2

    def embed(a, b):
        out = np.zeros(dim)
        out[0], out[1] = a, b
        return out

    def x(t):
        p = phi(t)
        return embed(radius * np.cos(p), radius * np.sin(p))

    def dx(t):
        p = phi(t)
        return embed(-radius * np.sin(p), radius * np.cos(p)) * dphi(t)

    def d2x(t):
        p = phi(t)
        return (embed(-radius * np.cos(p), -radius * np.sin(p)) * dphi(t) ** 2
                + embed(-radius * np.sin(p), radius * np.cos(p)) * d2phi(t))

    return SmoothCurve(dim, x, dx, d2x)
