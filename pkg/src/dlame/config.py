"""Tolerance knobs, overridable through LAME_* environment variables."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields


@dataclass(frozen=True)
class Tolerances:
    # algebraic identity checks (products, lifts)
    algebra: float = 1e-12
    # group-membership drift (pin elements, adjoint isometry)
    group: float = 1e-10
    # relative determinant threshold declaring an implicit block degenerate
    degeneracy: float = 1e-12
    # relative planarity pre-check in rotation-coefficient extraction
    planarity: float = 1e-8
    # |<v_i,v_j> - 1| below this means the elementary circle degenerated to a line
    line_circle: float = 1e-10
    # light-cone normalization considered "at infinity" below this
    infinity: float = 1e-12


def _from_env() -> Tolerances:
    kwargs = {}
    for f in fields(Tolerances):
        raw = os.environ.get("LAME_TOL_" + f.name.upper())
        if raw is not None:
            kwargs[f.name] = float(raw)
    return Tolerances(**kwargs)


TOL = _from_env()
