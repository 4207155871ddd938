"""Lattice boxes, shift/difference calculus and a generic Goursat-problem driver.

A mesh describes the box B(r) sampled with per-direction mesh sizes; trailing
"tail" directions have mesh size 1 and exactly two layers {0, 1} (these model
transforms of a net rather than sampled continuous directions).  First-order
hyperbolic systems declare, per dependent component, the static directions
(where Goursat data live) and a step rule; the driver fills the box level by
level, pulling each unknown from its lowest-index evolution direction, which
makes the result independent of the site enumeration order by construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    DomainViolation,
    OrderTooLarge,
    OutOfBounds,
    SystemStructureError,
)

__all__ = [
    "MeshSpec",
    "LatticeField",
    "Component",
    "HyperbolicSystem",
    "goursat_solve",
    "consistency_residual",
    "cl_norm",
]


@dataclass(frozen=True)
class MeshSpec:
    """Sampled box: mesh sizes, site counts and the number of tail directions."""

    eps: tuple[float, ...]
    npts: tuple[int, ...]
    tail: int = 0

    def __post_init__(self):
        if len(self.eps) != len(self.npts):
            raise ValueError("eps and npts must agree in length")
        if any(e <= 0 for e in self.eps):
            raise ValueError("solve-time meshes need strictly positive mesh sizes")
        if any(n < 1 for n in self.npts):
            raise ValueError("every direction needs at least one site")

    @classmethod
    def box(cls, m: int, eps: float, r: float, tail: int = 0) -> "MeshSpec":
        """Uniform box: m directions of mesh eps on [0, r], plus tail transform layers."""
        npts = int(np.floor(r / eps + 1e-9)) + 1
        return cls(
            eps=(eps,) * m + (1.0,) * tail,
            npts=(npts,) * m + (2,) * tail,
            tail=tail,
        )

    @property
    def M(self) -> int:
        return len(self.eps)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.npts

    def coords(self, idx: Sequence[int]) -> tuple[float, ...]:
        return tuple(i * e for i, e in zip(idx, self.eps))

    def axis_coords(self, direction: int) -> np.ndarray:
        return np.arange(self.npts[direction]) * self.eps[direction]

    def shrink(self, direction: int, by: int = 1) -> "MeshSpec":
        npts = list(self.npts)
        npts[direction] -= by
        if npts[direction] < 1:
            raise OutOfBounds("mesh exhausted in direction %d" % direction)
        return MeshSpec(self.eps, tuple(npts), self.tail)

    def levels(self):
        """Site indices grouped by level sum(idx); level order is the fill order."""
        maxlev = sum(n - 1 for n in self.npts)
        buckets: list[list[tuple[int, ...]]] = [[] for _ in range(maxlev + 1)]
        for idx in itertools.product(*(range(n) for n in self.npts)):
            buckets[sum(idx)].append(idx)
        return buckets


@dataclass
class LatticeField:
    """Values attached to mesh sites; trailing axes hold the per-site value."""

    mesh: MeshSpec
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape[: self.mesh.M] != self.mesh.shape:
            raise ValueError("values shape does not match mesh")

    @property
    def value_shape(self) -> tuple[int, ...]:
        return self.values.shape[self.mesh.M:]

    def _slab(self, direction: int, lo: int, hi: int | None) -> np.ndarray:
        sl = [slice(None)] * self.values.ndim
        sl[direction] = slice(lo, hi)
        return self.values[tuple(sl)]

    def shift(self, direction: int) -> "LatticeField":
        """tau_i f: view of the field advanced by one mesh step in direction i."""
        if self.mesh.npts[direction] < 2:
            raise OutOfBounds("cannot shift a single-site direction")
        return LatticeField(self.mesh.shrink(direction), self._slab(direction, 1, None))

    def diff(self, direction: int) -> "LatticeField":
        """delta_i f = (tau_i f - f) / eps_i on the shrunken box."""
        if self.mesh.npts[direction] < 2:
            raise OutOfBounds("cannot difference a single-site direction")
        eps = self.mesh.eps[direction]
        vals = (self._slab(direction, 1, None) - self._slab(direction, 0, -1)) / eps
        return LatticeField(self.mesh.shrink(direction), vals)


def cl_norm(f: LatticeField, ell: int) -> float:
    """sup over |alpha| <= ell of |delta^alpha f| on the correspondingly shrunken box.

    Multi-indices only range over the non-tail directions; the per-site value
    norm is Euclidean over the trailing value axes.
    """
    m = f.mesh.M - f.mesh.tail
    if any(f.mesh.npts[d] - ell < 1 for d in range(m)):
        raise OrderTooLarge(f"order {ell} does not fit on the box")

    def site_norm(field: LatticeField) -> float:
        v = field.values.reshape(field.mesh.shape + (-1,))
        return float(np.max(np.sqrt(np.sum(v * v, axis=-1))))

    best = 0.0
    for alpha in itertools.product(range(ell + 1), repeat=m):
        if sum(alpha) > ell:
            continue
        g = f
        for d, a in enumerate(alpha):
            for _ in range(a):
                g = g.diff(d)
        best = max(best, site_norm(g))
    return best


@dataclass(frozen=True)
class Component:
    """One dependent variable of a hyperbolic system."""

    name: str
    shape: tuple[int, ...]
    static: tuple[int, ...]
    # per evolution direction: names of components the step rule reads
    reads: Mapping[int, tuple[str, ...]] = field(default_factory=dict)

    def evolution(self, M: int) -> tuple[int, ...]:
        return tuple(d for d in range(M) if d not in self.static)


class HyperbolicSystem:
    """First-order system delta_j u_k = f_{k,j}(u) with per-component step rules.

    Subclasses provide `components` and `step(direction, vals, eps)` returning
    the shifted values tau_j u_k for every component evolving in direction j.
    Registration checks the structural closure condition: a rule for component
    k in direction j may only read components l with E(k) \\ {j} contained in
    E(l), otherwise the consistency condition is not even well defined.
    """

    M: int
    components: tuple[Component, ...]

    def __init__(self, M: int, components: Sequence[Component]):
        self.M = M
        self.components = tuple(components)
        self._by_name = {c.name: c for c in self.components}
        if len(self._by_name) != len(self.components):
            raise SystemStructureError("duplicate component names")
        for c in self.components:
            evo = set(c.evolution(M))
            for j, reads in c.reads.items():
                if j not in evo:
                    raise SystemStructureError(f"{c.name} declares reads for non-evolution direction {j}")
                need = evo - {j}
                for name in reads:
                    other = self._by_name.get(name)
                    if other is None:
                        raise SystemStructureError(f"{c.name} reads unknown component {name}")
                    if not need <= set(other.evolution(M)):
                        raise SystemStructureError(
                            f"rule for {c.name} in direction {j} reads {name}, "
                            f"whose evolution directions do not cover {sorted(need)}"
                        )

    def component(self, name: str) -> Component:
        return self._by_name[name]

    def step(self, direction: int, vals: Mapping[str, np.ndarray], eps: Sequence[float],
             outputs: tuple[str, ...] | None = None):
        """Shifted values tau_j u_k; outputs restricts which components to produce."""
        raise NotImplementedError


def _static_sites(mesh: MeshSpec, static: tuple[int, ...]):
    """Index tuples of the static subspace (all evolution coordinates zero)."""
    ranges = [range(mesh.npts[d]) if d in static else (0,) for d in range(mesh.M)]
    return itertools.product(*ranges)


def goursat_solve(
    system: HyperbolicSystem,
    mesh: MeshSpec,
    data: Mapping[str, np.ndarray | Callable],
    request: Sequence[str] | None = None,
) -> dict[str, LatticeField]:
    """Fill the box from Goursat data on the static subspaces.

    data[name] is an array indexed by the static directions of the component
    (in increasing direction order), with the component's value shape trailing;
    scalars are broadcast.  Values are produced by pulling each unknown from
    the lowest evolution direction with a positive coordinate, so the output
    does not depend on the site enumeration order.  A step rule that raises is
    reported as DomainViolation carrying the first failure site in fill order.

    The solve is demand driven: when `request` names a subset of components,
    only the values those components transitively read (through the declared
    read sets) are computed; everything else stays nan.  This matters for
    transform layers, where the box contains sites whose would-be values
    describe a further transform that no requested output depends on.
    """
    if mesh.M != system.M:
        raise ValueError("mesh dimension does not match the system")
    by_name = {c.name: c for c in system.components}
    if request is not None:
        unknown = set(request) - set(by_name)
        if unknown:
            raise ValueError(f"requested unknown components {sorted(unknown)}")

    evolutions = {c.name: c.evolution(mesh.M) for c in system.components}

    def producer(comp_name, site):
        src_dir = next((j for j in evolutions[comp_name] if site[j] > 0), None)
        if src_dir is None:
            raise ValueError(f"no Goursat data reaches {comp_name} at {site}")
        return src_dir, site[:src_dir] + (site[src_dir] - 1,) + site[src_dir + 1:]

    levels = mesh.levels()
    marked: dict[str, np.ndarray] = {}
    on_static: dict[str, np.ndarray] = {}
    for comp in system.components:
        m = np.zeros(mesh.shape, dtype=bool)
        if request is None or comp.name in request:
            m[...] = True
        marked[comp.name] = m
        s = np.zeros(mesh.shape, dtype=bool)
        for pos in _static_sites(mesh, comp.static):
            s[pos] = True
        on_static[comp.name] = s

    # backward dependency marking; an undeclared read set is taken as "reads all"
    prod_need: dict[tuple, set] = {}
    for level_sites in reversed(levels):
        for site in level_sites:
            if sum(site) == 0:
                continue
            for comp in system.components:
                if not marked[comp.name][site] or on_static[comp.name][site]:
                    continue
                j, src = producer(comp.name, site)
                prod_need.setdefault((src, j), set()).add(comp.name)
                reads = comp.reads.get(j)
                names = reads if reads is not None else tuple(by_name)
                for name in names:
                    marked[name][src] = True

    full: dict[str, np.ndarray] = {}
    seen: dict[str, np.ndarray] = {}
    for comp in system.components:
        full[comp.name] = np.full(mesh.shape + comp.shape, np.nan)
        seen[comp.name] = np.zeros(mesh.shape, dtype=bool)
        arr = data[comp.name]
        stat_shape = tuple(mesh.npts[d] for d in comp.static)
        if callable(arr):
            raise TypeError("callable data not supported; sample it on the static subspace")
        arr = np.broadcast_to(np.asarray(arr, dtype=float), stat_shape + comp.shape)
        for pos, si in zip(_static_sites(mesh, comp.static), itertools.product(*(range(s) for s in stat_shape))):
            full[comp.name][pos] = arr[si]
            seen[comp.name][pos] = True

    def vals_at(site):
        return {name: full[name][site] for name in full}

    for level_sites in levels:
        memo: dict[tuple, dict[str, np.ndarray]] = {}
        for site in level_sites:
            for comp in system.components:
                if seen[comp.name][site] or not marked[comp.name][site]:
                    continue
                src_dir, src = producer(comp.name, site)
                key = (src, src_dir)
                if key not in memo:
                    outputs = tuple(sorted(prod_need.get(key, {comp.name})))
                    try:
                        memo[key] = system.step(src_dir, vals_at(src), mesh.eps, outputs=outputs)
                    except DomainViolation:
                        raise
                    except Exception as exc:
                        raise DomainViolation(mesh.coords(src), src_dir, exc) from exc
                full[comp.name][site] = memo[key][comp.name]
                seen[comp.name][site] = True
    return {name: LatticeField(mesh, arr) for name, arr in full.items()}


def consistency_residual(
    system: HyperbolicSystem,
    vals: Mapping[str, np.ndarray],
    eps: Sequence[float],
) -> float:
    """Cross-difference mismatch of the step rules on one elementary cube.

    For every component with two evolution directions i != j, builds the far
    corner value through both orders and returns the largest mismatch of the
    second difference quotients, i.e. the residual of the discrete consistency
    condition delta_j(f_{k,i}) = delta_i(f_{k,j}).
    """
    vals = {k: np.asarray(v, dtype=float) for k, v in vals.items()}
    evolutions = {c.name: set(c.evolution(system.M)) for c in system.components}
    worst = 0.0
    once: dict[int, Mapping[str, np.ndarray]] = {}
    for j in range(system.M):
        if any(j in e for e in evolutions.values()):
            once[j] = system.step(j, vals, eps)
    for i, j in itertools.combinations(sorted(once), 2):
        ui = {**vals, **once[i]}
        uj = {**vals, **once[j]}
        far_ij = system.step(j, ui, eps)
        far_ji = system.step(i, uj, eps)
        for comp in system.components:
            if {i, j} <= evolutions[comp.name] and comp.name in far_ij and comp.name in far_ji:
                d = np.max(np.abs(far_ij[comp.name] - far_ji[comp.name]))
                worst = max(worst, float(d) / (eps[i] * eps[j]))
    return worst
