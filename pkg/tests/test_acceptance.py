"""Acceptance suite: each test checks one release criterion at its stated
tolerance and prints a PASS/FAIL line (run with `pytest -v -s`)."""

import itertools
import time

import numpy as np

from dlame.analysis import csurface_sweep, rate_fit
from dlame.circles import (
    circularity_residual_batch,
    miquel_eighth_vertex,
    point_on_circumcircle,
)
from dlame.cli import main
from dlame.clifford import algebra
from dlame.conjugate import (
    ConjugateSystem,
    CornerState,
    check_4d_consistency,
    cname,
    coplanarity_residual,
    elementary_hexahedron,
    extract_rotation_coeffs,
    hexahedron_algebraic,
    solve_conjugate_net,
)
from dlame.curves import circle_curve, line_curve, warped_circle_curve
from dlame.errors import DegenerateHexahedron, DomainViolation, OutsideDomain
from dlame.io import circle_records, read_csv
from dlame.lattice import MeshSpec, consistency_residual
from dlame.oracles import EllipticOracle, SphericalOracle, csurface_data_from_oracle
from dlame.orthogonal import (
    CSurfaceData,
    CurveData,
    FrameSurfaceSystem,
    canonical_discretization,
    csurface_solve,
    double_ribaucour_net,
    orthosys_assemble,
    quad_stack,
    ribaucour_solve,
    suited_frame,
)

from conftest import random_surface_state

ALG2 = algebra(2)
ALG3 = algebra(3)
EPS_LIST = [np.pi / 10, np.pi / 20, np.pi / 40, np.pi / 80]
R_SWEEP = 4 * np.pi / 10


def report(num, ok, detail, t0=None):
    status = "PASS" if ok else "FAIL"
    timing = f" ({time.monotonic() - t0:.2f} s)" if t0 is not None else ""
    print(f"criterion {num:2d}: {status} {detail}{timing}")
    assert ok, detail


def quad_scales(quads):
    edges = quads - np.roll(quads, 1, axis=-2)
    return np.max(np.linalg.norm(edges, axis=-1), axis=-1)


def all_quads_pass(x, tol=1e-9):
    """Circularity of every elementary quad in every direction pair, against
    the tolerance scaled by the cell size."""
    worst = -np.inf
    for a, b in itertools.combinations(range(x.ndim - 1), 2):
        q = quad_stack(x, a, b)
        resid = circularity_residual_batch(q)
        margin = resid - tol * quad_scales(q)
        worst = max(worst, float(np.max(margin)))
    return worst


def test_criterion_01_clifford_identities():
    t0 = time.monotonic()
    rng = np.random.default_rng(1)
    n = 1000

    u = rng.normal(size=(n, ALG3.dim))
    v = rng.normal(size=(n, ALG3.dim))
    um, vm = ALG3.vector(u), ALG3.vector(v)
    anti = ALG3.geometric_product(um, vm) + ALG3.geometric_product(vm, um)
    expected = np.zeros_like(anti)
    expected[:, 0] = -2.0 * ALG3.lorentz_dot(u, v)
    r_cliff = float(np.max(np.abs(anti - expected)))

    q = ALG3.lorentz_dot(u, u)
    mask = np.abs(q) > 0.2
    un = u[mask] / np.sqrt(np.abs(q[mask]))[:, None]
    route = ALG3.adjoint(ALG3.vector(un), v[mask])
    closed = 2.0 * ALG3.lorentz_dot(un, v[mask])[:, None] * un - np.sign(q[mask])[:, None] * v[mask]
    # for spacelike u the closed form is the textbook one; timelike u flips v
    spacelike = q[mask] > 0
    r_action = float(np.max(np.abs(route[spacelike] - closed[spacelike])))

    x = rng.normal(size=(n, 4, 3))
    lifts = ALG3.lift_point(x)
    iso = ALG3.lorentz_dot(lifts[:, 0] - lifts[:, 1], lifts[:, 2] - lifts[:, 3])
    dots = np.sum((x[:, 0] - x[:, 1]) * (x[:, 2] - x[:, 3]), axis=-1)
    r_iso = float(np.max(np.abs(iso - dots)))

    y = rng.normal(size=(n, 3))
    r_stereo = float(np.max(np.abs(ALG3.stereographic_inverse(y) - ALG3.project_sphere(ALG3.lift_point(y)))))

    worst = max(r_cliff, r_action, r_iso, r_stereo)
    elapsed = time.monotonic() - t0
    report(1, worst <= 1e-11 and elapsed < 1.0,
           f"max residual {worst:.2e} over {n} trials each", t0)


def test_criterion_02_consistency_suites():
    t0 = time.monotonic()
    rng = np.random.default_rng(2)

    conj = ConjugateSystem(3, 3)
    worst_conj = 0.0
    for _ in range(1000):
        vals = {"x": rng.normal(size=3)}
        for i in range(3):
            vals[f"w{i + 1}"] = rng.normal(size=3)
        for i, j in itertools.permutations(range(3), 2):
            vals[cname(i + 1, j + 1)] = rng.uniform(-0.2, 0.2)
        worst_conj = max(worst_conj, consistency_residual(conj, vals, (1.0,) * 3))

    surface = FrameSurfaceSystem(ALG3, (1, 2), "gamma")
    frames = [random_surface_state(ALG3, rng)["psi"] for _ in range(50)]
    worst_surf = 0.0
    for k in range(1000):
        b1 = rng.uniform(-0.8, 0.8, 3)
        b1[0] = 0.0
        b2 = rng.uniform(-0.8, 0.8, 3)
        b2[1] = 0.0
        vals = {
            "psi": frames[k % len(frames)],
            "h1": rng.uniform(0.5, 1.5), "h2": rng.uniform(0.5, 1.5),
            "b1": b1, "b2": b2, "split": rng.uniform(-0.5, 0.5),
        }
        worst_surf = max(worst_surf, consistency_residual(surface, vals, (0.1, 0.1)))

    worst_4d = 0.0
    for _ in range(1000):
        w = rng.normal(size=(4, 3))
        c = rng.uniform(-0.2, 0.2, (4, 4))
        np.fill_diagonal(c, 0.0)
        st = CornerState(rng.normal(size=3), w, c)
        scale = max(1.0, float(np.max(np.abs(w))))
        worst_4d = max(worst_4d, check_4d_consistency(st, (1.0,) * 4) / scale)

    elapsed = time.monotonic() - t0
    ok = worst_conj <= 1e-10 and worst_surf <= 1e-10 and worst_4d <= 1e-9 and elapsed < 5.0
    report(2, ok, f"conjugate {worst_conj:.2e}, surface {worst_surf:.2e}, "
                  f"4d {worst_4d:.2e}", t0)


def test_criterion_03_geometric_vs_algebraic():
    t0 = time.monotonic()
    rng = np.random.default_rng(3)
    eps = (1.0, 1.0, 1.0)

    worst_hex = 0.0
    done = 0
    while done < 1000:
        w = rng.normal(size=(3, 3))
        if abs(np.linalg.det(w)) < 0.05:
            continue
        c = rng.uniform(-0.2, 0.2, (3, 3))
        np.fill_diagonal(c, 0.0)
        st = CornerState(rng.normal(size=3), w, c)
        scale = max(1.0, float(np.max(np.abs(w))))
        v1 = elementary_hexahedron(st, eps)
        v2 = hexahedron_algebraic(st, eps)
        worst_hex = max(worst_hex, float(np.max(np.abs(v1 - v2))) / scale)
        done += 1

    worst_miq = 0.0
    done = 0
    while done < 300:
        x = rng.normal(size=3)
        xi = [x + rng.normal(size=3) for _ in range(3)]
        if abs(np.linalg.det(np.stack([p - x for p in xi]))) < 0.05:
            continue
        xij = {}
        try:
            for (i, j) in ((0, 1), (0, 2), (1, 2)):
                xij[(i, j)] = point_on_circumcircle(x, xi[i], xi[j], rng.uniform(0.5, 2.5))
            c = np.zeros((3, 3))
            for (i, j) in ((0, 1), (0, 2), (1, 2)):
                c[i, j], c[j, i] = extract_rotation_coeffs(x, xi[i], xi[j], xij[(i, j)], 1.0, 1.0)
            st = CornerState(x, np.stack([p - x for p in xi]), c)
            planes = elementary_hexahedron(st, eps)
            miq = miquel_eighth_vertex(x, xi[0], xi[1], xi[2],
                                       xij[(0, 1)], xij[(0, 2)], xij[(1, 2)])
        except (DegenerateHexahedron, Exception) as exc:
            if not isinstance(exc, DegenerateHexahedron):
                continue
            continue
        scale = max(1.0, float(np.max(np.abs(st.w))))
        worst_miq = max(worst_miq, float(np.max(np.abs(planes - miq))) / scale)
        done += 1

    ok = worst_hex <= 1e-10 and worst_miq <= 1e-9
    report(3, ok, f"plane-vs-algebra {worst_hex:.2e}, circle-vs-plane {worst_miq:.2e}", t0)


def test_criterion_04_circularity_of_solved_nets():
    t0 = time.monotonic()
    # figure-scale surface run: about a thousand cells at pi/20
    data = csurface_data_from_oracle(EllipticOracle(), np.pi / 20, np.pi, r2=2 * np.pi)
    surf = csurface_solve(data)
    cells = (surf.mesh.npts[0] - 1) * (surf.mesh.npts[1] - 1)
    m_surf = all_quads_pass(surf.x)

    spec = SphericalOracle().surface_spec(0.1, 0.4)
    res3 = orthosys_assemble(spec)
    m_orth = all_quads_pass(res3.x)

    pair = ribaucour_solve(ALG2, warped_circle_curve(1.0, 0.3),
                           lambda t: -1.0 + 0.3 * np.sin(1.5 * t),
                           np.array([0.55, 0.0]), np.pi / 40, 8 * np.pi / 40)
    m_rib = all_quads_pass(pair.x)

    ok = max(m_surf, m_orth, m_rib) < 0.0
    report(4, ok, f"margins: surface {m_surf:.2e}, orthosys {m_orth:.2e}, "
                  f"transform pair {m_rib:.2e} ({cells} cells)", t0)


def test_criterion_05_elliptic_convergence():
    t0 = time.monotonic()
    oracle = EllipticOracle()
    rep = csurface_sweep(oracle, EPS_LIST, R_SWEEP, l_max=1, stagger=False)
    ok = 0.8 <= rep.slopes[0] <= 1.2 and 0.8 <= rep.slopes[1] <= 1.2
    for ell in (0, 1):
        ok = ok and all(1.7 <= q <= 2.3 for q in rep.ratios[ell])
        errs = rep.errors[ell]
        ok = ok and all(b < a for a, b in zip(errs, errs[1:]))
    rep_st = csurface_sweep(oracle, EPS_LIST, R_SWEEP, l_max=1, stagger=True)
    ok = ok and 0.8 <= rep_st.slopes[0] <= 1.2 and 0.8 <= rep_st.slopes[1] <= 1.2
    elapsed = time.monotonic() - t0
    ok = ok and elapsed < 30.0
    report(5, ok, f"slopes {rep.slopes[0]:.3f}/{rep.slopes[1]:.3f} "
                  f"(staggered {rep_st.slopes[0]:.3f}/{rep_st.slopes[1]:.3f}), "
                  f"ratios {['%.2f' % q for q in rep.ratios[0]]}", t0)


def test_criterion_06_canonical_discretization():
    t0 = time.monotonic()
    line = line_curve(np.zeros(2), np.array([1.0, 0.0]))
    psi_line = suited_frame(ALG2, np.zeros(2), [np.array([1.0, 0]), np.array([0.0, 1])])
    dc = canonical_discretization(ALG2, line, psi_line, 1, 0.25, 2.0)
    exact = np.stack([np.arange(len(dc.points)) * 0.25, np.zeros(len(dc.points))], axis=-1)
    line_err = float(np.max(np.abs(dc.points - exact)))

    # unit circle with smoothly varying speed: generic first-order rate
    curve = warped_circle_curve(1.0, 0.35)
    x0, d0 = curve.x(0.0), curve.dx(0.0)
    t1 = d0 / np.linalg.norm(d0)
    psi0 = suited_frame(ALG2, x0, [t1, np.array([-t1[1], t1[0]])])
    errs = []
    for eps in EPS_LIST:
        dcc = canonical_discretization(ALG2, curve, psi0, 1, eps, 16 * np.pi / 10)
        pts = np.stack([curve.x(k * eps) for k in range(len(dcc.points))])
        errs.append(float(np.max(np.linalg.norm(dcc.points - pts, axis=1))))
    slope = rate_fit(EPS_LIST, errs).slope

    # the arclength-parametrized circle superconverges; the paper's O(eps)
    # bound still holds with a unit constant
    unit = circle_curve(1.0)
    xu, du = unit.x(0.0), unit.dx(0.0)
    psi_u = suited_frame(ALG2, xu, [du, np.array([-du[1], du[0]])])
    arc_ok = True
    for eps in EPS_LIST:
        dcu = canonical_discretization(ALG2, unit, psi_u, 1, eps, 16 * np.pi / 10)
        pts = np.stack([unit.x(k * eps) for k in range(len(dcu.points))])
        arc_ok = arc_ok and float(np.max(np.linalg.norm(dcu.points - pts, axis=1))) <= eps

    ok = line_err <= 1e-13 and 0.8 <= slope <= 1.2 and arc_ok
    report(6, ok, f"line {line_err:.1e}, circle slope {slope:.3f}", t0)


def test_criterion_07_spherical_assembly():
    t0 = time.monotonic()
    oracle = SphericalOracle()
    eps_list = [0.2, 0.1, 0.05]
    errs = []
    worst_margin = -np.inf
    for eps in eps_list:
        res = orthosys_assemble(oracle.surface_spec(eps, 0.4))
        n = res.x.shape[0]
        t = np.arange(n) * eps
        g = np.meshgrid(t, t, t, indexing="ij")
        errs.append(float(np.max(np.linalg.norm(res.x - oracle.F(*g), axis=-1))))
        worst_margin = max(worst_margin, all_quads_pass(res.x))
    slope = rate_fit(eps_list, errs).slope
    elapsed = time.monotonic() - t0
    ok = 0.8 <= slope <= 1.2 and worst_margin < 0.0 and elapsed < 60.0
    report(7, ok, f"slope {slope:.3f}, circularity margin {worst_margin:.2e}", t0)


def test_criterion_08_transforms():
    t0 = time.monotonic()
    # (a) the admissibility gate rejects transform data with sum beta^2 = 4.5
    psi0 = suited_frame(ALG2, np.zeros(2), [np.array([1.0, 0]), np.array([0.0, 1])])
    axis = CurveData(np.arange(5) * 0.1, np.ones(5), np.zeros((5, 2)))
    data = CSurfaceData(
        alg=ALG2, psi0=psi0, eps=(0.1, 1.0), npts=(5, 2), dirs=(1, 2),
        h1=axis.h, b1=axis.beta, h2=np.full(2, 0.5),
        b2=np.broadcast_to(np.array([np.sqrt(4.5), 0.0]), (2, 2)).copy(),
        split=np.zeros((5, 2)), splitting="alpha",
    )
    try:
        csurface_solve(data)
        gate_ok = False
    except OutsideDomain:
        gate_ok = True
    except DomainViolation as exc:
        gate_ok = isinstance(exc.cause, OutsideDomain)

    # (b) cross-layer quads of a solved pair are concircular
    pair = ribaucour_solve(ALG2, warped_circle_curve(1.0, 0.3),
                           lambda t: -1.0 + 0.3 * np.sin(1.5 * t),
                           np.array([0.55, 0.0]), np.pi / 40, 8 * np.pi / 40)
    m_pair = all_quads_pass(pair.x)

    # (c) permutability: the four systems stay concircular pointwise
    x = double_ribaucour_net(
        ALG2, warped_circle_curve(1.0, 0.3),
        [lambda t: -1.0 + 0.2 * np.sin(t), lambda t: -0.9],
        [np.array([0.55, 0.0]), np.array([0.70, -0.1])],
        corner_angle=1.2, eps=np.pi / 40, r=8 * np.pi / 40,
    )
    quads = np.stack([x[:, 0, 0], x[:, 1, 0], x[:, 1, 1], x[:, 0, 1]], axis=-2)
    m_perm = float(np.max(circularity_residual_batch(quads) - 1e-9 * quad_scales(quads)))

    # (d) permutability of the planar transforms: coplanarity of the four nets
    rng = np.random.default_rng(8)
    eps, npts = 0.25, 5
    mesh = MeshSpec(eps=(eps, eps, 1.0, 1.0), npts=(npts, npts, 2, 2), tail=2)
    w = {
        0: rng.normal(size=(npts, 3)) * 0.4 + np.array([1.0, 0, 0]),
        1: rng.normal(size=(npts, 3)) * 0.4 + np.array([0, 1.0, 0]),
        2: np.broadcast_to(rng.normal(size=3) * 0.4 + np.array([0, 0, 1.0]), (2, 3)).copy(),
        3: np.broadcast_to(rng.normal(size=3) * 0.4 + np.array([0.3, 0.3, 1.0]), (2, 3)).copy(),
    }
    shapes = {(0, 1): (npts, npts), (0, 2): (npts, 2), (0, 3): (npts, 2),
              (1, 2): (npts, 2), (1, 3): (npts, 2), (2, 3): (2, 2)}
    c = {}
    for (a, b), shape in shapes.items():
        c[(a, b)] = rng.uniform(-0.2, 0.2, shape)
        c[(b, a)] = rng.uniform(-0.2, 0.2, shape)
    xj = solve_conjugate_net(mesh, rng.normal(size=3), w, c, N=3, request=("x",))["x"].values
    m_jonas = -np.inf
    for i in range(npts):
        for j in range(npts):
            pts = np.stack([xj[i, j, 0, 0], xj[i, j, 1, 0], xj[i, j, 0, 1], xj[i, j, 1, 1]])
            scale = float(np.max(np.linalg.norm(pts[1:] - pts[0], axis=-1)))
            m_jonas = max(m_jonas, coplanarity_residual(pts) - 1e-9 * scale)

    ok = gate_ok and m_pair < 0.0 and m_perm < 0.0 and m_jonas < 0.0
    report(8, ok, f"gate {gate_ok}, pair {m_pair:.2e}, circular permutability "
                  f"{m_perm:.2e}, planar permutability {m_jonas:.2e}", t0)


def test_criterion_09_figure_reproduction(tmp_path):
    t0 = time.monotonic()
    svg = tmp_path / "pattern.svg"
    csv = tmp_path / "pattern.csv"
    # figure-scale run: circle pattern with on-circle witnesses in every cell
    rc = main(["csurface", "--oracle", "elliptic", "--eps", "pi/20",
               "--r", "3.15", "--r2", "6.30", "--svg", str(svg), "--csv", str(csv)])
    fig_ok = rc == 0 and svg.exists()
    header, arr = read_csv(csv)
    n1 = len(np.unique(arr[:, 0]))
    n2 = len(np.unique(arr[:, 1]))
    x = arr[:, 2:].reshape(n1, n2, 2)
    records = circle_records(x)   # raises if any cell fails its invariant
    cells_ok = len(records) == (n1 - 1) * (n2 - 1) >= 800

    # vertex accuracy on the sweep domain matches the measured criterion-5 error
    oracle = EllipticOracle()
    rep = csurface_sweep(oracle, EPS_LIST, R_SWEEP, l_max=0)
    bound = rep.errors[0][EPS_LIST.index(np.pi / 20)]
    csv2 = tmp_path / "sweepdom.csv"
    rc2 = main(["csurface", "--oracle", "elliptic", "--eps", "pi/20",
                "--r", str(R_SWEEP + 1e-9), "--csv", str(csv2)])
    _, arr2 = read_csv(csv2)
    m = len(np.unique(arr2[:, 0]))
    x2 = arr2[:, 2:].reshape(m, m, 2)
    t = np.arange(m) * np.pi / 20
    g1, g2 = np.meshgrid(t, t, indexing="ij")
    err = float(np.max(np.linalg.norm(x2 - oracle.F(g1, g2), axis=-1)))
    acc_ok = rc2 == 0 and err <= bound * 1.0000001

    ok = fig_ok and cells_ok and acc_ok
    report(9, ok, f"{len(records)} circle records, vertex error {err:.4f} "
                  f"within sweep bound {bound:.4f}", t0)


def test_criterion_10_determinism(tmp_path):
    t0 = time.monotonic()
    blobs = []
    for tag in ("first", "second"):
        csv = tmp_path / f"{tag}.csv"
        js = tmp_path / f"{tag}.json"
        rc = main(["csurface", "--oracle", "elliptic", "--eps", "pi/20",
                   "--r", "1.2567", "--csv", str(csv), "--json", str(js)])
        assert rc == 0
        blobs.append((csv.read_bytes(), js.read_bytes()))
    ok = blobs[0] == blobs[1]
    report(10, ok, "CSV and JSON artifacts byte-identical across reruns", t0)
