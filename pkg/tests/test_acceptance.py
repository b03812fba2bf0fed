"""Exit criteria, each run at its stated tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, image_area, rk4_oscillator, triangle_area
from kickweb import (
    EscapeError,
    MapParams,
    PhaseState,
    derive_scales,
    disk_ensemble,
    find_fixed_points,
    from_dimensionless,
    jacobian,
    jacobian_arrays,
    lyapunov_divergence,
    lyapunov_tangent,
    rotate,
    step,
    step_complex,
    survival_probability,
    symmetry_score,
    to_dimensionless,
)
from kickweb import cli
from kickweb.diagnostics import eigenvalue_sweep
from kickweb.physical import OptomechanicalParams
from kickweb.portrait import PortraitSpec, render_portrait

pytestmark = pytest.mark.acceptance

QS = [3, 4, 5, 6, 7, 8]


def record(label, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_c01_area_preservation():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    n = 10 ** 6
    x = rng.uniform(-10, 10, n)
    K = rng.uniform(0, 1, n)
    q = rng.integers(3, 9, n)
    det_err = 0.0
    for qq in QS:
        m = q == qq
        P = MapParams.from_q(1.0, qq)
        J = jacobian_arrays(x[m], P)
        # scale the K-dependent part per sample (jacobian_arrays takes one K)
        kc = K[m] * np.cosh(x[m])
        J[:, 0, 0] = P.a + P.b * kc
        J[:, 1, 0] = -P.b + P.a * kc
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        det_err = max(det_err, float(np.abs(det - 1).max()))
    # same check through the scalar path on a subsample
    for i in range(0, n, 997):
        J = jacobian(PhaseState(x[i], 0.0), MapParams.from_q(K[i], int(q[i])))
        det_err = max(det_err, abs(J.det - 1))

    # small equilateral triangles, side 1e-5; the image region's area is measured
    # along its stepped, finely subdivided boundary
    h = 1e-5
    area_err = 0.0
    for _ in range(10_000):
        cx, cp = rng.uniform(-2, 2, 2)
        P = MapParams.from_q(rng.uniform(0, 1), int(rng.integers(3, 9)))
        phi = rng.uniform(0, 2 * math.pi)
        tri = [(cx + h / math.sqrt(3) * math.cos(phi + k * 2 * math.pi / 3),
                cp + h / math.sqrt(3) * math.sin(phi + k * 2 * math.pi / 3)) for k in range(3)]
        a0 = triangle_area(tri)
        area_err = max(area_err, abs(image_area(tri, P) - a0) / abs(a0))
    dt = time.perf_counter() - t0
    ok = det_err < 1e-12 and area_err < 1e-8 and dt < 10
    record("1 area preservation", ok,
           f"max|det-1|={det_err:.3g} (<1e-12), max rel area err={area_err:.3g} (<1e-8), {dt:.1f}s (<10s)")


def test_c02_k0_reduction():
    rng = np.random.default_rng(2)
    ret_err = 0.0
    rad_err = 0.0
    for q in QS:
        P = MapParams.from_q(0.0, q)
        for _ in range(200):
            s0 = PhaseState(*rng.uniform(-50, 50, 2))
            s = s0
            for _ in range(q):
                s = step(s, P)
            ret_err = max(ret_err, math.hypot(s.x - s0.x, s.p - s0.p))
        s = PhaseState(*rng.uniform(-5, 5, 2))
        r2 = s.x ** 2 + s.p ** 2
        for _ in range(100_000):
            s = step(s, P)
            r2n = s.x ** 2 + s.p ** 2
            rad_err = max(rad_err, abs(r2n - r2) / r2)
            r2 = r2n
    ok = ret_err < 1e-9 and rad_err < 1e-12
    record("2 K=0 reduction", ok, f"q-step return err={ret_err:.3g} (<1e-9), per-step radius err={rad_err:.3g} (<1e-12)")


def test_c03_rotation_oracle():
    worst = 0.0
    for q in QS:
        th = 2 * math.pi / q
        s0 = PhaseState(1.3, -0.4)
        s = s0
        for _ in range(q):
            s = rotate(s, th)
        ref = rk4_oscillator(s0.x, s0.p, 2 * math.pi, q * 10_000)
        worst = max(worst, abs(s.x - ref[0]), abs(s.p - ref[1]))
    record("3 analytic rotation vs RK4", worst < 1e-8, f"max err over one period={worst:.3g} (<1e-8)")


def test_c04_complex_equivalence():
    rng = np.random.default_rng(4)
    worst = 0.0
    steps = 0
    bounded = 0
    escaped_same = 0
    escaped_differ = 0
    while bounded < 100:
        P = MapParams.from_q(rng.uniform(0, 1), int(rng.integers(3, 9)))
        s = PhaseState(*rng.uniform(-0.5, 0.5, 2))
        z = s.to_complex()
        for k in range(10_000):
            try:
                s = step(s, P)
            except EscapeError:
                # escaping orbits cannot run 1e4 steps; both forms must escape together
                try:
                    step_complex(z, P)
                    escaped_differ += 1
                except EscapeError:
                    escaped_same += 1
                break
            z = step_complex(z, P)
            worst = max(worst, abs(z.real - s.x), abs(z.imag - s.p))
            steps += 1
        else:
            bounded += 1
    ok = worst < 1e-12 and escaped_differ == 0
    record("4 real/complex equivalence", ok,
           f"max component diff={worst:.3g} over {bounded} bounded configs x 1e4 steps (<1e-12); "
           f"{escaped_same} escaping configs escaped at the same kick in both forms, {escaped_differ} did not")


def test_c05_fixed_points():
    worst_res = 0.0
    worst_line = 0.0
    mismatches = 0
    count = 0
    for q in QS:
        for K in (0.01, 0.1, 0.5, 1.0):
            P = MapParams.from_q(K, q)
            fps = find_fixed_points(P, 10.0, 1e-10)
            assert any(fp.state == (0.0, 0.0) for fp in fps)
            nz = [fp.state for fp in fps if fp.state != (0.0, 0.0)]
            for fp in fps:
                count += 1
                s1 = step(fp.state, P)
                worst_res = max(worst_res, math.hypot(s1.x - fp.state.x, s1.p - fp.state.p))
                # eigenvalues through numpy, independent of the trace formula
                ev = np.linalg.eigvals(jacobian(fp.state, P).as_array())
                if np.all(np.abs(ev.imag) > 0):
                    expect = "elliptic"
                elif np.all(np.abs(np.abs(ev) - 1) < 1e-9):
                    expect = "parabolic"
                else:
                    expect = "hyperbolic"
                mismatches += fp.stability != expect
            if nz:
                ux, up = nz[0]
                norm = math.hypot(ux, up)
                for s in nz:
                    worst_line = max(worst_line, abs(ux * s.p - up * s.x) / norm)
    ok = worst_res < 1e-10 and worst_line < 1e-8 and mismatches == 0
    record("5 fixed points", ok,
           f"{count} points; max residual={worst_res:.3g} (<1e-10), max distance from line={worst_line:.3g} (<1e-8), "
           f"classification mismatches={mismatches}")


def test_c06_eigen_reciprocity():
    t0 = time.perf_counter()
    xs = np.linspace(-10, 10, 10_000)
    sw = eigenvalue_sweep([MapParams.from_q(0.5, q) for q in QS], xs)
    prod = (sw["lp_re"] + 1j * sw["lp_im"]) * (sw["lm_re"] + 1j * sw["lm_im"])
    err = float(np.abs(prod - 1).max())
    dt = time.perf_counter() - t0
    ok = err < 1e-10 and dt < 5
    record("6 eigenvalue reciprocity", ok, f"max|l+ l- - 1|={err:.3g} over {prod.size} rows (<1e-10), {dt:.2f}s (<5s)")


def test_c07a_lyapunov_orbit_15_0():
    t0 = time.perf_counter()
    P = MapParams.from_q(0.5, 5)
    s0 = PhaseState(15.0, 0.0)
    t1 = lyapunov_tangent(s0, P, 10_000)
    t2 = lyapunov_tangent(s0, P, 20_000)
    div = lyapunov_divergence(s0, (1e-5, 0.0), P, 20_000)
    dt = time.perf_counter() - t0
    completed = not t1.escaped and not t2.escaped and t2.kicks_used == 20_000
    stable = completed and t2.value > 0 and abs(t1.value - t2.value) <= 0.1 * abs(t2.value)
    agree = completed and math.isfinite(div.estimate.value) and \
        abs(div.estimate.value - t2.value) <= 0.25 * abs(t2.value)
    ok = stable and agree and dt < 30
    record("7a Lyapunov at (15,0), q=5, K=0.5", ok,
           f"tangent n=1e4: {t1.value:.4g} over {t1.kicks_used} kicks (escaped={t1.escaped}); "
           f"n=2e4: {t2.value:.4g} over {t2.kicks_used} kicks; divergence slope={div.estimate.value:.4g} "
           f"over {div.estimate.kicks_used} kicks; {dt:.1f}s")


def test_c07b_lyapunov_k0():
    P = MapParams.from_q(0.0, 5)
    s0 = PhaseState(15.0, 0.0)
    t = lyapunov_tangent(s0, P, 20_000)
    d = lyapunov_divergence(s0, (1e-5, 0.0), P, 20_000)
    ok = abs(t.value) < 1e-6 and abs(d.estimate.value) < 1e-6
    record("7b Lyapunov at K=0", ok, f"tangent={t.value:.3g}, divergence={d.estimate.value:.3g} (|.|<1e-6)")


def test_c08_q_fold_symmetry():
    t0 = time.perf_counter()
    rows = []
    ok = True
    for q in QS:
        spec = PortraitSpec(MapParams.from_q(0.01, q), n_kicks=15_000, mode="points")
        cloud = render_portrait(spec)
        x0, x1, p0, p1 = spec.viewport
        pts = cloud.points
        pts = pts[(pts[:, 0] >= x0) & (pts[:, 0] <= x1) & (pts[:, 1] >= p0) & (pts[:, 1] <= p1)]
        s_q = symmetry_score(pts, q)
        s_next = symmetry_score(pts, q + 1)
        ok &= s_q < 2 and s_q < s_next
        rows.append(f"q={q}: {s_q:.3g} vs q+1: {s_next:.3g} ({len(pts)} pts in view, "
                    f"{cloud.escaped_orbits} escaped orbits)")
    dt = time.perf_counter() - t0
    ok &= dt < 120
    record("8 q-fold symmetry (score<2 and < score(q+1))", ok, "; ".join(rows) + f"; {dt:.0f}s")


def test_c09_survival():
    t0 = time.perf_counter()
    ens = disk_ensemble((15.0, 0.0), 0.1, 10_000, seed=1)
    curves = {K: survival_probability(ens, MapParams.from_q(K, 5), 20.0, 2000) for K in (0.01, 0.1)}
    dt = time.perf_counter() - t0
    # other configurations, including ones with non-trivial decay
    extra = [survival_probability(disk_ensemble((0, 0), r, 2000, seed=2), MapParams.from_q(K, q), rc, 500)
             for (K, q, r, rc) in [(0.3, 5, 4.0, 5.0), (0.1, 4, 5.0, 8.0), (0.0, 6, 1.0, 2.0)]]
    valid = all(c.p_s[0] == 1.0 and np.all(np.diff(c.p_s) <= 0) for c in list(curves.values()) + extra)
    f_lo, f_hi = curves[0.01].p_s[-1], curves[0.1].p_s[-1]
    ordering = ("K=0.1 survives more" if f_hi > f_lo else "K=0.01 survives more" if f_lo > f_hi else "equal")
    ok = valid and dt < 120
    record("9 survival probability", ok,
           f"p_s[0]=1 and monotone: {valid}; final p_s K=0.01: {f_lo:.4g}, K=0.1: {f_hi:.4g}; "
           f"observed ordering: {ordering} (reported, not asserted); {dt:.1f}s (<120s)")


def test_c10_physical():
    p = OptomechanicalParams.from_hz(L=2e-3, delta_hz=1e7, m=50e-15, omega_hz=134e3,
                                     omega_A_hz=7e14, xi0=1e3, nu_hz=5 * 134e3)
    sc = derive_scales(p)
    rel_alpha = abs(sc.alpha - 4.9497e10) / 4.9497e10
    rng = np.random.default_rng(10)
    worst = 0.0
    for x, pp in zip(rng.uniform(-1e-9, 1e-9, 10_000), rng.uniform(-1e-15, 1e-15, 10_000)):
        x2, p2 = from_dimensionless(to_dimensionless(x, pp, sc), sc)
        worst = max(worst, abs(x2 - x) / abs(x), abs(p2 - pp) / abs(pp))
    ok = rel_alpha < 1e-3 and worst <= 1e-14
    record("10 physical conversion", ok, f"alpha={sc.alpha:.6g} (rel dev {rel_alpha:.2g} < 1e-3), round trip rel err={worst:.3g} (<=1e-14)")


def test_c11_cli_determinism(tmp_path):
    runs = {
        "portrait": ["portrait", "--q", "6", "--K", "0.01", "--single-random", "--seed", "7", "--kicks", "15000"],
        "portrait-grid": ["portrait", "--q", "5", "--K", "0.01", "--kicks", "1000", "--format", "json",
                          "--threads", "4"],
        "magnify": ["magnify", "--q", "6", "--K", "0.01", "--kicks", "2000", "--x0", "0.3",
                    "--window", "-1", "1", "-1", "1"],
        "lyapunov": ["lyapunov", "--q", "8", "--K", "1", "--x0", "0", "--n", "500"],
        "survive": ["survive", "--q", "5", "--K", "0.01", "--K", "0.1", "--n", "200", "--ensemble", "2000",
                    "--seed", "1"],
        "stability": ["stability", "--points", "501"],
        "fixed-points": ["fixed-points", "--q", "4", "--K", "0.01"],
        "physical": ["physical", "--q", "5", "--xi0", "1000"],
    }
    same = {}
    for name, argv in runs.items():
        outs = []
        for k in range(2):
            out = tmp_path / f"{name}-{k}.out"
            code = cli.main(argv + ["--deterministic", "--out", str(out)])
            assert code == 0, name
            outs.append(out.read_bytes())
        same[name] = outs[0] == outs[1]
    # thread count must not change the bytes either
    a, b = tmp_path / "t1", tmp_path / "t4"
    base = ["portrait", "--q", "5", "--K", "0.05", "--random", "3000", "--kicks", "300", "--format", "json",
            "--deterministic", "--seed", "3"]
    cli.main(base + ["--threads", "1", "--out", str(a)])
    cli.main(base + ["--threads", "4", "--out", str(b)])
    import json
    ha = json.loads(a.read_bytes().split(b"\n", 1)[0])
    hb = json.loads(b.read_bytes().split(b"\n", 1)[0])
    same["threads 1 vs 4 counts"] = a.read_bytes().split(b"\n", 1)[1] == b.read_bytes().split(b"\n", 1)[1] \
        and ha["total"] == hb["total"]
    ok = all(same.values())
    record("11 CLI determinism", ok, ", ".join(f"{k}={'identical' if v else 'DIFFER'}" for k, v in same.items()))
