"""Acceptance gate: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script:
``python3 tests/test_acceptance.py``.
"""

import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from photonkin import fock, geometry, stats, wavepacket


def _timed(func):
    start = time.perf_counter()
    out = func()
    return out, time.perf_counter() - start


def fig1_structure():
    def work():
        d0 = fock.distribution(7.0, 0, 120)
        d1 = fock.distribution(7.0, 1, 120)
        return d0, d1

    (d0, d1), dt = _timed(work)
    mean_ok = abs(d0.mean - 49) < 1e-6 and d0.deficit < 1e-10
    poisson = stats.poisson_distribution(49, 120).probs
    poisson_ok = np.abs(d0.probs - poisson).max() < 1e-14
    zero_ok = d1.probs[49] < 1e-14 * d1.probs.max()
    extrema = d1.local_extrema(30, 70)
    alternating = len(extrema) >= 2 and all(
        (d1.probs[a] > d1.probs[a - 1]) != (d1.probs[b] > d1.probs[b - 1]) for a, b in zip(extrema, extrema[1:])
    )
    extrema_ok = len(extrema) >= 4 and alternating
    ok = mean_ok and poisson_ok and zero_ok and extrema_ok and dt < 1.0
    detail = (f"mean={d0.mean:.12f} deficit={d0.deficit:.1e} P1(49)/peak={d1.probs[49] / d1.probs.max():.1e} "
              f"extrema in [30,70]={extrema} (need >= 4) t={dt:.3f}s")
    return ok, detail


def driven_closed_form():
    worst, slowest, parts = 1.0, 0.0, []
    for z_abs in (1.0, 3.0, 5.0):
        drive = fock.DriveSignal.gaussian_for_z(z_abs)
        for m in (0, 1):
            psi0 = fock.FockVector.number_state(m, 128)
            out, dt = _timed(lambda: fock.propagate_driven(psi0, drive))
            fid = abs(fock.closed_form_state(psi0, drive).overlap(out)) ** 2
            worst = min(worst, fid)
            slowest = max(slowest, dt)
            parts.append(f"|z|={z_abs:g},m={m}:1-F={1 - fid:.1e}")
    ok = worst > 1 - 1e-6 and slowest < 10.0
    return ok, " ".join(parts) + f" slowest={slowest:.2f}s"


def g2_table():
    def analytic():
        return (stats.g2_fock(1).value,
                stats.g2_from_distribution(stats.poisson_distribution(49, 250)).value,
                stats.g2_from_distribution(stats.thermal_distribution(3, 500)).value)

    (single, poisson, thermal), t_an = _timed(analytic)
    counts_res, t_mc = _timed(
        lambda: stats.g2_from_counts(stats.sample_counts(stats.SourceModel.thermal(3.0), 1_000_000, seed=0)))
    ok = (single == 0.0 and abs(poisson - 1) < 1e-10 and abs(thermal - 2) < 1e-10
          and abs(counts_res.value - 2) < 3 * counts_res.stderr and t_an < 1 and t_mc < 30)
    detail = (f"fock(1)={single} poisson-1={poisson - 1:.1e} thermal-2={thermal - 2:.1e} "
              f"mc={counts_res.value:.5f}+-{counts_res.stderr:.5f} t={t_an:.3f}s/{t_mc:.2f}s")
    return ok, detail


def hbt_model():
    def work():
        src = stats.SourceModel.chaotic_gaussian(1.0)
        ref = np.array([0.0, 0.0, 1.0])
        at0 = stats.hbt_c2(src, ref, ref, 1_000_000, seed=0, return_error=True)
        at3 = stats.hbt_c2(src, ref + [3.0, 0, 0], ref, 1_000_000, seed=1, return_error=True)
        coh = stats.c2_scan(stats.SourceModel.coherent(), np.linspace(0, 3, 31), n_samples=1_000_000)
        return at0, at3, coh

    (at0, at3, coh), dt = _timed(work)
    ok0 = abs(at0[0] - 2) <= 3 * at0[1]
    ok3 = abs(at3[0] - (1 + np.exp(-9))) <= 3 * at3[1]
    okc = all(abs(c2 - 1) <= 3 * err for _, c2, err in coh)
    ok = ok0 and ok3 and okc and dt < 60
    detail = (f"q=0: {at0[0]:.6f}+-{at0[1]:.1e}  qR=3: {at3[0]:.6f}+-{at3[1]:.1e} "
              f"(model {1 + np.exp(-9):.6f})  coherent max|C2-1|={max(abs(c - 1) for _, c, _ in coh):.1e} t={dt:.2f}s")
    return ok, detail


QUADRATURE_FLOOR = 1e-12


def berry_cocycle():
    e900 = abs(geometry.loop_phase_from_cocycles(geometry.octant_loop(300)) - np.pi / 2)
    e3600 = abs(geometry.loop_phase_from_cocycles(geometry.octant_loop(1200)) - np.pi / 2)
    # geodesic octant edges are exact in this route; the ratio is only meaningful above the quadrature floor
    octant_rate = e3600 <= e900 / 4 or e900 <= QUADRATURE_FLOOR
    theta = 1.0
    exact = 2 * np.pi * (1 - np.cos(theta))
    l900 = abs(geometry.loop_phase_from_cocycles(geometry.latitude_loop(theta, 900)) - exact)
    l3600 = abs(geometry.loop_phase_from_cocycles(geometry.latitude_loop(theta, 3600)) - exact)
    ok = e900 < 1e-4 and octant_rate and l3600 <= l900 / 4
    detail = (f"octant err(900)={e900:.1e} err(3600)={e3600:.1e}; "
              f"latitude err(900)={l900:.2e} err(3600)={l3600:.2e} ratio={l900 / l3600:.1f}")
    return ok, detail


def berry_holonomy():
    def work():
        H = geometry.holonomy(geometry.octant_loop(1000))
        sweep = geometry.full_sphere_sweep(375)
        return H, geometry.holonomy(sweep), sweep.n_segments

    (H, S, n_sphere), dt = _timed(work)
    err_oct = np.abs(H.eigenphases() - [-np.pi / 2, 0, np.pi / 2]).max()
    err_sph = np.abs(S.entries - np.eye(3)).max()
    ok = err_oct < 1e-5 and err_sph < 1e-5 and dt < 10
    detail = (f"octant eigenphases={np.round(H.eigenphases(), 8).tolist()} err={err_oct:.1e}; "
              f"sphere ({S.base_point.tolist()}, {n_sphere} segments) |H-I|={err_sph:.1e} t={dt:.2f}s")
    return ok, detail


def cocycle_identity():
    rng = np.random.default_rng(20240607)
    worst = 0.0
    for _ in range(100):
        p = rng.normal(size=3)
        p *= rng.uniform(0.5, 5.0) / np.linalg.norm(p)
        r = np.linalg.norm(p)

        def step():
            v = rng.normal(size=3)
            return v / np.linalg.norm(v) * rng.uniform(0, 0.1) * r

        a, b, c = step(), step(), step()
        worst = max(worst, abs(geometry.cocycle_residual(a, b, c, p)))
    return worst < 1e-10, f"max residual over 100 draws={worst:.1e}"


def _unit_points(n, seed):
    v = np.random.default_rng(seed).normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1)[:, None]


def curvature_constancy():
    pts = _unit_points(50, 7)
    h = 1e-3
    curv = np.array([geometry.curvature_check(p, h) for p in pts])
    curv2 = np.array([geometry.curvature_check(p, 2 * h) for p in pts])
    cov = np.array([geometry.covariant_constancy_residual(p, h) for p in pts])
    cov2 = np.array([geometry.covariant_constancy_residual(p, 2 * h) for p in pts])
    order_curv = np.log2(curv2 / curv)
    order_cov = np.log2(cov2 / cov)
    ok = (curv.max() < 1e-6 and cov.max() < 1e-6
          and np.all(np.abs(order_curv - 2) <= 0.1) and np.all(np.abs(order_cov - 2) <= 0.1))
    at2 = max(geometry.curvature_check(2 * p, h) for p in pts)
    detail = (f"|p|=1: curvature max={curv.max():.2e} min={curv.min():.2e} "
              f"covariant max={cov.max():.2e}; orders {order_curv.min():.2f}..{order_curv.max():.2f} / "
              f"{order_cov.min():.2f}..{order_cov.max():.2f}; (|p|=2 curvature max={at2:.1e})")
    return ok, detail


def fig2_structure():
    def work():
        grid = wavepacket.Grid1D(4096, -40.0, 40.0)
        wp = wavepacket.init_gaussian(grid, 1.0, 0.5)
        out = wavepacket.evolve(wp, 10.0)
        rec = wavepacket.dalembert_reconstruct(wp, 10.0)
        sym = wavepacket.evolve(wavepacket.init_gaussian(grid, 1.0, 0.0), 10.0)
        return grid, out, rec, sym

    (grid, out, rec, sym), dt = _timed(work)
    dx = grid.dx
    peaks = wavepacket.peak_report(out)
    pos = sorted(p.position for p in peaks)
    peaks_ok = len(peaks) == 2 and abs(pos[0] + 10) <= 2 * dx and abs(pos[1] - 10) <= 2 * dx
    l2 = np.sqrt(np.sum(np.abs(out.psi - rec.psi) ** 2) * dx)
    masses = [p.mass for p in wavepacket.peak_report(sym)]
    mass_ok = len(masses) == 2 and all(abs(m - 0.5) <= 1e-6 for m in masses)
    norm_err = abs(out.norm2() - 1)
    ok = peaks_ok and l2 < 1e-8 and mass_ok and norm_err < 1e-12 and dt < 5
    detail = (f"peaks at {pos} (need +-10 within {2 * dx:.4f}); L2(dAlembert)={l2:.1e}; "
              f"k0=0 masses={[round(m, 12) for m in masses]}; norm err={norm_err:.1e}; t={dt:.2f}s")
    return ok, detail


def _run_cli(command, out):
    subprocess.run([sys.executable, "-m", "photonkin", command, "--out", str(out), "--seed", "1"],
                   check=True, capture_output=True)
    return {p.name: p.read_bytes() for p in sorted(Path(out).iterdir()) if p.name != "manifest.json"}


def determinism():
    parts, ok = [], True
    with tempfile.TemporaryDirectory() as tmp:
        for command in ("reproduce-fig1", "reproduce-fig2"):
            a = _run_cli(command, Path(tmp) / command / "a")
            b = _run_cli(command, Path(tmp) / command / "b")
            same = a == b and len(a) > 0
            ok &= same
            parts.append(f"{command}: {len(a)} files {'identical' if same else 'DIFFER'}")
    return ok, "; ".join(parts)


CRITERIA = [
    ("1 fig1 structure", fig1_structure),
    ("2 driven closed form", driven_closed_form),
    ("3 g2 table", g2_table),
    ("4 hbt model", hbt_model),
    ("5 berry phase cocycle route", berry_cocycle),
    ("6 berry phase holonomy route", berry_holonomy),
    ("7 cocycle identity", cocycle_identity),
    ("8 curvature and covariant constancy", curvature_constancy),
    ("9 fig2 structure", fig2_structure),
    ("10 determinism", determinism),
]


def _line(name, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {name}: {detail}"


@pytest.mark.acceptance
@pytest.mark.parametrize("name,check", CRITERIA, ids=[n.split(" ", 1)[1].replace(" ", "_") for n, _ in CRITERIA])
def test_criterion(name, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print("\n" + _line(name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for name, check in CRITERIA:
        ok, detail = check()
        results.append(ok)
        print(_line(name, ok, detail), flush=True)
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
