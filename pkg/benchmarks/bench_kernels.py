"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from photonkin import fock, geometry, kernels


def _cases():
    drive = fock.DriveSignal.gaussian_for_z(3.0)
    psi0 = fock.FockVector.number_state(0, 128).amps
    f_mid = drive.midpoint_values()
    loop = geometry.octant_loop(1000).points
    return {
        "rk4_driven (dim 128)": (
            "rk4_driven", (psi0, drive.times, drive.values, f_mid, drive.omega), drive.times.size - 1),
        "spin1_ordered_product (3000 segments)": (
            "spin1_ordered_product", (loop,), len(loop) - 1),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = {"python": kernels.python_backend}
    if kernels.compiled_backend is not None:
        backends["compiled"] = kernels.compiled_backend
    else:
        print("compiled backend unavailable; timing the Python fallback only")

    for label, (name, call_args, steps) in _cases().items():
        times = {}
        for bname, mod in backends.items():
            fn = getattr(mod, name)
            fn(*call_args)
            times[bname] = min(timeit.repeat(lambda: fn(*call_args), number=1, repeat=args.repeat))
        line = "  ".join(f"{b}: {t * 1e3:8.2f} ms" for b, t in times.items())
        if len(times) == 2:
            line += f"  speedup: {times['python'] / times['compiled']:6.1f}x"
        print(f"{label:<40} {steps:>6} steps  {line}")
        if len(times) == 2:
            ref = backends["python"]
            a = getattr(ref, name)(*call_args)[0]
            b = getattr(backends["compiled"], name)(*call_args)[0]
            print(f"{'':<40} max backend difference {np.abs(np.asarray(a) - np.asarray(b)).max():.2e}")


if __name__ == "__main__":
    main()
