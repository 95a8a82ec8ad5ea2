"""Time the compiled and pure-Python kernels on a profile-like state.

    python3 benchmarks/bench_kernels.py [--sizes 501 2001 8001] [--repeat 5]
                                        [--gamma 1.1 --alpha 0.2]
"""

import argparse
import timeit

import numpy as np

from nsklab import FluidParams, solve_end_states
from nsklab import _pykernels
from nsklab.kernels import backends


def make_state(n, params, shock):
    xi = np.linspace(-60.0, 60.0, n)
    s = 0.5 * (1.0 + np.tanh(0.05 * xi))
    v = shock.v_minus + (shock.v_plus - shock.v_minus) * s
    h = shock.h_minus + (shock.h_plus - shock.h_minus) * s
    return xi[1] - xi[0], v, h


def bench(mod, n, repeat, params, shock):
    dx, v, h = make_state(n, params, shock)
    args = (dx, shock.sigma, params.diff_v, params.diff_h, params.gamma,
            params.alpha, 1.0, 1e-6)
    out_v, out_h = np.empty_like(v), np.empty_like(h)
    dt = 0.1 * dx * dx
    number = max(1, 20000 // n)
    t_rhs = min(timeit.repeat(lambda: mod.rhs(v, h, out_v, out_h, *args),
                              number=number, repeat=repeat)) / number
    t_rk4 = min(timeit.repeat(lambda: mod.rk4_step(v, h, dt, *args),
                              number=number, repeat=repeat)) / number
    return t_rhs, t_rk4


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[501, 2001, 8001])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--alpha", type=float, default=0.0)
    args = ap.parse_args(argv)
    params = FluidParams(args.gamma, args.alpha, 0.09, strict=False)
    shock = solve_end_states(1.0, 0.0, 0.1, 2, params)
    mods = backends()
    mods.setdefault("python", _pykernels)
    print(f"{'backend':>10} {'n':>7} {'rhs [us]':>12} {'rk4 [us]':>12}")
    table = {}
    for n in args.sizes:
        for name, mod in sorted(mods.items()):
            t_rhs, t_rk4 = bench(mod, n, args.repeat, params, shock)
            table[name, n] = t_rk4
            print(f"{name:>10} {n:>7} {1e6 * t_rhs:12.1f} {1e6 * t_rk4:12.1f}")
    if "compiled" in mods:
        for n in args.sizes:
            ratio = table["python", n] / table["compiled", n]
            print(f"rk4 speedup at n={n}: {ratio:.2f}x")


if __name__ == "__main__":
    main()
