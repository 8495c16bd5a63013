"""Time the numba and pure-numpy kernel paths on fixed instances.

Each backend runs in its own subprocess because the switch is read at import.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from wdro import BACKEND, RobustInstance, make_measure, solve_dual, solve_primal, w1_distance
from wdro.payoffs import clamp

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)

def measure(n, d):
    return make_measure(rng.uniform(-2, 2, (n, d)), rng.dirichlet(np.ones(n)))

rho, sigma = measure(300, 2), measure(300, 2)
support = np.linspace(-2, 2, 2001)
center = make_measure(rng.choice(support, 200, replace=False), rng.dirichlet(np.ones(200)))
inst = RobustInstance(clamp(), center, 0.3, support)

cases = {
    "w1_distance 300x300": lambda: w1_distance(rho, sigma),
    "solve_primal 200x2001": lambda: solve_primal(inst),
    "solve_dual 200x2001": lambda: solve_dual(inst),
}
out = {}
for name, fn in cases.items():
    fn()  # warm up (compilation / cache load)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    out[name] = min(times)
print(json.dumps({"backend": BACKEND, "times": out}))
"""


def run(disable: bool, repeat: int) -> dict:
    env = dict(os.environ, WDRO_DISABLE_NUMBA="1" if disable else "0")
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    numpy_run = run(True, args.repeat)
    numba_run = run(False, args.repeat)
    print(f"{'case':<24}{'numpy [s]':>12}{numba_run['backend'] + ' [s]':>12}{'speedup':>10}")
    for name, t_np in numpy_run["times"].items():
        t_nb = numba_run["times"][name]
        print(f"{name:<24}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
