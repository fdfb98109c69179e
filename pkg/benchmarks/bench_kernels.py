"""Time the compiled kernels against the numpy fallback.

Each backend runs in its own interpreter because the choice is fixed at import
(``BATHENT_NUMBA=0`` selects numpy).  Usage::

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from bathent import backend, specfun, qle

repeat = int(sys.argv[1])
rng = np.random.default_rng(1)

def best(f):
    f()  # warm-up, includes compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter(); f(); times.append(time.perf_counter() - t0)
    return min(times)

z = rng.uniform(0.1, 40, 2000) * np.exp(1j * rng.uniform(-3, 3, 2000))
a = rng.uniform(-3.9, 3.9, 2000)
s = np.linspace(0.05, 40.0, 200)
w = 0.01 * np.exp(-s / 10)
gp = rng.normal(size=(2000, 2))
kern = rng.normal(size=2000)

out = {
    "backend": backend(),
    "incomplete gamma, 2000 points": best(lambda: specfun.upper_incomplete_gamma(a, z)),
    "channel ODE, 200 nodes, t = 20": best(lambda: qle.integrate_channel(s, w, 1.0, 2001, 0.01)),
    "noise convolution, 2000 steps": best(lambda: qle.noise_integral(gp, kern, 0.01)),
}
print(json.dumps(out))
"""


def run(flag, repeat):
    env = dict(os.environ, BATHENT_NUMBA=flag)
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    fast, slow = run("1", args.repeat), run("0", args.repeat)
    if fast.pop("backend") != "numba":
        print("numba is not installed; only the numpy timings are meaningful")
    slow.pop("backend")
    print(f"{'kernel':34s} {'numba [s]':>11s} {'numpy [s]':>11s} {'speed-up':>9s}")
    for name in slow:
        print(f"{name:34s} {fast[name]:11.4f} {slow[name]:11.4f} {slow[name] / fast[name]:8.1f}x")


if __name__ == "__main__":
    main()
