"""Time the hot kernels on the numba and pure-numpy backends.

Each backend runs in its own interpreter because the choice is fixed at
import time by ``CHEMCLIFFORD_NUMBA``. Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--molecule beh2_full]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "data"

WORKER = r"""
import json, sys, time
import numpy as np
from chemclifford import _accel
from chemclifford.engine import RewardEvaluator, SaConfig, anneal, group_hamiltonian
from chemclifford.hea import build_template, compute_q_arrays
from chemclifford.io import load_hamiltonian
from chemclifford.pauli import apply_hf_frame
from chemclifford.sim import Circuit, basis_state, backward, forward, hamiltonian_matrix

path, p, repeat = sys.argv[1], int(sys.argv[2]), int(sys.argv[3])
hf = load_hamiltonian(path)
h = apply_hf_frame(hf.h, hf.frame)
t = build_template(hf.n, p)
rng = np.random.default_rng(0)
theta = rng.uniform(-1, 1, t.n_params)
c = Circuit.from_template(t)
hm = hamiltonian_matrix(h)
gh = group_hamiltonian(h)
ev = RewardEvaluator(gh, t)
slots = rng.integers(0, 24, t.n_slots)
inv = np.arange(t.n_params)


def best(fn):
    fn()  # warm-up, includes compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


psi = forward(basis_state(hf.n), c.ops, theta, c.utable)
lam = hm @ psi
out = {
    "backend": _accel.BACKEND,
    "forward": best(lambda: forward(basis_state(hf.n), c.ops, theta, c.utable)),
    "backward": best(lambda: backward(psi, lam, c.ops, theta, c.utable, t.n_params)),
    "q_kernel": best(lambda: compute_q_arrays(t)),
    "reward_eval": best(lambda: ev.evaluate(slots, inv)),
    "anneal_100": best(lambda: anneal(h, t, SaConfig(iterations=100, seed=1), gh=gh)),
}
print(json.dumps(out))
"""


def run(flag: str, path: Path, p: int, repeat: int) -> dict:
    env = dict(os.environ, CHEMCLIFFORD_NUMBA=flag)
    res = subprocess.run([sys.executable, "-c", WORKER, str(path), str(p), str(repeat)], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--molecule", default="beh2_full")
    ap.add_argument("--layers", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    path = DATA / f"{args.molecule}.json"
    fast = run("1", path, args.layers, args.repeat)
    slow = run("0", path, args.layers, args.repeat)
    print(f"{args.molecule}, p={args.layers}, best of {args.repeat}")
    print(f"{'kernel':<12} {'numba [ms]':>12} {'numpy [ms]':>12} {'speedup':>9}")
    for key in ("forward", "backward", "q_kernel", "reward_eval", "anneal_100"):
        a, b = fast[key] * 1e3, slow[key] * 1e3
        print(f"{key:<12} {a:12.3f} {b:12.3f} {b / a:9.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
