#!/usr/bin/env python3
"""Step-size convergence of the charge solver against the single-point Duhamel integral."""
import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from oracles import duhamel_charge  # noqa: E402

from pointwave.bc_algebra import build_config  # noqa: E402
from pointwave.charges import bc_residual  # noqa: E402
from pointwave.free_wave import BumpProfile, InitialData  # noqa: E402
from pointwave.wavefield import simulate  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", type=float, nargs="+", default=[-1.0, 0.0, 1.0, 3.0])
    ap.add_argument("--steps", type=float, nargs="+", default=[0.02, 0.01, 0.005, 0.0025])
    ap.add_argument("--T", type=float, default=6.0)
    args = ap.parse_args()

    bump = BumpProfile((2.0, 0.0, 0.0), 0.5, 1.0)
    data = InitialData([bump])
    ts = np.linspace(0, args.T, 121)
    print(f"{'alpha':>6} {'h':>8} {'abs err':>10} {'rel err':>10} {'bc resid':>10}")
    for alpha in args.alphas:
        exact = np.array([duhamel_charge(alpha, bump, 2.0, t) for t in ts])
        cfg = build_config([[0, 0, 0]], [[1]], [[alpha]])
        for h in args.steps:
            sim = simulate(cfg, data, args.T, h)
            err = np.max(np.abs(sim.history.zeta(ts)[:, 0] - exact))
            res = bc_residual(cfg, sim.history, sim.forcing)
            print(f"{alpha:6g} {h:8g} {err:10.3g} {err / np.abs(exact).max():10.3g} {res:10.3g}")


if __name__ == "__main__":
    main()
