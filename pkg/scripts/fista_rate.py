"""Print the FISTA suboptimality gap next to its O(1/T^2) bound on one replication."""

import argparse

import numpy as np

from ksupport.data import SyntheticSpec, synthetic_generate
from ksupport.solver import FitConfig, KSupport, fit, lipschitz_estimate


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--k", type=int, default=15)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=707)
    p.add_argument("--iters", type=int, default=2000)
    args = p.parse_args()

    train, *_ = synthetic_generate(SyntheticSpec(seed=args.seed))
    L = lipschitz_estimate(train.X)
    pen = KSupport(args.k, args.lam)
    ref = fit(train, FitConfig(pen, max_iters=100_000, rel_tol=1e-300, step_L=L))
    run = fit(train, FitConfig(pen, max_iters=args.iters, rel_tol=1e-300, step_L=L))
    r2 = float(ref.w @ ref.w)
    print(f"L = {L:.4g}, F* = {ref.best_objective:.12g} after {ref.iterations} iterations")
    print(f"{'T':>6}  {'F(w_T) - F*':>12}  {'bound':>12}")
    for T in np.unique(np.geomspace(1, run.objective_trace.size - 1, 15).astype(int)):
        gap = run.objective_trace[T] - ref.best_objective
        print(f"{T:>6}  {gap:>12.4e}  {2 * L * r2 / (T + 1) ** 2:>12.4e}")


if __name__ == "__main__":
    main()
