"""Time the numba and numpy kernel paths on pipeline-sized inputs.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--seed S]

Inputs mimic one simulated trial: 7000 training rows, 20 dummies, a few
thousand mined patterns. Each kernel is warmed up once (so numba compile
time is excluded), then timed; the two backends' outputs are compared.
"""

import argparse
import time

import numpy as np

from lips import _kernels
from lips.dataset import encode_dummies
from lips.miner import MinerConfig, mine
from lips.patterns import incompatibility_matrix, pattern_codes
from lips.simulator import TilingConfig, generate


def best_of(fn, repeat):
    fn()  # warm-up / JIT
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, float):
        return abs(a - b) <= 1e-12 * max(1.0, abs(a))
    return np.array_equal(a, b) if a.dtype.kind != "f" else np.allclose(a, b, rtol=1e-12, atol=1e-14)


def make_inputs(seed):
    ds = generate(TilingConfig(n=7000, seed=seed))
    dm = encode_dummies(ds)
    pos = dm.subset(np.flatnonzero(ds.outcome == 1))
    pats = [m.pattern for m in mine(pos, MinerConfig(0.1))]
    rng = np.random.default_rng(seed)
    tids = dm.tidsets()
    pairs = rng.integers(0, dm.d, size=(20_000, 2))
    M = incompatibility_matrix(pats, dm)
    codes, sizes = pattern_codes(pats, dm.p)
    X = rng.integers(0, 2, size=(7000, 20)).astype(float)
    w = rng.random(7000) * 0.25 + 0.01
    r = rng.normal(size=7000)
    return dm, pats, tids, pairs, M, codes, sizes, X, w, r


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    dm, pats, tids, pairs, M, codes, sizes, X, w, r = make_inputs(args.seed)
    print(f"rows={dm.n} dummies={dm.d} patterns={len(pats)} repeat={args.repeat}")
    current = np.full(len(pats), 99, dtype=np.int64)

    def cd(backend):
        beta, rr = np.zeros(X.shape[1]), r.copy()
        moved = _kernels.cd_pass(X, w, rr, beta, 1e-3, backend=backend)
        return beta, rr, moved

    cases = {
        "and_count": lambda b: _kernels.and_count(tids, pairs, backend=b),
        "boolean_support": lambda b: _kernels.boolean_support(dm.bits, M, backend=b),
        "support_counts": lambda b: _kernels.support_counts(dm.bits, M, backend=b),
        "min_dissimilarity": lambda b: _kernels.min_dissimilarity(codes, sizes, codes[0], sizes[0], current, backend=b),
        "cd_pass": cd,
    }
    print(f"{'kernel':<18} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}  agree")
    for name, fn in cases.items():
        t_nb, out_nb = best_of(lambda: fn("numba"), args.repeat)
        t_np, out_np = best_of(lambda: fn("numpy"), args.repeat)
        print(f"{name:<18} {t_nb * 1e3:>10.3f} {t_np * 1e3:>10.3f} {t_np / t_nb:>7.1f}x  {same(out_nb, out_np)}")


if __name__ == "__main__":
    main()
