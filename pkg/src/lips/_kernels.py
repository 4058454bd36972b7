"""Hot inner loops.

Every kernel here exists twice: a numba ``@njit`` version and a pure numpy
version with the same results (bit-identical except for the summation
order inside ``cd_pass``). The numba path is used when numba imports
and the environment variable ``LIPS_DISABLE_NUMBA`` is unset (or ``0``).
``benchmarks/bench_kernels.py`` times the two paths against each other.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a soft dependency
    numba = None


def _numba_wanted() -> bool:
    flag = os.environ.get("LIPS_DISABLE_NUMBA", "").strip().lower()
    return flag in ("", "0", "false", "no")


HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and _numba_wanted()

BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------


def _and_count_np(tidsets, pairs):
    children = np.bitwise_and(tidsets[pairs[:, 0]], tidsets[pairs[:, 1]])
    counts = np.bitwise_count(children).sum(axis=1, dtype=np.int64)
    return children, counts


def _boolean_support_np(Z, M):
    # boolean product via float matmul; exact while row sums stay below 2**24
    hits = Z.astype(np.float32) @ M.astype(np.float32)
    return hits == 0


def _support_counts_np(Z, M, chunk=2048):
    L = M.shape[1]
    counts = np.empty(L, dtype=np.int64)
    Zf = Z.astype(np.float32)
    for start in range(0, L, chunk):
        block = M[:, start:start + chunk].astype(np.float32)
        counts[start:start + chunk] = ((Zf @ block) == 0).sum(axis=0)
    return counts


def _min_dissimilarity_np(codes, sizes, sel_code, sel_size, current):
    both = (codes >= 0) & (sel_code >= 0)
    incompatible = (both & (codes != sel_code)).any(axis=1)
    common = (both & (codes == sel_code)).sum(axis=1)
    d = np.maximum(sizes, sel_size) - np.where(incompatible, 0, common)
    return np.minimum(current, d)


def _cd_pass_np(X, w, r, beta, lam, n):
    # one cyclic sweep of weighted-least-squares coordinate descent with
    # soft-thresholding; r is the working residual and is updated in place
    biggest = 0.0
    for j in range(X.shape[1]):
        xj = X[:, j]
        wx = w * xj
        denom = wx @ xj / n
        if denom <= 0.0:
            if beta[j] != 0.0:
                r += xj * beta[j]
                biggest = max(biggest, abs(beta[j]))
                beta[j] = 0.0
            continue
        g = wx @ r / n + denom * beta[j]
        new = np.sign(g) * max(abs(g) - lam, 0.0) / denom
        delta = new - beta[j]
        if delta != 0.0:
            r -= xj * delta
            beta[j] = new
            biggest = max(biggest, abs(delta))
    return biggest


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _popcount64(x):
        x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
        x = (x & np.uint64(0x3333333333333333)) + (
            (x >> np.uint64(2)) & np.uint64(0x3333333333333333)
        )
        x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
        return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)

    @numba.njit(cache=True)
    def _and_count_nb(tidsets, pairs):
        c = pairs.shape[0]
        w = tidsets.shape[1]
        children = np.empty((c, w), dtype=np.uint64)
        counts = np.zeros(c, dtype=np.int64)
        for r in range(c):
            a = pairs[r, 0]
            b = pairs[r, 1]
            total = np.uint64(0)
            for k in range(w):
                word = tidsets[a, k] & tidsets[b, k]
                children[r, k] = word
                total += _popcount64(word)
            counts[r] = np.int64(total)
        return children, counts

    @numba.njit(cache=True)
    def _boolean_support_nb(ZT, M):
        # ZT is d x n (dummy-major) so the inner row loop is contiguous
        d, n = ZT.shape
        L = M.shape[1]
        out = np.ones((L, n), dtype=np.bool_)
        for k in range(L):
            for j in range(d):
                if M[j, k]:
                    for i in range(n):
                        if ZT[j, i]:
                            out[k, i] = False
        return out

    @numba.njit(cache=True)
    def _support_counts_nb(ZT, M):
        d, n = ZT.shape
        L = M.shape[1]
        counts = np.zeros(L, dtype=np.int64)
        alive = np.empty(n, dtype=np.bool_)
        for k in range(L):
            alive[:] = True
            for j in range(d):
                if M[j, k]:
                    for i in range(n):
                        if ZT[j, i]:
                            alive[i] = False
            total = 0
            for i in range(n):
                if alive[i]:
                    total += 1
            counts[k] = total
        return counts

    @numba.njit(cache=True)
    def _min_dissimilarity_nb(codes, sizes, sel_code, sel_size, current):
        L, p = codes.shape
        out = current.copy()
        for r in range(L):
            common = 0
            incompatible = False
            for j in range(p):
                a = codes[r, j]
                b = sel_code[j]
                if a >= 0 and b >= 0:
                    if a == b:
                        common += 1
                    else:
                        incompatible = True
                        break
            big = sizes[r] if sizes[r] > sel_size else sel_size
            d = big if incompatible else big - common
            if d < out[r]:
                out[r] = d
        return out

    @numba.njit(cache=True)
    def _cd_pass_nb(X, w, r, beta, lam, n):
        rows, cols = X.shape
        biggest = 0.0
        for j in range(cols):
            denom = 0.0
            g = 0.0
            for i in range(rows):
                wx = w[i] * X[i, j]
                denom += wx * X[i, j]
                g += wx * r[i]
            denom /= n
            if denom <= 0.0:
                if beta[j] != 0.0:
                    for i in range(rows):
                        r[i] += X[i, j] * beta[j]
                    if abs(beta[j]) > biggest:
                        biggest = abs(beta[j])
                    beta[j] = 0.0
                continue
            g = g / n + denom * beta[j]
            mag = abs(g) - lam
            new = 0.0
            if mag > 0.0:
                new = (mag if g > 0 else -mag) / denom
            delta = new - beta[j]
            if delta != 0.0:
                for i in range(rows):
                    r[i] -= X[i, j] * delta
                beta[j] = new
                if abs(delta) > biggest:
                    biggest = abs(delta)
        return biggest


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def and_count(tidsets: np.ndarray, pairs: np.ndarray, *, backend: str | None = None):
    """AND pairs of row bitsets and popcount the result.

    ``tidsets`` is ``(m, W)`` uint64, ``pairs`` is ``(c, 2)`` indices into it.
    Returns the ``(c, W)`` child bitsets and their ``(c,)`` bit counts.
    """
    tidsets = np.ascontiguousarray(tidsets, dtype=np.uint64)
    pairs = np.ascontiguousarray(pairs, dtype=np.int64).reshape(-1, 2)
    if _pick(backend) == "numba":
        return _and_count_nb(tidsets, pairs)
    return _and_count_np(tidsets, pairs)


def boolean_support(Z: np.ndarray, M: np.ndarray, *, backend: str | None = None) -> np.ndarray:
    """Entry-wise negation of the boolean product ``Z . M`` (n x L)."""
    Z = np.asarray(Z, dtype=bool)
    M = np.asarray(M, dtype=bool)
    if _pick(backend) == "numba":
        ZT = np.ascontiguousarray(Z.T)
        return np.ascontiguousarray(_boolean_support_nb(ZT, np.ascontiguousarray(M)).T)
    return _boolean_support_np(Z, M)


def support_counts(Z: np.ndarray, M: np.ndarray, *, backend: str | None = None) -> np.ndarray:
    """Column sums of :func:`boolean_support` without materialising it."""
    Z = np.asarray(Z, dtype=bool)
    M = np.asarray(M, dtype=bool)
    if _pick(backend) == "numba":
        ZT = np.ascontiguousarray(Z.T)
        return _support_counts_nb(ZT, np.ascontiguousarray(M))
    return _support_counts_np(Z, M)


def min_dissimilarity(
    codes: np.ndarray,
    sizes: np.ndarray,
    sel_code: np.ndarray,
    sel_size: int,
    current: np.ndarray,
    *,
    backend: str | None = None,
) -> np.ndarray:
    """Element-wise ``min(current, d(candidate, selected))`` over candidates.

    Patterns are encoded as rows of ``codes`` holding the level index per
    variable, or ``-1`` where the variable is absent.
    """
    codes = np.ascontiguousarray(codes, dtype=np.int32)
    sizes = np.ascontiguousarray(sizes, dtype=np.int64)
    sel_code = np.ascontiguousarray(sel_code, dtype=np.int32)
    current = np.ascontiguousarray(current, dtype=np.int64)
    if _pick(backend) == "numba":
        return _min_dissimilarity_nb(codes, sizes, sel_code, np.int64(sel_size), current)
    return _min_dissimilarity_np(codes, sizes, sel_code, int(sel_size), current)


def cd_pass(
    X: np.ndarray,
    w: np.ndarray,
    r: np.ndarray,
    beta: np.ndarray,
    lam: float,
    *,
    backend: str | None = None,
) -> float:
    """One coordinate-descent sweep for the L1 weighted least-squares subproblem.

    Minimises ``(1/2n) sum w (r - X db)^2 + lam |beta|`` one coordinate at a
    time. ``r`` and ``beta`` are updated in place (both must be contiguous
    float64); returns the largest absolute coefficient change.
    """
    n = float(X.shape[0])
    if _pick(backend) == "numba":
        return float(_cd_pass_nb(X, w, r, beta, float(lam), n))
    return float(_cd_pass_np(X, w, r, beta, float(lam), n))


def _pick(backend):
    if backend is None:
        return BACKEND
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend
