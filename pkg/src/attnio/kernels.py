"""Attention kernels executed against the memory-hierarchy simulator.

Two exact kernels cover the two cache regimes:

* ``square_tiling_attention`` - small cache.  Materializes exp(Q K^T)
  to memory in square blocks of side B = floor(sqrt(M/4)), then forms
  the normalized product in a second blocked pass.  I/O is
  O(N^2 d / sqrt(M) + N^2).

* ``streaming_attention`` - large cache.  Keeps a block of Q rows
  resident and streams K and V rows once per block, maintaining
  running-max-stabilized accumulators; exp(Q K^T) is never
  materialized.  I/O is O(N^2 d^2 / M + N d).

``dispatch_attention`` selects between them at the M = d^2 crossover.
``reference_attention`` is the plain-memory oracle both are tested
against.  All kernels expect a fresh hierarchy (zero counters).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RegimeError
from .matrices import AttentionInstance, block_extent, num_blocks
from .memory import Epoch, IoStats, MemoryHierarchy, split_into_epochs


@dataclass(frozen=True)
class KernelResult:
    """Output plus exact I/O accounting for one kernel run.

    ``entry_completions`` logs, for each group of Q K^T entries, the
    trace length at the moment their summations finished, as
    (tick, count) pairs.  Epoch-progress checks bucket these by epoch.
    """

    output: np.ndarray
    io: IoStats
    epochs: list[Epoch]
    algorithm: str
    entry_completions: list[tuple[int, int]]
    overflow: bool


def reference_attention(inst: AttentionInstance) -> np.ndarray:
    """Oracle: D^{-1} exp(Q K^T) V with D the diagonal of row sums.

    Computed in plain memory with no I/O accounting.  Uses the row-max
    shift (exact by softmax shift invariance) so it stays finite for
    any input magnitude.
    """
    scores = inst.Q @ inst.K.T
    shifted = np.exp(scores - scores.max(axis=1, keepdims=True))
    return (shifted @ inst.V) / shifted.sum(axis=1, keepdims=True)


def _addrs(name, rows, cols):
    return [(name, i, j) for i in rows for j in cols]


def _finish(h: MemoryHierarchy, output, algorithm, completions) -> KernelResult:
    return KernelResult(
        output=output,
        io=IoStats(h.reads, h.writes),
        epochs=split_into_epochs(h.trace, h.capacity),
        algorithm=algorithm,
        entry_completions=completions,
        overflow=h.overflow,
    )


def square_tiling_attention(
    h: MemoryHierarchy,
    inst: AttentionInstance,
    stabilize: bool = False,
    write_qkt: bool = False,
) -> KernelResult:
    """Two-phase square-tiled attention with block side B = floor(sqrt(M/4)).

    Phase 1 writes every B x B block of A = exp(Q K^T) and the row-sum
    vector to memory; Phase 2 reads them back and accumulates
    D^{-1} A V block by block.  Boundary blocks are clipped.

    ``stabilize`` adds a row-max pre-pass with the same I/O order (the
    default path applies exp directly, so callers bound input
    magnitude).  ``write_qkt`` additionally writes each raw Q K^T entry
    to memory when it is first computed (at most N^2 extra writes);
    this is the matmul reduction hook.
    """
    n, d = inst.N, inst.d
    m = h.capacity
    b = math.isqrt(m // 4)
    nb, db = num_blocks(n, b), num_blocks(d, b)
    if stabilize and 3 * b * b + 2 * b > m:
        raise RegimeError("stabilized pre-pass needs M >= 3B^2 + 2B")

    h.load("Q", inst.Q)
    h.load("KT", inst.K.T)
    h.load("V", inst.V)
    completions: list[tuple[int, int]] = []

    def accumulate_score_block(ri, rj):
        """Raw (pre-exp) Q K^T block summed over the l-loop."""
        a = h.alloc((len(ri), len(rj)))
        for l in range(db):
            rl = block_extent(d, b, l)
            qb = h.read_block(_addrs("Q", ri, rl), (len(ri), len(rl)))
            kb = h.read_block(_addrs("KT", rl, rj), (len(rl), len(rj)))
            h.compute("addmm", a, qb, kb, out=a)
            h.free(qb)
            h.free(kb)
        completions.append((len(h.trace), len(ri) * len(rj)))
        if write_qkt:
            h.write_block(a, _addrs("QKT", ri, rj))
        return a

    if stabilize:
        # Pre-pass: per row block, the running max over all score blocks.
        for i in range(nb):
            ri = block_extent(n, b, i)
            mrow = h.alloc((len(ri),), fill=-math.inf)
            for j in range(nb):
                a = accumulate_score_block(ri, block_extent(n, b, j))
                t = h.compute("rowmax", a)
                h.compute("maximum", mrow, t, out=mrow)
                h.free(t)
                h.free(a)
            h.write_block(mrow, [("rmax", r) for r in ri])
            h.free(mrow)

    # Phase 1: compute and store A = exp(Q K^T [- rowmax]) and row sums.
    for i in range(nb):
        ri = block_extent(n, b, i)
        dvec = h.alloc((len(ri),))
        mrow = None
        if stabilize:
            mrow = h.read_block([("rmax", r) for r in ri], (len(ri),))
        for j in range(nb):
            rj = block_extent(n, b, j)
            if stabilize:
                a = h.alloc((len(ri), len(rj)))
                for l in range(db):
                    rl = block_extent(d, b, l)
                    qb = h.read_block(_addrs("Q", ri, rl), (len(ri), len(rl)))
                    kb = h.read_block(_addrs("KT", rl, rj), (len(rl), len(rj)))
                    h.compute("addmm", a, qb, kb, out=a)
                    h.free(qb)
                    h.free(kb)
                h.compute("subrow", a, mrow, out=a)
            else:
                a = accumulate_score_block(ri, rj)
            h.compute("exp", a, out=a)
            h.write_block(a, _addrs("A", ri, rj))
            t = h.compute("rowsum", a)
            h.compute("add", dvec, t, out=dvec)
            h.free(t)
            h.free(a)
        h.write_block(dvec, [("dvec", r) for r in ri])
        h.free(dvec)
        if mrow is not None:
            h.free(mrow)

    # Phase 2: O block = sum_k diag(d)^{-1} A[i,k] V[k,j].
    for i in range(nb):
        ri = block_extent(n, b, i)
        dvec = h.read_block([("dvec", r) for r in ri], (len(ri),))
        h.compute("inv", dvec, out=dvec)
        for j in range(db):
            cj = block_extent(d, b, j)
            o = h.alloc((len(ri), len(cj)))
            for k in range(nb):
                rk = block_extent(n, b, k)
                ab = h.read_block(_addrs("A", ri, rk), (len(ri), len(rk)))
                vb = h.read_block(_addrs("V", rk, cj), (len(rk), len(cj)))
                h.compute("scaled_addmm", o, dvec, ab, vb, out=o)
                h.free(ab)
                h.free(vb)
            h.write_block(o, _addrs("O", ri, cj))
            h.free(o)
        h.free(dvec)

    return _finish(h, h.fetch_matrix("O", (n, d)), "tiling", completions)


def streaming_block_rows(m: int, n: int, d: int) -> int:
    """Resident Q-row count for the streaming kernel.

    Starts from floor(M / 4d) and shrinks until the exact peak cache
    usage - two R x d blocks, up to five length-R vectors, and one
    streamed K-or-V row - fits in M words.
    """
    r = min(m // (4 * d), n)
    while r > 1 and 2 * r * d + max(5 * r, 3 * r + d) > m:
        r -= 1
    return max(r, 1)


def streaming_attention(h: MemoryHierarchy, inst: AttentionInstance) -> KernelResult:
    """One-pass attention with running-max renormalized accumulators.

    Q K^T is never materialized: per resident block of Q rows, each K
    row and V row is read exactly once and folded into the output and
    row-sum accumulators.
    """
    n, d = inst.N, inst.d
    m = h.capacity
    if m < 8 * d:
        raise RegimeError(
            f"streaming needs M >= 8d = {8 * d}; use square_tiling_attention"
        )
    r_max = streaming_block_rows(m, n, d)

    h.load("Q", inst.Q)
    h.load("K", inst.K)
    h.load("V", inst.V)
    completions: list[tuple[int, int]] = []

    for i0 in range(0, n, r_max):
        rows = range(i0, min(i0 + r_max, n))
        r = len(rows)
        q = h.read_block(_addrs("Q", rows, range(d)), (r, d))
        o = h.alloc((r, d))
        lsum = h.alloc((r,))
        mrun = h.alloc((r,), fill=-math.inf)
        for j in range(n):
            krow = h.read_block([("K", j, t) for t in range(d)], (d,))
            s = h.compute("matmul", q, krow)
            h.free(krow)
            mnew = h.compute("maximum", mrun, s)
            alpha = h.compute("sub", mrun, mnew)
            h.compute("exp", alpha, out=alpha)
            h.free(mrun)
            mrun = mnew
            # s becomes p = exp(s - m) in place
            h.compute("sub", s, mrun, out=s)
            h.compute("exp", s, out=s)
            h.compute("mul", lsum, alpha, out=lsum)
            h.compute("add", lsum, s, out=lsum)
            h.compute("rowscale", o, alpha, out=o)
            h.free(alpha)
            vrow = h.read_block([("V", j, t) for t in range(d)], (d,))
            h.compute("add_outer", o, s, vrow, out=o)
            h.free(vrow)
            h.free(s)
            completions.append((len(h.trace), r))
        h.compute("inv", lsum, out=lsum)
        h.compute("rowscale", o, lsum, out=o)
        h.write_block(o, _addrs("O", rows, range(d)))
        for slot in (q, o, lsum, mrun):
            h.free(slot)

    return _finish(h, h.fetch_matrix("O", (n, d)), "streaming", completions)


def dispatch_attention(h: MemoryHierarchy, inst: AttentionInstance, **kw) -> KernelResult:
    """Pick the regime-appropriate kernel: streaming iff M >= d^2 (ties
    to streaming) and the streaming row budget M >= 8d holds."""
    d = inst.d
    if h.capacity >= d * d and h.capacity >= 8 * d:
        return streaming_attention(h, inst)
    return square_tiling_attention(h, inst, **kw)


def matmul_via_attention(h: MemoryHierarchy, Q, K) -> np.ndarray:
    """Compute Q K^T by running the tiled attention kernel instrumented
    to write each raw Q K^T entry to memory when first computed.

    V is a dummy all-ones matrix whose output is discarded; the added
    I/O is at most N^2 writes over the plain kernel.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    inst = AttentionInstance(Q, K, np.ones_like(Q))
    square_tiling_attention(h, inst, write_qkt=True)
    return h.fetch_matrix("QKT", (inst.N, inst.N))
