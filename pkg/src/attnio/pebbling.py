"""Red-blue pebble game machinery on the attention computational DAG.

The game is played on a DAG whose inputs start with blue pebbles
(data in slow memory).  Rules:

* R1 (read):    red on a vertex with a blue pebble - one I/O.
* R2 (write):   blue on a vertex with a red pebble - one I/O.
* R3 (compute): red on a non-input vertex whose parents are all red.
* R4 (delete):  remove a pebble (red first if both colors present,
                unless the transition names a color).

At most M red pebbles exist at any instant.  A complete calculation
starts from blue-on-inputs and ends with blue exactly on the outputs
and no other pebbles.  I/O complexity is the minimum number of R1/R2
transitions over complete calculations.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

from .errors import ConfigurationError, EnumerationCapError, RegimeError

INPUT = "Input"
L1_PRODUCT = "L1Product"
SUM_INTERNAL = "SumInternal"
QKT_ROOT = "QKtRoot"
EXP = "Exp"
ROWSUM_INTERNAL = "RowSumInternal"
ROWSUM_ROOT = "RowSumRoot"
INVERSE = "Inverse"
L2_PRODUCT = "L2Product"
AV_SUM_INTERNAL = "AVSumInternal"
AV_ROOT = "AVRoot"
SCALE = "Scale"

LEVEL1_KINDS = {L1_PRODUCT, SUM_INTERNAL, QKT_ROOT}

BRUTE_FORCE_NODE_CAP = 12


@dataclass(frozen=True)
class Node:
    kind: str
    parents: tuple[str, ...]
    level1: bool = False


class PebblingDag:
    """A DAG with designated inputs (no parents) and outputs (no children)."""

    def __init__(self, nodes: dict[str, Node]):
        self.nodes = dict(nodes)
        children: dict[str, list[str]] = {v: [] for v in self.nodes}
        for v, node in self.nodes.items():
            for p in node.parents:
                if p not in self.nodes:
                    raise ConfigurationError(f"node {v!r} references unknown parent {p!r}")
                children[p].append(v)
        self.children = children
        self.inputs = frozenset(v for v, n in self.nodes.items() if not n.parents)
        self.outputs = frozenset(v for v in self.nodes if not children[v])

    def __len__(self) -> int:
        return len(self.nodes)

    def kind_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for node in self.nodes.values():
            counts[node.kind] = counts.get(node.kind, 0) + 1
        return counts

    # -- JSON lines export/import: one node per line --------------------------

    def to_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for v in sorted(self.nodes):
                node = self.nodes[v]
                fh.write(json.dumps({
                    "id": v, "kind": node.kind,
                    "parents": list(node.parents), "level1": node.level1,
                }) + "\n")

    @classmethod
    def from_jsonl(cls, path) -> "PebblingDag":
        nodes = {}
        with open(path) as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                nodes[rec["id"]] = Node(rec["kind"], tuple(rec["parents"]), rec["level1"])
        return cls(nodes)


class AttentionDag(PebblingDag):
    """The attention computational graph for given N, d."""

    def __init__(self, nodes, n: int, d: int):
        super().__init__(nodes)
        self.N = n
        self.d = d


def _sum_tree(nodes: dict[str, Node], leaves: list[str], prefix: str,
              level1: bool) -> str:
    """Add a balanced binary summation network over ``leaves``.

    Returns the id of the topmost sum node (a leaf itself when there is
    only one).  Internal nodes are created in a deterministic order.
    """
    counter = [0]

    def build(lo: int, hi: int) -> str:
        if hi - lo == 1:
            return leaves[lo]
        mid = (lo + hi + 1) // 2
        left = build(lo, mid)
        right = build(mid, hi)
        vid = f"{prefix}#{counter[0]}"
        counter[0] += 1
        nodes[vid] = Node(SUM_INTERNAL if level1 else _tree_kind(prefix),
                          (left, right), level1=level1)
        return vid

    return build(0, len(leaves))


def _tree_kind(prefix: str) -> str:
    return ROWSUM_INTERNAL if prefix.startswith("SR") else AV_SUM_INTERNAL


def build_attention_dag(n: int, d: int) -> AttentionDag:
    """Construct the attention DAG.

    Per the closed forms: 3Nd inputs, N^2 d elementary products, a
    node-disjoint summation tree with d leaves and d-1 internals under
    each of the N^2 Q K^T roots, N^2 exp nodes, N row-sum trees, N
    inverses, N^2 d second-stage products, Nd output trees, and Nd
    scaled outputs.  Roots are distinct pass-through nodes above their
    trees, so every summation tree holds exactly 2d (or 2N) vertices.
    """
    if n < 1 or d < 1:
        raise ConfigurationError("N and d must be >= 1")
    nodes: dict[str, Node] = {}
    for name in ("Q", "K", "V"):
        for i in range(n):
            for l in range(d):
                nodes[f"{name}[{i},{l}]"] = Node(INPUT, ())

    for i in range(n):
        for j in range(n):
            leaves = []
            for l in range(d):
                vid = f"L1[{i},{j},{l}]"
                nodes[vid] = Node(L1_PRODUCT, (f"Q[{i},{l}]", f"K[{j},{l}]"),
                                  level1=True)
                leaves.append(vid)
            top = _sum_tree(nodes, leaves, f"S1[{i},{j}]", level1=True)
            nodes[f"QKT[{i},{j}]"] = Node(QKT_ROOT, (top,), level1=True)
            nodes[f"EXP[{i},{j}]"] = Node(EXP, (f"QKT[{i},{j}]",))

    for i in range(n):
        leaves = [f"EXP[{i},{j}]" for j in range(n)]
        top = _sum_tree(nodes, leaves, f"SR[{i}]", level1=False)
        nodes[f"RS[{i}]"] = Node(ROWSUM_ROOT, (top,))
        nodes[f"INV[{i}]"] = Node(INVERSE, (f"RS[{i}]",))

    for i in range(n):
        for j in range(d):
            leaves = []
            for k in range(n):
                vid = f"L2[{i},{k},{j}]"
                nodes[vid] = Node(L2_PRODUCT, (f"EXP[{i},{k}]", f"V[{k},{j}]"))
                leaves.append(vid)
            top = _sum_tree(nodes, leaves, f"SA[{i},{j}]", level1=False)
            nodes[f"AV[{i},{j}]"] = Node(AV_ROOT, (top,))
            nodes[f"OUT[{i},{j}]"] = Node(SCALE, (f"AV[{i},{j}]", f"INV[{i}]"))

    return AttentionDag(nodes, n, d)


def level1_vertex_count(dag: PebblingDag, part) -> int:
    """Exact number of level-1-flagged vertices in a vertex subset."""
    return sum(1 for v in part if dag.nodes[v].level1)


# -- calculations --------------------------------------------------------------

Transition = tuple  # ("R1"|"R2"|"R3"|"R4", vertex) or ("R4", vertex, color)


@dataclass(frozen=True)
class Violation:
    index: int | None
    rule: str
    message: str
    witness: object = None


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    reads: int = 0
    writes: int = 0
    violation: Violation | None = None

    @property
    def io(self) -> int:
        return self.reads + self.writes


def validate_calculation(dag: PebblingDag, m: int, calc: list[Transition]) -> ValidationResult:
    """Replay a calculation, checking every rule, the red budget, and the
    boundary configurations.  Returns R1+R2 counts on acceptance, or the
    first violating transition."""
    red: set[str] = set()
    blue: set[str] = set(dag.inputs)
    reads = writes = 0

    def fail(i, rule, msg):
        return ValidationResult(False, reads, writes, Violation(i, rule, msg))

    for i, tr in enumerate(calc):
        rule, v = tr[0], tr[1]
        if v not in dag.nodes:
            return fail(i, rule, f"unknown vertex {v!r}")
        if rule == "R1":
            if v not in blue:
                return fail(i, rule, f"R1 on {v!r} without a blue pebble")
            if v not in red and len(red) >= m:
                return fail(i, rule, f"red budget {m} exceeded")
            red.add(v)
            reads += 1
        elif rule == "R2":
            if v not in red:
                return fail(i, rule, f"R2 on {v!r} without a red pebble")
            blue.add(v)
            writes += 1
        elif rule == "R3":
            if v in dag.inputs:
                return fail(i, rule, f"R3 on input vertex {v!r}")
            missing = [p for p in dag.nodes[v].parents if p not in red]
            if missing:
                return fail(i, rule, f"R3 on {v!r}: parents not red: {missing}")
            if v not in red and len(red) >= m:
                return fail(i, rule, f"red budget {m} exceeded")
            red.add(v)
        elif rule == "R4":
            color = tr[2] if len(tr) > 2 else None
            if color == "red" or (color is None and v in red):
                if v not in red:
                    return fail(i, rule, f"R4 red on {v!r} without a red pebble")
                red.discard(v)
            elif v in blue:
                blue.discard(v)
            else:
                return fail(i, rule, f"R4 on unpebbled vertex {v!r}")
        else:
            return fail(i, rule, f"unknown rule {rule!r}")

    if red:
        return fail(None, "terminal", f"red pebbles remain: {sorted(red)[:5]}")
    if blue != dag.outputs:
        return fail(None, "terminal",
                    "terminal blue pebbles differ from the output set")
    return ValidationResult(True, reads, writes)


# -- blocked streaming schedule ------------------------------------------------

class _BudgetExceeded(Exception):
    pass


class _Scheduler:
    def __init__(self, dag: PebblingDag, m: int):
        self.dag = dag
        self.m = m
        self.red: set[str] = set()
        self.moves: list[Transition] = []

    def r1(self, v):
        self._add(v, "R1")

    def r3(self, v):
        self._add(v, "R3")

    def _add(self, v, rule):
        if v not in self.red and len(self.red) >= self.m:
            raise _BudgetExceeded
        self.red.add(v)
        self.moves.append((rule, v))

    def r2(self, v):
        self.moves.append(("R2", v))

    def r4(self, v):
        self.red.discard(v)
        self.moves.append(("R4", v))


class _TreeFolder:
    """Folds summation chains incrementally as leaves become red.

    ``chain_parent`` maps each chain node to the unique sum node it
    feeds (None at the top).  When a node's dependencies are all red,
    the consumer is computed and its parents' red pebbles deleted, so
    at most O(log #leaves) partials stay resident per chain.
    """

    def __init__(self, sched: _Scheduler, chain_parent: dict[str, str | None],
                 keep: set[str] | None = None):
        self.sched = sched
        self.parent = chain_parent
        self.keep = keep or set()

    def submit(self, leaf: str) -> None:
        dag = self.sched.dag
        node = leaf
        while True:
            consumer = self.parent.get(node)
            if consumer is None:
                return
            if any(p not in self.sched.red for p in dag.nodes[consumer].parents):
                return
            self.sched.r3(consumer)
            for p in dag.nodes[consumer].parents:
                if p not in self.keep:
                    self.sched.r4(p)
            node = consumer


def _chain_parents(dag: PebblingDag, members: set[str]) -> dict[str, str | None]:
    """Map each member to its unique consumer inside the member set."""
    parent: dict[str, str | None] = {v: None for v in members}
    for v in members:
        for c in dag.children[v]:
            if c in members:
                parent[v] = c
    return parent


def _collect_chain(dag: PebblingDag, top: str, stop_kinds: set[str]) -> set[str]:
    """Vertices reachable downward from ``top`` through non-stop kinds."""
    members = {top}
    stack = [top]
    while stack:
        v = stack.pop()
        for p in dag.nodes[v].parents:
            if dag.nodes[p].kind in stop_kinds or p in members:
                continue
            members.add(p)
            stack.append(p)
    return members


def _infer_dimensions(dag: PebblingDag) -> tuple[int, int]:
    """Recover (N, d) from an attention DAG's node counts: N inverses
    and Nd outputs.  Rejects graphs without that shape."""
    counts = dag.kind_counts()
    n = counts.get(INVERSE, 0)
    outputs = counts.get(SCALE, 0)
    if n < 1 or outputs < n or outputs % n:
        raise ConfigurationError("not an attention DAG: cannot infer N and d")
    d = outputs // n
    if counts != build_attention_dag(n, d).kind_counts():
        raise ConfigurationError("not an attention DAG: node counts do not match")
    return n, d


def blocked_pebbling_schedule(dag: PebblingDag, m: int) -> list[Transition]:
    """Complete calculation mirroring the streaming kernel.

    A block of Q-row inputs stays red; K rows and then V rows are read
    once per block.  Per streamed row, the exp'd score vertices are
    computed through their summation trees and folded immediately into
    the output and row-sum trees, keeping only O(log) partials.  The
    largest feasible block size is found by dry-running the budget
    tracker.
    """
    if isinstance(dag, AttentionDag):
        n, d = dag.N, dag.d
    else:
        n, d = _infer_dimensions(dag)
    best_r = min(max(m // (4 * d), 1), n)
    for r in range(best_r, 0, -1):
        try:
            return _emit_schedule(dag, n, d, m, r)
        except _BudgetExceeded:
            continue
    raise RegimeError(f"cache of {m} words cannot hold even a single-row block")


def _emit_schedule(dag: PebblingDag, n: int, d: int, m: int, r: int) -> list[Transition]:
    sched = _Scheduler(dag, m)

    for i0 in range(0, n, r):
        rows = range(i0, min(i0 + r, n))
        for i in rows:
            for l in range(d):
                sched.r1(f"Q[{i},{l}]")

        # chain maps for this block's accumulators
        rs_members: set[str] = set()
        av_members: set[str] = set()
        for i in rows:
            rs_members |= _collect_chain(dag, f"INV[{i}]", {EXP})
            for j in range(d):
                av_members |= _collect_chain(dag, f"AV[{i},{j}]", {L2_PRODUCT})
                av_members |= {f"L2[{i},{k},{j}]" for k in range(n)}
        rs_members |= {f"EXP[{i},{k}]" for i in rows for k in range(n)}
        rs_fold = _TreeFolder(sched, _chain_parents(dag, rs_members))
        av_fold = _TreeFolder(sched, _chain_parents(dag, av_members))

        for k in range(n):
            for l in range(d):
                sched.r1(f"K[{k},{l}]")
            for i in rows:
                score = _collect_chain(dag, f"EXP[{i},{k}]", {INPUT})
                fold = _TreeFolder(sched, _chain_parents(dag, score))
                for l in range(d):
                    sched.r3(f"L1[{i},{k},{l}]")
                    fold.submit(f"L1[{i},{k},{l}]")
            for l in range(d):
                sched.r4(f"K[{k},{l}]")
            for j in range(d):
                sched.r1(f"V[{k},{j}]")
            for i in rows:
                for j in range(d):
                    sched.r3(f"L2[{i},{k},{j}]")
                    av_fold.submit(f"L2[{i},{k},{j}]")
            for j in range(d):
                sched.r4(f"V[{k},{j}]")
            for i in rows:
                rs_fold.submit(f"EXP[{i},{k}]")

        for i in rows:
            for j in range(d):
                sched.r3(f"OUT[{i},{j}]")
                sched.r2(f"OUT[{i},{j}]")
                sched.r4(f"OUT[{i},{j}]")
                sched.r4(f"AV[{i},{j}]")
            sched.r4(f"INV[{i}]")
            for l in range(d):
                sched.r4(f"Q[{i},{l}]")

    # clear the initial blue pebbles so only outputs remain pebbled
    for v in sorted(dag.inputs):
        sched.moves.append(("R4", v))
    return sched.moves


# -- M-partitions ----------------------------------------------------------------

@dataclass(frozen=True)
class PartSpec:
    """One part of an M-partition with its claimed dominator set."""

    vertices: frozenset
    dominator: frozenset

    def __init__(self, vertices, dominator):
        object.__setattr__(self, "vertices", frozenset(vertices))
        object.__setattr__(self, "dominator", frozenset(dominator))


def minimum_set(dag: PebblingDag, vertices: frozenset) -> frozenset:
    """The part's vertices with no children inside the part."""
    return frozenset(
        v for v in vertices
        if not any(c in vertices for c in dag.children[v])
    )


def verify_m_partition(dag: PebblingDag, m: int, parts: list[PartSpec]) -> list[Violation]:
    """Check P1 (disjoint cover), P2 (dominators of size <= M), P3
    (minimum sets of size <= M), and P4 (no cyclic part dependence).

    A part containing an input vertex must include it in its dominator
    set (length-0 paths count).  Every violation is reported with a
    witness: the offending vertex, an uncovered input-to-part path, or
    a pair of edges closing a dependence cycle.
    """
    violations: list[Violation] = []

    seen: set[str] = set()
    for idx, part in enumerate(parts):
        overlap = seen & part.vertices
        if overlap:
            violations.append(Violation(idx, "P1", "parts overlap", sorted(overlap)[:5]))
        seen |= part.vertices
    missing = set(dag.nodes) - seen
    if missing:
        violations.append(Violation(None, "P1", "vertices not covered", sorted(missing)[:5]))

    for idx, part in enumerate(parts):
        if len(part.dominator) > m:
            violations.append(Violation(
                idx, "P2", f"dominator has {len(part.dominator)} > {m} vertices", None))
        path = _uncovered_path(dag, part)
        if path is not None:
            violations.append(Violation(idx, "P2", "input-to-part path avoids dominator", path))
        msize = len(minimum_set(dag, part.vertices))
        if msize > m:
            violations.append(Violation(
                idx, "P3", f"minimum set has {msize} > {m} vertices", None))

    cycle = _dependence_cycle(dag, parts)
    if cycle is not None:
        violations.append(Violation(None, "P4", "cyclic dependence among parts", cycle))
    return violations


def _uncovered_path(dag: PebblingDag, part: PartSpec):
    """BFS from each input avoiding the dominator; a reached part vertex
    yields a witness path."""
    from collections import deque

    target = part.vertices - part.dominator
    blocked = part.dominator
    for src in sorted(dag.inputs):
        if src in blocked:
            continue
        prev = {src: None}
        queue = deque([src])
        while queue:
            v = queue.popleft()
            if v in target:
                path = []
                while v is not None:
                    path.append(v)
                    v = prev[v]
                return path[::-1]
            for c in dag.children[v]:
                if c not in blocked and c not in prev:
                    prev[c] = v
                    queue.append(c)
    return None


def _dependence_cycle(dag: PebblingDag, parts: list[PartSpec]):
    """Cycle detection on the part-dependence digraph; returns the part
    indices forming a cycle, or None."""
    owner: dict[str, int] = {}
    for idx, part in enumerate(parts):
        for v in part.vertices:
            owner.setdefault(v, idx)
    edges: dict[int, set[int]] = {i: set() for i in range(len(parts))}
    for v, node in dag.nodes.items():
        for p in node.parents:
            a, b = owner.get(p), owner.get(v)
            if a is not None and b is not None and a != b:
                edges[a].add(b)

    WHITE, GRAY, BLACK = 0, 1, 2
    color = {i: WHITE for i in edges}
    stack_trace: list[int] = []

    def dfs(u):
        color[u] = GRAY
        stack_trace.append(u)
        for w in sorted(edges[u]):
            if color[w] == GRAY:
                return stack_trace[stack_trace.index(w):] + [w]
            if color[w] == WHITE:
                found = dfs(w)
                if found:
                    return found
        stack_trace.pop()
        color[u] = BLACK
        return None

    for i in sorted(edges):
        if color[i] == WHITE:
            found = dfs(i)
            if found:
                return found
    return None


# -- exact I/O by exhaustive search ----------------------------------------------

def brute_force_min_io(dag: PebblingDag, m: int, node_cap: int = BRUTE_FORCE_NODE_CAP) -> int:
    """Exact Q(G, M) by Dijkstra over (red set, blue set) configurations,
    R1/R2 transitions costing 1 and R3/R4 costing 0.  Tiny graphs only."""
    n = len(dag.nodes)
    if n > node_cap:
        raise EnumerationCapError(
            f"graph has {n} nodes, search capped at {node_cap}",
            required=n, cap=node_cap)

    order = sorted(dag.nodes)
    idx = {v: i for i, v in enumerate(order)}
    parents_mask = [0] * n
    for v, node in dag.nodes.items():
        for p in node.parents:
            parents_mask[idx[v]] |= 1 << idx[p]
    inputs_mask = sum(1 << idx[v] for v in dag.inputs)
    outputs_mask = sum(1 << idx[v] for v in dag.outputs)

    start = (0, inputs_mask)
    goal = (0, outputs_mask)
    dist = {start: 0}
    heap = [(0, start)]
    while heap:
        cost, state = heapq.heappop(heap)
        if state == goal:
            return cost
        if cost > dist.get(state, float("inf")):
            continue
        red, blue = state

        def push(nxt, c):
            if c < dist.get(nxt, float("inf")):
                dist[nxt] = c
                heapq.heappush(heap, (c, nxt))

        can_add_red = bin(red).count("1") < m
        for i in range(n):
            bit = 1 << i
            if blue & bit and not red & bit and can_add_red:
                push((red | bit, blue), cost + 1)                    # R1
            if red & bit and not blue & bit:
                push((red, blue | bit), cost + 1)                    # R2
            if (not red & bit and can_add_red and not inputs_mask & bit
                    and red & parents_mask[i] == parents_mask[i]):
                push((red | bit, blue), cost)                        # R3
            if red & bit:
                push((red & ~bit, blue), cost)                       # R4 red
            if blue & bit:
                push((red, blue & ~bit), cost)                       # R4 blue
        # fall through: unreachable goal would exhaust the heap
    raise RuntimeError("no complete calculation found (malformed DAG?)")


# -- calculation file format -------------------------------------------------------

def save_calculation(calc: list[Transition], path) -> None:
    with open(path, "w") as fh:
        json.dump([{"rule": t[0], "vertex": t[1], **({"color": t[2]} if len(t) > 2 else {})}
                   for t in calc], fh)


def load_calculation(path) -> list[Transition]:
    with open(path) as fh:
        raw = json.load(fh)
    out = []
    for rec in raw:
        if "color" in rec:
            out.append((rec["rule"], rec["vertex"], rec["color"]))
        else:
            out.append((rec["rule"], rec["vertex"]))
    return out
