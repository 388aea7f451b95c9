"""The red-blue pebble game on the attention DAG.

Builds the computational graph of attention vertex by vertex, emits a
streaming-style pebbling schedule, has the rule checker verify every
transition, and compares against exhaustive search where the graph is
small enough to enumerate every configuration.
"""

from attnio import pebbling as P

# the graph for a 2x2 instance: 58 vertices
dag = P.build_attention_dag(2, 2)
print(f"attention DAG for N=2, d=2: {len(dag)} vertices")
for kind, count in sorted(dag.kind_counts().items()):
    print(f"  {kind:>16}: {count}")
print(f"  level-1 vertices (products, their sums, score roots): "
      f"{P.level1_vertex_count(dag, dag.nodes)}")

# a complete calculation: blue pebbles start on inputs, must end on outputs
calc = P.blocked_pebbling_schedule(dag, 16)
result = P.validate_calculation(dag, 16, calc)
print(f"\nschedule with a 16-pebble cache: {len(calc)} transitions, "
      f"{result.reads} reads + {result.writes} writes = {result.io} I/O")
assert result.ok

# more cache, fewer K/V re-reads (visible once N outgrows the cache)
big = P.build_attention_dag(8, 2)
print(f"\nN=8, d=2 ({len(big)} vertices):")
for m in (16, 32, 64):
    res = P.validate_calculation(big, m, P.blocked_pebbling_schedule(big, m))
    print(f"  M={m:>3}: I/O = {res.io}")

# exhaustive search agrees with the schedule on the smallest instance
tiny = P.build_attention_dag(1, 1)
scheduled = P.validate_calculation(tiny, 8, P.blocked_pebbling_schedule(tiny, 8))
exact = P.brute_force_min_io(tiny, 8)
print(f"\nN=d=1 ({len(tiny)} vertices): schedule I/O = {scheduled.io}, "
      f"exhaustive minimum = {exact}")

# M-partitions: the counting structure behind the lower bounds
whole = P.PartSpec(dag.nodes.keys(), dag.inputs)
violations = P.verify_m_partition(dag, 12, [whole])
print(f"\nwhole-graph partition with dominator = inputs: "
      f"{'valid' if not violations else violations}")

bad_dom = set(dag.inputs) - {sorted(dag.inputs)[0]}
violations = P.verify_m_partition(dag, 12, [P.PartSpec(dag.nodes.keys(), bad_dom)])
witness = next(v for v in violations if v.rule == "P2" and v.witness)
print(f"drop one input from the dominator -> uncovered path witness: "
      f"{' -> '.join(witness.witness)}")
