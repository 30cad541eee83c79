"""The five-party ring-cluster constraints: locally unsatisfiable, realized
by a nonsignaling box, and out of reach for protocols over one PR box.

Run:  python demos/04_cluster_no_go.py
"""

import boxworld as bw
from boxworld.cluster import (
    box_source,
    cluster_box,
    cluster_constraints,
    ghz_local_search,
    inverted_cluster_constraints,
    satisfies,
    simulation_search,
)

cs = cluster_constraints()
print("the six parity constraints (party, setting) -> target:")
for c in cs.constraints:
    print("  ", c.terms, "->", c.target)

# summing all six left sides uses every variable twice, but the right
# sides sum to 1: no local assignment can win
report = ghz_local_search()
print(f"\nlocal assignments satisfying all six: {report.satisfying_assignments} of {report.space}")
print("maximum simultaneously satisfiable:", report.max_simultaneous)

# a nonsignaling box that does satisfy all six exists
cb = cluster_box()
print("\ncluster box nonsignaling:", bw.check_no_signaling(cb).ok)
src = box_source(cb)
print("cluster box satisfies all six:", all(satisfies(src, c) for c in cs.constraints))
events = []
for c in cs.constraints:
    x = [0] * 5
    for p, s in c.terms:
        x[p] = s
    events.append((tuple(x), c.parties(), c.target))
verdict = bw.is_local(cb, event_witnesses=[events])
print("cluster box local?", verdict.local,
      f"(witness: box scores {verdict.witness['box_value']} vs local max {verdict.witness['local_max']})")

# the no-go at one shared PR box: exhaust all adaptive deterministic
# strategies for each of the 10 pair assignments
result = simulation_search(1)
print(f"\none PR box: tested {result.strategies_tested} strategy profiles over "
      f"{result.assignments_tested} pair assignments in {result.runtime_s:.1f}s "
      f"-> success: {result.success}")

# sanity inversion: flip the five-party target and the searcher must find
# a protocol (everyone outputs 0), proving it can see counterexamples
inverted = simulation_search(1, constraints=inverted_cluster_constraints())
print("inverted constraints, counterexample found:", inverted.success)
