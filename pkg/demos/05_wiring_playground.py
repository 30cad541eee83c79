"""Hand-built wiring protocols: exact execution, sampling, and exhaustive
enumeration of the adaptive strategy space.

Run:  python demos/05_wiring_playground.py
"""

import itertools

import boxworld as bw
from boxworld.wiring import (
    STOP,
    BoxBank,
    SharedRandomness,
    TableStrategy,
    WiringProtocol,
    count_strategies,
    enumerate_strategies,
    execute_exact,
    execute_sample,
    induced_box,
    pr_instance,
)

# a protocol is: shared randomness, a bank of box instances, and one
# decision table per party (what to feed where next, given what was seen)
bank = BoxBank((pr_instance((0, 1)),))

strategies = []
for party in (0, 1):
    moves = {}
    outputs = {}
    for x in (0, 1):
        moves[(0, x, ())] = ("use", 0, x)        # feed own input into the box
        for alpha in (0, 1):
            moves[(0, x, (alpha,))] = STOP       # one use, then stop
            outputs[(0, x, (alpha,))] = alpha    # report the box output
    strategies.append(TableStrategy(party, moves, outputs))

protocol = WiringProtocol(
    n_parties=2,
    randomness=SharedRandomness.singleton(0),
    bank=bank,
    strategies=tuple(strategies),
    input_sizes=(2, 2),
    output_sizes=(2, 2),
)

print("validated:", bw.validate_protocol(protocol).ok)
dist = execute_exact(protocol, (1, 1))
print("exact distribution at x=(1,1):", dict(sorted(dist.outcomes.items())))
print("induced box is the PR box:", induced_box(protocol) == bw.pr_box())

# sampling draws from the same exact branch weights: forbidden outcomes
# cannot appear, and a fixed seed fixes the counts
counts = execute_sample(protocol, (1, 1), seed=2024, n_runs=10000)
print("sampled counts:", dict(sorted(counts.items())))

# the adaptive strategy space over one shared PR box is finite: per party
# and input, stop with a bit (2) or pick an input and answer by any map of
# the outcome (2*4), giving 10 options per input, 100 per party
total = count_strategies(2, bank, (2, 2), (2, 2))
print("\ndeterministic strategy profiles over one PR box:", total)

# every induced box in that space is nonsignaling, and nothing beats the
# identity wiring: wirings cannot amplify the box's own CHSH value of 4
best = 0
for proto in itertools.islice(enumerate_strategies(2, bank, (2, 2), (2, 2)), 0, 10000, 97):
    box = induced_box(proto)
    best = max(best, abs(bw.chsh_value(box)))
print("max |CHSH| over a 104-protocol sample of the space:", best)
print("the identity wiring itself:", abs(bw.chsh_value(induced_box(protocol))))
