"""Tour of the box core: the PR box, no-signaling, CHSH, and locality.

Run:  python demos/01_pr_box_basics.py
"""

from fractions import Fraction

import boxworld as bw

# The PR box: two parties, binary inputs and outputs, outputs XOR to the
# AND of the inputs, each consistent pair with probability 1/2.
pr = bw.pr_box()
print("PR box table (nonzero entries):")
for (x, a), p in sorted(pr.table.items()):
    if p:
        print(f"  P(a={a} | x={x}) = {p}")

# No-signaling: each party's marginal cannot depend on the other's input.
print("\nno-signaling check:", bw.check_no_signaling(pr).ok)

# The CHSH expression distinguishes local from nonlocal: deterministic
# (and hence all local) boxes stay within |CHSH| <= 2, the PR box hits 4.
print("CHSH(PR) =", bw.chsh_value(pr))
from boxworld.locality import all_deterministic_boxes

best = max(abs(bw.chsh_value(b)) for b in all_deterministic_boxes((2, 2), (2, 2)))
print("max |CHSH| over the 16 deterministic boxes =", best)

# is_local returns certificates, not just verdicts.
verdict = bw.is_local(pr)
print("\nPR local?", verdict.local)
print("separating witness value on PR:", verdict.witness["box_value"],
      "| exact local maximum:", verdict.witness["local_max"])

# Mixing noise back in restores locality exactly at CHSH = 2.
noise = bw.uniform_box((2, 2), (2, 2))
for w in (Fraction(1, 2), Fraction(3, 4)):
    box = bw.mix_boxes([(w, pr), (1 - w, noise)])
    v = bw.is_local(box)
    print(f"{w}*PR + {1 - w}*noise -> CHSH {bw.chsh_value(box)}, local: {v.local}")

# Parity-correlated boxes generalize PR to more parties and wider inputs:
# only the total output parity carries any information.
box = bw.full_correlation_box(3, 1, lambda bits: (bits[0] & bits[1]) ^ bits[2])
print("\n3-party parity box: nonsignaling =", bw.check_no_signaling(box).ok)
marg = bw.marginal(box, [0, 2])
print("pair marginal uniform?",
      all(p == Fraction(1, 4) for p in marg.table.values()))
