"""Compile a Boolean function into a PR-box wiring protocol and verify the
simulation exactly, then run the n-1-bit communication protocol on top.

Run:  python demos/02_compile_circuit_to_boxes.py
"""

import itertools

import boxworld as bw
from boxworld.compiler import compile_circuit, induced_box_fast, solve_cc, verify_simulation

# three-party majority as a truth table, synthesized into NAND gates
maj = lambda bits: 1 if sum(bits) >= 2 else 0
table = bw.TruthTable.from_function(3, maj)
circuit = bw.synthesize_nand(table, ["a", "b", "c"])
k = bw.gate_count(circuit)
print(f"majority-of-3 synthesized: {k} NAND gates")
print(bw.format_netlist(circuit))

# each gate consumes one block of n(n-1) PR boxes; input bits are free
compiled = compile_circuit(circuit, 3, [["a"], ["b"], ["c"]])
print(f"PR boxes consumed: {compiled.pr_box_count} (= {k} gates x 3*2)")

# the induced box must equal the parity box of majority, entry for entry
target = bw.full_correlation_box(3, 1, maj)
print("exact simulation:", bool(verify_simulation(compiled, target)))

box = induced_box_fast(compiled)
print("example row, x=(1,0,1):")
for a in itertools.product((0, 1), repeat=3):
    p = box.prob((1, 0, 1), a)
    if p:
        print(f"  P(a={a}) = {p}   parity {sum(a) % 2} = maj(1,0,1)")

# communication complexity: everybody feeds their input into the simulated
# box and sends the single output bit to party 0
print("\ncommunication protocol (n-1 = 2 bits per run):")
for x in itertools.product((0, 1), repeat=3):
    result = solve_cc(compiled, x=x, seed=7)
    assert result.value == maj(x)
    print(f"  x={x}: value {result.value}, transcript {result.transcript}")
print("boxes per run:", compiled.pr_box_count, "| bits communicated:", 2)
