import itertools
import random
from fractions import Fraction

import pytest

import boxworld as bw
from boxworld.circuits import TruthTable, gate_count, synthesize_nand
from boxworld.compiler import (
    affine_outcome_counts,
    cc_values,
    compile_circuit,
    execute_compiled_counts,
    induced_box_fast,
    nand_block,
    nand_block_branches,
    sample_compiled_outputs,
    solve_cc,
    verify_simulation,
)
from boxworld.errors import UnownedInputBit
from boxworld.wiring import STOP, WiringProtocol, induced_box


def xor_all(bits):
    acc = 0
    for b in bits:
        acc ^= b
    return acc


class TestNandBlock:
    def test_two_party_shares_of_one_one(self):
        # shares of g1 = 1 and g2 = 1: outputs must sum to NAND(1,1) = 0
        for _, _, a in nand_block_branches((1, 0), (1, 0)):
            assert xor_all(a) == 0

    def test_three_party_all_zero_shares(self):
        # NAND(0,0) = 1: uniform over odd-parity triples
        dist = nand_block((0, 0, 0), (0, 0, 0))
        assert set(dist) == {a for a in itertools.product((0, 1), repeat=3) if sum(a) % 2 == 1}
        assert set(dist.values()) == {Fraction(1, 4)}

    @pytest.mark.parametrize("n", [2, 3])
    def test_parity_identity_all_share_splittings(self, n):
        for beta in itertools.product((0, 1), repeat=n):
            for gamma in itertools.product((0, 1), repeat=n):
                target = (xor_all(beta) & xor_all(gamma)) ^ 1
                for _, _, a in nand_block_branches(beta, gamma):
                    assert xor_all(a) == target

    @pytest.mark.parametrize("n", [2, 3])
    def test_per_box_identity(self, n):
        # b_ij XOR c_ij = beta_i * gamma_j on every branch
        for beta in itertools.product((0, 1), repeat=n):
            for gamma in itertools.product((0, 1), repeat=n):
                for b, c, _ in nand_block_branches(beta, gamma):
                    for i in range(n):
                        for j in range(n):
                            if i != j:
                                assert b[(i, j)] ^ c[(i, j)] == (beta[i] & gamma[j])

    def test_subset_uniformity(self):
        # any n-1 outputs jointly uniform
        dist = nand_block((1, 0, 1), (0, 1, 1))
        marg = {}
        for a, p in dist.items():
            marg[a[:2]] = marg.get(a[:2], Fraction(0)) + p
        assert set(marg.values()) == {Fraction(1, 4)}


class TestCompile:
    def test_single_nand_two_boxes(self):
        tt = TruthTable.from_function(2, lambda b: (b[0] & b[1]) ^ 1)
        circuit = synthesize_nand(tt, ["u", "v"])
        compiled = compile_circuit(circuit, 2, [["u"], ["v"]])
        assert compiled.pr_box_count == 2
        target = bw.full_correlation_box(2, 1, lambda b: (b[0] & b[1]) ^ 1)
        assert verify_simulation(compiled, target)

    def test_and_equals_pr(self):
        tt = TruthTable.from_function(2, lambda b: b[0] & b[1])
        circuit = synthesize_nand(tt, ["u", "v"])
        compiled = compile_circuit(circuit, 2, [["u"], ["v"]])
        assert verify_simulation(compiled, bw.pr_box())

    def test_constant_uses_no_boxes(self):
        tt = TruthTable.from_function(2, lambda b: 1)
        circuit = synthesize_nand(tt, ["u", "v"])
        compiled = compile_circuit(circuit, 2, [["u"], ["v"]])
        assert compiled.pr_box_count == 0
        assert verify_simulation(compiled, bw.full_correlation_box(2, 1, lambda b: 1))

    def test_projection_uses_no_boxes_and_randomizes(self):
        tt = TruthTable.from_function(2, lambda b: b[1])
        circuit = synthesize_nand(tt, ["u", "v"])
        compiled = compile_circuit(circuit, 2, [["u"], ["v"]])
        assert compiled.pr_box_count == 0
        target = bw.full_correlation_box(2, 1, lambda b: b[1])
        assert verify_simulation(compiled, target)
        # the shared-randomness re-randomization also holds through the
        # generic branch-tree executor
        assert induced_box(compiled.protocol) == target

    def test_three_party_majority(self):
        maj = lambda b: 1 if sum(b) >= 2 else 0
        tt = TruthTable.from_function(3, maj)
        circuit = synthesize_nand(tt, ["a", "b", "c"])
        compiled = compile_circuit(circuit, 3, [["a"], ["b"], ["c"]])
        assert compiled.pr_box_count == gate_count(circuit) * 6
        # independent target built straight from the parity definition
        target = bw.full_correlation_box(3, 1, maj)
        assert verify_simulation(compiled, target)

    def test_unowned_input_bit(self):
        tt = TruthTable.from_function(2, lambda b: b[0] ^ b[1])
        circuit = synthesize_nand(tt, ["u", "v"])
        with pytest.raises(UnownedInputBit):
            compile_circuit(circuit, 2, [["u"], ["w"]])
        with pytest.raises(UnownedInputBit):
            compile_circuit(circuit, 2, [["u"], []])

    def test_multi_bit_ownership(self):
        f = lambda b: (b[0] & b[2]) ^ b[1] ^ b[3]
        tt = TruthTable.from_function(4, f)
        circuit = synthesize_nand(tt, ["p0", "p1", "q0", "q1"])
        compiled = compile_circuit(circuit, 2, [["p0", "p1"], ["q0", "q1"]])
        # ownership order: party 0 holds bits (p0, p1) as slots (0, 1)
        def f_owned(bits):
            return f((bits[0], bits[1], bits[2], bits[3]))

        target = bw.full_correlation_box(2, 2, f_owned)
        assert verify_simulation(compiled, target)


class TestExecutorAgreement:
    def test_fast_equals_reference_small_circuits(self):
        rng = random.Random(5)
        cases = 0
        for n in (2, 3):
            for _ in range(12):
                tt = TruthTable.from_int(n, rng.randrange(2 ** (2 ** n)))
                circuit = synthesize_nand(tt, [f"b{i}" for i in range(n)])
                if gate_count(circuit) > 2:
                    continue
                bit_map = [[f"b{i}"] for i in range(n)]
                compiled = compile_circuit(circuit, n, bit_map)
                assert induced_box(compiled.protocol) == induced_box_fast(compiled)
                cases += 1
        assert cases >= 6

    def test_affine_equals_frontier(self):
        rng = random.Random(9)
        shapes = [(2, 1), (3, 1), (2, 2)]
        for n, m in shapes:
            nm = n * m
            for _ in range(15):
                tt = TruthTable.from_int(nm, rng.randrange(2 ** (2 ** nm)))
                circuit = synthesize_nand(tt, [f"b{i}" for i in range(nm)])
                bit_map = [[f"b{party * m + slot}" for slot in range(m)] for party in range(n)]
                compiled = compile_circuit(circuit, n, bit_map)
                fr_counts, fr_den = execute_compiled_counts(compiled)
                af_counts, af_den = affine_outcome_counts(circuit, n, [bit_map])
                for xi in range(len(fr_counts)):
                    for ai in range(2 ** n):
                        assert af_counts[0][xi][ai] * fr_den == fr_counts[xi][ai] * af_den

    def test_compiled_strategies_validate(self):
        import dataclasses

        tt = TruthTable.from_function(2, lambda b: b[0] & b[1])
        circuit = synthesize_nand(tt, ["u", "v"])
        compiled = compile_circuit(circuit, 2, [["u"], ["v"]])
        assert bw.validate_protocol(compiled.protocol).ok  # prevalidated fast path
        walked = dataclasses.replace(compiled.protocol, prevalidated=False)
        assert bw.validate_protocol(walked).ok  # full branch walk agrees


def test_verify_simulation_reports_first_difference():
    tt = TruthTable.from_function(2, lambda b: b[0] & b[1])
    circuit = synthesize_nand(tt, ["u", "v"])
    compiled = compile_circuit(circuit, 2, [["u"], ["v"]])
    wrong_target = bw.full_correlation_box(2, 1, lambda b: (b[0] & b[1]) ^ 1)
    verdict = verify_simulation(compiled, wrong_target)
    assert not verdict.exact_match
    assert verdict.first_difference["simulated"] != verdict.first_difference["target"]


def test_corrupted_final_output_detected():
    # flip one party's extra parity bit: every distribution's parity flips
    tt = TruthTable.from_function(2, lambda b: b[0] & b[1])
    circuit = synthesize_nand(tt, ["u", "v"])
    compiled = compile_circuit(circuit, 2, [["u"], ["v"]])

    class Corrupted:
        def __init__(self, inner):
            self.inner = inner
            self.party = inner.party

        def next_move(self, lam, x, history):
            return self.inner.next_move(lam, x, history)

        def final_output(self, lam, x, history):
            return self.inner.final_output(lam, x, history) ^ 1

    base = compiled.protocol
    corrupted = WiringProtocol(
        n_parties=base.n_parties,
        randomness=base.randomness,
        bank=base.bank,
        strategies=(Corrupted(base.strategies[0]), base.strategies[1]),
        input_sizes=base.input_sizes,
        output_sizes=base.output_sizes,
    )
    target = bw.pr_box()
    box = induced_box(corrupted)
    diffs = [
        (x, a)
        for x in box.inputs()
        for a in box.outputs()
        if box.prob(x, a) != target.prob(x, a)
    ]
    assert diffs


class TestSolveCC:
    def test_and_at_one_one(self):
        tt = TruthTable.from_function(2, lambda b: b[0] & b[1])
        circuit = synthesize_nand(tt, ["u", "v"])
        result = solve_cc(circuit, [["u"], ["v"]], x=(1, 1))
        assert result.value == 1
        assert result.bits_communicated == 1
        assert result.boxes_consumed == gate_count(circuit) * 2
        assert len(result.transcript) == 1
        assert result.transcript[0][1] == 0  # sent to party 0

    def test_majority_all_inputs(self):
        maj = lambda b: 1 if sum(b) >= 2 else 0
        tt = TruthTable.from_function(3, maj)
        circuit = synthesize_nand(tt, ["a", "b", "c"])
        compiled = compile_circuit(circuit, 3, [["a"], ["b"], ["c"]])
        for seed, x in enumerate(itertools.product((0, 1), repeat=3)):
            result = solve_cc(compiled, x=x, seed=seed)
            assert result.value == maj(x)
            assert result.bits_communicated == 2

    def test_constant_zero(self):
        tt = TruthTable.from_function(2, lambda b: 0)
        circuit = synthesize_nand(tt, ["u", "v"])
        result = solve_cc(circuit, [["u"], ["v"]], x=(1, 0))
        assert result.value == 0
        assert result.boxes_consumed == 0
        assert result.bits_communicated == 1

    def test_batched_cc_matches_eval(self):
        rng = random.Random(3)
        for _ in range(10):
            tt = TruthTable.from_int(4, rng.randrange(2 ** 16))
            circuit = synthesize_nand(tt, [f"b{i}" for i in range(4)])
            bit_maps = [[["b0", "b1"], ["b2", "b3"]], [["b0", "b2"], ["b1", "b3"]]]
            values = cc_values(circuit, 2, bit_maps, seed=1)
            idx = 0
            for bm in bit_maps:
                for x_idx in range(16):
                    x = (x_idx % 4, x_idx // 4)
                    assignment = {}
                    for party, names in enumerate(bm):
                        for slot, name in enumerate(names):
                            assignment[name] = (x[party] >> slot) & 1
                    expected = tt.value(tuple(assignment[f"b{i}"] for i in range(4)))
                    assert values[idx] == expected
                    idx += 1

    def test_sampled_outputs_always_satisfy_parity(self):
        tt = TruthTable.from_function(2, lambda b: b[0] ^ b[1])
        circuit = synthesize_nand(tt, ["u", "v"])
        compiled = compile_circuit(circuit, 2, [["u"], ["v"]])
        for seed in range(20):
            for x in itertools.product((0, 1), repeat=2):
                outputs = sample_compiled_outputs(compiled, x, seed)
                assert xor_all(outputs) == (x[0] ^ x[1])
