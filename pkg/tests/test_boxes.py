import itertools
from fractions import Fraction

import pytest

import boxworld as bw
from boxworld.errors import (
    DimensionMismatch,
    NegativeProbability,
    NotNormalized,
    ShapeMismatch,
    SignalingAmbiguity,
    WrongShape,
)

HALF = Fraction(1, 2)


def test_make_box_uniform_coin():
    box = bw.make_box(1, (1,), (2,), {((0,), (0,)): HALF, ((0,), (1,)): HALF})
    assert box.prob((0,), (0,)) == HALF


def test_make_box_rejects_unnormalized():
    with pytest.raises(NotNormalized):
        bw.make_box(1, (1,), (2,), {((0,), (0,)): Fraction(1, 4), ((0,), (1,)): HALF})


def test_make_box_rejects_negative_and_above_one():
    with pytest.raises(NegativeProbability):
        bw.make_box(1, (1,), (2,), {((0,), (0,)): Fraction(-1, 4), ((0,), (1,)): Fraction(5, 4)})


def test_make_box_requires_dense_unless_sparse():
    table = {((0,), (0,)): Fraction(1)}
    with pytest.raises(DimensionMismatch):
        bw.make_box(1, (1,), (2,), table)
    box = bw.make_box(1, (1,), (2,), table, sparse=True)
    assert box.prob((0,), (1,)) == 0


def test_make_box_rejects_bad_arity():
    with pytest.raises(DimensionMismatch):
        bw.make_box(2, (2, 2), (2, 2), {((0,), (0, 0)): Fraction(1)}, sparse=True)


class TestPRBox:
    def test_supported_pairs(self):
        pr = bw.pr_box()
        assert pr.prob((1, 1), (0, 0)) == 0
        assert pr.prob((1, 1), (0, 1)) == HALF
        assert pr.prob((1, 1), (1, 0)) == HALF
        assert pr.prob((0, 0), (0, 1)) == 0
        for x1, x2 in itertools.product((0, 1), repeat=2):
            for a1, a2 in itertools.product((0, 1), repeat=2):
                expected = HALF if (a1 ^ a2) == (x1 & x2) else Fraction(0)
                assert pr.prob((x1, x2), (a1, a2)) == expected

    def test_no_signaling(self):
        assert bw.check_no_signaling(bw.pr_box()).ok

    def test_marginals_uniform(self):
        pr = bw.pr_box()
        for party in (0, 1):
            m = bw.marginal(pr, [party])
            for x in (0, 1):
                assert m.prob((x,), (0,)) == HALF
                assert m.prob((x,), (1,)) == HALF

    def test_chsh_is_four(self):
        assert bw.chsh_value(bw.pr_box()) == 4


def test_signaling_box_detected():
    # party 0 outputs party 1's input; varying x_1 shifts party 0's marginal
    table = {}
    for x1, x2 in itertools.product((0, 1), repeat=2):
        table[((x1, x2), (x2, 0))] = Fraction(1)
    box = bw.make_box(2, (2, 2), (2, 2), table, sparse=True)
    verdict = bw.check_no_signaling(box)
    assert not verdict.ok
    assert verdict.party == 1  # the party whose input choice signals


def test_full_correlation_box_is_pr_for_and():
    box = bw.full_correlation_box(2, 1, lambda bits: bits[0] & bits[1])
    assert box == bw.pr_box()


def test_full_correlation_three_party_constant_zero():
    box = bw.full_correlation_box(3, 1, lambda bits: 0)
    quarter = Fraction(1, 4)
    for x in box.inputs():
        for a in itertools.product((0, 1), repeat=3):
            expected = quarter if sum(a) % 2 == 0 else Fraction(0)
            assert box.prob(x, a) == expected


def test_full_correlation_two_bit_equality_against_definition():
    # brute-force oracle: build the table straight from the definition
    def f(bits):
        x1 = bits[0] | (bits[1] << 1)
        x2 = bits[2] | (bits[3] << 1)
        return 1 if x1 == x2 else 0

    box = bw.full_correlation_box(2, 2, f)
    for x1, x2 in itertools.product(range(4), repeat=2):
        bits = (x1 & 1, (x1 >> 1) & 1, x2 & 1, (x2 >> 1) & 1)
        target = f(bits)
        for a1, a2 in itertools.product((0, 1), repeat=2):
            expected = HALF if (a1 ^ a2) == target else Fraction(0)
            assert box.prob((x1, x2), (a1, a2)) == expected


def test_full_correlation_no_signaling_assorted():
    for n, m, f in [
        (2, 1, lambda b: b[0] ^ b[1]),
        (3, 1, lambda b: (b[0] & b[1]) ^ b[2]),
        (2, 2, lambda b: (b[0] & b[2]) ^ b[1] ^ b[3]),
    ]:
        assert bw.check_no_signaling(bw.full_correlation_box(n, m, f)).ok


def test_full_correlation_strict_subset_marginals_uniform():
    box = bw.full_correlation_box(3, 1, lambda b: (b[0] & b[1]) ^ b[2])
    m = bw.marginal(box, [0, 1])
    quarter = Fraction(1, 4)
    for x in itertools.product((0, 1), repeat=2):
        for a in itertools.product((0, 1), repeat=2):
            assert m.prob(x, a) == quarter


def test_marginal_of_local_deterministic_box_point_mass():
    box = bw.deterministic_box((2, 2), (2, 2), ((0, 1), (0, 1)))  # a_i = x_i
    m = bw.marginal(box, [1])
    assert m.prob((0,), (0,)) == 1
    assert m.prob((1,), (1,)) == 1


def test_marginal_requires_complement_inputs_for_signaling_cut():
    table = {}
    for x1, x2 in itertools.product((0, 1), repeat=2):
        table[((x1, x2), (x2, 0))] = Fraction(1)
    box = bw.make_box(2, (2, 2), (2, 2), table, sparse=True)
    with pytest.raises(SignalingAmbiguity):
        bw.marginal(box, [0])
    m = bw.marginal(box, [0], complement_inputs=[1])
    assert m.prob((0,), (1,)) == 1


def test_chsh_values():
    assert bw.chsh_value(bw.uniform_box((2, 2), (2, 2))) == 0
    always_zero = bw.deterministic_box((2, 2), (2, 2), ((0, 0), (0, 0)))
    assert bw.chsh_value(always_zero) == 2


def test_chsh_wrong_shape():
    with pytest.raises(WrongShape):
        bw.chsh_value(bw.uniform_box((2,), (2,)))


def test_deterministic_chsh_bounded_by_two_exhaustively():
    values = set()
    for responses in itertools.product(itertools.product((0, 1), repeat=2), repeat=2):
        box = bw.deterministic_box((2, 2), (2, 2), responses)
        values.add(bw.chsh_value(box))
    assert max(abs(v) for v in values) == 2
    assert len(values) > 1


class TestRelabel:
    def test_identity(self):
        pr = bw.pr_box()
        rel = bw.Relabeling.identity(pr.input_sizes, pr.output_sizes)
        assert bw.relabel(pr, rel) == pr

    def test_party_swap_fixes_pr(self):
        pr = bw.pr_box()
        rel = bw.Relabeling(
            party_perm=(1, 0),
            input_perms=((0, 1), (0, 1)),
            output_perms=(((0, 1), (0, 1)), ((0, 1), (0, 1))),
        )
        assert bw.relabel(pr, rel) == pr

    def test_output_flip_on_one_input_stays_nonlocal(self):
        # flipping party 0's output on input 0 moves PR to another extremal
        # box: this CHSH expression evaluates to 0 on it, but the relabeling
        # orbit still reaches 4 and the box stays nonlocal
        pr = bw.pr_box()
        rel = bw.Relabeling(
            party_perm=(0, 1),
            input_perms=((0, 1), (0, 1)),
            output_perms=(((1, 0), (0, 1)), ((0, 1), (0, 1))),
        )
        flipped = bw.relabel(pr, rel)
        assert flipped != pr
        assert bw.chsh_value(flipped) == 0
        assert not bw.is_local(flipped).local
        orbit_max = max(
            abs(bw.chsh_value(bw.relabel(flipped, r)))
            for r in bw.all_relabelings((2, 2), (2, 2))
        )
        assert orbit_max == 4

    def test_relabel_preserves_no_signaling(self):
        pr = bw.pr_box()
        for rel in itertools.islice(bw.all_relabelings((2, 2), (2, 2)), 0, 64, 7):
            assert bw.check_no_signaling(bw.relabel(pr, rel)).ok

    def test_relabel_rejects_non_bijection(self):
        pr = bw.pr_box()
        rel = bw.Relabeling(
            party_perm=(0, 0),
            input_perms=((0, 1), (0, 1)),
            output_perms=(((0, 1), (0, 1)), ((0, 1), (0, 1))),
        )
        with pytest.raises(ShapeMismatch):
            bw.relabel(pr, rel)


def test_mixture_and_json_round_trip():
    pr = bw.pr_box()
    noise = bw.uniform_box((2, 2), (2, 2))
    iso = bw.mix_boxes([(Fraction(3, 4), pr), (Fraction(1, 4), noise)])
    data = iso.to_json_dict()
    back = bw.Box.from_json_dict(data)
    assert back == iso
    assert all(entry["p"].count("/") == 1 for entry in data["table"])


def test_normalization_exact_everywhere():
    box = bw.full_correlation_box(3, 1, lambda b: b[0] ^ (b[1] & b[2]))
    for x in box.inputs():
        assert sum(box.prob(x, a) for a in box.outputs()) == 1


try:
    from hypothesis import given, settings
    from hypothesis import strategies as st

    @given(st.integers(min_value=0, max_value=255))
    @settings(max_examples=25, deadline=None)
    def test_random_parity_boxes_nonsignaling_with_uniform_marginals(mask):
        f = bw.TruthTable.from_int(3, mask)
        box = bw.full_correlation_box(3, 1, f)
        assert bw.check_no_signaling(box).ok
        for subset in ([0], [1], [2], [0, 1], [0, 2], [1, 2]):
            m = bw.marginal(box, subset)
            w = Fraction(1, 2 ** len(subset))
            for x in itertools.product((0, 1), repeat=len(subset)):
                for a in itertools.product((0, 1), repeat=len(subset)):
                    assert m.prob(x, a) == w

except ImportError:  # pragma: no cover
    pass
