import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dhtbits.decoder_algebra import (
    all_reduction_outcomes,
    CLASSES,
    DECFOUR,
    Decomposition,
    DecisionMatrix,
    all_matrices,
    canonical_form,
    check_decomposition,
    classify,
    complement,
    enumerate_classify,
    equivalent,
    is_completely_reducible,
    is_decomposable,
    is_monotone,
    is_reducible,
    matrix_to_code,
    monotone_equivalent_form,
    reduce_step,
    reduced_form,
    threshold_decoder,
    threshold_decoder_bar,
)


@st.composite
def matrices(draw, max_side=4):
    my = draw(st.integers(1, max_side))
    mx = draw(st.integers(1, max_side))
    bits = draw(st.lists(st.booleans(), min_size=mx * my, max_size=mx * my))
    return DecisionMatrix(np.array(bits).reshape(my, mx))


@pytest.mark.parametrize("mx, my, literal", [
    (2, 2, "00/01"),
    (3, 2, "001/011"),
    (2, 3, "00/01/11"),
    (3, 3, "000/001/011"),
])
def test_threshold_decoder_tables(mx, my, literal):
    assert threshold_decoder(mx, my) == DecisionMatrix.from_literal(literal)
    assert threshold_decoder_bar(mx, my) == complement(DecisionMatrix.from_literal(literal))


def test_call_convention():
    d = DecisionMatrix.from_literal("01/00")
    # psi(m_x = 1, m_y = 0) is row 0, column 1
    assert d(1, 0) and not d(0, 1)
    assert d.mx == 2 and d.my == 2


@pytest.mark.parametrize("literal", ["1", "01/10", "1001/0011/0110/1100", "110/011"])
def test_literal_round_trip(literal):
    assert DecisionMatrix.from_literal(literal).to_literal() == literal


def test_reduce_step_on_trivial_raises():
    with pytest.raises(ValueError):
        reduce_step(DecisionMatrix.from_literal("11/11"), ("X", 0))


@pytest.mark.parametrize("literal, op, expected", [
    ("01/11", ("Y", 1), "01"),
    ("01/11", ("X", 1), "0/1"),
    ("01/10", ("X", 0), None),
    ("001/011", ("X", 0), "01/11"),
])
def test_reduce_step_table(literal, op, expected):
    out = reduce_step(DecisionMatrix.from_literal(literal), op)
    assert (out.to_literal() if out is not None else None) == expected


@pytest.mark.parametrize("literal, reducible, complete", [
    ("01/10", False, False),
    ("10/01", False, False),
    ("00/01", True, True),
    ("1001/0011/0110/1100", False, False),
    ("011/101", True, False),
])
def test_reducibility_table(literal, reducible, complete):
    d = DecisionMatrix.from_literal(literal)
    assert is_reducible(d) == reducible
    assert (reduced_form(d) is None) == complete == is_completely_reducible(d)


@given(matrices())
def test_canonical_form_invariant_under_permutation_and_duplication(d):
    rng = np.random.default_rng(matrix_to_code(d))
    b = d.bits[rng.permutation(d.my)][:, rng.permutation(d.mx)]
    b = np.concatenate([b, b[:1]], axis=0)
    b = np.concatenate([b, b[:, -1:]], axis=1)
    assert canonical_form(DecisionMatrix(b)) == canonical_form(d)
    assert equivalent(DecisionMatrix(b), d)


def test_canonical_form_separates_classes():
    assert not equivalent(threshold_decoder(2, 2), threshold_decoder_bar(2, 2))
    assert equivalent(DecisionMatrix.from_literal("01/10"), DecisionMatrix.from_literal("10/01"))
    assert not equivalent(DECFOUR, threshold_decoder(4, 4))


@given(matrices())
def test_complement_preserves_structure(d):
    c = complement(d)
    assert is_completely_reducible(c) == is_completely_reducible(d)
    assert is_decomposable(c)[0] == is_decomposable(d)[0]


@given(matrices())
def test_monotone_form_when_completely_reducible(d):
    m = monotone_equivalent_form(d)
    if is_completely_reducible(d):
        assert is_monotone(m) and equivalent(m, d)
    else:
        assert m is None


@given(matrices())
def test_decomposition_witness_valid(d):
    ok, w = is_decomposable(d)
    if ok:
        assert check_decomposition(d, w)


def _decomposable_brute(mx, my):
    found = set()
    mats = list(all_matrices(mx, my))
    for p0, p1 in itertools.product(mats, repeat=2):
        for i in (0, 1):
            w = Decomposition(p0, p1, i)
            if check_decomposition(DecisionMatrix(p0.bits ^ p1.bits ^ bool(1 - i)), w):
                found.add(matrix_to_code(DecisionMatrix(p0.bits ^ p1.bits ^ bool(1 - i))))
    return found


@pytest.mark.parametrize("mx, my", [(2, 2), (2, 3), (3, 2)])
def test_decomposability_against_brute_force(mx, my):
    brute = _decomposable_brute(mx, my)
    for d in all_matrices(mx, my):
        assert is_decomposable(d)[0] == (matrix_to_code(d) in brute), d


def test_decfour_is_irreducible_indecomposable():
    assert not is_reducible(DECFOUR)
    assert not is_decomposable(DECFOUR)[0]
    assert classify(DECFOUR).label == "irreducible_indecomposable"


@pytest.mark.parametrize("mx, my", [(1, 3), (2, 2), (3, 2), (2, 4), (3, 3)])
def test_fast_enumeration_matches_classify(mx, my):
    tally = enumerate_classify(mx, my)
    slow = {c: 0 for c in CLASSES}
    for d in all_matrices(mx, my):
        slow["trivial" if d.is_trivial() else classify(d).label] += 1
    assert dict(tally) == slow
    assert sum(tally.values()) == 2 ** (mx * my) and tally["trivial"] == 2


def test_two_by_two_irreducibles_are_the_crosses():
    irreducible = [d for d in all_matrices(2, 2) if not d.is_trivial() and not is_reducible(d)]
    assert sorted(d.to_literal() for d in irreducible) == ["01/10", "10/01"]
    tally = enumerate_classify(2, 2)
    assert tally["irreducible_decomposable"] == 2 and tally["irreducible_indecomposable"] == 0


def test_exemplars_belong_to_their_class():
    _, ex = enumerate_classify(3, 3, exemplars=True)
    for label, d in ex.items():
        assert ("trivial" if d.is_trivial() else classify(d).label) == label


def test_enumeration_budget():
    with pytest.raises(ValueError):
        enumerate_classify(5, 5)


@given(matrices(3))
def test_matrix_code_matches_enumeration_order(d):
    code = matrix_to_code(d)
    assert next(itertools.islice(all_matrices(d.mx, d.my), code, None)) == d


@given(matrices(4))
def test_reduction_order_independent(d):
    if not d.is_trivial():
        outcomes = all_reduction_outcomes(d)
        assert len(outcomes) == 1
        assert next(iter(outcomes)) == reduced_form(d)


@pytest.mark.parametrize("mx, my", [(1, 2), (2, 2), (2, 3), (3, 2), (3, 3)])
def test_complement_of_monotone_is_reversed_monotone(mx, my):
    for d in all_matrices(mx, my):
        if is_monotone(d):
            c = complement(d).bits[::-1, ::-1]
            assert is_monotone(DecisionMatrix(c))


@pytest.mark.parametrize("mx, my", [(2, 2), (2, 3), (3, 3)])
def test_canonical_form_against_permutation_search(mx, my):
    mats = list(all_matrices(mx, my))
    rng = np.random.default_rng(mx * 10 + my)
    k = min(40, len(mats))
    distinct = lambda d: (len({r.tobytes() for r in d.bits}) == d.my
                          and len({c.tobytes() for c in d.bits.T}) == d.mx)
    for i in rng.choice(len(mats), k, replace=False):
        for j in rng.choice(len(mats), k, replace=False):
            a, b = mats[i], mats[j]
            brute = any(np.array_equal(a.bits[list(pr)][:, list(pc)], b.bits)
                        for pr in itertools.permutations(range(my))
                        for pc in itertools.permutations(range(mx)))
            # without duplicate lines, equivalence is exactly a line permutation
            if distinct(a) and distinct(b):
                assert equivalent(a, b) == brute
            elif brute:
                assert equivalent(a, b)
