import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncrelay import (Alphabet, CondPmf, JointPmf, Pmf, ProbabilityError, binary_entropy,
                     conditional_entropy, conditional_mutual_information, entropy,
                     example_bec_channel, marginalize, mutual_information)

import oracles


def _axes(sizes, prefix="a"):
    return tuple(Alphabet(f"{prefix}{i}", s) for i, s in enumerate(sizes))


def test_alphabet_rejects_bad_sizes_and_labels():
    with pytest.raises(ProbabilityError):
        Alphabet("x", 0)
    with pytest.raises(ProbabilityError):
        Alphabet("x", 2, ("a",))
    a = Alphabet("y2", 3, ("0", "1", "e"))
    assert a.index("e") == 2 and a.label(2) == "e"


def test_pmf_validation():
    x = Alphabet("x", 2)
    with pytest.raises(ProbabilityError):
        Pmf(x, [0.5, 0.6])
    with pytest.raises(ProbabilityError):
        Pmf(x, [1.5, -0.5])
    with pytest.raises(ProbabilityError):
        Pmf(x, [1.0])
    Pmf(x, [0.5, 0.5 + 5e-13])  # inside the 1e-12 tolerance


def test_condpmf_reports_bad_row():
    x, y = Alphabet("x", 2), Alphabet("y", 2)
    with pytest.raises(ProbabilityError, match="row"):
        CondPmf((x,), y, [[0.5, 0.5], [0.3, 0.6]])


def test_joint_rejects_duplicate_axes():
    x = Alphabet("x", 2)
    with pytest.raises(ProbabilityError):
        JointPmf((x, x), np.full((2, 2), 0.25))


def test_pmfs_are_immutable():
    p = Pmf.uniform(Alphabet("x", 2))
    with pytest.raises(ValueError):
        p.probs[0] = 1.0


@pytest.mark.parametrize("p,expected", [((0.5, 0.5), 1.0), ((1.0, 0.0), 0.0), ((0.2, 0.8), 0.7219)])
def test_entropy_examples(p, expected):
    tol = 1e-12 if expected in (0.0, 1.0) else 5e-5
    assert entropy(Pmf(Alphabet("x", 2), p)) == pytest.approx(expected, abs=tol)


@pytest.mark.parametrize("p,expected", [(0.5, 1.0), (0.0, 0.0), (0.2, 0.7219)])
def test_binary_entropy(p, expected):
    assert binary_entropy(p) == pytest.approx(expected, abs=5e-5)


def test_binary_entropy_domain():
    with pytest.raises(ProbabilityError):
        binary_entropy(1.2)


def test_marginalize_examples():
    a, b = Alphabet("a", 2), Alphabet("b", 3)
    p, q = np.array([0.3, 0.7]), np.array([0.2, 0.5, 0.3])
    j = JointPmf((a, b), np.outer(p, q))
    np.testing.assert_allclose(marginalize(j, "a").probs, p, atol=1e-15)
    assert marginalize(j, ("a", "b")) == j
    assert marginalize(j, ("b", "a")).names == ("b", "a")

    ch = example_bec_channel()
    pxy = JointPmf((ch.x1, ch.y2), 0.5 * ch.w2)
    np.testing.assert_allclose(marginalize(pxy, "y2").probs, [0.25, 0.25, 0.5], atol=1e-15)


def test_marginalize_errors():
    j = JointPmf(_axes((2, 2)), np.full((2, 2), 0.25))
    with pytest.raises(ProbabilityError):
        marginalize(j, "zz")
    with pytest.raises(ProbabilityError):
        marginalize(j, ())


def test_mutual_information_examples():
    a, b = Alphabet("a", 2), Alphabet("b", 2)
    assert mutual_information(JointPmf((a, b), np.full((2, 2), 0.25)), "a", "b") == pytest.approx(0, abs=1e-15)
    assert mutual_information(JointPmf((a, b), np.eye(2) / 2), "a", "b") == pytest.approx(1.0, abs=1e-15)
    bsc = 0.5 * np.array([[0.8, 0.2], [0.2, 0.8]])
    assert mutual_information(JointPmf((a, b), bsc), "a", "b") == pytest.approx(0.2781, abs=5e-5)


def test_mutual_information_overlapping_groups():
    j = JointPmf(_axes((2, 2)), np.full((2, 2), 0.25))
    with pytest.raises(ProbabilityError):
        mutual_information(j, "a0", "a0,a1")


def test_cmi_examples():
    rng = np.random.default_rng(5)
    A, C, B = Alphabet("a", 2), Alphabet("c", 3), Alphabet("b", 2)
    pa = rng.dirichlet(np.ones(2))
    pc_a = rng.dirichlet(np.ones(3), size=2)
    pb_c = rng.dirichlet(np.ones(2), size=3)
    markov = np.einsum("a,ac,cb->acb", pa, pc_a, pb_c)
    j = JointPmf((A, C, B), markov)
    assert conditional_mutual_information(j, "a", "b", "c") == pytest.approx(0, abs=1e-13)

    pab = rng.dirichlet(np.ones(4)).reshape(2, 2)
    pc = rng.dirichlet(np.ones(3))
    j2 = JointPmf((A, B, C), np.einsum("ab,c->abc", pab, pc))
    assert conditional_mutual_information(j2, "a", "b", "c") == pytest.approx(
        mutual_information(j2, "a", "b"), abs=1e-13)


def test_cmi_on_example_witness_joint():
    from ncrelay import build_joint_gp_df, example_bec_witness
    ch = example_bec_channel()
    j = build_joint_gp_df(ch, example_bec_witness(ch))
    # given x1, U is 1 w.p. 3/4 and is a fair bit once y2 is known to be unerased
    assert conditional_mutual_information(j, "u", "y2", "x1") == pytest.approx(
        binary_entropy(0.25) - 0.5, abs=1e-12)
    assert conditional_entropy(j, "x2", "y2") == pytest.approx(0.5, abs=1e-12)
    assert mutual_information(j, "x1", "x2") == pytest.approx(0.0, abs=1e-12)
    second = mutual_information(j, "x1,u", "y3") - conditional_mutual_information(j, "u", "y2", "x1")
    assert second == pytest.approx(0.5, abs=1e-12)


def test_conditional_entropy_chain_rule():
    rng = np.random.default_rng(2)
    j = JointPmf(_axes((2, 3)), rng.dirichlet(np.ones(6)).reshape(2, 3))
    lhs = entropy(j)
    rhs = entropy(marginalize(j, "a1")) + conditional_entropy(j, "a0", "a1")
    assert lhs == pytest.approx(rhs, abs=1e-12)


def _random_joint(rng):
    k = int(rng.integers(1, 5))
    shape = tuple(int(s) for s in rng.integers(1, 4, size=k))
    p = rng.dirichlet(np.ones(int(np.prod(shape)))) * (rng.random(int(np.prod(shape))) > 0.2)
    if p.sum() == 0:
        p[0] = 1.0
    return (p / p.sum()).reshape(shape)


def test_measures_match_brute_force_oracle():
    """100 random joints of at most 4 axes of size at most 3, every axis split."""
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for _ in range(100):
        p = _random_joint(rng)
        shape = p.shape
        j = JointPmf(_axes(shape), p)
        names = j.names
        k = len(shape)
        worst = max(worst, abs(entropy(j) - oracles.H(p, shape, tuple(range(k)))))
        for r in range(1, k + 1):
            for a in itertools.combinations(range(k), r):
                rest = [i for i in range(k) if i not in a]
                for rb in range(1, len(rest) + 1):
                    for b in itertools.combinations(rest, rb):
                        an, bn = [names[i] for i in a], [names[i] for i in b]
                        worst = max(worst, abs(mutual_information(j, an, bn) - oracles.I(p, shape, a, b)))
                        others = [i for i in rest if i not in b]
                        for rc in range(1, len(others) + 1):
                            for c in itertools.combinations(others, rc):
                                cn = [names[i] for i in c]
                                got = conditional_mutual_information(j, an, bn, cn)
                                worst = max(worst, abs(got - oracles.CI(p, shape, a, b, c)))
    assert worst <= 1e-12


@st.composite
def joints(draw):
    shape = tuple(draw(st.lists(st.integers(1, 3), min_size=2, max_size=3)))
    n = int(np.prod(shape))
    w = draw(st.lists(st.floats(0, 1), min_size=n, max_size=n))
    w = np.asarray(w) + 1e-3
    return (w / w.sum()).reshape(shape)


@settings(max_examples=60, deadline=None)
@given(joints())
def test_information_inequalities(p):
    j = JointPmf(_axes(p.shape), p)
    a, b = j.names[0], j.names[1]
    h = entropy(j)
    assert 0.0 <= h <= np.log2(p.size) + 1e-12
    i = mutual_information(j, a, b)
    assert 0.0 <= i <= min(entropy(marginalize(j, a)), entropy(marginalize(j, b))) + 1e-12
    assert i == pytest.approx(mutual_information(j, b, a), abs=1e-14)
    if len(j.names) == 3:
        c = j.names[2]
        # chain rule: I(A;B,C) = I(A;C) + I(A;B|C)
        lhs = mutual_information(j, a, (b, c))
        rhs = mutual_information(j, a, c) + conditional_mutual_information(j, a, b, c)
        assert lhs == pytest.approx(rhs, abs=1e-12)
