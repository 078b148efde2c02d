import itertools

import numpy as np
import pytest

from ncrelay import (Alphabet, ChannelError, CondPmf, DeterministicMap, NoncausalRelayChannel, Pmf,
                     WitnessGPDF, build_joint_cf, build_joint_cutset, build_joint_df,
                     build_joint_gp_cf, build_joint_gp_cf_binned, build_joint_gp_df,
                     build_joint_gp_pdf_cf, build_joint_pdf, example_bec_channel,
                     example_bec_witness, example_bsc_channel, is_degraded, marginalize,
                     mutual_information, random_channel)
from ncrelay.channel import induced_relay_conditional

import helpers
import oracles

BUILDERS = [
    (build_joint_df, helpers.random_df),
    (build_joint_pdf, helpers.random_pdf),
    (build_joint_cutset, helpers.random_cutset),
    (build_joint_gp_df, helpers.random_gp_df),
    (build_joint_gp_cf, helpers.random_gp_cf),
    (build_joint_gp_cf_binned, helpers.random_binned),
    (build_joint_cf, helpers.random_cf),
    (build_joint_gp_pdf_cf, helpers.random_gp_pdf_cf),
]


def test_from_arrays_checks_shapes():
    with pytest.raises(ChannelError):
        NoncausalRelayChannel.from_arrays(np.eye(2), np.ones((2, 2, 3, 2)) / 2)


def test_channel_rows_must_be_stochastic():
    w3 = np.full((2, 2, 2, 2), 0.5)
    with pytest.raises(ValueError):
        NoncausalRelayChannel.from_arrays([[0.5, 0.4], [0.5, 0.5]], w3)


def test_channel_is_immutable_and_hashable():
    ch = example_bsc_channel(0.2, 0.1, 0.55)
    with pytest.raises(ValueError):
        ch.w2[0, 0] = 0.0
    assert ch == example_bsc_channel(0.2, 0.1, 0.55)
    assert len({ch, example_bsc_channel(0.2, 0.1, 0.55)}) == 1
    assert ch != example_bsc_channel(0.2, 0.1, 0.5)


def test_map_validation():
    u, x = Alphabet("u", 2), Alphabet("x2", 2)
    with pytest.raises(ChannelError):
        DeterministicMap((u,), x, [0, 2])
    with pytest.raises(ChannelError):
        DeterministicMap((u,), x, [0, 1, 1])
    m = DeterministicMap((u,), x, [1, 0])
    assert m(0) == 1 and m(1) == 0
    np.testing.assert_array_equal(DeterministicMap.constant((u,), x, 1).table, [1, 1])


def test_witness_rejects_foreign_alphabets():
    ch = example_bsc_channel(0.2, 0.1, 0.55)
    other = example_bec_channel()
    w = helpers.random_gp_df(np.random.default_rng(0), other)
    with pytest.raises(ChannelError):
        build_joint_gp_df(ch, w)


@pytest.mark.parametrize("build,make", BUILDERS, ids=lambda f: getattr(f, "__name__", ""))
def test_joints_have_unit_mass(build, make):
    rng = np.random.default_rng(11)
    for sizes in [(2, 2, 2, 2), (2, 3, 3, 2), (3, 2, 2, 3)]:
        ch = random_channel(rng, sizes)
        j = build(ch, make(rng, ch))
        assert abs(j.probs.sum() - 1.0) <= 1e-12
        assert np.all(j.probs >= 0)


def test_gp_df_joint_matches_loop_factorization():
    rng = np.random.default_rng(3)
    for _ in range(10):
        ch = random_channel(rng, (2, 3, 3, 2))
        w = helpers.random_gp_df(rng, ch, nu=3)
        j = build_joint_gp_df(ch, w)
        d, shape = oracles.gp_df_joint(ch.w2, ch.w3, w.p_x1.probs, w.p_u_given_x1y2.probs,
                                       w.relay_map.table)
        np.testing.assert_allclose(j.probs, oracles.dict_to_dense(d, shape), atol=1e-15)


def test_example_witness_gives_y3_equal_x2_equal_u():
    ch = example_bec_channel()
    j = build_joint_gp_df(ch, example_bec_witness(ch))
    p = marginalize(j, ("u", "x2", "y3")).probs
    mass_on_diagonal = sum(p[a, a, a] for a in range(2))
    assert mass_on_diagonal == pytest.approx(1.0, abs=1e-15)


def test_constant_witness_y3_marginal():
    rng = np.random.default_rng(8)
    ch = random_channel(rng, (2, 2, 3, 2))
    u = Alphabet("u", 1)
    p_x1 = helpers.simplex(rng, (2,))
    w = WitnessGPDF(Pmf(ch.x1, p_x1), CondPmf((ch.x1, ch.y2), u, np.ones((2, 3, 1))),
                    DeterministicMap.constant((u, ch.x1, ch.y2), ch.x2, 0))
    got = marginalize(build_joint_gp_df(ch, w), "y3").probs
    want = np.zeros(2)
    for x1, y2 in itertools.product(range(2), range(3)):
        want += p_x1[x1] * ch.w2[x1, y2] * ch.w3[x1, 0, y2]
    np.testing.assert_allclose(got, want, atol=1e-15)


def test_induced_relay_conditional():
    rng = np.random.default_rng(4)
    ch = random_channel(rng, (2, 3, 2, 2))
    w = helpers.random_gp_df(rng, ch, nu=3)
    c = induced_relay_conditional(ch, w).probs
    for x1, y2 in itertools.product(range(2), range(2)):
        want = np.zeros(3)
        for u in range(3):
            want[w.relay_map.table[u, x1, y2]] += w.p_u_given_x1y2.probs[x1, y2, u]
        np.testing.assert_allclose(c[x1, y2], want, atol=1e-15)


def test_degradedness():
    assert is_degraded(example_bec_channel())
    assert is_degraded(example_bsc_channel(0.2, 0.1, 0.55))
    assert is_degraded(example_bec_channel(), tol=1e-12)
    ch = example_bsc_channel(0.2, 0.1, 0.55)
    w3 = ch.w3.copy()
    w3[0, 0, 0] = [0.85, 0.15]
    assert not is_degraded(NoncausalRelayChannel.from_arrays(ch.w2, w3), tol=1e-6)
    rng = np.random.default_rng(0)
    assert is_degraded(random_channel(rng, degraded=True))
    assert not is_degraded(random_channel(rng, degraded=False))


def test_bec_example_structure():
    ch = example_bec_channel()
    np.testing.assert_array_equal(ch.w2[0], [0.5, 0.0, 0.5])
    assert ch.y2.labels == ("0", "1", "e")
    # with uniform X1 the erasure happens w.p. 1/2; y3 = x2 unless erased, then 1
    p_y2 = 0.5 * ch.w2.sum(axis=0)
    z = np.einsum("j,ajk->ak", p_y2, ch.w3[0])
    np.testing.assert_allclose(z, [[0.5, 0.5], [0.0, 1.0]], atol=1e-15)


def test_bsc_example_structure():
    ch = example_bsc_channel(0.2, 0.1, 0.55)
    np.testing.assert_array_equal(ch.w2, [[0.8, 0.2], [0.2, 0.8]])
    np.testing.assert_array_equal(ch.w3[0, 0, 1], [0.45, 0.55])
    np.testing.assert_array_equal(ch.w3[1, 1, 0], [0.1, 0.9])

    noiseless = example_bsc_channel(0, 0, 0)
    assert is_degraded(noiseless)
    np.testing.assert_array_equal(noiseless.w2, np.eye(2))

    useless = example_bsc_channel(0.5, 0.3, 0.1)
    rng = np.random.default_rng(1)
    for _ in range(5):
        w = helpers.random_df(rng, useless)
        assert mutual_information(build_joint_df(useless, w), "x1", "y2") == pytest.approx(0, abs=1e-15)
    with pytest.raises(ChannelError):
        example_bsc_channel(1.2, 0, 0)


def test_random_channel_is_reproducible():
    a = random_channel(np.random.default_rng(9), (2, 3, 2, 2))
    b = random_channel(np.random.default_rng(9), (2, 3, 2, 2))
    assert a == b
    assert a.sizes == (2, 3, 2, 2)
