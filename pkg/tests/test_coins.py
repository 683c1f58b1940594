import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blindcast.coins import (
    CD_PROTOCOLS,
    NO_CD_PROTOCOLS,
    Constants,
    IterationRandomness,
    Protocol,
    draw_iteration,
    log_conv,
    pmf_y1_table,
    pmf_y2,
    pmf_y2_table,
    pmf_y3_table,
    pmf_y4_table,
    poisson_binomial_pmf,
    prob_exactly_one,
    sample_sequence,
    sample_y1,
    sample_y2,
    sample_y3,
    sample_y4,
    single_tx_bound,
    transmit_prob,
    y3_shape,
)


def rng(seed=0):
    return np.random.default_rng(seed)


# -- log convention -----------------------------------------------------------

def test_log_conv_values():
    assert log_conv(1) == 1
    assert log_conv(8) == 3
    assert log_conv(1.5) == 1
    assert log_conv(0.25) == 1


@pytest.mark.parametrize("bad", [0, -1.0])
def test_log_conv_rejects_nonpositive(bad):
    with pytest.raises(ValueError):
        log_conv(bad)


# -- protocol sets and constants ---------------------------------------------

def test_protocol_sets():
    assert len(NO_CD_PROTOCOLS) == 2 and len(CD_PROTOCOLS) == 4
    assert set(NO_CD_PROTOCOLS) == {Protocol.SHALLOW, Protocol.GENERAL}


def test_published_constants():
    c = Constants.paper(4)
    assert (c.c1, c.c2, c.c3, c.c4) == (120, 14000, 9120, 15360)
    assert Constants.paper(2).c1 == 60


def test_constants_positive():
    with pytest.raises(ValueError):
        Constants(c3=0)


# -- sequence -----------------------------------------------------------------

def test_sequence_single_protocol_constant():
    S = sample_sequence(100, [Protocol.GENERAL], rng())
    assert set(S.tolist()) == {2}


def test_sequence_frequencies():
    S = sample_sequence(10**6, CD_PROTOCOLS, rng(1))
    freq = np.bincount(S, minlength=5)[1:] / S.size
    assert np.all(np.abs(freq - 0.25) < 0.01)


def test_sequence_deterministic():
    assert np.array_equal(sample_sequence(50, CD_PROTOCOLS, rng(9)), sample_sequence(50, CD_PROTOCOLS, rng(9)))


# -- Y1 -----------------------------------------------------------------------

def test_y1_half_half():
    assert pmf_y1_table(64, 4).tolist() == [0.0, 0.5, 0.5]


def test_y1_quarters():
    assert pmf_y1_table(64, 2).tolist() == [0.0, 0.25, 0.25, 0.25, 0.25]


def test_y1_empty_support():
    assert pmf_y1_table(1, 30).tolist() == [1.0]
    assert set(sample_y1(1, 30, rng(), size=100).tolist()) == {0}


def test_y1_partial_support_mass_at_zero():
    # sqrt(10)/1 = 3.16 -> support 1..3, each 1/sqrt(10)
    table = pmf_y1_table(10, 1)
    q = 1 / math.sqrt(10)
    assert table[1:].tolist() == pytest.approx([q, q, q])
    assert table[0] == pytest.approx(1 - 3 * q)


# -- Y2 -----------------------------------------------------------------------

def test_y2_closed_forms():
    assert pmf_y2(1) == pytest.approx(1 / 3, rel=1e-15)
    assert pmf_y2(2) == pytest.approx(1 / 6, rel=1e-15)
    assert pmf_y2(4) == pytest.approx(1 / 48, rel=1e-15)
    assert pmf_y2(3) == pytest.approx(1 / (9 * math.log2(3) ** 2), rel=1e-15)


def test_y2_partial_sums_below_one():
    table = pmf_y2_table()
    body = np.cumsum(table[1:-1])
    assert body[-1] < 1
    assert np.all(np.diff(body) > 0)


def test_y2_tail_folded_into_cap():
    table = pmf_y2_table(1024)
    weight = 1 / (3 * 1024 * 10 ** 2)
    assert table[-1] > weight
    # integral oracle for the tail mass, independent of the closed form used
    from scipy.integrate import quad
    # substitute y = e^s: the integrand becomes ln(2)^2 / (3 s^2)
    tail, _ = quad(lambda s: math.log(2) ** 2 / (3 * s * s), math.log(1024.5), np.inf)
    assert table[-1] - weight == pytest.approx(tail, rel=1e-8)
    # the midpoint integral tracks the discrete tail sum closely
    ys = np.arange(1025, 10**7 + 1, dtype=float)
    partial = np.sum(1 / (3 * ys * np.log2(ys) ** 2))
    rest, _ = quad(lambda s: math.log(2) ** 2 / (3 * s * s), math.log(10**7 + 0.5), np.inf)
    assert partial + rest == pytest.approx(tail, rel=1e-6)


def test_y2_zero_mass_does_not_depend_on_cap():
    a = pmf_y2_table(1 << 10)[0]
    b = pmf_y2_table(1 << 16)[0]
    assert a == pytest.approx(b, abs=2e-6)


# -- Y3 -----------------------------------------------------------------------

def y3_raw_pieces(T, c3):
    L = max(math.log2(T), 1)
    LL = max(math.log2(L), 1)
    A = math.floor(math.sqrt(T / (c3**2 * L**2 * LL)))
    B = math.floor(math.sqrt(T * L**2 / (c3**2 * LL)))
    q1 = math.sqrt(c3**2 * L**2 * LL / (2 * T))
    return A, B, q1, LL


@pytest.mark.parametrize("t", [1, 2, 5, 11, 20, 30, 40])
@pytest.mark.parametrize("c3", [1.0, 2280.0 * 4])
def test_y3_mass_at_most_one(t, c3):
    table = pmf_y3_table(2**t, c3)
    assert table.min() >= 0
    assert table[1:].sum() <= 1 + 1e-12
    assert table.sum() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("t", [11, 20])
def test_y3_matches_formula_up_to_normalization(t):
    T = 2**t
    A, B, q1, LL = y3_raw_pieces(T, 1.0)
    raw = np.array([0.0] + [q1] * A + [1 / (3 * y * LL) for y in range(A + 1, B + 1)])
    table = pmf_y3_table(T, 1.0)
    scale = max(1.0, raw.sum())
    assert table[1:] == pytest.approx(raw[1:] / scale, rel=1e-12)


def test_y3_raw_pieces_overshoot_unit_mass():
    # First piece is at most 1/sqrt(2); the second is about 2 ln 2 / 3, not below 1/4.
    shape = y3_shape(2**30, 1.0)
    assert shape.first_end * shape.first_prob <= 1 / math.sqrt(2)
    assert shape.raw_mass > 1.1


def test_y3_empty_first_piece():
    shape = y3_shape(32, 1.0)
    assert shape.first_end == 0
    table = pmf_y3_table(32, 1.0)
    assert table.sum() == pytest.approx(1.0)
    assert sample_y3(32, 1.0, rng(), size=1000).max() <= shape.second_end


def test_y3_boundary_value_in_first_piece():
    T = 2**20
    A, _, q1, _ = y3_raw_pieces(T, 1.0)
    table = pmf_y3_table(T, 1.0)
    assert table[A] == pytest.approx(table[1])
    assert table[A + 1] != pytest.approx(table[1])


def test_y3_needs_t_at_least_two():
    with pytest.raises(ValueError):
        pmf_y3_table(1, 1.0)


# -- Y4 -----------------------------------------------------------------------

def test_y4_trivial():
    assert sample_y4(1, rng()) == 1


def test_y4_mean():
    x = sample_y4(1024, rng(5), size=10**6)
    sigma = math.sqrt((1024**2 - 1) / 12 / 10**6)
    assert abs(x.mean() - 512.5) < 3 * sigma
    assert x.min() == 1 and x.max() == 1024


def test_y4_same_seed():
    assert sample_y4(1000, rng(3)) == sample_y4(1000, rng(3))


# -- exact sums ---------------------------------------------------------------

def test_y1_y4_sum_exactly():
    for T, c1 in [(64, 4), (64, 2), (1024, 1), (7, 1)]:
        k = math.floor(math.sqrt(T) / c1)
        # rational check where sqrt(T) is an integer
        if math.isqrt(T) ** 2 == T:
            assert Fraction(k) * Fraction(c1) / Fraction(math.isqrt(T)) <= 1
        assert pmf_y1_table(T, c1).sum() == pytest.approx(1.0, abs=1e-15)
    assert pmf_y4_table(1000).sum() == pytest.approx(1.0, abs=1e-12)


def test_sample_histograms():
    r = rng(11)
    for table, draw in [
        (pmf_y2_table(), lambda: sample_y2(r, size=10**5)),
        (pmf_y1_table(4096, 1), lambda: sample_y1(4096, 1, r, size=10**5)),
    ]:
        counts = np.bincount(draw(), minlength=table.size)[: table.size]
        tv = 0.5 * np.abs(counts / counts.sum() - table).sum()
        assert tv < 0.02


@pytest.mark.parametrize("name,T", [("y1", 2**20), ("y3", 2**20), ("y4", 2**16), ("y3", 2**30)])
def test_large_support_binned_fidelity(name, T):
    # raw-bin TV is dominated by sampling noise here, so compare on dyadic bins
    r = rng(5)
    n = 200_000
    table, samples = {
        "y1": lambda: (pmf_y1_table(T, 1), sample_y1(T, 1, r, size=n)),
        "y3": lambda: (pmf_y3_table(T, 1), sample_y3(T, 1, r, size=n)),
        "y4": lambda: (pmf_y4_table(T), sample_y4(T, r, size=n)),
    }[name]()
    edges = np.concatenate([[0, 1], 2 ** np.arange(1, int(math.log2(table.size)) + 2)])
    cum = np.concatenate([[0.0], np.cumsum(table)])
    expected = np.diff(cum[np.minimum(edges, table.size)])
    observed = np.histogram(samples, bins=edges)[0] / n
    assert 0.5 * np.abs(observed - expected).sum() < 0.01


# -- transmission probability ---------------------------------------------------

def test_transmit_prob_examples():
    assert transmit_prob(Protocol.SHALLOW, 64, 3) == 1 / 8
    for proto in Protocol:
        assert transmit_prob(proto, 64, 0, d=3) == 1.0
    p = transmit_prob(Protocol.DEEP, 1024, 8, d=4, constants=Constants(c4=1))
    assert p == pytest.approx(2 ** (-2 / 3), rel=1e-12)
    assert p == pytest.approx(0.6300, abs=1e-4)


def test_deep_source_distance_clamped():
    assert transmit_prob(Protocol.DEEP, 16, 4, d=0) == transmit_prob(Protocol.DEEP, 16, 4, d=1)


def test_deep_vector_distances():
    d = np.array([0, 1, 4, 100])
    p = transmit_prob(Protocol.DEEP, 1024, 8, d=d)
    assert p.shape == (4,)
    assert p[2] == pytest.approx(2 ** (-2 / 3))


@settings(max_examples=200, deadline=None)
@given(proto=st.sampled_from(list(Protocol)), t=st.integers(1, 30), d=st.integers(0, 500),
       x=st.integers(0, 2000), c4=st.floats(0.1, 5000))
def test_transmit_prob_monotone_in_unit_interval(proto, t, d, x, c4):
    c = Constants(c4=c4)
    T = 2**t
    a = transmit_prob(proto, T, x, d, c)
    b = transmit_prob(proto, T, x + 1, d, c)
    assert 0 <= b <= a <= 1
    assert a > 0 or x > 1000


# -- iteration randomness -------------------------------------------------------

def test_draw_iteration_shapes_and_determinism():
    c = Constants()
    a = draw_iteration(6, CD_PROTOCOLS, c, rng(4))
    b = draw_iteration(6, CD_PROTOCOLS, c, rng(4))
    assert a.T == 64 and len(a.S) == len(a.x) == 64
    assert np.array_equal(a.S, b.S) and np.array_equal(a.x, b.x)
    assert a.x.min() >= 0
    deep = a.x[a.S == Protocol.DEEP]
    assert np.all((deep >= 1) & (deep <= 64))


def test_iteration_randomness_length_checked():
    with pytest.raises(ValueError):
        IterationRandomness(t=2, S=np.ones(3, dtype=np.int8), x=np.zeros(3, dtype=np.int64))


# -- Poisson-binomial kernel ----------------------------------------------------

def brute_exactly_one(probs):
    total = 0.0
    for j, pj in enumerate(probs):
        term = pj
        for i, pi in enumerate(probs):
            if i != j:
                term *= 1 - pi
        total += term
    return total


def test_poisson_binomial_small_cases():
    assert prob_exactly_one([0.5]) == 0.5
    assert prob_exactly_one([0.25, 0.25]) == pytest.approx(0.375)
    assert single_tx_bound([0.5]) == pytest.approx(0.25)
    assert poisson_binomial_pmf([0.5, 0.5]).tolist() == [0.25, 0.5, 0.25]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.0, 0.5), min_size=1, max_size=30))
def test_exactly_one_matches_brute_force_and_bound(probs):
    exact = prob_exactly_one(probs)
    assert exact == pytest.approx(brute_exactly_one(probs), abs=1e-12)
    assert exact >= single_tx_bound(probs) - 1e-15
    assert poisson_binomial_pmf(probs).sum() == pytest.approx(1.0)
