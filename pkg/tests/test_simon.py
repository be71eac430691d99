import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from probe_attack_sim import simon
from probe_attack_sim.errors import ResourceLimitError
from probe_attack_sim.simon import Gf2System, Verdict


def dot(x, k):
    return bin(x & k).count("1") % 2


def literal_distribution(f):
    """Prob(k) from the register amplitudes 2^-n sum_{f(x)=b} (-1)^(x.k)."""
    size = 1 << f.n
    probs = np.zeros(size)
    for k in range(size):
        amps = {}
        for x in range(size):
            amps[f(x)] = amps.get(f(x), 0) + (-1) ** dot(x, k)
        probs[k] = sum(a * a for a in amps.values()) / size**2
    return probs


def literal_attacked_law(f):
    """Prob(k, j) from the A/C/B state after U_f and H on both A and C."""
    size = 1 << f.n
    law = np.zeros((size, size))
    for k, j in itertools.product(range(size), repeat=2):
        amps = {}
        for x in range(size):
            amps[f(x)] = amps.get(f(x), 0) + (-1) ** dot(x, k ^ j)
        law[k, j] = sum(a * a for a in amps.values()) / 2 ** (3 * f.n)
    return law


def brute_null_space(n, rows):
    return [s for s in range(1 << n) if all(dot(r, s) == 0 for r in rows)]


# --- function construction -------------------------------------------------

def test_one_to_one_n1():
    f = simon.make_one_to_one(1, seed=3)
    assert sorted(f.table.tolist()) == [0, 1]


def test_one_to_one_is_permutation_and_deterministic():
    f = simon.make_one_to_one(3, seed=42)
    assert sorted(f.table.tolist()) == list(range(8))
    g = simon.make_one_to_one(3, seed=42)
    assert np.array_equal(f.table, g.table)
    f.check()


def test_two_to_one_examples():
    f = simon.make_two_to_one(1, 1, seed=0)
    assert f(0) == f(1)
    f = simon.make_two_to_one(3, 5, seed=9)
    values, counts = np.unique(f.table, return_counts=True)
    assert values.size == 4 and set(counts) == {2}
    f.check()


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.data())
def test_two_to_one_collisions_are_exactly_shifts(n, data):
    s = data.draw(st.integers(1, (1 << n) - 1))
    f = simon.make_two_to_one(n, s, seed=data.draw(st.integers(0, 2**32)))
    for x in range(1 << n):
        for y in range(1 << n):
            if x != y:
                assert (f(x) == f(y)) == (y == x ^ s)


def test_construction_errors():
    with pytest.raises(ValueError):
        simon.make_two_to_one(3, 0)
    with pytest.raises(ValueError):
        simon.make_one_to_one(0)
    with pytest.raises(ValueError):
        simon.make_one_to_one(21)


# --- exact outcome law -----------------------------------------------------

def test_distribution_one_to_one_n2():
    f = simon.make_one_to_one(2, seed=1)
    np.testing.assert_allclose(simon.honest_outcome_distribution(f), [0.25] * 4, atol=1e-15)


def test_distribution_two_to_one_n2():
    f = simon.make_two_to_one(2, 0b11, seed=1)
    np.testing.assert_allclose(simon.honest_outcome_distribution(f), [0.5, 0, 0, 0.5], atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("two_to_one", [False, True])
def test_distribution_matches_literal_amplitudes(n, two_to_one, rng):
    for _ in range(3):
        if two_to_one:
            f = simon.make_two_to_one(n, int(rng.integers(1, 1 << n)), seed=int(rng.integers(1e9)))
        else:
            f = simon.make_one_to_one(n, seed=int(rng.integers(1e9)))
        dist = simon.honest_outcome_distribution(f)
        np.testing.assert_allclose(dist, literal_distribution(f), atol=1e-14)
        # Closed form: 1/2^(n-1) on k.s = 0 when two-to-one, 1/2^n otherwise.
        ks = np.arange(1 << n)
        if f.s:
            expected = np.where([dot(k, f.s) == 0 for k in ks], 2.0 ** (1 - n), 0.0)
        else:
            expected = np.full(1 << n, 2.0**-n)
        np.testing.assert_allclose(dist, expected, atol=1e-14)


@pytest.mark.parametrize("n", [6, 10, 12])
def test_distribution_normalized_and_supported(n, rng):
    s = int(rng.integers(1, 1 << n))
    f = simon.make_two_to_one(n, s, seed=7)
    dist = simon.honest_outcome_distribution(f)
    assert abs(dist.sum() - 1) < 1e-12
    assert all(dot(int(k), s) == 0 for k in np.flatnonzero(dist))


def test_distribution_size_limit():
    f = simon.make_one_to_one(13, seed=0)
    with pytest.raises(ResourceLimitError):
        simon.honest_outcome_distribution(f)


# --- sampling --------------------------------------------------------------

def test_honest_samples_respect_parity(rng):
    for n in (3, 8, 14):
        s = int(rng.integers(1, 1 << n))
        f = simon.make_two_to_one(n, s, seed=5)
        ks = simon.honest_samples(f, rng, 2000)
        assert all(dot(int(k), s) == 0 for k in ks)


def test_honest_sample_n1_two_to_one(rng):
    f = simon.make_two_to_one(1, 1, seed=0)
    assert {simon.honest_sample(f, rng) for _ in range(200)} == {0}


@pytest.mark.parametrize("n", [4, 14])
def test_one_to_one_samples_uniform(n, rng):
    f = simon.make_one_to_one(n, seed=2)
    bins = 16
    ks = simon.honest_samples(f, rng, 20_000) % bins
    counts = np.bincount(ks, minlength=bins)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_structural_sampler_matches_exact_law(rng):
    # Above 12 bits the shortcut is used; check it against the exact law at 6 bits.
    f = simon.make_two_to_one(6, 0b100110, seed=4)
    draws = simon._structural_samples(f, rng, 200_000)
    emp = np.bincount(draws, minlength=64) / draws.size
    assert 0.5 * np.abs(emp - f.distribution).sum() < 0.02


def test_attacked_sample_examples(rng):
    f = simon.make_two_to_one(1, 1, seed=0)
    for _ in range(50):
        k, j = simon.attacked_sample(f, rng)
        assert k == j
    f = simon.make_two_to_one(5, 0b10110, seed=1)
    k, j = simon.attacked_samples(f, rng, 5000)
    assert all(dot(int(v), 0b10110) == 0 for v in k ^ j)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("two_to_one", [False, True])
def test_attacked_joint_law(n, two_to_one, rng):
    f = (
        simon.make_two_to_one(n, int(rng.integers(1, 1 << n)), seed=11)
        if two_to_one
        else simon.make_one_to_one(n, seed=11)
    )
    size = 1 << n
    exact = literal_attacked_law(f)
    # The literal state law factorizes into uniform(k) * honest(k ^ j).
    honest = simon.honest_outcome_distribution(f)
    product = np.array([[honest[k ^ j] / size for j in range(size)] for k in range(size)])
    np.testing.assert_allclose(exact, product, atol=1e-14)
    k, j = simon.attacked_samples(f, rng, 1_000_000)
    emp = np.bincount(k * size + j, minlength=size * size).reshape(size, size) / k.size
    assert 0.5 * np.abs(emp - exact).sum() < 0.02


# --- GF(2) solving ---------------------------------------------------------

def test_solve_gf2_examples():
    assert simon.solve_gf2(Gf2System(3, [0b001, 0b010, 0b100])) == 0
    assert simon.solve_gf2(Gf2System(2, [0b00, 0b11])) == 0b11
    assert simon.solve_gf2(Gf2System(3, [0b001])) is None
    with pytest.raises(ValueError):
        simon.solve_gf2(Gf2System(3, []))
    with pytest.raises(ValueError):
        Gf2System(2, [0b100])


def test_solve_gf2_against_brute_force(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 7))
        rows = [int(v) for v in rng.integers(0, 1 << n, size=int(rng.integers(1, 2 * n + 1)))]
        null = brute_null_space(n, rows)
        system = Gf2System(n, rows)
        basis = system.null_space()
        # Span of the basis equals the brute-force null space.
        span = {0}
        for v in basis:
            span |= {x ^ v for x in span}
        assert span == set(null)
        got = simon.solve_gf2(system)
        if len(null) == 1:
            assert got == 0
        elif len(null) == 2:
            assert got == null[1]
        else:
            assert got is None


def test_solve_gf2_recovers_shift_from_samples(rng):
    for _ in range(200):
        n = int(rng.integers(2, 9))
        s = int(rng.integers(1, 1 << n))
        f = simon.make_two_to_one(n, s, seed=int(rng.integers(1e9)))
        rows = simon.honest_samples(f, rng, 4 * n).tolist()
        system = Gf2System(n, rows)
        assert s in brute_null_space(n, rows)
        if system.rank() == n - 1:
            assert simon.solve_gf2(system) == s


# --- runs ------------------------------------------------------------------

def test_run_simon_two_to_one_success_rate():
    hits = 0
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        n = 2 + seed % 7
        s = int(rng.integers(1, 1 << n))
        f = simon.make_two_to_one(n, s, seed=seed)
        hits += simon.run_simon(f, rng).matches(s)
    assert hits >= 990


def test_run_simon_one_to_one():
    hits = 0
    for seed in range(300):
        rng = np.random.default_rng(seed)
        n = 3 + seed % 6
        hits += simon.run_simon(simon.make_one_to_one(n, seed=seed), rng).verdict is Verdict.ONE_TO_ONE
    assert hits >= 297


def test_run_simon_attacked_user_sees_one_to_one():
    hits = 0
    for seed in range(300):
        rng = np.random.default_rng(seed)
        n = 3 + seed % 6
        f = simon.make_two_to_one(n, int(rng.integers(1, 1 << n)), seed=seed)
        user_view = lambda g, r: simon.attacked_sample(g, r)[0]  # noqa: E731
        hits += simon.run_simon(f, rng, sampler=user_view).verdict is Verdict.ONE_TO_ONE
    assert hits >= 290


def test_run_simon_stop_rank(rng):
    f = simon.make_one_to_one(6, seed=1)
    res = simon.run_simon(f, rng, 100, stop_rank=6)
    assert res.verdict is Verdict.ONE_TO_ONE
    assert len(res.samples) < 100
    with pytest.raises(ValueError):
        simon.run_simon(f, rng, 0)


def test_run_attacked_simon_leak_and_no_leak(rng):
    f = simon.make_two_to_one(6, 0b101101, seed=3)
    t = simon.run_attacked_simon(f, rng)
    assert t.user.verdict is Verdict.ONE_TO_ONE
    assert t.leaked_samples == t.user.samples
    assert t.attacker.matches(0b101101)
    t = simon.run_attacked_simon(f, rng, leak=False)
    assert t.attacker is None and t.leaked_samples is None


def test_attacker_recovery_matches_honest_rate():
    honest = attacker = 0
    for seed in range(1000):
        n = 2 + seed % 7
        rng = np.random.default_rng(seed)
        s = int(rng.integers(1, 1 << n))
        f = simon.make_two_to_one(n, s, seed=seed)
        honest += simon.run_simon(f, np.random.default_rng([seed, 1])).matches(s)
        attacker += simon.run_attacked_simon(f, np.random.default_rng([seed, 2])).attacker.matches(s)
    assert abs(honest - attacker) / 1000 <= 0.02


# --- detection -------------------------------------------------------------

def user_view(f, r):
    return simon.attacked_sample(f, r)[0]


def test_detect_simon_honest_is_clean(rng):
    for _ in range(200):
        out = simon.detect_attack_simon(6, 0b110101, simon.honest_sample, 24, rng)
        assert out.verdict == "clean"
        assert out.violations == []


def test_detect_simon_attacked(rng):
    detected = sum(
        simon.detect_attack_simon(6, 0b110101, user_view, 20, rng).detected for _ in range(500)
    )
    # Each uniform k violates the parity with probability 1/2: miss rate 2^-20.
    assert detected == 500


def test_detect_simon_per_sample_violation_rate(rng):
    out = simon.detect_attack_simon(6, 0b110101, user_view, 4000, rng)
    assert abs(len(out.violations) / 4000 - 0.5) < 0.04


def test_detect_simon_vacuous(rng):
    assert simon.detect_attack_simon(4, 0b11, user_view, 0, rng).verdict == "clean"
    with pytest.raises(ValueError):
        simon.detect_attack_simon(4, 0, user_view, 5, rng)


def test_bit_string_helpers():
    assert simon.to_bits(5, 4) == "0101"
    assert simon.from_bits("0101") == 5
    with pytest.raises(ValueError):
        simon.from_bits("012")
