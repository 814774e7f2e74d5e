from fractions import Fraction

import numpy as np
import pytest

from k3satotate.counting import surface
from k3satotate.density import mixture_cdf
from k3satotate.errors import ConfigurationError, DomainError, SampleError, WeilBoundError
from k3satotate.liegroups import group_spec
from k3satotate.stats import (
    bin_index,
    build_histogram,
    cdf_distance,
    compare,
    component_split,
    empirical_moments,
    exact_mean,
    null_cdf_distances,
    spike_mass,
)


class TestHistogram:
    def test_zeros(self):
        h = build_histogram([Fraction(0)] * 3)
        assert h.counts[150] == 3 and h.size == 3 and h.bins == 300

    def test_empty(self):
        h = build_histogram([])
        assert h.size == 0 and not h.counts.any()

    def test_edges_are_exact(self):
        assert bin_index(Fraction(-6)) == 0
        assert bin_index(Fraction(6)) == 299
        assert bin_index(Fraction(-6) + Fraction(1, 25)) == 1
        assert bin_index(Fraction(-6) + Fraction(1, 25) - Fraction(1, 10**9)) == 0
        assert bin_index(Fraction(-1, 10**6)) == 149

    def test_out_of_range(self):
        with pytest.raises(WeilBoundError):
            build_histogram([Fraction(61, 10)])

    def test_conservation_and_csv(self):
        rng = np.random.default_rng(1)
        ts = [Fraction(int(a), 101) for a in rng.integers(-606, 607, 500)]
        h = build_histogram(ts)
        assert h.size == 500
        lines = h.to_csv().splitlines()
        assert lines[0] == "bin_left,count,frequency"
        assert lines[1].startswith("-6.0000,") and len(lines) == 301


class TestMoments:
    def test_zeros(self):
        for est in empirical_moments([Fraction(0)] * 40, 6):
            assert est.value == 0 and est.se == 0 and est.exact == 0

    def test_exact_mean(self):
        vals = [Fraction(1, 3), Fraction(-2, 9), Fraction(5, 7)]
        assert exact_mean(vals) == sum(vals, Fraction(0)) / 3

    def test_against_numpy(self):
        rng = np.random.default_rng(4)
        ts = [Fraction(int(a), int(p)) for a, p in zip(rng.integers(-60, 61, 200), rng.choice([11, 13, 17], 200))]
        xs = np.array([float(t) for t in ts])
        for est in empirical_moments(ts, 4):
            assert est.value == pytest.approx(np.mean(xs**est.n), rel=1e-12)
            assert est.se == pytest.approx(np.std(xs**est.n, ddof=1) / np.sqrt(200), rel=1e-9)

    def test_domain(self):
        with pytest.raises(SampleError):
            empirical_moments([Fraction(1)] * 29, 2)
        with pytest.raises(DomainError):
            empirical_moments([Fraction(1)] * 40, 11)


def test_spike_mass_is_exact():
    ts = [Fraction(0), Fraction(1, 10**12), Fraction(0), Fraction(-1, 7)]
    assert spike_mass(ts) == (2, 0.5)


def test_cdf_distance_brute_force():
    spec = group_spec("x4")
    rng = np.random.default_rng(2)
    ts = [Fraction(0)] * 20 + [Fraction(int(a), 97) for a in rng.integers(-500, 500, 40)]
    got = cdf_distance(ts, spec)
    xs = np.array(sorted(float(t) for t in ts))
    grid = np.unique(xs)
    F, Fl = mixture_cdf(spec, grid), mixture_cdf(spec, grid, left=True)
    emp = np.array([np.mean(xs <= g) for g in grid])
    empl = np.array([np.mean(xs < g) for g in grid])
    assert got == pytest.approx(max(np.max(np.abs(F - emp)), np.max(np.abs(Fl - empl))))


def test_null_distances_deterministic():
    a = null_cdf_distances(group_spec("x4"), 300, seed=5, replicates=20, grid=801)
    assert np.array_equal(a, null_cdf_distances(group_spec("x4"), 300, seed=5, replicates=20, grid=801))
    # Kolmogorov scale: sqrt(n) * D is O(1)
    assert 0.3 < np.median(a) * np.sqrt(300) < 1.5


class TestScans:
    def test_x4_spike_bin(self, records):
        h = build_histogram([r.trace for r in records("X4")])
        assert h.counts[150] / h.size >= 0.45

    def test_x2_second_moment(self, records):
        est = empirical_moments([r.trace for r in records("X2")], 2)[1]
        assert abs(est.value - 1) <= 4 * est.se

    def test_spikes(self, records):
        assert abs(spike_mass([r.trace for r in records("X7")])[1] - 5 / 6) <= 0.03
        assert abs(spike_mass([r.trace for r in records("X5")])[1] - 1 / 2) <= 0.03
        assert spike_mass([r.trace for r in records("X2")])[1] <= 0.01

    def test_x1_split(self, records):
        sp = component_split(surface("X1"), records("X1"))
        assert abs(sp.fractions[1] - 0.5) <= 0.03
        plus, minus = sp.moments(6)[1][5], sp.moments(6)[-1][5]
        assert abs(plus.value - 16) <= 4 * plus.se
        assert abs(minus.value - 14) <= 4 * minus.se

    def test_split_converges(self, records):
        recs = records("X1")
        half = component_split(surface("X1"), [r for r in recs if r.p <= 5000]).fractions[1]
        full = component_split(surface("X1"), recs).fractions[1]
        assert abs(full - 0.5) <= abs(half - 0.5)

    def test_trivial_character(self, records):
        sp = component_split(surface("X2"), records("X2"))
        assert list(sp.parts) == [1]

    def test_x3_against_so5(self, records):
        rep = compare(surface("X3"), records("X3"), group_spec("so5"))
        assert rep.max_abs_z <= 4

    def test_x1_mixed_sixth_moment(self, records):
        rep = compare(surface("X1"), records("X1"))
        assert rep.theoretical[5] == 15
        assert abs(rep.z_scores[5]) <= 4
        assert set(rep.parts) == {1, -1}

    def test_mismatch(self, records):
        with pytest.raises(ConfigurationError):
            compare(surface("X3"), records("X3"), group_spec("so6"))
        with pytest.raises(ConfigurationError):
            # same dimension, but X5 has traces below -2
            compare(surface("X5"), records("X5"), group_spec("so3xso3"))
