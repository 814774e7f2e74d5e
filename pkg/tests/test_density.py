from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad

from k3satotate.density import (
    DENSITY_TOL,
    TwistedCoset,
    default_grid,
    levelset_cdf,
    levelset_density,
    mixture_cdf,
    mixture_density,
    spline_from_moments,
    spline_reliable,
    trace_support,
)
from k3satotate.errors import ConditioningError, DomainError
from k3satotate.haar import monte_carlo_traces
from k3satotate.liegroups import SO, U, group_spec, mixture_moments, moment_sequence

AGREEMENT = 2e-2
MARGIN = 0.1

TARGETS = {
    "so2": (SO(2),),
    "so3": (SO(3),),
    "so5": (SO(5),),
    "so6": (SO(6),),
    "u3": (U(3),),
    "so3xso3": (SO(3), SO(3)),
    "u1cube": (U(1), U(1), U(1)),
    "o6minus": TwistedCoset(SO(6)),
}


class TestSupport:
    def test_examples(self):
        assert trace_support(group_spec("so5")) == (-3, 5)
        assert trace_support(group_spec("u3")) == (-6, 6)
        assert trace_support(group_spec("o6minus")) == (-4, 4)
        for label in ["so6", "u1cube", "x5", "x6", "x7"]:
            assert trace_support(group_spec(label)) == (-6, 6)
        # two traces in [-1, 3]; the mirrored component of X5 adds [-6, 2]
        assert trace_support(group_spec("so3xso3")) == (-2, 6)

    def test_grid(self):
        g = default_grid(group_spec("so3"))
        assert len(g) == 601 and g[0] == -1 and g[-1] == 3


class TestLevelSet:
    def test_closed_forms(self):
        v = levelset_density(SO(2), [0.0, 1.0])
        assert v[0] == pytest.approx(1 / (2 * np.pi), abs=1e-12)
        assert v[1] == pytest.approx(1 / (np.pi * np.sqrt(3)), abs=1e-12)
        u = levelset_density(U(1), [0.0, 1.0])
        assert np.allclose(u, v)

    def test_outside_support_is_zero(self):
        assert np.all(levelset_density(SO(5), [-3.5, 5.5, -3, 5]) == 0)

    def test_so3_at_zero_against_monte_carlo(self):
        n, h = 10**7, 0.02
        x = monte_carlo_traces(group_spec("so3"), n, 2024)
        hits = np.count_nonzero(np.abs(x) < h / 2)
        est = hits / (n * h)
        sigma = np.sqrt(hits) / (n * h)
        # the histogram estimates the bin average; the density is smooth near 0
        assert abs(levelset_density(SO(3), [0.0])[0] - est) <= 3 * sigma

    @pytest.mark.parametrize("label", sorted(TARGETS))
    def test_moment_round_trip(self, label):
        target = TARGETS[label]
        lo, hi = trace_support(group_spec(label))
        exact = mixture_moments(group_spec(label), 6)
        # E[t^n] = hi^n - int n x^(n-1) F(x) dx avoids the density's edge blow-ups
        # x = mid - half cos(tau) smooths the sqrt behaviour of F at the edges
        tau = np.linspace(0, np.pi, 2001)
        mid, half = (lo + hi) / 2, (hi - lo) / 2
        xs = mid - half * np.cos(tau)
        F = levelset_cdf(target, xs)
        for n in range(1, 7):
            integrand = n * xs ** (n - 1) * F * half * np.sin(tau)
            val = hi**n - _simpson(integrand, tau)
            assert val == pytest.approx(float(exact[n]), abs=1e-4)

    @pytest.mark.parametrize("label", ["so3", "so5", "u3", "so3xso3"])
    def test_density_integrates_to_moments(self, label):
        target = TARGETS[label]
        lo, hi = trace_support(group_spec(label))
        exact = mixture_moments(group_spec(label), 4)
        breaks = [b for b in range(int(lo) + 1, int(hi)) if lo < b < hi]
        for n in range(5):
            val = quad(lambda x: x**n * levelset_density(target, [x])[0], lo, hi, points=breaks, limit=200)[0]
            assert val == pytest.approx(float(exact[n]), abs=1e-4)

    @pytest.mark.parametrize("label", ["so6", "o6minus", "u3", "u1cube"])
    def test_symmetry(self, label):
        xs = np.linspace(0.05, 5.9, 23)
        xs = xs[xs < trace_support(group_spec(label))[1]]
        a = levelset_density(TARGETS[label], xs)
        b = levelset_density(TARGETS[label], -xs)
        assert np.allclose(a, b, atol=10 * DENSITY_TOL)

    def test_cdf_against_monte_carlo(self):
        spec = group_spec("so5")
        x = monte_carlo_traces(spec, 200_000, 9)
        pts = np.array([-2.0, -0.5, 1.0, 2.5, 4.0])
        emp = np.array([np.mean(x <= p) for p in pts])
        se = np.sqrt(emp * (1 - emp) / x.size)
        assert np.all(np.abs(levelset_cdf(SO(5), pts) - emp) <= 4 * se)


def _simpson(y, x):
    from scipy.integrate import simpson

    return simpson(y, x=x)


class TestMixtures:
    @pytest.mark.parametrize("label", ["so3", "so5", "so6", "u3", "o6", "so3xso3", "u1cube", "x1", "x4", "x5", "x6", "x7"])
    def test_normalization(self, label):
        curve = mixture_density(group_spec(label))
        assert abs(curve.total_mass() - 1) <= 1e-6
        assert np.all(curve.values >= 0)

    def test_x4_atom(self):
        curve = mixture_density(group_spec("x4"), np.linspace(-6, 6, 61))
        assert curve.atoms == [(0.0, 0.5)]
        u3 = levelset_density(U(3), curve.grid)
        assert np.allclose(curve.values, 0.5 * u3)

    def test_x7_atom(self):
        curve = mixture_density(group_spec("x7"), np.linspace(-6, 6, 61))
        assert curve.atoms == [(0.0, pytest.approx(5 / 6))]
        cube = levelset_density((U(1), U(1), U(1)), curve.grid)
        assert np.allclose(curve.values, cube / 6)

    def test_connected_has_no_atoms(self):
        curve = mixture_density(group_spec("so6"), np.linspace(-6, 6, 31))
        assert curve.atoms == []
        assert np.allclose(curve.values, levelset_density(SO(6), curve.grid))

    def test_mirrored_component(self):
        xs = np.linspace(-5.5, 5.5, 23)
        curve = mixture_density(group_spec("x5"), xs)
        base = levelset_density((SO(3), SO(3)), xs)
        mirror = levelset_density((SO(3), SO(3)), -xs)
        assert np.allclose(curve.values, (base + mirror) / 4)

    def test_mixture_cdf_atom_jump(self):
        spec = group_spec("x7")
        assert mixture_cdf(spec, [0.0])[0] - mixture_cdf(spec, [0.0], left=True)[0] == pytest.approx(5 / 6)
        assert mixture_cdf(spec, [6.0])[0] == pytest.approx(1)

    def test_csv(self):
        text = mixture_density(group_spec("x4"), np.linspace(-6, 6, 5)).to_csv()
        lines = text.splitlines()
        assert lines[0] == "x,density"
        assert lines[-1] == "atom,0,0.5"


class TestSpline:
    def test_so3_second_moment(self):
        m = moment_sequence([SO(3)], 20)
        s = spline_from_moments(m, (-1, 3))
        assert s.moment_count == 20
        assert abs(s.moment(2) - 1) <= 1e-9
        assert abs(s.moment(0) - 1) <= 1e-9

    def test_smoothness(self):
        s = spline_from_moments(moment_sequence([SO(5)], 30), (-3, 5))
        from scipy.interpolate import PPoly

        pp = PPoly(s.coefficients[:, ::-1].T, s.breakpoints)
        for d in range(3):
            f = pp.derivative(d) if d else pp
            for x in s.breakpoints[1:-1]:
                assert f(x - 1e-12) == pytest.approx(f(x + 1e-12), abs=1e-6)

    def test_point_mass_rejected(self):
        with pytest.raises(DomainError, match="atom"):
            spline_from_moments([Fraction(1)] * 21, (-1, 3))

    def test_moment_count_range(self):
        with pytest.raises(DomainError):
            spline_from_moments(moment_sequence([SO(3)], 10), (-1, 3))

    def test_too_many_pieces(self):
        with pytest.raises(ConditioningError, match="reduce pieces"):
            spline_from_moments(moment_sequence([SO(3)], 20), (-1, 3), pieces=30)

    def test_u1cube_flagged(self):
        assert not spline_reliable(group_spec("u1cube"))
        assert not spline_reliable(group_spec("x7"))
        assert spline_reliable(group_spec("so6"))
        curve = mixture_density(group_spec("u1cube"), np.linspace(-5, 5, 11), method="spline")
        assert not curve.reliable

    def test_undershoot_reported(self):
        curve = mixture_density(group_spec("so5"), method="spline")
        assert curve.method == "spline"
        assert 0 <= curve.undershoot <= 1e-3


def spline_gap(label):
    spec = group_spec(label)
    lo, hi = trace_support(spec)
    xs = np.linspace(lo + MARGIN, hi - MARGIN, 401)
    a = mixture_density(spec, xs, method="spline").values
    b = mixture_density(spec, xs, method="levelset").values
    return float(np.max(np.abs(a - b)))


@pytest.mark.parametrize("label", ["so5", "so6", "u3", "so3xso3", "o6minus"])
def test_spline_agrees_with_levelset(label):
    assert spline_gap(label) <= AGREEMENT


@pytest.mark.xfail(strict=True, reason="1/sqrt edge at -1: cubic splines on <= 35 moments miss by ~0.3 (see acceptance report)")
def test_spline_agrees_with_levelset_so3():
    assert spline_gap("so3") <= AGREEMENT
