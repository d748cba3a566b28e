import numpy as np
import pytest
from hypothesis import given, strategies as st

from stormrisk import (
    AssetInventory,
    Ensemble,
    FailureDistribution,
    Grid,
    NhppParams,
    TimeAxis,
    WindField,
    cumulative_velocity,
    default_n_max,
    expected_failures_saturated,
    exponential_intensity,
    failure_rate,
    failure_rate_through,
    fd_a,
    fd_b,
    fr1,
    fr2,
    member_rates,
    nominal_rate,
    poisson_intensity,
    poisson_pmf,
    saturated_distribution,
    save_failure_distribution,
    save_failure_rate_field,
)

P = NhppParams()  # Vcrit=20.6, alpha=4175.6, lambda_norm=3.5e-5

# Frozen oracles, hand-evaluated from the piecewise quadratic intensity
# lambda(v) = lambda_norm * (1 + alpha * ((v/Vcrit)^2 - 1)) for v >= Vcrit.
LAM_41_2 = 0.438473          # ratio exactly 2 -> 3.5e-5 * (1 + 3 * 4175.6)
LAM_25_75 = 0.082242125      # ratio 1.25
NOMINAL_121H = 0.004235      # 121 subcritical hours

# Two-member, one-cell, two-step example (dt = 1 h):
#   member 0 speeds [20.6, 10.0]  -> rate 7e-5
#   member 1 speeds [30.9,  0.0]  -> rate 0.18275249999999993
EX_FR1 = 0.08227712499999999   # rate of the mean speeds [25.75, 5.0]
EX_R0 = 7e-05
EX_R1 = 0.18275249999999993
EX_FR2 = 0.09141124999999996
EX_PRA0 = 0.9126423095628492   # exp(-fr2)
EX_PRB0 = 0.9164521469069051   # (exp(-r0) + exp(-r1)) / 2

# Saturated distribution at total rate 1 with Ng = 2.
SAT_P0 = 0.36787944117144233   # e^-1
SAT_P2 = 0.26424111765711533   # 1 - 2 e^-1
SAT_MEAN = 0.896361676485673


def _ensemble() -> Ensemble:
    grid = Grid(nx=1, ny=1, cell_size=1.0)
    times = TimeAxis(n_steps=2, dt=1.0)
    m0 = WindField(grid=grid, times=times, velocities=np.array([[20.6, 10.0]]))
    m1 = WindField(grid=grid, times=times, velocities=np.array([[30.9, 0.0]]))
    return Ensemble(members=(m0, m1))


class TestIntensity:
    def test_subcritical_is_exactly_nominal(self):
        for v in (0.0, 5.0, 20.0, 20.5999):
            assert poisson_intensity(P, v) == P.lambda_norm

    def test_continuous_at_vcrit(self):
        assert poisson_intensity(P, P.Vcrit) == pytest.approx(P.lambda_norm, rel=1e-14)

    def test_hand_evaluations(self):
        assert poisson_intensity(P, 41.2) == pytest.approx(LAM_41_2, rel=1e-13)
        assert poisson_intensity(P, 25.75) == pytest.approx(LAM_25_75, rel=1e-13)

    def test_monotone_nondecreasing(self):
        v = np.linspace(0, 80, 4001)
        lam = poisson_intensity(P, v)
        assert np.all(np.diff(lam) >= 0)

    def test_negative_velocity_rejected(self):
        with pytest.raises(ValueError):
            poisson_intensity(P, -0.1)

    def test_equivalent_algebraic_form(self):
        # lambda_norm*(1-alpha) + lambda_norm*alpha*(max(v,Vcrit)/Vcrit)^2
        # equals the piecewise form for all speeds (the piecewise form is the
        # implementation because this form cancels catastrophically below
        # Vcrit).
        v = np.linspace(P.Vcrit, 100, 500)
        alt = P.lambda_norm * (1 - P.alpha) + P.lambda_norm * P.alpha * (v / P.Vcrit) ** 2
        assert np.allclose(poisson_intensity(P, v), alt, rtol=1e-9)

    @given(st.floats(0.0, 200.0))
    def test_at_least_nominal(self, v):
        assert poisson_intensity(P, v) >= P.lambda_norm * (1 - 1e-15)

    @pytest.mark.parametrize("bad", [{"Vcrit": 0.0}, {"alpha": 0.5}, {"lambda_norm": 0.0}])
    def test_invalid_params(self, bad):
        with pytest.raises(ValueError):
            NhppParams(**bad)


class TestExponentialIntensity:
    def test_subcritical_nominal_and_continuity(self):
        assert exponential_intensity(P, 10.0) == P.lambda_norm
        assert exponential_intensity(P, P.Vcrit) == pytest.approx(P.lambda_norm, rel=1e-14)

    def test_grows_faster_than_quadratic_far_out(self):
        assert exponential_intensity(P, 120.0) > poisson_intensity(P, 120.0)


class TestFailureRate:
    def test_subcritical_series_gives_nominal_total(self):
        rate = failure_rate(P, np.zeros(121), dt=1.0)
        assert rate == nominal_rate(P, 121)
        assert rate == pytest.approx(NOMINAL_121H, rel=1e-13)

    def test_linear_in_dt(self):
        v = np.array([25.0, 30.0, 10.0])
        assert failure_rate(P, v, dt=2.0) == pytest.approx(2 * failure_rate(P, v, dt=1.0), rel=1e-14)

    def test_additive_over_time_splits(self):
        v = np.array([25.0, 30.0, 10.0, 41.2, 0.0])
        whole = failure_rate(P, v)
        parts = failure_rate(P, v[:2]) + failure_rate(P, v[2:])
        assert whole == pytest.approx(parts, rel=1e-14)

    def test_field_shape(self):
        v = np.full((7, 4), 10.0)
        rates = failure_rate(P, v)
        assert rates.shape == (7,)
        assert np.allclose(rates, 4 * P.lambda_norm)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            failure_rate(P, np.array([]))


class TestEnsembleRates:
    def test_fr1_example(self):
        assert fr1(P, _ensemble(), cell=0) == pytest.approx(EX_FR1, rel=1e-13)

    def test_fr2_example(self):
        assert fr2(P, _ensemble(), cell=0) == pytest.approx(EX_FR2, rel=1e-13)

    def test_member_rates_example(self):
        r = member_rates(P, _ensemble(), cell=0)
        assert r[0] == pytest.approx(EX_R0, rel=1e-13)
        assert r[1] == pytest.approx(EX_R1, rel=1e-13)

    def test_jensen_fr2_ge_fr1(self):
        e = _ensemble()
        assert fr2(P, e, 0) >= fr1(P, e, 0)

    def test_identical_members_give_equality(self):
        grid = Grid(nx=1, ny=1)
        times = TimeAxis(n_steps=2, dt=1.0)
        m = WindField(grid=grid, times=times, velocities=np.array([[30.0, 25.0]]))
        e = Ensemble(members=(m, m, m))
        assert fr2(P, e, 0) == pytest.approx(fr1(P, e, 0), rel=1e-14)

    def test_all_subcritical_gives_equality(self):
        grid = Grid(nx=1, ny=1)
        times = TimeAxis(n_steps=3, dt=1.0)
        m0 = WindField(grid=grid, times=times, velocities=np.array([[1.0, 5.0, 10.0]]))
        m1 = WindField(grid=grid, times=times, velocities=np.array([[15.0, 2.0, 0.0]]))
        e = Ensemble(members=(m0, m1))
        assert fr2(P, e, 0) == fr1(P, e, 0) == pytest.approx(3 * P.lambda_norm, rel=1e-14)

    def test_fr_arrays_when_cell_omitted(self):
        e = _ensemble()
        assert np.asarray(fr1(P, e)).shape == (1,)
        assert np.asarray(fr2(P, e)).shape == (1,)

    def test_failure_rate_through_monotone_and_final(self):
        e = _ensemble()
        r0 = failure_rate_through(P, e, 0, 0)
        r1 = failure_rate_through(P, e, 0, 1)
        assert r1 >= r0 > 0
        assert r1 == pytest.approx(fr2(P, e, 0), rel=1e-14)

    def test_cumulative_velocity(self):
        e = _ensemble()
        # means: t0 -> 25.75, t1 -> 5.0
        assert cumulative_velocity(e, 0, 0) == pytest.approx(25.75, rel=1e-14)
        assert cumulative_velocity(e, 0, 1) == pytest.approx(30.75, rel=1e-14)

    def test_t_prime_out_of_range(self):
        with pytest.raises(ValueError):
            failure_rate_through(P, _ensemble(), 0, 2)
        with pytest.raises(ValueError):
            cumulative_velocity(_ensemble(), 0, -1)


class TestFailureDistributions:
    def test_fd_a_zero_count_probability(self):
        d = fd_a(P, _ensemble(), 0)
        assert d.kind == "poisson"
        assert d.pmf[0] == pytest.approx(EX_PRA0, rel=1e-12)

    def test_fd_b_zero_count_probability(self):
        d = fd_b(P, _ensemble(), 0)
        assert d.kind == "mixture"
        assert d.pmf[0] == pytest.approx(EX_PRB0, rel=1e-12)

    def test_fd_b_has_more_zero_mass(self):
        # The mixture keeps the calm members' high Pr(0); the single Poisson
        # at the mean rate does not.
        e = _ensemble()
        assert fd_b(P, e, 0).pmf[0] > fd_a(P, e, 0).pmf[0]

    def test_masses_sum_to_one(self):
        e = _ensemble()
        for d in (fd_a(P, e, 0), fd_b(P, e, 0), fd_a(P, e, 0, n_max=3)):
            assert d.total_mass() == pytest.approx(1.0, abs=1e-12)

    def test_identical_members_make_fd_b_degenerate_to_fd_a(self):
        grid = Grid(nx=1, ny=1)
        times = TimeAxis(n_steps=2, dt=1.0)
        m = WindField(grid=grid, times=times, velocities=np.array([[30.0, 25.0]]))
        e = Ensemble(members=(m, m))
        a, b = fd_a(P, e, 0, n_max=10), fd_b(P, e, 0, n_max=10)
        assert np.allclose(a.pmf, b.pmf, rtol=1e-13, atol=1e-300)
        assert a.tail == pytest.approx(b.tail, rel=1e-12, abs=1e-15)

    def test_poisson_pmf_matches_direct_formula(self):
        import math

        for n in range(10):
            direct = math.exp(-2.5) * 2.5**n / math.factorial(n)
            assert poisson_pmf(n, 2.5)[()] == pytest.approx(direct, rel=1e-12)

    def test_poisson_pmf_zero_rate(self):
        pmf = poisson_pmf(np.arange(3), 0.0)
        assert np.array_equal(pmf, [1.0, 0.0, 0.0])

    def test_default_n_max_covers_tail(self):
        for rate in (0.001, 1.0, 17.3, 400.0):
            n_max = default_n_max(rate)
            from scipy.stats import poisson as sp

            assert sp.sf(n_max, rate) <= 1e-9 * 1.01

    def test_validation(self):
        with pytest.raises(ValueError):
            FailureDistribution(kind="poisson", pmf=np.array([0.5, 0.4]), tail=0.0)
        with pytest.raises(ValueError):
            FailureDistribution(kind="poisson", pmf=np.array([-0.1, 1.1]), tail=0.0)


class TestSaturated:
    def test_frozen_rate_one_ng_two(self):
        d = saturated_distribution(1.0, 2)
        assert d.pmf[0] == pytest.approx(SAT_P0, rel=1e-13)
        assert d.pmf[1] == pytest.approx(SAT_P0, rel=1e-13)
        assert d.pmf[2] == pytest.approx(SAT_P2, rel=1e-13)
        assert d.tail == 0.0
        assert d.mean() == pytest.approx(SAT_MEAN, rel=1e-13)
        assert expected_failures_saturated(1.0, 2) == pytest.approx(SAT_MEAN, rel=1e-13)

    def test_zero_assets(self):
        d = saturated_distribution(5.0, 0)
        assert np.array_equal(d.pmf, [1.0])
        assert expected_failures_saturated(5.0, 0) == 0.0

    def test_zero_rate(self):
        d = saturated_distribution(0.0, 3)
        assert d.pmf[0] == 1.0
        assert expected_failures_saturated(0.0, 3) == 0.0

    def test_mean_monotone_in_rate_bounded_by_ng(self):
        rates = np.linspace(0, 50, 200)
        means = [expected_failures_saturated(r, 5) for r in rates]
        assert np.all(np.diff(means) >= -1e-12)
        assert all(m <= 5.0 for m in means)

    def test_asymptote(self):
        assert expected_failures_saturated(500.0, 5) == pytest.approx(5.0, abs=1e-6)

    def test_matches_truncated_expectation_brute_force(self):
        # E[min(N, Ng)] with N ~ Poisson(rate).
        from scipy.stats import poisson as sp

        for rate in (0.3, 1.7, 4.0):
            for ng in (1, 3, 6):
                n = np.arange(0, 200)
                brute = float(np.sum(np.minimum(n, ng) * sp.pmf(n, rate)))
                assert expected_failures_saturated(rate, ng) == pytest.approx(brute, abs=1e-12)


class TestAssetInventory:
    def test_counts_rounded(self):
        inv = AssetInventory(line_km=np.array([1.0, 0.56, 0.0]))
        assert np.array_equal(inv.asset_counts(), [10, 6, 0])

    def test_custom_unit(self):
        inv = AssetInventory(line_km=np.array([3.0]), unit_length_km=0.5)
        assert inv.asset_counts()[0] == 6

    def test_invalid(self):
        with pytest.raises(ValueError):
            AssetInventory(line_km=np.array([-1.0]))
        with pytest.raises(ValueError):
            AssetInventory(line_km=np.array([1.0]), unit_length_km=0.0)


class TestExports:
    def test_failure_rate_round_trip_text(self, tmp_path):
        path = tmp_path / "rates.csv"
        save_failure_rate_field([0.1, 0.004235], path, header_comment="config_sha256=abc")
        text = path.read_text()
        assert text.startswith("# config_sha256=abc\n")
        assert "cell_id,failure_rate_per_km" in text
        assert "0.004235" in text

    def test_distribution_export(self, tmp_path):
        d = saturated_distribution(1.0, 2)
        path = tmp_path / "dist.csv"
        save_failure_distribution(d, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "n,probability"
        assert lines[-1].startswith("tail,")
