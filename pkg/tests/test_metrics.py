import math

import numpy as np
import pytest

from oracles import harvested_power_se, qpsk_success_rate
from swiptlab import (
    EhParams,
    MiConfig,
    derive_seed,
    harvested_power_analytic,
    harvested_power_mc,
    make_apsk,
    make_square_qam,
    mutual_information_mc,
    normalize,
    philox_stream,
    sample_channels,
    snr_to_noise_variance,
    ssr_mc,
    stats,
)
from swiptlab.constellation import Constellation
from swiptlab.errors import EmptyBatchError, InvalidParameterError
from swiptlab.metrics import PHASE_SPAN_SHAPE, effective_noise_variance


def test_phase_span_shape_constant():
    assert PHASE_SPAN_SHAPE == pytest.approx(2.0 / 3.0)


class TestNoiseConventions:
    def test_paper_scales_with_split(self):
        cfg = MiConfig(0.1, "paper", 100)
        assert effective_noise_variance(cfg, 0.25) == pytest.approx(0.15)

    def test_consistent_ignores_split(self):
        cfg = MiConfig(0.1, "consistent", 100)
        assert effective_noise_variance(cfg, 0.25) == pytest.approx(0.1)

    def test_conventions_agree_at_half(self):
        paper = effective_noise_variance(MiConfig(0.1, "paper", 100), 0.5)
        cons = effective_noise_variance(MiConfig(0.1, "consistent", 100), 0.5)
        assert paper == pytest.approx(cons)

    def test_unknown_convention_rejected(self):
        with pytest.raises(InvalidParameterError):
            MiConfig(0.1, "other", 100)


class TestHarvestedPower:
    def test_unit_modulus_value(self):
        c = make_apsk(0.0, 8)  # all points at angle zero, |x| = 1
        p = harvested_power_analytic(c, 0.5)
        assert p == pytest.approx(1.5, abs=1e-12)

    def test_qam16_frozen_value(self):
        p = harvested_power_analytic(make_square_qam(16), 0.5)
        assert p == pytest.approx(0.5065822768149325, abs=1e-12)

    def test_full_split_harvests_nothing(self):
        assert harvested_power_analytic(make_square_qam(16), 1.0) == 0.0

    def test_factorized_formula(self):
        rng = philox_stream(99)
        c = normalize(Constellation(rng.standard_normal(16) + 1j * rng.standard_normal(16)))
        s = stats(c)
        rho, eh = 0.3, EhParams(c1=0.7, c2=1.1)
        want = 0.7 * (1 - rho) * s.avg_energy * 1.0 + 1.1 * (1 - rho) ** 2 * (
            s.fourth_moment * 2.0 * math.exp(-(2.0 / 3.0) * s.phase_span**2)
        )
        assert harvested_power_analytic(c, rho, eh) == pytest.approx(want, rel=1e-12)

    def test_mc_matches_analytic_within_3_se(self):
        c = make_square_qam(16)
        channels = sample_channels(100_000, derive_seed(5, "eh"))
        got = harvested_power_mc(c, 0.5, EhParams(), channels)
        want = harvested_power_analytic(c, 0.5)
        s = stats(c)
        g2 = np.abs(channels.gains) ** 2
        a = 1.0 * 0.5 * s.avg_energy
        b = 2.0 * 0.25 * s.fourth_moment * math.exp(-(2.0 / 3.0) * s.phase_span**2)
        assert abs(got - want) <= 3.0 * harvested_power_se(g2, a, b)

    def test_eh_params_validated(self):
        with pytest.raises(InvalidParameterError):
            EhParams(c1=-1.0)


def test_snr_to_noise_variance():
    assert snr_to_noise_variance(10.0, 0.5) == pytest.approx(0.05)
    assert snr_to_noise_variance(0.0, 1.0) == pytest.approx(1.0)
    with pytest.raises(InvalidParameterError):
        snr_to_noise_variance(10.0, 0.0)


class TestMutualInformation:
    def test_clamped_to_entropy_range(self):
        c = make_square_qam(16)
        channels = sample_channels(5000, derive_seed(0, "mi-hi"))
        hi = mutual_information_mc(c, 1.0, channels, MiConfig(1e-8, "consistent", 5000), 1)
        lo = mutual_information_mc(c, 1.0, channels, MiConfig(1e6, "consistent", 5000), 1)
        assert 0.0 <= lo < 0.01
        assert 3.9 < hi <= 4.0

    def test_monotone_in_noise_under_crn(self):
        c = make_square_qam(4)
        channels = sample_channels(20_000, derive_seed(0, "mi-mono"))
        last = math.inf
        for nu in (0.05, 0.2, 0.8, 3.2):
            mi = mutual_information_mc(c, 1.0, channels, MiConfig(nu, "consistent", 20_000), 7)
            assert mi < last
            last = mi

    def test_scale_bounds(self):
        c = make_square_qam(4)
        channels = sample_channels(1000, 1)
        with pytest.raises(InvalidParameterError):
            mutual_information_mc(c, 1.5, channels, MiConfig(0.1, "consistent", 1000), 0)

    def test_short_batch_rejected(self):
        c = make_square_qam(4)
        channels = sample_channels(100, 1)
        with pytest.raises(EmptyBatchError):
            mutual_information_mc(c, 1.0, channels, MiConfig(0.1, "consistent", 1000), 0)

    def test_paper_convention_blows_up_at_full_split(self):
        c = make_square_qam(4)
        channels = sample_channels(1000, 1)
        with pytest.raises(InvalidParameterError):
            mutual_information_mc(c, 1.0, channels, MiConfig(0.1, "paper", 1000), 0)

    def test_deterministic_given_seed(self):
        c = make_apsk(1.2, 8)
        channels = sample_channels(5000, 3)
        cfg = MiConfig(0.3, "consistent", 5000)
        assert mutual_information_mc(c, 0.7, channels, cfg, 5) == mutual_information_mc(
            c, 0.7, channels, cfg, 5
        )


class TestSsr:
    def test_qpsk_matches_closed_form(self):
        qpsk = make_square_qam(4)
        channels = sample_channels(50_000, derive_seed(2, "ssr"), model="fixed-unit")
        got = ssr_mc(qpsk, 1.0, 0.1, channels, 50_000, 77)
        assert got == pytest.approx(qpsk_success_rate(10.0), abs=2e-3)

    def test_chance_level_at_zero_split(self):
        c = make_square_qam(16)
        channels = sample_channels(50_000, derive_seed(2, "ssr0"))
        got = ssr_mc(c, 0.0, 0.1, channels, 50_000, 3)
        assert got == pytest.approx(1.0 / 16.0, abs=5e-3)

    def test_near_perfect_at_high_snr(self):
        c = make_square_qam(4)
        channels = sample_channels(10_000, 4, model="fixed-unit")
        assert ssr_mc(c, 1.0, 1e-4, channels, 10_000, 9) == 1.0
