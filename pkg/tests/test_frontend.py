import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import signal as sps

from specsense.errors import ConfigError, InsufficientSamplesError
from specsense.frontend import (FrontendConfig, condition, decimate, downconvert,
                                equivalent_noise_bandwidth, fft_size_for, lowpass_taps,
                                periodogram_frames, sense_spectrogram, spectrogram)
from specsense.signals import IqBuffer, NoiseModel, generate_noise

FS = 2.152e6
BF = 20e3


def tone(freq, n, rate, amplitude=1.0):
    t = np.arange(n) / rate
    return IqBuffer(amplitude * np.exp(2j * np.pi * freq * t), rate)


class TestSizing:
    @pytest.mark.parametrize("dwell, size, half_rows", [
        (1e-4, 128, 1), (5e-4, 1024, 9), (1e-3, 2048, 19), (2e-3, 4096, 38), (5e-3, 8192, 76)])
    def test_fft_size_and_bins(self, dwell, size, half_rows):
        cfg = FrontendConfig(dwell_time=dwell)
        assert cfg.fft_size == size
        assert cfg.half_rows == half_rows
        assert cfg.half_rows == int(size * BF / FS)

    def test_power_of_two_exact_fit(self):
        assert fft_size_for(1024.0, 1.0) == 1024
        assert fft_size_for(1023.9, 1.0) == 512

    def test_cutoff_must_be_below_nyquist(self):
        with pytest.raises(ConfigError):
            FrontendConfig(decimated_rate=30e3, lpf_cutoff=20e3)


class TestDownconvert:
    def test_zero_shift_is_identity(self):
        x = generate_noise(NoiseModel(), 100, FS, seed=1)
        assert downconvert(x, 0.0) is x

    def test_tone_lands_on_dc(self):
        n = 4096
        f = 37 * FS / n
        y = downconvert(tone(f, n, FS), f)
        spectrum = np.abs(np.fft.fft(y.samples))
        assert np.argmax(spectrum) == 0
        np.testing.assert_allclose(y.samples, 1.0, atol=1e-12)

    def test_successive_shifts_compose(self):
        x = generate_noise(NoiseModel(), 4096, FS, seed=2)
        f1, f2 = 123_456.7, -301_234.5
        twice = downconvert(downconvert(x, f1), f2)
        once = downconvert(x, f1 + f2)
        np.testing.assert_allclose(twice.samples, once.samples, rtol=1e-12)
        assert twice.center_hz == pytest.approx(f1 + f2)

    def test_power_preserved(self):
        x = generate_noise(NoiseModel(), 10_000, FS, seed=3)
        assert downconvert(x, 5e5).power() == pytest.approx(x.power(), rel=1e-12)

    def test_rejects_beyond_nyquist(self):
        with pytest.raises(ValueError):
            downconvert(tone(0, 10, FS), FS / 2)


class TestLowpass:
    @pytest.mark.parametrize("rate", [FS, 3 * FS, 10 * FS])
    def test_response_specification(self, rate):
        taps = lowpass_taps(rate, BF)
        assert taps.size % 2 == 1
        np.testing.assert_allclose(taps, taps[::-1], atol=0)  # linear phase
        freqs = np.concatenate([np.linspace(0, 0.2 * BF, 200), np.linspace(1.25 * BF, rate / 2, 4000)])
        _, h = sps.freqz(taps, worN=freqs, fs=rate)
        db = 20 * np.log10(np.abs(h) + 1e-300)
        assert np.max(np.abs(db[:200])) <= 0.1
        assert np.max(db[200:]) <= -60.0

    def test_noise_bandwidth_close_to_cutoff(self):
        taps = lowpass_taps(FS, BF)
        assert equivalent_noise_bandwidth(taps, FS) == pytest.approx(BF, rel=0.05)

    def test_taps_are_cached_and_read_only(self):
        taps = lowpass_taps(FS, BF)
        assert lowpass_taps(FS, BF) is taps
        with pytest.raises(ValueError):
            taps[0] = 1.0


class TestDecimate:
    def test_dc_gain(self):
        x = IqBuffer(np.ones(30_000, dtype=complex), 3 * FS)
        y = decimate(x, FS, BF)
        settle = FrontendConfig().settle_samples(3 * FS)
        interior = y.samples[settle:-settle]
        np.testing.assert_allclose(interior, 1.0, atol=0.01)
        assert y.sample_rate == pytest.approx(FS)

    def test_stopband_tone(self):
        n = 60_000
        y = decimate(tone(3 * BF, n, 3 * FS), FS, BF)
        settle = FrontendConfig().settle_samples(3 * FS)
        power = np.mean(np.abs(y.samples[settle:-settle]) ** 2)
        assert 10 * np.log10(power) <= -60.0

    def test_white_noise_power(self):
        rate = 3 * FS  # the input band is the whole sampled band
        x = generate_noise(NoiseModel(1.0, 0.0, bandwidth=rate), 1_200_000, rate, seed=4)
        y = decimate(x, FS, BF)
        settle = FrontendConfig().settle_samples(rate)
        power = np.mean(np.abs(y.samples[settle:-settle]) ** 2)
        assert power == pytest.approx(1.0 * BF / rate, rel=0.05)

    def test_group_delay_is_removed(self):
        rate, factor = 3 * FS, 3
        impulse = np.zeros(40_000, dtype=complex)
        impulse[3000 * factor] = 1.0
        y = decimate(IqBuffer(impulse, rate), FS, BF)
        assert np.argmax(np.abs(y.samples)) == 3000

    def test_rejects_non_integer_factor(self):
        with pytest.raises(ConfigError):
            decimate(tone(0, 100, 2.5 * FS), FS, BF)

    def test_unfiltered_unit_factor_is_identity(self):
        x = generate_noise(NoiseModel(), 100, FS, seed=1)
        assert decimate(x, FS, None) is x
        with pytest.raises(ConfigError):
            decimate(IqBuffer(np.ones(100), 2 * FS), FS, None)


class TestSpectrogram:
    def test_rows_for_one_millisecond(self):
        cfg = FrontendConfig(dwell_time=1e-3, num_dwells=3)
        z = generate_noise(NoiseModel(), 2048 * 3, FS, seed=1)
        spec = spectrogram(z, cfg)
        assert spec.half_rows == 19
        assert spec.matrix.shape == (39, 3)
        assert spec.bin_spacing == pytest.approx(FS / 2048)

    def test_dc_input(self):
        cfg = FrontendConfig(dwell_time=1e-3, num_dwells=4)
        spec = spectrogram(IqBuffer(np.ones(2048 * 4, dtype=complex), FS), cfg)
        np.testing.assert_allclose(spec.row(0), 2048.0, rtol=1e-12)
        off = np.delete(spec.matrix, spec.half_rows, axis=0)
        assert np.max(off) < 1e-18 * 2048

    def test_row_order_is_negative_to_positive(self):
        cfg = FrontendConfig(dwell_time=1e-3, num_dwells=2)
        n = cfg.fft_size
        for k in (-5, 3):
            spec = spectrogram(tone(k * FS / n, 2 * n, FS), cfg)
            assert np.argmax(spec.matrix[:, 0]) == k + spec.half_rows

    def test_parseval(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            n, nd = 1 << int(rng.integers(3, 13)), int(rng.integers(1, 10))
            z = rng.standard_normal(n * nd) + 1j * rng.standard_normal(n * nd)
            full = periodogram_frames(z, n, nd)
            direct = np.sum(np.abs(z.reshape(nd, n)) ** 2, axis=1)
            np.testing.assert_allclose(full.sum(axis=1), direct, rtol=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3), st.integers(0, 2 ** 32 - 1))
    def test_linearity(self, a, seed):
        cfg = FrontendConfig(dwell_time=1e-4, num_dwells=4)
        z = generate_noise(NoiseModel(), 128 * 4, FS, seed=seed)
        base = spectrogram(z, cfg).matrix
        scaled = spectrogram(z.with_samples(a * z.samples), cfg).matrix
        np.testing.assert_allclose(scaled, abs(a) ** 2 * base, rtol=1e-9, atol=1e-12 * abs(a) ** 2)

    def test_insufficient_samples(self):
        cfg = FrontendConfig(dwell_time=1e-3, num_dwells=30)
        with pytest.raises(InsufficientSamplesError):
            spectrogram(generate_noise(NoiseModel(), 2048 * 30 - 1, FS, seed=1), cfg)

    def test_rate_must_match(self):
        with pytest.raises(ConfigError):
            spectrogram(generate_noise(NoiseModel(), 10_000, 2 * FS, seed=1),
                        FrontendConfig(dwell_time=1e-3, num_dwells=2))


class TestPipeline:
    @pytest.mark.parametrize("rate", [FS, 10 * FS])
    def test_input_length_fills_all_dwells(self, rate):
        cfg = FrontendConfig(pilot_freq=0.0, dwell_time=1e-3, num_dwells=5)
        n = cfg.input_length(rate)
        x = generate_noise(NoiseModel(), n, rate, seed=1)
        spec = sense_spectrogram(x, cfg)
        assert spec.matrix.shape == (39, 5)
        with pytest.raises(InsufficientSamplesError):
            sense_spectrogram(x.with_samples(x.samples[:-cfg.decimation_factor(rate) * 300]), cfg)

    def test_pilot_reaches_dc_bin(self):
        rate = 10 * FS
        cfg = FrontendConfig(pilot_freq=-3e6, dwell_time=1e-3, num_dwells=3)
        n = cfg.input_length(rate)
        spec = sense_spectrogram(tone(-3e6, n, rate), cfg)
        assert np.all(np.argmax(spec.matrix, axis=0) == spec.half_rows)
        np.testing.assert_allclose(spec.row(0), 2048.0, rtol=1e-3)

    def test_condition_output_is_settled(self):
        cfg = FrontendConfig(dwell_time=1e-3, num_dwells=2)
        x = IqBuffer(np.ones(cfg.input_length(FS), dtype=complex), FS)
        z = condition(x, cfg)
        np.testing.assert_allclose(z.samples[: 2048 * 2], 1.0, atol=1e-3)
