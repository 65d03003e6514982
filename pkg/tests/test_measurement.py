"""Spectral estimates, bandwidth, SNR arithmetic, and export formats."""

import csv
import math

import numpy as np
import pytest

from sigforge.frame import mean_power
from sigforge.measurement import (
    PsdEstimate,
    envelope_constancy,
    esn0_from_ebn0,
    measure_esn0,
    occupied_bandwidth,
    psd_to_csv,
    spectrogram,
    spectrogram_to_pgm,
    welch_psd,
)
from sigforge.rng import derive_stream


def tone(freq, n=4096):
    return np.exp(2j * np.pi * freq * np.arange(n))


def test_psd_parseval_scaling():
    """Sum of the linear density over bins (x 1/nfft bin width) must equal
    the mean power, checked against a direct time-domain computation."""
    frame = derive_stream(30, 0).cnormal(4096) * 1.7
    psd = welch_psd(frame)
    total = psd.density_linear().sum() / psd.nfft
    assert total == pytest.approx(mean_power(frame), rel=0.05)


def test_psd_white_noise_is_flat():
    frame = derive_stream(30, 1).cnormal(65536)
    psd = welch_psd(frame)
    assert psd.density_db.max() - psd.density_db.min() < 4.0
    assert np.abs(np.median(psd.density_db)) < 1.0


def test_psd_tone_peaks_at_right_bin():
    psd = welch_psd(tone(0.125))
    peak = psd.freqs[int(np.argmax(psd.density_db))]
    assert peak == pytest.approx(0.125, abs=1 / 256)
    # tone sticks out well above the leakage floor
    assert psd.density_db.max() - np.median(psd.density_db) > 20.0


def test_psd_freq_axis():
    psd = welch_psd(tone(0.1, 1024), nfft=128)
    assert psd.freqs[0] == -0.5
    assert psd.freqs[64] == 0.0
    assert len(psd.freqs) == 128
    assert psd.nfft == 128


def test_psd_validation():
    with pytest.raises(ValueError):
        welch_psd(tone(0.1, 100), nfft=256)
    with pytest.raises(ValueError):
        welch_psd(tone(0.1, 1024), overlap=1.0)


def test_psd_floor_keeps_log_finite():
    psd = welch_psd(np.zeros(1024, dtype=np.complex128))
    assert np.all(np.isfinite(psd.density_db))
    assert np.all(psd.density_db <= -295.0)


def test_spectrogram_shape_and_tone_row():
    frame = tone(0.25, 4096)
    mat = spectrogram(frame, nfft=256, hop=128)
    assert mat.shape == (256, (4096 - 256) // 128 + 1)
    freqs = (np.arange(256) - 128) / 256
    hot = freqs[np.argmax(mat, axis=0)]
    np.testing.assert_allclose(hot, 0.25, atol=1 / 256)


def test_spectrogram_tracks_a_hop():
    frame = np.concatenate([tone(-0.2, 2048), tone(0.3, 2048)])
    mat = spectrogram(frame, nfft=256, hop=128)
    freqs = (np.arange(256) - 128) / 256
    hot = freqs[np.argmax(mat, axis=0)]
    assert hot[0] == pytest.approx(-0.2, abs=1 / 128)
    assert hot[-1] == pytest.approx(0.3, abs=1 / 128)


def test_occupied_bandwidth_full_band_white():
    frame = derive_stream(31, 0).cnormal(65536)
    psd = welch_psd(frame)
    assert occupied_bandwidth(psd, 0.99) > 0.95


def test_occupied_bandwidth_tone_is_narrow():
    psd = welch_psd(tone(0.1))
    assert occupied_bandwidth(psd, 0.95) < 0.05


def test_occupied_bandwidth_monotone_in_fraction():
    frame = derive_stream(31, 1).cnormal(16384)
    psd = welch_psd(frame)
    widths = [occupied_bandwidth(psd, f) for f in (0.5, 0.8, 0.9, 0.99)]
    assert widths == sorted(widths)


def test_occupied_bandwidth_half_band_signal():
    """An ideal half-band occupancy shows up as ~0.5 cycles/sample."""
    rng = derive_stream(31, 2)
    spectrum = np.zeros(8192, dtype=np.complex128)
    occupied = np.abs(np.fft.fftfreq(8192)) < 0.25
    spectrum[occupied] = rng.cnormal(int(occupied.sum()))
    frame = np.fft.ifft(spectrum)
    ob = occupied_bandwidth(welch_psd(frame), 0.99)
    assert ob == pytest.approx(0.5, abs=0.04)


def test_occupied_bandwidth_validation():
    psd = welch_psd(tone(0.1, 1024))
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            occupied_bandwidth(psd, bad)


def test_measure_esn0_exact_arithmetic():
    clean = tone(0.1, 1000)  # unit power
    noise = np.full(1000, 0.1 + 0.0j)  # power 0.01
    # 10*log10(1 * 2 / 0.01) = 23.0103
    got = measure_esn0(clean, noise, 2.0)
    assert got == pytest.approx(10 * math.log10(200), abs=1e-12)
    assert measure_esn0(clean, np.zeros(1000), 2.0) == math.inf


def test_measure_esn0_round_numbers():
    clean = tone(0.1, 1000)
    noise = np.full(1000, math.sqrt(0.2) + 0j)  # power 0.2 = sps/10
    assert measure_esn0(clean, noise, 2.0) == pytest.approx(10.0, abs=1e-12)


def test_envelope_constancy():
    assert envelope_constancy(tone(0.3, 500)) < 1e-12
    wobble = tone(0.3, 500) * (1 + 0.1 * np.cos(np.arange(500)))
    assert envelope_constancy(wobble) > 0.05
    with pytest.raises(ValueError):
        envelope_constancy(np.zeros(10, dtype=np.complex128))


def test_esn0_from_ebn0():
    assert esn0_from_ebn0(10.0, 2) == pytest.approx(10.0)
    assert esn0_from_ebn0(10.0, 4) == pytest.approx(10.0 + 10 * math.log10(2))
    assert esn0_from_ebn0(0.0, 1024) == pytest.approx(10 * math.log10(10))
    with pytest.raises(ValueError):
        esn0_from_ebn0(10.0, 1)


def test_psd_csv_round_trip(tmp_path):
    psd = welch_psd(tone(0.125))
    path = tmp_path / "psd.csv"
    psd_to_csv(psd, str(path))
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["frequency_cycles_per_sample", "density_db"]
    assert len(rows) == 1 + 256
    freqs = np.array([float(r[0]) for r in rows[1:]])
    dens = np.array([float(r[1]) for r in rows[1:]])
    np.testing.assert_allclose(freqs, psd.freqs, atol=1e-9)
    np.testing.assert_allclose(dens, psd.density_db, atol=1e-6)


def test_spectrogram_pgm_format(tmp_path):
    mat = spectrogram(tone(0.25, 2048))
    path = tmp_path / "spec.pgm"
    spectrogram_to_pgm(mat, str(path))
    blob = path.read_bytes()
    header = f"P5\n{mat.shape[1]} {mat.shape[0]}\n255\n".encode()
    assert blob.startswith(header)
    pixels = np.frombuffer(blob[len(header):], dtype=np.uint8)
    assert pixels.size == mat.size
    assert pixels.max() == 255 and pixels.min() == 0


def test_pgm_constant_matrix_does_not_divide_by_zero(tmp_path):
    path = tmp_path / "flat.pgm"
    spectrogram_to_pgm(np.zeros((4, 4)), str(path))
    pixels = np.frombuffer(path.read_bytes().split(b"\n", 3)[3], dtype=np.uint8)
    assert np.all(pixels == 0)


def test_density_linear_inverts_db():
    psd = PsdEstimate(
        freqs=np.array([0.0]), density_db=np.array([3.0]), nfft=1, overlap=0.5)
    assert psd.density_linear()[0] == pytest.approx(10 ** 0.3)
