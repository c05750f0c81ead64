import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from commsense.channel import SubcarrierGrid, frequency_correlation, frequency_response, realize_tdl
from commsense.estimation import (
    PRIOR_FLOOR,
    build_feature_vector,
    features_to_complex,
    ls_estimate,
    mmse_estimate,
    mmse_estimate_matrix,
)
from commsense.link import PilotGrid, ReceivedGrid, add_awgn, apply_channel, generate_pilot_grid

finite_complex = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)


def pilots(x):
    return PilotGrid(np.asarray(x, dtype=complex), 30e3, 4e9)


def test_ls_noiseless_recovers_channel(scaled_profiles):
    grid = SubcarrierGrid(128)
    H = frequency_response(realize_tdl(scaled_profiles["TDL-A"], 1), grid)
    p = generate_pilot_grid(grid, 2)
    est = ls_estimate(p, apply_channel(p, H))
    assert np.max(np.abs(est - H.values) / np.abs(H.values)) <= 1e-12


def test_ls_direct_division():
    est = ls_estimate(pilots([1, 1]), ReceivedGrid(np.array([2, 2j])))
    np.testing.assert_array_equal(est, [2, 2j])


def test_ls_matches_elementwise_division():
    rng = np.random.default_rng(0)
    x = generate_pilot_grid(SubcarrierGrid(50), 1).symbols
    y = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    ref = np.array([a / b for a, b in zip(y, x)])
    np.testing.assert_allclose(ls_estimate(pilots(x), ReceivedGrid(y)), ref, rtol=1e-15)


def test_ls_errors():
    with pytest.raises(ValueError, match="subcarriers"):
        ls_estimate(pilots([1, 1]), ReceivedGrid(np.ones(3)))
    with pytest.raises(ValueError, match="zero"):
        ls_estimate(pilots([1, 0]), ReceivedGrid(np.ones(2)))


def test_mmse_limits_and_halving():
    ls = np.array([1 + 1j, -2 + 0.5j, 3j])
    assert np.array_equal(mmse_estimate(ls, 0.0), ls)
    assert np.array_equal(mmse_estimate(ls, 0.0, 2.0), ls)
    assert np.max(np.abs(mmse_estimate(ls, 1e12, 1.0))) < 1e-11
    np.testing.assert_array_equal(mmse_estimate(ls, 1.0, 1.0), ls / 2)


def test_mmse_default_prior():
    ls = np.array([2.0, 2.0j, -2.0])
    # mean |ls|^2 = 4, so prior = 4 - 1 = 3 and the gain is 3/4
    np.testing.assert_allclose(mmse_estimate(ls, 1.0), 0.75 * ls, rtol=1e-15)
    tiny = np.array([1e-3, 1e-3])
    np.testing.assert_allclose(mmse_estimate(tiny, 1.0), PRIOR_FLOOR / (PRIOR_FLOOR + 1.0) * tiny)


def test_mmse_errors():
    with pytest.raises(ValueError):
        mmse_estimate(np.ones(2), -1.0)
    with pytest.raises(ValueError):
        mmse_estimate(np.ones(2), 1.0, 0.0)
    with pytest.raises(ValueError):
        mmse_estimate_matrix(np.ones(2), -1.0, np.eye(2))
    with pytest.raises(ValueError):
        mmse_estimate_matrix(np.ones(2), 1.0, np.eye(3))


@given(arrays(complex, st.integers(1, 40), elements=finite_complex),
       st.floats(0, 1e3), st.one_of(st.none(), st.floats(1e-6, 1e3)))
def test_mmse_shrinks(ls, noise, prior):
    assert np.linalg.norm(mmse_estimate(ls, noise, prior)) <= np.linalg.norm(ls) * (1 + 1e-12)


def test_feature_vector_layout():
    v = build_feature_vector(np.array([1 + 2j]), "TDL-A", 10.0, 3)
    np.testing.assert_array_equal(v.features, [1.0, 2.0])
    assert (v.label, v.snr_db, v.sample_id) == ("TDL-A", 10.0, 3)
    assert build_feature_vector(np.zeros(7, dtype=complex), "x", 0, 0).features.tolist() == [0.0] * 14
    assert build_feature_vector(np.ones(600), "x", 0, 0).features.size == 1200
    v = build_feature_vector(np.array([1 + 2j, 3 - 4j]), "x", 0, 0)
    np.testing.assert_array_equal(v.features, [1, 2, 3, -4])


def test_feature_vector_errors():
    with pytest.raises(ValueError):
        build_feature_vector(np.array([], dtype=complex), "x", 0, 0)
    with pytest.raises(ValueError):
        build_feature_vector(np.array([np.nan + 0j]), "x", 0, 0)


@given(arrays(complex, st.integers(1, 50), elements=finite_complex))
def test_feature_vector_round_trip(h):
    back = features_to_complex(build_feature_vector(h, "x", 0, 0).features)
    assert back.tobytes() == h.tobytes()


def _mse(H, grid, snr, draws, prior=None, base=0):
    ls_err, mmse_err = [], []
    for d in range(draws):
        p = generate_pilot_grid(grid, base + d)
        rx = add_awgn(apply_channel(p, H), snr, 10_000 + base + d)
        ls = ls_estimate(p, rx)
        est = mmse_estimate(ls, rx.noise_variance, prior)
        ls_err.append(np.mean(np.abs(ls - H.values) ** 2))
        mmse_err.append(np.mean(np.abs(est - H.values) ** 2))
    return np.mean(ls_err), np.mean(mmse_err)


def test_mmse_error_decreases_with_snr(scaled_profiles):
    grid = SubcarrierGrid(128)
    H = frequency_response(realize_tdl(scaled_profiles["TDL-C"], 5), grid)
    errs = [_mse(H, grid, snr, 100)[1] for snr in (0, 10, 20, 40)]
    assert all(a > b for a, b in zip(errs, errs[1:]))


@pytest.mark.parametrize("snr", [0.0, 10.0, 20.0])
def test_mmse_beats_ls_at_matched_prior(scaled_profiles, snr):
    # Rayleigh channel with unit per-subcarrier variance; the prior equals it
    grid = SubcarrierGrid(64)
    p = scaled_profiles["TDL-B"]
    ls_err, mmse_err = [], []
    for d in range(1000):
        H = frequency_response(realize_tdl(p, d), grid)
        x = generate_pilot_grid(grid, d)
        clean = apply_channel(x, H)
        sigma2 = 1.0 / 10 ** (snr / 10)
        noise = add_awgn(ReceivedGrid(np.ones(64, dtype=complex)), snr, 5000 + d).symbols - 1.0
        rx = ReceivedGrid(clean.symbols + noise, sigma2, snr)
        ls = ls_estimate(x, rx)
        ls_err.append(np.mean(np.abs(ls - H.values) ** 2))
        mmse_err.append(np.mean(np.abs(mmse_estimate(ls, sigma2, 1.0) - H.values) ** 2))
    assert np.mean(mmse_err) <= np.mean(ls_err)


def test_matrix_mmse_uses_frequency_correlation(scaled_profiles):
    grid = SubcarrierGrid(48, 60e3)
    p = scaled_profiles["TDL-A"]
    R = frequency_correlation(p, grid)
    ls = np.ones(48, dtype=complex)
    assert np.array_equal(mmse_estimate_matrix(ls, 0.0, R), ls)
    scalar_err, matrix_err = [], []
    for d in range(300):
        H = frequency_response(realize_tdl(p, d), grid)
        x = generate_pilot_grid(grid, d)
        rx = add_awgn(apply_channel(x, H), 0.0, 900 + d)
        est_ls = ls_estimate(x, rx)
        scalar_err.append(np.mean(np.abs(mmse_estimate(est_ls, rx.noise_variance) - H.values) ** 2))
        matrix_err.append(np.mean(np.abs(mmse_estimate_matrix(est_ls, rx.noise_variance, R) - H.values) ** 2))
    assert np.mean(matrix_err) < np.mean(scalar_err)
