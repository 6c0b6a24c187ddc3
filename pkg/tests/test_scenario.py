import numpy as np
import pytest

from shrinkbeam import (
    ArrayGeometry,
    CoherentScattering,
    IncoherentScattering,
    NoMismatch,
    Scenario,
    SnapshotSource,
    realize_mismatch,
    steering_vector,
    true_inc_matrix,
)

GEOM = ArrayGeometry(12)


def paper_scenario(**kw):
    defaults = dict(geometry=GEOM, desired_doa_deg=10.0, interferer_doas_deg=(30.0, 50.0),
                    snr_db=10.0, sir_db=0.0, seed=42)
    defaults.update(kw)
    return Scenario(**defaults)


def test_scenario_validation():
    with pytest.raises(ValueError):
        paper_scenario(desired_doa_deg=95.0)
    with pytest.raises(ValueError):
        paper_scenario(sector_halfwidth_deg=0.0)
    with pytest.raises(ValueError):
        paper_scenario(num_snapshots=0)


def test_powers_follow_snr_and_sir():
    sc = paper_scenario(snr_db=10.0, sir_db=0.0)
    assert abs(sc.desired_power - 10.0) < 1e-12
    assert abs(sc.interferer_power - 10.0) < 1e-12
    sc = paper_scenario(snr_db=20.0, sir_db=10.0)
    assert abs(sc.interferer_power - 10.0) < 1e-12


def test_no_mismatch_returns_presumed_steering():
    sc = paper_scenario(mismatch=NoMismatch())
    real = realize_mismatch(sc, np.random.default_rng(0))
    assert np.allclose(real.next(None), steering_vector(10.0, GEOM), atol=1e-14)


def test_coherent_zero_paths_is_direct_path():
    sc = paper_scenario(mismatch=CoherentScattering(num_paths=0))
    real = realize_mismatch(sc, np.random.default_rng(0))
    assert np.allclose(real.next(None), steering_vector(10.0, GEOM), atol=1e-14)


def test_coherent_norm_triangle_bound():
    # |a1| <= |p| + num_paths * sqrt(M) since every scattered term is unit modulus
    sc = paper_scenario(mismatch=CoherentScattering(num_paths=4))
    m = GEOM.num_sensors
    bound = np.sqrt(m) + 4 * np.sqrt(m) + 1e-9
    for seed in range(25):
        real = realize_mismatch(sc, np.random.default_rng(seed))
        assert np.linalg.norm(real.next(None)) <= bound


def test_coherent_fixed_over_snapshots_incoherent_varies():
    rng = np.random.default_rng(3)
    coh = realize_mismatch(paper_scenario(mismatch=CoherentScattering()), rng)
    a, b = coh.next(rng), coh.next(rng)
    assert np.array_equal(a, b)
    rng = np.random.default_rng(3)
    inc = realize_mismatch(paper_scenario(mismatch=IncoherentScattering()), rng)
    a, b = inc.next(rng), inc.next(rng)
    assert not np.allclose(a, b)


def test_incoherent_expected_norm_near_sqrt_m():
    sc = paper_scenario(mismatch=IncoherentScattering(num_paths=4))
    rng = np.random.default_rng(11)
    real = realize_mismatch(sc, rng)
    norms2 = [np.linalg.norm(real.next(rng)) ** 2 for _ in range(4000)]
    # equal path gains at variance 1/(paths+1) put E|a1|^2 near M
    assert abs(np.mean(norms2) - GEOM.num_sensors) / GEOM.num_sensors < 0.15


def test_seed_determinism_bit_identical():
    sc = paper_scenario(mismatch=CoherentScattering(), seed=99)
    s1, s2 = SnapshotSource(sc), SnapshotSource(sc)
    for _ in range(50):
        a, b = s1.next_snapshot(), s2.next_snapshot()
        assert np.array_equal(a, b)
        assert np.array_equal(s1.desired_steering, s2.desired_steering)


def test_noise_only_sample_covariance_is_white():
    sc = paper_scenario(snr_db=-300.0, interferer_doas_deg=(), mismatch=NoMismatch(),
                        noise_power=1.0, seed=5)
    src = SnapshotSource(sc)
    xs = np.stack([src.next_snapshot() for _ in range(20000)], axis=1)
    r = xs @ xs.conj().T / xs.shape[1]
    assert np.linalg.norm(r - np.eye(12)) / np.linalg.norm(np.eye(12)) < 0.05


def test_desired_power_calibration():
    # with no interferers, mean |x|^2 per sensor = desired_power + noise_power
    sc = paper_scenario(snr_db=10.0, interferer_doas_deg=(), mismatch=NoMismatch(), seed=17)
    src = SnapshotSource(sc)
    total = 0.0
    n = 100000
    for _ in range(n):
        x = src.next_snapshot()
        total += np.vdot(x, x).real
    per_sensor = total / (n * GEOM.num_sensors)
    estimate = per_sensor - sc.noise_power
    assert abs(estimate - 10.0) / 10.0 < 0.05


def test_true_inc_no_interferers_is_noise_floor():
    sc = paper_scenario(interferer_doas_deg=(), noise_power=2.0)
    assert np.allclose(true_inc_matrix(sc), 2.0 * np.eye(12), atol=1e-14)


def test_true_inc_single_interferer_eigenvalues():
    # rank-one interferer of power 1 on the noise floor: {M+1, 1 x (M-1)}
    sc = paper_scenario(interferer_doas_deg=(30.0,), snr_db=0.0, sir_db=0.0,
                        noise_power=1.0)
    evals = np.linalg.eigvalsh(true_inc_matrix(sc))
    assert abs(evals[-1] - 13.0) < 1e-10
    assert np.allclose(evals[:-1], 1.0, atol=1e-10)


def test_true_inc_hermitian_and_floor():
    sc = paper_scenario()
    r = true_inc_matrix(sc)
    assert np.linalg.norm(r - r.conj().T) < 1e-12
    assert np.linalg.eigvalsh(r)[0] >= sc.noise_power - 1e-10


def test_true_inc_matches_ensemble_covariance():
    # brute-force oracle: average interference-plus-noise outer products
    sc = paper_scenario(seed=23)
    rng = np.random.default_rng(23)
    a_int = np.stack([steering_vector(t, GEOM) for t in sc.interferer_doas_deg], axis=1)
    n = 100000
    pw = sc.interferer_power
    s = (rng.standard_normal((2, n)) + 1j * rng.standard_normal((2, n))) * np.sqrt(pw / 2)
    nz = (rng.standard_normal((12, n)) + 1j * rng.standard_normal((12, n))) * np.sqrt(0.5)
    xs = a_int @ s + nz
    ensemble = xs @ xs.conj().T / n
    r = true_inc_matrix(sc)
    assert np.linalg.norm(ensemble - r) / np.linalg.norm(r) < 0.01


def test_ensemble_matches_signal_plus_inc_under_no_mismatch():
    sc = paper_scenario(mismatch=NoMismatch(), seed=31, snr_db=5.0)
    src = SnapshotSource(sc)
    n = 60000
    xs = np.stack([src.next_snapshot() for _ in range(n)], axis=1)
    r_emp = xs @ xs.conj().T / n
    a1 = steering_vector(10.0, GEOM)
    expected = true_inc_matrix(sc) + sc.desired_power * np.outer(a1, a1.conj())
    assert np.linalg.norm(r_emp - expected) / np.linalg.norm(expected) < 0.03
