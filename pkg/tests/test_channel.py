"""Channel generation, uncertainty model and serialization."""

import json

import numpy as np
import pytest

from latticealign.channel import (
    ChannelSet,
    SystemConfig,
    channelset_from_json,
    channelset_to_json,
    complex_gaussian,
    generate_channels,
    perturb_csi,
    rank_one_worst_delta,
    sample_delta_in_ball,
    snr_db_to_power,
    worst_case_crossterm_bound,
)
from latticealign.errors import ConfigurationError


def test_system_config_validation():
    SystemConfig(K=3, M=2, N=2, L=1, P=10.0)
    with pytest.raises(ConfigurationError):
        SystemConfig(K=0, M=2, N=2, L=1, P=10.0)
    with pytest.raises(ConfigurationError):
        SystemConfig(K=3, M=2, N=2, L=3, P=10.0)  # L > min(M, N)
    with pytest.raises(ConfigurationError):
        SystemConfig(K=3, M=2, N=2, L=1, P=-1.0)
    with pytest.raises(ConfigurationError):
        SystemConfig(K=3, M=2, N=2, L=1, P=10.0, epsilon=-0.1)
    with pytest.raises(ConfigurationError):
        SystemConfig(K=3, M=2, N=2, L=1, P=10.0, gamma=0.0)


def test_snr_db_to_power():
    assert snr_db_to_power(0.0) == pytest.approx(1.0)
    assert snr_db_to_power(10.0) == pytest.approx(10.0)
    assert snr_db_to_power(11.5) == pytest.approx(10 ** 1.15)


def test_complex_gaussian_moments():
    rng = np.random.default_rng(20)
    z = complex_gaussian(rng, (200_000,))
    assert abs(z.mean()) < 0.01
    assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, abs=0.02)
    # circular symmetry: real and imaginary parts carry half the power each
    assert np.mean(z.real**2) == pytest.approx(0.5, abs=0.02)
    assert np.mean(z.real * z.imag) == pytest.approx(0.0, abs=0.02)


def test_generate_channels_shapes_and_exact_csi():
    cfg = SystemConfig(K=3, M=2, N=4, L=2, P=5.0, seed=21)
    ch = generate_channels(cfg)
    assert ch.H.shape == (3, 3, 4, 2)
    assert np.array_equal(ch.H, ch.Hhat)
    assert ch.epsilon == 0.0
    assert (ch.K, ch.N, ch.M) == (3, 4, 2)


def test_generate_channels_deterministic_in_seed():
    cfg = SystemConfig(K=2, M=2, N=2, L=1, P=1.0, seed=5)
    a = generate_channels(cfg)
    b = generate_channels(cfg)
    assert np.array_equal(a.H, b.H)
    c = generate_channels(SystemConfig(K=2, M=2, N=2, L=1, P=1.0, seed=6))
    assert not np.array_equal(a.H, c.H)


def test_sample_delta_in_ball_radii():
    rng = np.random.default_rng(22)
    eps = 0.3
    norms = np.array(
        [np.linalg.norm(sample_delta_in_ball(rng, (2, 2), eps)) for _ in range(2000)]
    )
    assert norms.max() <= eps + 1e-12
    # draws fill the ball rather than hugging the center or the shell
    assert norms.min() < 0.7 * eps
    assert np.mean(norms > 0.8 * eps) > 0.5  # volume concentrates near the shell


def test_perturb_csi_within_ball_and_validated():
    cfg = SystemConfig(K=3, M=2, N=2, L=1, P=10.0, epsilon=0.2, seed=23)
    ch = generate_channels(cfg)
    pert = perturb_csi(ch, 0.2, seed=24)
    assert np.array_equal(pert.H, ch.H)
    for k in range(3):
        for i in range(3):
            dev = np.linalg.norm(pert.Hhat[k, i] - pert.H[k, i])
            assert dev <= 0.2 + 1e-12
    assert pert.epsilon == 0.2


def test_channelset_rejects_estimates_outside_ball():
    cfg = SystemConfig(K=2, M=2, N=2, L=1, P=1.0, seed=25)
    ch = generate_channels(cfg)
    Hhat = ch.H.copy()
    Hhat[0, 1] += 1.0
    with pytest.raises(ValueError):
        ChannelSet(H=ch.H, Hhat=Hhat, epsilon=0.1)


def test_channelset_true_view_drops_uncertainty():
    cfg = SystemConfig(K=2, M=2, N=2, L=1, P=1.0, epsilon=0.1, seed=26)
    ch = perturb_csi(generate_channels(cfg), 0.1, seed=27)
    tv = ch.true_view()
    assert tv.epsilon == 0.0
    assert np.array_equal(tv.Hhat, ch.H)


def test_worst_case_crossterm_bound_holds_over_samples():
    rng = np.random.default_rng(28)
    u = complex_gaussian(rng, (3,))
    v = complex_gaussian(rng, (2,))
    eps = 0.15
    bound = worst_case_crossterm_bound(u, v, eps)
    assert bound == pytest.approx(eps * np.linalg.norm(u) * np.linalg.norm(v))
    for _ in range(2000):
        delta = sample_delta_in_ball(rng, (3, 2), eps)
        assert abs(u.conj() @ delta @ v) <= bound + 1e-12


def test_rank_one_delta_achieves_bound_exactly():
    rng = np.random.default_rng(29)
    for _ in range(20):
        u = complex_gaussian(rng, (3,))
        v = complex_gaussian(rng, (2,))
        eps = float(rng.uniform(0.01, 0.5))
        delta = rank_one_worst_delta(u, v, eps)
        assert np.linalg.norm(delta) == pytest.approx(eps, rel=1e-12)
        achieved = abs(u.conj() @ delta @ v)
        assert achieved == pytest.approx(
            worst_case_crossterm_bound(u, v, eps), rel=1e-12
        )


def test_channelset_json_roundtrip_exact():
    cfg = SystemConfig(K=3, M=2, N=2, L=1, P=10.0, epsilon=0.1, seed=30)
    ch = perturb_csi(generate_channels(cfg), 0.1, seed=31)
    text = channelset_to_json(ch)
    back = channelset_from_json(text)
    assert np.array_equal(back.H, ch.H)
    assert np.array_equal(back.Hhat, ch.Hhat)
    assert back.epsilon == ch.epsilon
    payload = json.loads(text)
    assert set(payload) >= {"H", "Hhat", "epsilon"}


def test_channelset_json_rejects_malformed():
    with pytest.raises(ConfigurationError):
        channelset_from_json("not json")
    with pytest.raises(ConfigurationError):
        channelset_from_json(json.dumps({"H": [[1]]}))
