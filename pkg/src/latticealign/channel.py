"""Channel model: quasi-static MIMO interference network with bounded CSI error.

The designer never sees the true channels H_ki, only estimates Hhat_ki with
``H = Hhat - Delta`` and a known deterministic bound ||Delta||_F <= epsilon
per link.  Robust rate expressions charge every cross term its worst case
over that ball, so the bound (not the error realization) is what enters the
design.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import json

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class SystemConfig:
    """Static system parameters.

    K users, M transmit / N receive antennas, L streams per user, per-stream
    transmit power P, per-user power budget gamma (sum of squared precoder
    norms), CSI error bound epsilon, base RNG seed.
    """

    K: int
    M: int
    N: int
    L: int
    P: float
    gamma: float = 1.0
    epsilon: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("K", "M", "N", "L"):
            val = getattr(self, name)
            if not isinstance(val, int) or val < 1:
                raise ConfigurationError(f"{name} must be a positive integer, got {val!r}")
        if self.L > min(self.M, self.N):
            raise ConfigurationError(
                f"L={self.L} streams do not fit in min(M, N)={min(self.M, self.N)}"
            )
        if not self.P > 0:
            raise ConfigurationError(f"P must be positive, got {self.P!r}")
        if not self.gamma > 0:
            raise ConfigurationError(f"gamma must be positive, got {self.gamma!r}")
        if self.epsilon < 0:
            raise ConfigurationError(f"epsilon must be non-negative, got {self.epsilon!r}")


def snr_db_to_power(snr_db: float) -> float:
    """Per-stream power for a given SNR in dB (unit noise variance)."""
    return float(10.0 ** (snr_db / 10.0))


@dataclass(eq=False)
class ChannelSet:
    """True channels, their estimates, and the per-link error bound.

    H and Hhat have shape (K, K, N, M); H[k, i] is the N x M channel from
    transmitter i to receiver k.
    """

    H: np.ndarray
    Hhat: np.ndarray
    epsilon: float

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex)
        Hhat = np.asarray(self.Hhat, dtype=complex)
        if H.ndim != 4 or H.shape[0] != H.shape[1]:
            raise ConfigurationError(f"H must have shape (K, K, N, M), got {H.shape}")
        if Hhat.shape != H.shape:
            raise ConfigurationError(
                f"Hhat shape {Hhat.shape} does not match H shape {H.shape}"
            )
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon!r}")
        err = np.sqrt(np.sum(np.abs(Hhat - H) ** 2, axis=(2, 3)))
        worst = float(err.max())
        if worst > self.epsilon + 1e-9:
            raise ValueError(
                f"estimate error {worst:.3e} exceeds declared bound {self.epsilon:.3e}"
            )
        self.H = H
        self.Hhat = Hhat

    @property
    def K(self) -> int:
        return self.H.shape[0]

    @property
    def N(self) -> int:
        return self.H.shape[2]

    @property
    def M(self) -> int:
        return self.H.shape[3]

    def true_view(self) -> "ChannelSet":
        """The perfect-CSI view: estimates replaced by the true channels."""
        return ChannelSet(H=self.H, Hhat=self.H.copy(), epsilon=0.0)


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) i.i.d. entries (unit variance split across re/im)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def generate_channels(cfg: SystemConfig) -> ChannelSet:
    """Draw i.i.d. CN(0,1) channels; estimates start perfect (epsilon 0)."""
    rng = np.random.default_rng(cfg.seed)
    H = complex_gaussian(rng, (cfg.K, cfg.K, cfg.N, cfg.M))
    return ChannelSet(H=H, Hhat=H.copy(), epsilon=0.0)


def sample_delta_in_ball(
    rng: np.random.Generator, shape: tuple[int, int], epsilon: float
) -> np.ndarray:
    """One error matrix uniform in the Frobenius ball of radius epsilon.

    Gaussian direction scaled to radius epsilon * U^(1/(2 N M)); the exponent
    is the real dimension count of the complex N x M ball, which makes the
    radius density match the uniform volume measure.
    """
    if epsilon == 0:
        return np.zeros(shape, dtype=complex)
    D = complex_gaussian(rng, shape)
    nrm = np.linalg.norm(D)
    if nrm == 0:
        return np.zeros(shape, dtype=complex)
    u = 1.0 - rng.random()  # (0, 1]
    r = epsilon * u ** (1.0 / (2 * shape[0] * shape[1]))
    D *= r / nrm
    # guard the invariant against roundoff at r == epsilon
    nrm = np.linalg.norm(D)
    if nrm > epsilon:
        D *= epsilon / nrm * (1 - 1e-15)
    return D


def perturb_csi(ch: ChannelSet, epsilon: float, seed: int) -> ChannelSet:
    """New ChannelSet whose estimates are offset per link by a ball sample.

    The true channels are untouched; each (k, i) link independently gets
    Hhat = H + Delta with ||Delta||_F <= epsilon exactly.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon!r}")
    rng = np.random.default_rng(seed)
    K, _, N, M = ch.H.shape
    Hhat = ch.H.copy()
    for k in range(K):
        for i in range(K):
            Hhat[k, i] += sample_delta_in_ball(rng, (N, M), epsilon)
    return ChannelSet(H=ch.H.copy(), Hhat=Hhat, epsilon=float(epsilon))


def worst_case_crossterm_bound(u: np.ndarray, v: np.ndarray, epsilon: float) -> float:
    """Largest possible |u^H Delta v| over the Frobenius ball of radius epsilon.

    Equals epsilon ||u|| ||v||, achieved by the rank-one error aligned with
    u v^H; see rank_one_worst_delta.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    return float(epsilon * np.linalg.norm(u) * np.linalg.norm(v))


def rank_one_worst_delta(u: np.ndarray, v: np.ndarray, epsilon: float) -> np.ndarray:
    """The ball element achieving worst_case_crossterm_bound with equality."""
    u = np.asarray(u, dtype=complex).reshape(-1)
    v = np.asarray(v, dtype=complex).reshape(-1)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return np.zeros((u.size, v.size), dtype=complex)
    return epsilon * np.outer(u, v.conj()) / (nu * nv)


def _matrix_to_json(A: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in A]


def _matrix_from_json(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def channelset_to_json(ch: ChannelSet) -> str:
    """Serialize to the interchange format: per-link matrices of [re, im] pairs."""
    payload = {
        "K": ch.K,
        "M": ch.M,
        "N": ch.N,
        "H": [[_matrix_to_json(ch.H[k, i]) for i in range(ch.K)] for k in range(ch.K)],
        "Hhat": [[_matrix_to_json(ch.Hhat[k, i]) for i in range(ch.K)] for k in range(ch.K)],
        "epsilon": float(ch.epsilon),
    }
    return json.dumps(payload)


def channelset_from_json(text: str) -> ChannelSet:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid channel JSON: {exc}") from exc
    try:
        K, M, N = payload["K"], payload["M"], payload["N"]
        H = np.zeros((K, K, N, M), dtype=complex)
        Hhat = np.zeros((K, K, N, M), dtype=complex)
        for k in range(K):
            for i in range(K):
                H[k, i] = _matrix_from_json(payload["H"][k][i])
                Hhat[k, i] = _matrix_from_json(payload["Hhat"][k][i])
        epsilon = float(payload["epsilon"])
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"malformed channel JSON: {exc}") from exc
    return ChannelSet(H=H, Hhat=Hhat, epsilon=epsilon)
