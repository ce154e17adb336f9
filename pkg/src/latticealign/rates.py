"""Worst-case achievable rates of the two-stage lattice decoder.

Decoding at receiver k, stream l runs in two stages.  Stage one applies the
decorrelator u and decodes the integer combination sum_{i,n} a_i^n x_i^n of
all transmitted lattice streams (coefficients a are Gaussian integers, the
own stream's coefficient is pinned to zero).  Stage two scales the decoded
aggregate by the Gaussian integer c, subtracts it, applies utilde and decodes
the desired stream.  Every residual cross term is charged its worst case
epsilon ||v|| ||u|| over the CSI error ball, so the resulting rates are
guaranteed on any true channel inside the ball.

All rates are log2 (bits per channel use).
"""

from __future__ import annotations

from dataclasses import dataclass
import json
import math

import numpy as np

from .channel import ChannelSet
from .gaussint import GaussianInt, CoeffVector

_INT_TOL = 1e-9


def own_stream_indicator(K: int, L: int) -> np.ndarray:
    """E[k, l, i, n] = 1 exactly when (i, n) == (k, l)."""
    E = np.zeros((K, L, K, L))
    kk = np.arange(K)[:, None]
    ll = np.arange(L)[None, :]
    E[kk, ll, kk, ll] = 1.0
    return E


def cross_gain_tensor(Hmats: np.ndarray, V: np.ndarray, U: np.ndarray) -> np.ndarray:
    """G[k, l, i, n] = u_kl^H H_ki v_in for stacked filters and precoders."""
    t = np.einsum("kiab,inb->kina", Hmats, V)
    return np.einsum("kla,kina->klin", U.conj(), t)


@dataclass
class DesignState:
    """One complete transceiver design.

    v: (K, L, M) precoders, u/utilde: (K, L, N) stage-one/stage-two receive
    filters, a: (K, L, K, L) integer combination coefficients (a[k, l] is the
    coefficient vector used by decoder (k, l); its own entry is zero), c:
    (K, L) integer scaling factors, P: per-stream transmit power.

    During relaxed optimization a and c may hold non-integer complex values;
    finished designs carry exact Gaussian-integer values.
    """

    v: np.ndarray
    u: np.ndarray
    utilde: np.ndarray
    a: np.ndarray
    c: np.ndarray
    P: float

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=complex)
        self.u = np.asarray(self.u, dtype=complex)
        self.utilde = np.asarray(self.utilde, dtype=complex)
        self.a = np.asarray(self.a, dtype=complex)
        self.c = np.asarray(self.c, dtype=complex)
        K, L = self.v.shape[:2]
        if self.a.shape != (K, L, K, L):
            raise ValueError(f"a must have shape {(K, L, K, L)}, got {self.a.shape}")
        E = own_stream_indicator(K, L) > 0
        if np.max(np.abs(self.a[E])) > 0:
            raise ValueError("own-stream coefficients a[k,l,k,l] must be zero")
        if not self.P > 0:
            raise ValueError("P must be positive")

    @property
    def K(self) -> int:
        return self.v.shape[0]

    @property
    def L(self) -> int:
        return self.v.shape[1]

    def copy(self) -> "DesignState":
        return DesignState(
            v=self.v.copy(), u=self.u.copy(), utilde=self.utilde.copy(),
            a=self.a.copy(), c=self.c.copy(), P=self.P,
        )

    def power(self, k: int) -> float:
        """Sum of squared precoder norms of user k (budgeted by gamma)."""
        return float(np.sum(np.abs(self.v[k]) ** 2))

    def coeff_vector(self, k: int, l: int) -> CoeffVector:
        """Exact integer view of a[k, l]; raises if entries are not integral."""
        flat = self.a[k, l].reshape(-1)
        ints = []
        for z in flat:
            if abs(z.real - round(z.real)) > _INT_TOL or abs(z.imag - round(z.imag)) > _INT_TOL:
                raise ValueError(f"coefficient {z!r} is not a Gaussian integer")
            ints.append(GaussianInt(int(round(z.real)), int(round(z.imag))))
        return CoeffVector(entries=tuple(ints), own_index=k * self.L + l)


def _norms(X: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(X) ** 2, axis=-1))


def stage1_denominators(ch: ChannelSet, st: DesignState) -> np.ndarray:
    """Effective noise-plus-residual power seen by stage-one decoding."""
    G = cross_gain_tensor(ch.Hhat, st.v, st.u)
    nv = _norms(st.v)
    nu = _norms(st.u)
    pen = np.abs(G - st.a) + ch.epsilon * nv[None, None, :, :] * nu[:, :, None, None]
    return nu ** 2 + st.P * np.sum(pen ** 2, axis=(2, 3))


def stage2_denominators(ch: ChannelSet, st: DesignState) -> np.ndarray:
    """Effective noise-plus-residual power seen by stage-two decoding."""
    K, L = st.K, st.L
    G = cross_gain_tensor(ch.Hhat, st.v, st.utilde)
    E = own_stream_indicator(K, L)
    targets = st.c[:, :, None, None] * st.a + E
    nv = _norms(st.v)
    nu = _norms(st.utilde)
    pen = np.abs(G - targets) + ch.epsilon * nv[None, None, :, :] * nu[:, :, None, None]
    return nu ** 2 + st.P * np.sum(pen ** 2, axis=(2, 3))


def _zero_coeff_mask(a: np.ndarray) -> np.ndarray:
    """(K, L) mask of decoders whose whole coefficient vector is exactly zero."""
    return np.all(a == 0, axis=(2, 3))


def stage1_rates(ch: ChannelSet, st: DesignState) -> np.ndarray:
    """Stage-one rate bounds mu[k, l]; +inf where no aggregate is decoded.

    A decoder with an all-zero coefficient vector skips stage one entirely,
    so it imposes no constraint (+inf).  The residual sum always includes the
    own stream with target zero: its signal leaks into the aggregate estimate.
    """
    den = stage1_denominators(ch, st)
    with np.errstate(divide="ignore"):
        mu = np.log2(st.P / den)
    mu[_zero_coeff_mask(st.a)] = np.inf
    return mu


def stage2_rates(ch: ChannelSet, st: DesignState) -> np.ndarray:
    """Stage-two rate bounds mu_tilde[k, l] for the desired streams."""
    den = stage2_denominators(ch, st)
    return np.log2(st.P / den)


def stage1_rate(ch: ChannelSet, st: DesignState, k: int, l: int) -> float:
    return float(stage1_rates(ch, st)[k, l])


def stage2_rate(ch: ChannelSet, st: DesignState, k: int, l: int) -> float:
    return float(stage2_rates(ch, st)[k, l])


def alignment_error(ch: ChannelSet, st: DesignState, k: int, l: int) -> float:
    """Residual interference power of decoder (k, l) on the true channels.

    P sum over (i, n) != (k, l) of |u^H H_ki v_in - a_in|^2; zero exactly
    when the true cross gains hit the chosen integers.
    """
    G = cross_gain_tensor(ch.H, st.v, st.u)
    sq = np.abs(G - st.a) ** 2
    sq[np.arange(st.K)[:, None], np.arange(st.L)[None, :],
       np.arange(st.K)[:, None], np.arange(st.L)[None, :]] = 0.0
    return float(st.P * np.sum(sq[k, l]))


@dataclass
class RateReport:
    """Per-decoder rate bounds plus the network-wide minimum."""

    mu: np.ndarray
    mu_tilde: np.ndarray
    r_min: float
    alignment: np.ndarray

    def to_json(self) -> str:
        def enc(x: float):
            if math.isinf(x):
                return "inf" if x > 0 else "-inf"
            return x

        payload = {
            "mu": [[enc(float(x)) for x in row] for row in self.mu],
            "mu_tilde": [[enc(float(x)) for x in row] for row in self.mu_tilde],
            "r_min": enc(float(self.r_min)),
            "alignment": [[float(x) for x in row] for row in self.alignment],
        }
        return json.dumps(payload)

    @staticmethod
    def from_json(text: str) -> "RateReport":
        payload = json.loads(text)

        def dec(x):
            if x == "inf":
                return math.inf
            if x == "-inf":
                return -math.inf
            return float(x)

        return RateReport(
            mu=np.array([[dec(x) for x in row] for row in payload["mu"]]),
            mu_tilde=np.array([[dec(x) for x in row] for row in payload["mu_tilde"]]),
            r_min=dec(payload["r_min"]),
            alignment=np.array(payload["alignment"], dtype=float),
        )


def rate_report(ch: ChannelSet, st: DesignState) -> RateReport:
    """Evaluate all rate bounds of a design.

    r_min is the smallest of all stage-two bounds and the finite stage-one
    bounds; if every decoder skips stage one, only stage two constrains it.
    Negative values are reported as-is (clamping happens at the goodput
    layer, not here).
    """
    mu = stage1_rates(ch, st)
    mu_tilde = stage2_rates(ch, st)
    finite = mu[np.isfinite(mu)]
    candidates = np.concatenate([finite.reshape(-1), mu_tilde.reshape(-1)])
    r_min = float(candidates.min())
    G = cross_gain_tensor(ch.H, st.v, st.u)
    sq = np.abs(G - st.a) ** 2
    K, L = st.K, st.L
    sq[np.arange(K)[:, None], np.arange(L)[None, :],
       np.arange(K)[:, None], np.arange(L)[None, :]] = 0.0
    align = st.P * np.sum(sq, axis=(2, 3))
    return RateReport(mu=mu, mu_tilde=mu_tilde, r_min=r_min, alignment=align)


def per_stream_rates(report: RateReport, a: np.ndarray) -> np.ndarray:
    """Largest per-stream rates consistent with every decoding constraint.

    Stream (i, n) is limited by its own stage-two bound and by the stage-one
    bound of every decoder whose aggregate includes it with a nonzero
    coefficient.
    """
    K, L = report.mu_tilde.shape
    r = report.mu_tilde.copy()
    for k in range(K):
        for l in range(L):
            if not np.isfinite(report.mu[k, l]):
                continue
            involved = np.abs(a[k, l]) > 0
            r[involved] = np.minimum(r[involved], report.mu[k, l])
    return r


def goodput(ch: ChannelSet, st: DesignState, designed_rate: float) -> float:
    """Rate actually delivered: the designed rate, or zero on outage.

    The design transmits at designed_rate (clamped to be non-negative); it is
    delivered only if the true channels support it, i.e. the perfect-CSI rate
    of the same design on H is at least the designed rate.
    """
    d = max(0.0, float(designed_rate))
    if d == 0.0:
        return 0.0
    r_true = rate_report(ch.true_view(), st).r_min
    return d if d <= r_true + 1e-12 else 0.0
