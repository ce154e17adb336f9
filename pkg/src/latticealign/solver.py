"""Alternating max-min solver for the robust lattice-alignment design.

The design problem maximizes the worst rate bound over precoders v, receive
filters u / utilde, Gaussian-integer combination coefficients a and integer
scalings c.  It is non-convex jointly but splits into blocks that are exact
or convex:

* receive-side block: per-decoder regularized least squares for u and utilde
  (closed form when the CSI bound is zero, smoothed convex descent
  otherwise) plus a finite integer search for each c;
* transmit-side block: the epigraph problem in (v, relaxed a, t) is convex
  and is solved with a log-barrier method under the per-user power budget.

The outer loop alternates the two blocks, never accepts a step that lowers
the worst rate bound, and finally projects the relaxed coefficients back to
Gaussian integers (dividing out any common divisor, which can only help the
aggregate-decoding rate) before one last receive-side refit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .channel import ChannelSet, SystemConfig, complex_gaussian
from .errors import ConfigurationError, NonConvergenceError
from .gaussint import GaussianInt, common_divisor, exact_div
from .rates import (
    DesignState,
    RateReport,
    own_stream_indicator,
    per_stream_rates,
    rate_report,
    stage1_denominators,
    stage2_denominators,
)

_DELTA = 1e-9  # smoothing width for |z| inside iterative solvers
_BIG = 1e30  # penalty level for infeasible barrier trial points

_INIT_STRATEGIES = ("random_unit", "identity_like", "ia_seed")


@dataclass(frozen=True)
class SolverConfig:
    barrier_q0: float = 1.0
    barrier_nu: float = 10.0
    barrier_tol: float = 1e-6
    newton_tol: float = 1e-7
    max_outer_iters: int = 40
    max_inner_iters: int = 200
    rate_tol: float = 1e-5
    init_strategy: str = "identity_like"

    def __post_init__(self):
        if self.barrier_q0 <= 0 or self.barrier_nu <= 1:
            raise ConfigurationError("need barrier_q0 > 0 and barrier_nu > 1")
        if min(self.barrier_tol, self.newton_tol, self.rate_tol) <= 0:
            raise ConfigurationError("tolerances must be positive")
        if min(self.max_outer_iters, self.max_inner_iters) < 1:
            raise ConfigurationError("iteration caps must be at least 1")
        if self.init_strategy not in _INIT_STRATEGIES:
            raise ConfigurationError(
                f"init_strategy must be one of {_INIT_STRATEGIES}, got {self.init_strategy!r}"
            )


@dataclass
class TraceRecord:
    iter: int
    stage: str  # "receivers" | "precoders" | "quantize"
    r_min: float
    objective: float


@dataclass
class SolveTrace:
    records: list[TraceRecord] = field(default_factory=list)
    converged: bool = True
    c_candidates: list = field(default_factory=list)

    def add(self, it: int, stage: str, r_min: float, objective: float):
        self.records.append(TraceRecord(it, stage, float(r_min), float(objective)))

    def r_min_series(self) -> list[float]:
        return [rec.r_min for rec in self.records]

    def pre_quantize_series(self) -> list[float]:
        return [rec.r_min for rec in self.records if rec.stage != "quantize"]

    def to_csv(self) -> str:
        lines = ["iter,r_min,stage,objective"]
        for rec in self.records:
            lines.append(f"{rec.iter},{rec.r_min!r},{rec.stage},{rec.objective!r}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# per-decoder pieces
# ---------------------------------------------------------------------------


def _cross_vectors(Hhat: np.ndarray, V: np.ndarray, k: int) -> np.ndarray:
    """w[i*L+n] = Hhat_ki v_in as a (K*L, N) stack for receiver k."""
    t = np.einsum("iab,inb->ina", Hhat[k], V)
    return t.reshape(-1, t.shape[-1])


def _stage_targets(st: DesignState, k: int, l: int, stage: int) -> np.ndarray:
    a = st.a[k, l].reshape(-1)
    if stage == 1:
        return a.copy()
    E = np.zeros_like(a)
    E[k * st.L + l] = 1.0
    return st.c[k, l] * a + E


def decorrelator_objective(
    ch: ChannelSet, st: DesignState, k: int, l: int, stage: int, u: np.ndarray
) -> float:
    """Exact robust decorrelator objective ||u||^2 + P sum (|residual| + eps bound)^2."""
    w = _cross_vectors(ch.Hhat, st.v, k)
    b = _stage_targets(st, k, l, stage)
    nv = np.sqrt(np.sum(np.abs(st.v) ** 2, axis=2)).reshape(-1)
    u = np.asarray(u, dtype=complex).reshape(-1)
    z = w @ u.conj() - b
    pen = np.abs(z) + ch.epsilon * nv * np.linalg.norm(u)
    return float(np.linalg.norm(u) ** 2 + st.P * np.sum(pen**2))


def decorrelator_closed_form(
    ch: ChannelSet, st: DesignState, k: int, l: int, stage: int
) -> np.ndarray:
    """Regularized least-squares receive filter for the zero-CSI-error case.

    Solves min ||u||^2 + P sum_j |u^H w_j - b_j|^2 exactly:
    u = (sum_j w_j w_j^H + I/P)^(-1) sum_j w_j conj(b_j).
    """
    w = _cross_vectors(ch.Hhat, st.v, k)
    b = _stage_targets(st, k, l, stage)
    N = w.shape[1]
    A = np.einsum("ja,jb->ab", w, w.conj()) + np.eye(N) / st.P
    rhs = b.conj() @ w
    return np.linalg.solve(A, rhs)


def _robust_fun_grad(x, w, b, nv, eps, P):
    N = w.shape[1]
    u = x[:N] + 1j * x[N:]
    z = w @ u.conj() - b
    az = np.sqrt(np.abs(z) ** 2 + _DELTA**2)
    nu2 = float(np.sum(np.abs(u) ** 2))
    nus = np.sqrt(nu2 + _DELTA**2)
    s = eps * nv * nus
    f = nu2 + P * float(np.sum((az + s) ** 2 - _DELTA**2))
    coef = (az + s) / az * z.conj()
    g = u + P * np.einsum("j,ja->a", coef, w)
    if eps > 0:
        g = g + P * float(np.sum((az + s) * eps * nv)) * u / nus
    grad = np.concatenate([2 * g.real, 2 * g.imag])
    return f, grad


def decorrelator_robust(
    ch: ChannelSet,
    st: DesignState,
    k: int,
    l: int,
    stage: int,
    cfg: SolverConfig | None = None,
    u0: np.ndarray | None = None,
) -> np.ndarray:
    """Receive filter minimizing the worst-case residual objective.

    Convex in u for any CSI bound; solved by quasi-Newton descent on a
    smoothed copy of the objective (the smoothing vanishes identically when
    the bound is zero, so this must agree with the closed form there).
    Starts from the zero filter unless a warm start is given.
    """
    cfg = cfg or SolverConfig()
    w = _cross_vectors(ch.Hhat, st.v, k)
    b = _stage_targets(st, k, l, stage)
    nv = np.sqrt(np.sum(np.abs(st.v) ** 2, axis=2)).reshape(-1)
    N = w.shape[1]
    if u0 is None:
        x0 = np.zeros(2 * N)
    else:
        u0 = np.asarray(u0, dtype=complex).reshape(-1)
        x0 = np.concatenate([u0.real, u0.imag])
    res = minimize(
        _robust_fun_grad,
        x0,
        args=(w, b, nv, ch.epsilon, st.P),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": cfg.max_inner_iters * 5, "ftol": 1e-15, "gtol": cfg.newton_tol},
    )
    u = res.x[:N] + 1j * res.x[N:]
    if res.nit >= cfg.max_inner_iters * 5:
        raise NonConvergenceError(
            f"receive-filter descent hit the iteration cap for decoder ({k},{l})",
            best=u,
        )
    return u


def _scaling_objective(q, avals, s, c) -> float:
    pen = np.abs(q - c * avals) + s
    return float(np.sum(pen**2))


def scaling_candidates(
    ch: ChannelSet, st: DesignState, k: int, l: int
) -> tuple[GaussianInt, list[GaussianInt]]:
    """Best Gaussian-integer scaling for decoder (k, l) plus the set examined.

    Minimizes f(c) = sum_j (|q_j - c a_j| + eps ||v_j|| ||utilde||)^2 where
    q_j is the estimated post-filter gain minus the own-stream target.  The
    relaxed complex minimizer is found first (weighted least squares, then a
    short descent when the CSI bound couples in), and every Gaussian integer
    in the closed unit box around it is evaluated exactly; ties prefer the
    smaller norm and then the first-quadrant associate.
    """
    w = _cross_vectors(ch.Hhat, st.v, k)
    a = st.a[k, l].reshape(-1)
    if np.all(a == 0):
        return GaussianInt(1, 0), [GaussianInt(1, 0)]
    E = np.zeros_like(a)
    E[k * st.L + l] = 1.0
    ut = st.utilde[k, l]
    q = w @ ut.conj() - E
    nv = np.sqrt(np.sum(np.abs(st.v) ** 2, axis=2)).reshape(-1)
    s = ch.epsilon * nv * np.linalg.norm(ut)

    wsum = float(np.sum(np.abs(a) ** 2))
    c_rel = complex(np.sum(a.conj() * q) / wsum)
    if ch.epsilon > 0:

        def fg(x):
            c = x[0] + 1j * x[1]
            z = q - c * a
            az = np.sqrt(np.abs(z) ** 2 + _DELTA**2)
            f = float(np.sum((az + s) ** 2 - _DELTA**2))
            g = np.sum((az + s) / az * z.conj() * (-a))
            return f, np.array([2 * g.real, 2 * g.imag])

        res = minimize(fg, np.array([c_rel.real, c_rel.imag]), jac=True, method="L-BFGS-B")
        c_rel = complex(res.x[0], res.x[1])

    res_lo = int(np.ceil(c_rel.real - 1 - 1e-12))
    res_hi = int(np.floor(c_rel.real + 1 + 1e-12))
    ims_lo = int(np.ceil(c_rel.imag - 1 - 1e-12))
    ims_hi = int(np.floor(c_rel.imag + 1 + 1e-12))
    cands = [
        GaussianInt(re, im)
        for re in range(res_lo, res_hi + 1)
        for im in range(ims_lo, ims_hi + 1)
    ]
    # keep the incumbent in the running so a scaling update can never regress
    cur = st.c[k, l]
    if abs(cur.real - round(cur.real)) < 1e-9 and abs(cur.imag - round(cur.imag)) < 1e-9:
        inc = GaussianInt(int(round(cur.real)), int(round(cur.imag)))
        if inc not in cands:
            cands.append(inc)

    def quadrant_rank(g: GaussianInt) -> int:
        return 0 if (g.re > 0 and g.im >= 0) else 1

    fvals = [_scaling_objective(q, a, s, complex(g)) for g in cands]
    fmin = min(fvals)
    tied = [g for g, fv in zip(cands, fvals) if fv <= fmin + 1e-12 * (1 + abs(fmin))]
    best = min(tied, key=lambda g: (g.norm(), quadrant_rank(g), g.re, g.im))
    return best, cands


def optimize_scaling(ch: ChannelSet, st: DesignState, k: int, l: int) -> GaussianInt:
    """Optimal Gaussian-integer scaling of the decoded aggregate (see
    scaling_candidates); returns 1 when no aggregate is decoded at all."""
    best, _ = scaling_candidates(ch, st, k, l)
    return best


# ---------------------------------------------------------------------------
# receive-side block
# ---------------------------------------------------------------------------


def _best_filter(ch, st, k, l, stage, cfg, current) -> np.ndarray:
    """Candidate filter for one decoder, never worse than the current one."""
    if ch.epsilon == 0:
        cand = decorrelator_closed_form(ch, st, k, l, stage)
    else:
        cand = decorrelator_robust(ch, st, k, l, stage, cfg, u0=current)
    f_cand = decorrelator_objective(ch, st, k, l, stage, cand)
    f_cur = decorrelator_objective(ch, st, k, l, stage, current)
    return cand if f_cand < f_cur else current


def _stage2_joint_update(
    ch: ChannelSet, st: DesignState, k: int, l: int, cfg: SolverConfig,
    cands: list[GaussianInt],
) -> tuple[complex, np.ndarray, bool]:
    """Best (scaling, stage-two filter) pair among the candidate scalings.

    Scoring a candidate scaling with the current filter understates it, and
    pure coordinate descent over (utilde, c) can lock onto whichever scaling
    the filter was first fitted to.  Each candidate is therefore scored by
    the objective of its own refit filter.  The incumbent pair is always in
    the running, so the decoder's objective cannot increase.
    """
    cur_c = st.c[k, l]
    cur_u = st.utilde[k, l]
    f_best = decorrelator_objective(ch, st, k, l, 2, cur_u)
    best = (cur_c, cur_u, False)
    # cheap proxy ordering with the current filter caps the refit work when
    # every refit is an iterative robust fit
    proxy = [_scaling_value(ch, st, k, l, complex(g)) for g in cands]
    order = np.argsort(proxy, kind="stable")
    n_refit = len(cands) if ch.epsilon == 0 else min(4, len(cands))
    for idx in order[:n_refit]:
        g = complex(cands[idx])
        st.c[k, l] = g
        try:
            if ch.epsilon == 0:
                u_g = decorrelator_closed_form(ch, st, k, l, 2)
            else:
                u_g = decorrelator_robust(ch, st, k, l, 2, cfg, u0=cur_u)
        except NonConvergenceError as exc:
            u_g = exc.best
        f_g = decorrelator_objective(ch, st, k, l, 2, u_g)
        if f_g < f_best:
            f_best = f_g
            best = (g, u_g, g != cur_c)
    st.c[k, l] = cur_c
    return best


def optimize_receivers(
    ch: ChannelSet, st: DesignState, cfg: SolverConfig | None = None,
    candidate_log: list | None = None,
) -> tuple[DesignState, list[np.ndarray]]:
    """Receive-side block: refit every u once, then alternate utilde and c.

    Precoders and combination coefficients stay fixed.  Each u is the exact
    (or descent-refined) minimizer of its stage-one objective; each (utilde,
    c) pair is improved jointly until a fixed point, and every update is
    accepted only if it does not increase its objective, so the per-decoder
    rate bounds are non-decreasing along the returned trace of stage-two
    rate arrays.
    """
    cfg = cfg or SolverConfig()
    st = st.copy()
    for k in range(st.K):
        for l in range(st.L):
            if np.all(st.a[k, l] == 0):
                st.u[k, l] = 0.0  # no aggregate to decode
                continue
            st.u[k, l] = _best_filter(ch, st, k, l, 1, cfg, st.u[k, l])

    trace: list[np.ndarray] = []
    prev_mu = None
    for _ in range(cfg.max_inner_iters):
        c_changed = False
        for k in range(st.K):
            for l in range(st.L):
                _, cands = scaling_candidates(ch, st, k, l)
                if candidate_log is not None:
                    candidate_log.append(cands)
                new_c, new_u, changed = _stage2_joint_update(ch, st, k, l, cfg, cands)
                st.c[k, l] = new_c
                st.utilde[k, l] = new_u
                c_changed = c_changed or changed
        mu_t = np.log2(st.P / stage2_denominators(ch, st))
        trace.append(mu_t)
        if prev_mu is not None and not c_changed:
            if float(np.max(np.abs(mu_t - prev_mu))) < cfg.rate_tol:
                return st, trace
        prev_mu = mu_t
    raise NonConvergenceError(
        "receive-side fixed-point iteration hit the iteration cap", best=st, trace=trace
    )


def _scaling_value(ch, st, k, l, c) -> float:
    w = _cross_vectors(ch.Hhat, st.v, k)
    a = st.a[k, l].reshape(-1)
    E = np.zeros_like(a)
    E[k * st.L + l] = 1.0
    ut = st.utilde[k, l]
    q = w @ ut.conj() - E
    nv = np.sqrt(np.sum(np.abs(st.v) ** 2, axis=2)).reshape(-1)
    s = ch.epsilon * nv * np.linalg.norm(ut)
    return _scaling_objective(q, a, s, c)


# ---------------------------------------------------------------------------
# transmit-side block (barrier method on the epigraph form)
# ---------------------------------------------------------------------------


def optimize_precoders(
    ch: ChannelSet, st: DesignState, gamma: float, cfg: SolverConfig | None = None
) -> tuple[DesignState, float]:
    """Transmit-side block: minimize the epigraph bound t over (v, a, t).

    With the receive filters and integer scalings fixed, every residual term
    is affine in (v, a), so bounding each decoder's effective noise power by
    t and keeping each user inside its power budget is a convex feasibility
    region.  A standard log-barrier sweep (multiplier nu per stage, stopped
    when the barrier duality gap drops below barrier_tol) minimizes t; the
    combination coefficients are relaxed to arbitrary complex values here
    and only re-integerized at the end of the full solve.

    Returns the updated state and the final epigraph value.
    """
    cfg = cfg or SolverConfig()
    K, L, M = st.v.shape
    P, eps = st.P, ch.epsilon
    Hhat = ch.Hhat
    U, Ut, c = st.u, st.utilde, st.c
    nu = np.sqrt(np.sum(np.abs(U) ** 2, axis=2))
    nut = np.sqrt(np.sum(np.abs(Ut) ** 2, axis=2))
    nu2, nut2 = nu**2, nut**2
    E = own_stream_indicator(K, L)
    free = E.reshape(-1) == 0
    HU = np.einsum("kiab,kla->kilb", Hhat.conj(), U)
    HUt = np.einsum("kiab,kla->kilb", Hhat.conj(), Ut)
    cc = c[:, :, None, None]
    ccb = np.conj(c)[:, :, None, None]
    n_v = K * L * M
    d2 = _DELTA**2

    def unpack(x):
        t = x[0]
        V = (x[1 : 1 + n_v] + 1j * x[1 + n_v : 1 + 2 * n_v]).reshape(K, L, M)
        Af = np.zeros(K * L * K * L, dtype=complex)
        Af[free] = x[1 + 2 * n_v : 1 + 2 * n_v + free.sum()] + 1j * x[1 + 2 * n_v + free.sum() :]
        return t, V, Af.reshape(K, L, K, L)

    def pack(t, V, A):
        Af = A.reshape(-1)[free]
        return np.concatenate([[t], V.real.ravel(), V.imag.ravel(), Af.real, Af.imag])

    def fun_grad(x, q):
        t, V, A = unpack(x)
        p = np.sum(np.abs(V) ** 2, axis=(1, 2))
        ps = gamma - p
        TT = np.einsum("kiab,inb->kina", Hhat, V)
        G1 = np.einsum("kla,kina->klin", U.conj(), TT)
        G2 = np.einsum("kla,kina->klin", Ut.conj(), TT)
        nv = np.sqrt(np.sum(np.abs(V) ** 2, axis=2))
        nvs = np.sqrt(nv**2 + d2)
        Z1 = G1 - A
        Z2 = G2 - cc * A - E
        H1 = np.sqrt(np.abs(Z1) ** 2 + d2)
        H2 = np.sqrt(np.abs(Z2) ** 2 + d2)
        S1 = eps * nu[:, :, None, None] * nvs[None, None, :, :]
        S2 = eps * nut[:, :, None, None] * nvs[None, None, :, :]
        g1 = nu2 + P * np.sum((H1 + S1) ** 2 - d2, axis=(2, 3))
        g2 = nut2 + P * np.sum((H2 + S2) ** 2 - d2, axis=(2, 3))
        s1 = t - g1
        s2 = t - g2
        feasible = s1.min() > 0 and s2.min() > 0 and ps.min() > 0
        if feasible:
            lam1 = 1.0 / (q * s1)
            lam2 = 1.0 / (q * s2)
            lamp = 1.0 / (q * ps)
            F = t - (np.sum(np.log(s1)) + np.sum(np.log(s2)) + np.sum(np.log(ps))) / q
            gt = 1.0 - lam1.sum() - lam2.sum()
        else:
            lam1 = _BIG * (s1 <= 0)
            lam2 = _BIG * (s2 <= 0)
            lamp = _BIG * (ps <= 0)
            viol = (
                np.sum(np.maximum(-s1, 0))
                + np.sum(np.maximum(-s2, 0))
                + np.sum(np.maximum(-ps, 0))
            )
            F = _BIG * (1.0 + viol)
            gt = -(lam1.sum() + lam2.sum())
        C1 = lam1[:, :, None, None] * P * ((H1 + S1) / H1) * Z1
        C2 = lam2[:, :, None, None] * P * ((H2 + S2) / H2) * Z2
        gA = -C1 - C2 * ccb
        gV = np.einsum("klin,kilb->inb", C1, HU) + np.einsum("klin,kilb->inb", C2, HUt)
        if eps > 0:
            e1 = P * eps * np.einsum("klin,kl->in", lam1[:, :, None, None] * (H1 + S1), nu)
            e2 = P * eps * np.einsum("klin,kl->in", lam2[:, :, None, None] * (H2 + S2), nut)
            gV = gV + ((e1 + e2) / nvs)[:, :, None] * V
        gV = gV + lamp[:, None, None] * V
        gAf = gA.reshape(-1)[free]
        grad = np.concatenate(
            [[gt], 2 * gV.real.ravel(), 2 * gV.imag.ravel(), 2 * gAf.real, 2 * gAf.imag]
        )
        return F, grad

    # strictly feasible start: nudge any user off the power boundary,
    # then open the epigraph slightly above the current worst bound
    V0 = st.v.copy()
    for k in range(K):
        p = float(np.sum(np.abs(V0[k]) ** 2))
        if p >= gamma * (1 - 1e-9):
            V0[k] *= np.sqrt(gamma * (1 - 1e-8) / p)
    A0 = st.a.copy()
    # smoothed bounds at the start point decide where to open the epigraph
    V_, A_ = V0, A0
    TT = np.einsum("kiab,inb->kina", Hhat, V_)
    G1 = np.einsum("kla,kina->klin", U.conj(), TT)
    G2 = np.einsum("kla,kina->klin", Ut.conj(), TT)
    nv0 = np.sqrt(np.sum(np.abs(V_) ** 2, axis=2))
    nvs0 = np.sqrt(nv0**2 + d2)
    H1 = np.sqrt(np.abs(G1 - A_) ** 2 + d2)
    H2 = np.sqrt(np.abs(G2 - cc * A_ - E) ** 2 + d2)
    S1 = eps * nu[:, :, None, None] * nvs0[None, None, :, :]
    S2 = eps * nut[:, :, None, None] * nvs0[None, None, :, :]
    g1 = nu2 + P * np.sum((H1 + S1) ** 2 - d2, axis=(2, 3))
    g2 = nut2 + P * np.sum((H2 + S2) ** 2 - d2, axis=(2, 3))
    m0 = float(max(g1.max(), g2.max()))
    t0 = m0 + max(1e-4, 0.02 * (1 + abs(m0)))
    x = pack(t0, V_, A_)

    q = cfg.barrier_q0
    n_constraints = 2 * K * L + K
    t_final = t0
    while True:
        res = minimize(
            fun_grad,
            x,
            args=(q,),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": cfg.max_inner_iters * 5, "ftol": 1e-15, "gtol": cfg.newton_tol},
        )
        x = res.x
        t_final = float(x[0])
        if n_constraints / q < cfg.barrier_tol:
            break
        q *= cfg.barrier_nu
    _, V, A = unpack(x)
    out = st.copy()
    out.v = V
    out.a = A
    return out, t_final


# ---------------------------------------------------------------------------
# full alternating solve
# ---------------------------------------------------------------------------


def _pseudo_target_filter(ch: ChannelSet, st: DesignState, k: int, l: int) -> np.ndarray:
    """Least-squares filter fit to unit gains on every cross stream."""
    w = _cross_vectors(ch.Hhat, st.v, k)
    b = np.ones(w.shape[0], dtype=complex)
    b[k * st.L + l] = 0.0
    N = w.shape[1]
    A = np.einsum("ja,jb->ab", w, w.conj()) + np.eye(N) / st.P
    return np.linalg.solve(A, b.conj() @ w)


def initial_state(
    ch: ChannelSet,
    cfg: SystemConfig,
    strategy: str = "identity_like",
    seed: int | None = None,
    init_a: str = "round",
) -> DesignState:
    """Build a starting design.

    Precoders come from the chosen strategy (random unit draws, canonical
    basis columns, or an interference-alignment seed for the 3-user
    even-antenna geometry).  Coefficients start either at zero (one-stage
    decoding) or at the rounded post-filter cross gains of a one-shot
    least-squares fit; scalings start at one.
    """
    K, L, M, N = cfg.K, cfg.L, cfg.M, cfg.N
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    if strategy == "random_unit":
        V = complex_gaussian(rng, (K, L, M))
        for k in range(K):
            V[k] *= np.sqrt(cfg.gamma / np.sum(np.abs(V[k]) ** 2))
    elif strategy == "identity_like":
        V = np.zeros((K, L, M), dtype=complex)
        for k in range(K):
            for l in range(L):
                V[k, l, l % M] = 1.0
            V[k] *= np.sqrt(cfg.gamma / np.sum(np.abs(V[k]) ** 2))
    elif strategy == "ia_seed":
        from .baselines import conventional_ia_design

        design = conventional_ia_design(ch.Hhat, L)
        if design is None:
            raise ConfigurationError(
                "ia_seed needs the 3-user geometry with M == N even and L == M/2"
            )
        # baseline designs store streams as matrix columns (K, M, L)
        V = design[0].transpose(0, 2, 1) * np.sqrt(cfg.gamma / L)
        init_a = "zero"
    else:
        raise ConfigurationError(f"unknown init strategy {strategy!r}")

    st = DesignState(
        v=V,
        u=np.zeros((K, L, N), dtype=complex),
        utilde=np.zeros((K, L, N), dtype=complex),
        a=np.zeros((K, L, K, L), dtype=complex),
        c=np.ones((K, L), dtype=complex),
        P=cfg.P,
    )
    if init_a == "round":
        E = own_stream_indicator(K, L)
        for k in range(K):
            for l in range(L):
                u_fit = _pseudo_target_filter(ch, st, k, l)
                w = _cross_vectors(ch.Hhat, st.v, k)
                gains = (w @ u_fit.conj()).reshape(K, L)
                a0 = np.round(gains.real) + 1j * np.round(gains.imag)
                a0[k, l] = 0.0
                st.a[k, l] = a0
                st.u[k, l] = u_fit
    elif init_a != "zero":
        raise ConfigurationError(f"unknown init_a mode {init_a!r}")
    return st


def _quantize_coefficients(st: DesignState) -> DesignState:
    out = st.copy()
    out.a = np.round(st.a.real) + 1j * np.round(st.a.imag)
    return out


def _reduce_common_divisors(st: DesignState) -> DesignState:
    """Divide each coefficient vector by its common Gaussian divisor.

    A shared divisor r (norm > 1) wastes aggregate-decoding rate: the pair
    (u/r, a/r) decodes a strictly finer combination at higher rate while
    c -> c r leaves the stage-two targets untouched.
    """
    out = st.copy()
    K, L = st.K, st.L
    for k in range(K):
        for l in range(L):
            vec = out.coeff_vector(k, l)
            r = common_divisor(vec)
            if r is None:
                continue
            reduced = [exact_div(e, r) for e in vec.entries]
            out.a[k, l] = np.array([complex(e) for e in reduced]).reshape(K, L)
            out.c[k, l] = out.c[k, l] * complex(r)
            out.u[k, l] = out.u[k, l] / complex(r)
    return out


def solve(
    ch: ChannelSet,
    cfg: SystemConfig,
    solver: SolverConfig | None = None,
    seed: int | None = None,
    init_a: str = "round",
    init_state: DesignState | None = None,
) -> tuple[DesignState, RateReport, SolveTrace]:
    """Full alternating solve of the robust max-min design.

    Alternates the receive-side and transmit-side blocks from the configured
    initialization; a transmit-side step is accepted only when it does not
    lower the worst rate bound, so the pre-quantization trace of r_min is
    non-decreasing.  Afterwards the relaxed coefficients are rounded to
    Gaussian integers, common divisors are removed, and the receive side is
    refit once against the final integers.

    Returns (state, report, trace); trace.converged is False when the outer
    loop or a sub-block hit its iteration budget.
    """
    solver = solver or SolverConfig()
    if (ch.K, ch.M, ch.N) != (cfg.K, cfg.M, cfg.N):
        raise ConfigurationError(
            f"channel dimensions {(ch.K, ch.M, ch.N)} do not match config "
            f"{(cfg.K, cfg.M, cfg.N)}"
        )
    trace = SolveTrace()
    if init_state is not None:
        st = init_state.copy()
    else:
        st = initial_state(ch, cfg, solver.init_strategy, seed=seed, init_a=init_a)
    r_prev = -np.inf
    outer = 0
    try:
        for outer in range(solver.max_outer_iters):
            cand_log: list = []
            st, _ = optimize_receivers(ch, st, solver, candidate_log=cand_log)
            trace.c_candidates.append(cand_log)
            r_a = rate_report(ch, st).r_min
            trace.add(outer, "receivers", r_a, float(np.sum(stage2_denominators(ch, st))))

            st_cand, t_val = optimize_precoders(ch, st, cfg.gamma, solver)
            r_cand = rate_report(ch, st_cand).r_min
            if r_cand >= r_a:
                st = st_cand
                r_b = r_cand
            else:
                r_b = r_a  # reject: barrier endpoint was no better
            trace.add(outer, "precoders", r_b, t_val)

            if np.isfinite(r_prev) and abs(r_b - r_prev) <= solver.rate_tol * max(1.0, abs(r_b)):
                r_prev = r_b
                break
            r_prev = r_b
        else:
            trace.converged = False
    except NonConvergenceError as exc:
        if isinstance(exc.best, DesignState):
            st = exc.best
        trace.converged = False

    st = _quantize_coefficients(st)
    st = _reduce_common_divisors(st)
    try:
        st, _ = optimize_receivers(ch, st, cfg=solver)
    except NonConvergenceError as exc:
        if isinstance(exc.best, DesignState):
            st = exc.best
        trace.converged = False
    report = rate_report(ch, st)
    den_worst = float(
        max(np.max(stage2_denominators(ch, st)), np.max(stage1_denominators(ch, st)))
    )
    trace.add(outer + 1, "quantize", report.r_min, den_worst)

    for k in range(cfg.K):
        if st.power(k) > cfg.gamma + 1e-9:
            raise AssertionError(f"power budget violated for user {k}: {st.power(k)}")
    return st, report, trace


def _objective_key(st: DesignState, report: RateReport, objective: str) -> float:
    if objective == "worst":
        return report.r_min
    if objective == "sum":
        return float(np.sum(np.maximum(per_stream_rates(report, st.a), 0.0)))
    raise ConfigurationError(f"unknown objective {objective!r}")


def state_from_precoders(
    ch: ChannelSet, cfg: SystemConfig, V: np.ndarray
) -> DesignState:
    """Design state around given precoders: no aggregate decoding, c = 1.

    V may come as (K, L, M) rows-per-stream or (K, M, L) columns-per-stream;
    the per-user power is rescaled onto the budget.
    """
    V = np.asarray(V, dtype=complex)
    if V.shape == (cfg.K, cfg.M, cfg.L) and cfg.M != cfg.L:
        V = V.transpose(0, 2, 1)
    if V.shape != (cfg.K, cfg.L, cfg.M):
        raise ConfigurationError(f"precoders must have shape {(cfg.K, cfg.L, cfg.M)}")
    V = V.copy()
    for k in range(cfg.K):
        V[k] *= np.sqrt(cfg.gamma / np.sum(np.abs(V[k]) ** 2))
    return DesignState(
        v=V,
        u=np.zeros((cfg.K, cfg.L, cfg.N), dtype=complex),
        utilde=np.zeros((cfg.K, cfg.L, cfg.N), dtype=complex),
        a=np.zeros((cfg.K, cfg.L, cfg.K, cfg.L), dtype=complex),
        c=np.ones((cfg.K, cfg.L), dtype=complex),
        P=cfg.P,
    )


def multi_start(
    ch: ChannelSet,
    cfg: SystemConfig,
    n_starts: int,
    solver: SolverConfig | None = None,
    objective: str = "worst",
    extra_precoders: tuple[np.ndarray, ...] = (),
) -> tuple[DesignState, RateReport, SolveTrace]:
    """Run the alternating solve from several initializations, keep the best.

    The start list is prefix-stable in n_starts: the deterministic canonical
    start comes first, then the alignment seed when the geometry admits one,
    then seeded random draws, so enlarging n_starts can only improve the
    selected objective.

    Each entry of extra_precoders adds two candidates on top of the n_starts
    budget: a full solve seeded from those precoders, and the plain
    receive-side fit with zero coefficients.  The latter never trails any
    fixed-filter single-user rate for the same precoders, which makes a
    known-good design (for example an alignment solution) a floor for the
    returned objective.
    """
    if n_starts < 1:
        raise ConfigurationError("n_starts must be at least 1")
    solver = solver or SolverConfig()
    starts: list[tuple[str, int | None, str]] = [("identity_like", None, "round")]
    from .baselines import conventional_ia_design

    if conventional_ia_design(ch.Hhat, cfg.L) is not None:
        starts.append(("ia_seed", None, "zero"))
    n_random = max(0, n_starts - len(starts))
    children = np.random.SeedSequence(cfg.seed).spawn(n_random)
    for child in children:
        starts.append(("random_unit", int(child.generate_state(1)[0]), "round"))
    starts = starts[:n_starts]

    results = []
    for strategy, sd, mode in starts:
        run_cfg = replace(solver, init_strategy=strategy)
        results.append(solve(ch, cfg, run_cfg, seed=sd, init_a=mode))
    for V in extra_precoders:
        st0 = state_from_precoders(ch, cfg, V)
        results.append(solve(ch, cfg, solver, init_state=st0))
        try:
            st_rx, _ = optimize_receivers(ch, st0, solver)
        except NonConvergenceError as exc:
            st_rx = exc.best if isinstance(exc.best, DesignState) else st0
        rep_rx = rate_report(ch, st_rx)
        tr_rx = SolveTrace()
        tr_rx.add(0, "receivers", rep_rx.r_min, 0.0)
        results.append((st_rx, rep_rx, tr_rx))

    best = None
    best_key = -np.inf
    for result in results:
        key = _objective_key(result[0], result[1], objective)
        if key > best_key:
            best = result
            best_key = key
    return best
