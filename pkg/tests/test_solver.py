"""Alternating solver: gradients, blocks, safeguards, full pipeline."""

import numpy as np
import pytest

from latticealign.channel import (
    SystemConfig,
    complex_gaussian,
    generate_channels,
    perturb_csi,
)
from latticealign.closedform import SymmetricInstance, symmetric_channelset, symmetric_rmin_lattice
from latticealign.errors import ConfigurationError, NonConvergenceError
from latticealign.gaussint import GaussianInt
from latticealign.rates import rate_report, stage2_rates
from latticealign.solver import (
    SolveTrace,
    SolverConfig,
    _cross_vectors,
    _robust_fun_grad,
    _scaling_value,
    _stage_targets,
    decorrelator_closed_form,
    decorrelator_objective,
    decorrelator_robust,
    initial_state,
    multi_start,
    optimize_precoders,
    optimize_receivers,
    optimize_scaling,
    scaling_candidates,
    solve,
    state_from_precoders,
)


def _random_instance(K=3, eps=0.0, seed=0, P=10.0):
    cfg = SystemConfig(K=K, M=2, N=2, L=1, P=P, epsilon=eps, seed=seed)
    ch = generate_channels(cfg)
    if eps > 0:
        ch = perturb_csi(ch, eps, seed=seed + 10_000)
    return ch, cfg


def test_solver_config_validation():
    SolverConfig()
    with pytest.raises(ConfigurationError):
        SolverConfig(barrier_nu=1.0)
    with pytest.raises(ConfigurationError):
        SolverConfig(rate_tol=0.0)
    with pytest.raises(ConfigurationError):
        SolverConfig(max_outer_iters=0)
    with pytest.raises(ConfigurationError):
        SolverConfig(init_strategy="nope")


@pytest.mark.parametrize("eps", [0.0, 0.15])
def test_robust_objective_gradient_finite_difference(eps):
    ch, cfg = _random_instance(eps=eps, seed=5)
    st = initial_state(ch, cfg, "random_unit", seed=7, init_a="round")
    w = _cross_vectors(ch.Hhat, st.v, 0)
    b = _stage_targets(st, 0, 0, 2)
    nv = np.sqrt(np.sum(np.abs(st.v) ** 2, axis=2)).reshape(-1)
    rng = np.random.default_rng(8)
    for _ in range(5):
        x0 = rng.standard_normal(4)
        _, g = _robust_fun_grad(x0, w, b, nv, eps, cfg.P)
        gfd = np.zeros(4)
        h = 1e-6
        for j in range(4):
            e = np.zeros(4)
            e[j] = h
            fp, _ = _robust_fun_grad(x0 + e, w, b, nv, eps, cfg.P)
            fm, _ = _robust_fun_grad(x0 - e, w, b, nv, eps, cfg.P)
            gfd[j] = (fp - fm) / (2 * h)
        scale = max(1.0, float(np.max(np.abs(gfd))))
        assert np.max(np.abs(g - gfd)) / scale < 1e-6


def test_decorrelator_matches_closed_form_without_uncertainty():
    worst = 0.0
    for i in range(25):
        K = 2 + i % 2
        ch, cfg = _random_instance(K=K, seed=100 + i)
        st = initial_state(ch, cfg, "random_unit", seed=200 + i, init_a="round")
        for k in range(K):
            for stage in (1, 2):
                if stage == 1 and np.all(st.a[k, 0] == 0):
                    continue
                u_cf = decorrelator_closed_form(ch, st, k, 0, stage)
                u_rb = decorrelator_robust(ch, st, k, 0, stage)
                f_cf = decorrelator_objective(ch, st, k, 0, stage, u_cf)
                f_rb = decorrelator_objective(ch, st, k, 0, stage, u_rb)
                worst = max(worst, abs(f_rb - f_cf) / abs(f_cf))
    assert worst < 1e-6


def test_closed_form_is_stationary_point():
    ch, cfg = _random_instance(seed=11)
    st = initial_state(ch, cfg, "random_unit", seed=12, init_a="round")
    u = decorrelator_closed_form(ch, st, 0, 0, 2)
    f0 = decorrelator_objective(ch, st, 0, 0, 2, u)
    rng = np.random.default_rng(13)
    for _ in range(20):
        d = 1e-5 * complex_gaussian(rng, u.shape)
        assert decorrelator_objective(ch, st, 0, 0, 2, u + d) >= f0 - 1e-12


def test_robust_decorrelator_handles_uncertainty_descent():
    """With eps > 0 the robust fit should beat the nominal closed form."""
    better = 0
    for i in range(10):
        ch, cfg = _random_instance(eps=0.25, seed=300 + i)
        st = initial_state(ch, cfg, "random_unit", seed=400 + i, init_a="round")
        if np.all(st.a[0, 0] == 0):
            continue
        u_cf = decorrelator_closed_form(ch, st, 0, 0, 1)
        u_rb = decorrelator_robust(ch, st, 0, 0, 1, u0=u_cf)
        f_cf = decorrelator_objective(ch, st, 0, 0, 1, u_cf)
        f_rb = decorrelator_objective(ch, st, 0, 0, 1, u_rb)
        assert f_rb <= f_cf + 1e-10
        if f_rb < f_cf * (1 - 1e-9):
            better += 1
    assert better > 0  # the worst-case penalty moves the optimum


def test_scaling_candidates_box_size_and_incumbent():
    ch, cfg = _random_instance(seed=21)
    st = initial_state(ch, cfg, "random_unit", seed=22, init_a="round")
    rng = np.random.default_rng(23)
    st.utilde[0, 0] = complex_gaussian(rng, (2,))
    best, cands = scaling_candidates(ch, st, 0, 0)
    assert len(cands) <= 10  # 3x3 closed unit box plus the incumbent
    assert isinstance(best, GaussianInt)
    incumbent = st.c[0, 0]
    assert any(complex(g) == incumbent for g in cands)


def test_scaling_beats_gaussian_integer_sweep():
    rng = np.random.default_rng(24)
    for i in range(50):
        K = int(rng.integers(2, 5))
        eps = float(rng.choice([0.0, 0.1]))
        ch, cfg = _random_instance(K=K, eps=eps, seed=500 + i, P=float(rng.uniform(1, 40)))
        st = initial_state(ch, cfg, "random_unit", seed=600 + i, init_a="round")
        st.utilde[0, 0] = complex_gaussian(rng, (2,))
        c_star = optimize_scaling(ch, st, 0, 0)
        f_star = _scaling_value(ch, st, 0, 0, complex(c_star))
        f_sweep = min(
            _scaling_value(ch, st, 0, 0, complex(re, im))
            for re in range(-4, 5)
            for im in range(-4, 5)
        )
        assert f_star <= f_sweep + 1e-12 * (1 + abs(f_sweep))


def test_scaling_all_zero_coefficients_returns_one():
    ch, cfg = _random_instance(seed=25)
    st = initial_state(ch, cfg, "identity_like", init_a="zero")
    best, cands = scaling_candidates(ch, st, 0, 0)
    assert best == GaussianInt(1, 0)
    assert cands == [GaussianInt(1, 0)]


def test_optimize_receivers_monotone_stage2_trace():
    for i, eps in enumerate([0.0, 0.1]):
        ch, cfg = _random_instance(eps=eps, seed=700 + i)
        st = initial_state(ch, cfg, "random_unit", seed=800 + i, init_a="round")
        st2, trace = optimize_receivers(ch, st)
        for prev, cur in zip(trace, trace[1:]):
            assert np.all(cur >= prev - 1e-9)
        # returned state realizes the last trace entry
        assert np.allclose(stage2_rates(ch, st2), trace[-1])


def test_optimize_receivers_zero_coefficients_use_zero_stage1_filter():
    ch, cfg = _random_instance(seed=26)
    st = initial_state(ch, cfg, "identity_like", init_a="zero")
    st2, _ = optimize_receivers(ch, st)
    assert np.all(st2.u == 0)
    assert np.all(st2.a == 0)


def test_optimize_receivers_escapes_initial_scaling():
    """Joint (utilde, c) scoring finds the better scaling on the oracle case."""
    inst = SymmetricInstance(K=3, h=GaussianInt(2, 0), P=4.0)
    ch, cfg = symmetric_channelset(inst)
    st = initial_state(ch, cfg, "identity_like", init_a="round")
    st2, _ = optimize_receivers(ch, st)
    assert np.allclose(st2.c, 2.0)


def test_optimize_precoders_stays_in_budget_and_helps():
    ch, cfg = _random_instance(seed=27)
    st = initial_state(ch, cfg, "random_unit", seed=28, init_a="round")
    st, _ = optimize_receivers(ch, st)
    r_before = rate_report(ch, st).r_min
    st2, t_val = optimize_precoders(ch, st, cfg.gamma)
    for k in range(cfg.K):
        assert st2.power(k) <= cfg.gamma + 1e-9
    assert np.isfinite(t_val)
    # the epigraph bound equals the worst denominator up to barrier slack
    assert rate_report(ch, st2).r_min >= r_before - 0.05


def test_solve_symmetric_reaches_oracle():
    inst = SymmetricInstance(K=3, h=GaussianInt(2, 0), P=4.0)
    ch, cfg = symmetric_channelset(inst)
    st, rep, trace = solve(ch, cfg)
    assert rep.r_min == pytest.approx(symmetric_rmin_lattice(inst), abs=1e-6)
    assert np.allclose(st.c, 2.0)
    assert trace.converged


def test_solve_trace_monotone_and_csv():
    ch, cfg = _random_instance(eps=0.1, seed=31)
    st, rep, trace = solve(ch, cfg)
    series = trace.pre_quantize_series()
    assert len(series) >= 2
    for prev, cur in zip(series, series[1:]):
        assert cur >= prev - 1e-9
    text = trace.to_csv()
    lines = text.strip().splitlines()
    assert lines[0] == "iter,r_min,stage,objective"
    assert any(",receivers," in ln for ln in lines[1:])
    assert any(",precoders," in ln for ln in lines[1:])
    assert any(",quantize," in ln for ln in lines[1:])


def test_solve_returns_integer_coefficients_and_budget():
    for seed in (32, 33):
        ch, cfg = _random_instance(eps=0.1, seed=seed)
        st, rep, trace = solve(ch, cfg)
        assert np.allclose(st.a.real, np.round(st.a.real))
        assert np.allclose(st.a.imag, np.round(st.a.imag))
        for k in range(cfg.K):
            assert st.power(k) <= cfg.gamma + 1e-9


def test_solve_final_coefficients_divisor_free():
    from latticealign.gaussint import is_divisor_free

    for seed in (34, 35, 36):
        ch, cfg = _random_instance(seed=seed)
        st, rep, trace = solve(ch, cfg)
        for k in range(cfg.K):
            for l in range(cfg.L):
                assert is_divisor_free(st.coeff_vector(k, l))


def test_solve_rejects_mismatched_dimensions():
    ch, _ = _random_instance(seed=37)
    bad = SystemConfig(K=4, M=2, N=2, L=1, P=10.0)
    with pytest.raises(ConfigurationError):
        solve(ch, bad)


def test_solve_with_explicit_initial_state():
    ch, cfg = _random_instance(seed=38)
    st0 = state_from_precoders(ch, cfg, np.ones((3, 1, 2), dtype=complex))
    st, rep, trace = solve(ch, cfg, init_state=st0)
    assert np.isfinite(rep.r_min)


def test_state_from_precoders_normalizes_and_validates():
    ch, cfg = _random_instance(seed=39)
    rng = np.random.default_rng(40)
    V = complex_gaussian(rng, (3, 1, 2))
    st = state_from_precoders(ch, cfg, V)
    for k in range(3):
        assert st.power(k) == pytest.approx(cfg.gamma)
    assert np.all(st.a == 0) and np.all(st.c == 1.0)
    with pytest.raises(ConfigurationError):
        state_from_precoders(ch, cfg, np.ones((2, 1, 2), dtype=complex))


def test_multi_start_prefix_stable_objective():
    ch, cfg = _random_instance(eps=0.1, seed=41)
    _, rep1, _ = multi_start(ch, cfg, n_starts=1)
    _, rep3, _ = multi_start(ch, cfg, n_starts=3)
    assert rep3.r_min >= rep1.r_min - 1e-9


def test_multi_start_extra_precoders_floor():
    """The receive-only candidate makes a good precoder set a rate floor."""
    from latticealign.baselines import distributive_ia_design, ia_stream_rates

    ch, cfg = _random_instance(seed=42, P=20.0)
    rho = cfg.gamma * cfg.P / cfg.L
    V, U, _ = distributive_ia_design(ch.Hhat, cfg.L, rho, 80)
    ia_worst = ia_stream_rates(ch.Hhat, V, U, rho).sum(axis=1).min()
    _, rep, _ = multi_start(ch, cfg, n_starts=1, extra_precoders=(V,))
    assert rep.r_min >= ia_worst - 1e-9


def test_multi_start_objective_sum_vs_worst():
    ch, cfg = _random_instance(seed=43)
    st_w, rep_w, _ = multi_start(ch, cfg, n_starts=2, objective="worst")
    st_s, rep_s, _ = multi_start(ch, cfg, n_starts=2, objective="sum")
    from latticealign.rates import per_stream_rates

    sum_w = np.maximum(per_stream_rates(rep_w, st_w.a), 0).sum()
    sum_s = np.maximum(per_stream_rates(rep_s, st_s.a), 0).sum()
    assert sum_s >= sum_w - 1e-9
    with pytest.raises(ConfigurationError):
        multi_start(ch, cfg, n_starts=0)


def test_initial_state_strategies():
    ch, cfg = _random_instance(seed=44)
    st_id = initial_state(ch, cfg, "identity_like")
    assert st_id.power(0) == pytest.approx(cfg.gamma)
    st_rnd = initial_state(ch, cfg, "random_unit", seed=1)
    assert st_rnd.power(0) == pytest.approx(cfg.gamma)
    st_ia = initial_state(ch, cfg, "ia_seed")
    assert np.all(st_ia.a == 0)
    with pytest.raises(ConfigurationError):
        initial_state(ch, cfg, "bogus")
    with pytest.raises(ConfigurationError):
        initial_state(ch, cfg, "identity_like", init_a="bogus")


def test_initial_state_ia_seed_needs_right_geometry():
    cfg = SystemConfig(K=4, M=2, N=2, L=1, P=10.0, seed=45)
    ch = generate_channels(cfg)
    with pytest.raises(ConfigurationError):
        initial_state(ch, cfg, "ia_seed")


def test_initial_state_recovers_symmetric_coefficients():
    inst = SymmetricInstance(K=3, h=GaussianInt(2, 0), P=4.0)
    ch, cfg = symmetric_channelset(inst)
    st = initial_state(ch, cfg, "identity_like", init_a="round")
    expect = np.ones((3, 1), dtype=complex) * 0  # own entries zero
    for k in range(3):
        row = st.a[k, 0].ravel()
        assert row[k] == 0
        others = [row[i] for i in range(3) if i != k]
        assert others == [1.0 + 0j, 1.0 + 0j]


def test_nonconvergence_error_carries_best():
    err = NonConvergenceError("stuck", best="state", trace=[1, 2])
    assert err.best == "state"
    assert err.trace == [1, 2]
    assert "stuck" in str(err)


def test_solve_trace_records():
    tr = SolveTrace()
    tr.add(0, "receivers", 1.0, 2.0)
    tr.add(0, "precoders", 1.5, 1.0)
    tr.add(1, "quantize", 1.4, 0.5)
    assert tr.r_min_series() == [1.0, 1.5, 1.4]
    assert tr.pre_quantize_series() == [1.0, 1.5]
