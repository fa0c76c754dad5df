"""Monte Carlo engine: determinism, mode semantics, estimator behavior."""

import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from v2xuplink import analytic as an
from v2xuplink import simulator as sim
from v2xuplink.pointprocess import NetworkParams, RngSeed


def _cfg(params, trials=2000, seed=5, **kw):
    return sim.SimConfig(params=params, trials=trials, seed=RngSeed(seed), **kw)


# ---------------------------------------------------------------------------
# single trials
# ---------------------------------------------------------------------------

def test_trial_outcome_fields_consistent(fig4_params):
    cfg = _cfg(fig4_params)
    out = sim.run_trial(cfg, cfg.seed.stream(0))
    assert out.mode_selected in ("v2v", "v2b")
    assert out.r_v > 0 and out.r_b > 0
    assert out.success == (out.sinr > fig4_params.z)
    # selection rule: equal exponents and B=1 reduce to a distance comparison
    assert out.mode_selected == ("v2v" if out.r_v <= out.r_b else "v2b")


def test_trial_determinism(fig4_params):
    cfg = _cfg(fig4_params)
    outs_a = [sim.run_trial(cfg, cfg.seed.stream(i)) for i in range(20)]
    outs_b = [sim.run_trial(cfg, cfg.seed.stream(i)) for i in range(20)]
    assert outs_a == outs_b


def test_isolated_transmitter_always_succeeds():
    # tiny lambda_R and mu_v leave a lone serving vehicle with zero
    # interference in many trials; wherever the threshold also sits far
    # below the power/noise margin, success is forced
    p = NetworkParams(lambda_R=1e-9, mu_v=1e-3, lambda_b=2e-5, z=1.0)
    cfg = sim.SimConfig(params=p, window_radius=500.0, trials=1, seed=RngSeed(1))
    hits = 0
    for i in range(60):
        out = sim.run_trial(cfg, cfg.seed.stream(i))
        if out.I_r + out.I_v > 0.0:
            continue
        serving = out.r_v if out.mode_selected == "v2v" else out.r_b
        alpha = p.alpha_v if out.mode_selected == "v2v" else p.alpha_b
        margin = p.z * p.sigma2 * serving**alpha / p.P_v  # = z / (P_v r^-a / s2)
        if margin < 1e-4:
            hits += 1
            assert out.success
    assert hits >= 3


def test_paper_faithful_exclusion_is_strict(fig4_params):
    cfg = _cfg(fig4_params)
    for i in range(50):
        out = sim.run_trial(cfg, cfg.seed.stream(i))
        serving = out.r_v if out.mode_selected == "v2v" else out.r_b
        assert out.min_interferer_dist > serving


def test_bias_zero_forces_v2b(fig4_params):
    cfg = _cfg(replace(fig4_params, bias_B=0.0), trials=50)
    outs = [sim.run_trial(cfg, cfg.seed.stream(i)) for i in range(50)]
    assert all(o.mode_selected == "v2b" for o in outs)


def test_bias_inf_forces_v2v(fig4_params):
    cfg = _cfg(replace(fig4_params, bias_B=math.inf), trials=50)
    outs = [sim.run_trial(cfg, cfg.seed.stream(i)) for i in range(50)]
    assert all(o.mode_selected == "v2v" for o in outs)


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def test_success_fraction_one_at_zero_threshold(fig4_params):
    cfg = _cfg(fig4_params, trials=500)
    with pytest.warns(UserWarning):
        est = sim.estimate_success(cfg, [0.0])
    assert est.v2x[0].mean == 1.0
    assert est.v2v_only[0].mean == 1.0


def test_estimates_are_deterministic(fig4_params):
    cfg = _cfg(fig4_params, trials=400)
    with pytest.warns(UserWarning):
        a = sim.estimate_success(cfg, [1.0])
        b = sim.estimate_success(cfg, [1.0])
    assert a == b


def test_backends_agree(fig4_params):
    cfg = _cfg(fig4_params, trials=400)
    with pytest.warns(UserWarning):
        a = sim.estimate_success(cfg, [0.1, 1.0, 10.0], backend="numba")
        b = sim.estimate_success(cfg, [0.1, 1.0, 10.0], backend="numpy")
    assert [e.mean for e in a.v2x] == [e.mean for e in b.v2x]
    assert a.assoc_v2v.mean == b.assoc_v2v.mean
    c = sim.estimate_association(cfg, backend="numba")
    d = sim.estimate_association(cfg, backend="numpy")
    assert c == d


def test_ci_halfwidth_scales_with_sqrt_n(fig4_params):
    with pytest.warns(UserWarning):
        small = sim.estimate_success(_cfg(fig4_params, trials=2000), [1.0])
        big = sim.estimate_success(_cfg(fig4_params, trials=8000), [1.0])
    ratio = big.v2x[0].ci_halfwidth / small.v2x[0].ci_halfwidth
    assert abs(ratio - 0.5) < 0.15 * 0.5


def test_exact_ci_brackets_normal_ci(fig4_params):
    cfg = _cfg(fig4_params, trials=200, exact_ci=True)
    with pytest.warns(UserWarning):
        exact = sim.estimate_success(cfg, [1.0])
        normal = sim.estimate_success(replace(cfg, exact_ci=False), [1.0])
    assert exact.v2x[0].mean == normal.v2x[0].mean
    # exact intervals are wider at small n
    assert exact.v2x[0].ci_halfwidth >= normal.v2x[0].ci_halfwidth * 0.9


def test_mode_fraction_monotone_in_bias(fig4_params):
    fractions = []
    for bias in (0.1, 1.0, 10.0, 100.0):
        cfg = _cfg(replace(fig4_params, bias_B=bias), trials=2000)
        fractions.append(sim.estimate_association(cfg).frac_v2v.mean)
    # common random numbers: the selection flips one way only
    assert all(b >= a for a, b in zip(fractions, fractions[1:]))


def test_association_matches_analytic(fig3_params):
    p = replace(fig3_params, mu_v=0.005)
    cfg = _cfg(p, trials=20_000, seed=31)
    est = sim.estimate_association(cfg)
    assert abs(est.frac_v2v.mean - an.assoc_v2v(p)) < 0.02


def test_distance_cdf_endpoints(fig3_params):
    cfg = _cfg(fig3_params, trials=3000)
    grid = [0.0, 100.0, 10_000.0]
    cdf = sim.estimate_distance_cdf(cfg, grid)
    assert cdf.values[0] == 0.0
    assert cdf.values[-1] == 1.0
    assert 0.0 < cdf.values[1] < 1.0


def test_nearest_bs_distance_matches_rayleigh_law(fig3_params):
    cfg = _cfg(fig3_params, trials=4000, seed=17)
    kern = sim._backend.kernels()
    _, r_b, _ = sim._distance_pass(cfg, kern)
    lam = fig3_params.lambda_b
    ks = stats.kstest(r_b, lambda r: 1.0 - np.exp(-math.pi * lam * r**2))
    assert ks.pvalue > 0.01


def test_physical_mode_never_beats_faithful(fig4_params):
    # exercise the mode difference where it exists: bias 0 makes every trial
    # v2b, and physical reception at the base station admits the whole
    # unexcluded interferer field
    p = replace(fig4_params, bias_B=0.0)
    f = _cfg(p, trials=3000, seed=23, mode="paper_faithful")
    ph = _cfg(p, trials=3000, seed=23, mode="physical")
    za = [0.1, 1.0, 10.0]
    ea = sim.estimate_success(f, za)
    eb = sim.estimate_success(ph, za)
    for a, b in zip(ea.v2x, eb.v2x):
        assert b.mean <= a.mean + 1e-12
    # and the two modes agree on forced-v2v outcomes (same geometry)
    for a, b in zip(ea.v2v_only, eb.v2v_only):
        assert a.mean == b.mean


def test_conditional_success_matches_filtered_trials(fig4_params):
    # conditional success at serving distance 10 km against trials whose
    # nearest-vehicle distance lands in [9.5, 10.5] (exclusion enforced by
    # the paper-faithful engine); threshold 0 dB
    analytic_value = an.success_v2v_given_r(1.0, 10.0, fig4_params)
    cfg = _cfg(fig4_params, trials=60_000, seed=41)
    hits = 0
    succ = 0
    for i in range(cfg.trials):
        out = sim.run_trial(cfg, cfg.seed.stream(i))
        if out.mode_selected == "v2v" and 9.5 <= out.r_v <= 10.5:
            hits += 1
            succ += out.sinr > 1.0
    assert hits > 800
    assert abs(succ / hits - analytic_value) < 0.03


def test_conditional_v2b_success_matches_device_oracle():
    # the conditional uplink success is defined over the field with the
    # serving disc emptied; under Rayleigh fading it equals the noise factor
    # times E[exp(-s I)] over that field, which the Laplace estimator
    # measures directly (equal exponents here, so alpha_b == alpha_v)
    p = NetworkParams(lambda_R=0.005, mu_v=0.005, lambda_b=2e-5)
    r_b = 45.0
    analytic_value = an.success_v2b_given_r(1.0, r_b, p)
    s = p.z * r_b**p.alpha_b / p.P_v
    lf = sim.estimate_laplace_functional(_cfg(p, trials=20_000, seed=47), s, r_b)
    mc_value = math.exp(-p.z * p.sigma2 * r_b**p.alpha_b / p.P_v) * lf.combined.mean
    assert abs(mc_value - analytic_value) < 0.03


def test_v2v_only_estimate_matches_analytic(fig4_params):
    est = sim.estimate_success(_cfg(fig4_params, trials=30_000, seed=61), [1.0])
    assert abs(est.v2v_only[0].mean - an.success_v2v_only(1.0, fig4_params)) < 0.03


def test_laplace_product_matches_combined_functional(fig4_params):
    # E[exp(-s(I_v+I_r))] factorizes over independent road groups, so the
    # empirical combined mean must match the two analytic factors multiplied
    r = 10.0
    s = fig4_params.z * r**4 / fig4_params.P_v
    cfg = _cfg(fig4_params, trials=30_000, seed=53)
    est = sim.estimate_laplace_functional(cfg, s, r)
    arg = an.LaplaceArg(s, r, 4.0, fig4_params.mu_v, fig4_params.lambda_R,
                        window_radius=cfg.window_radius, p_v=fig4_params.P_v)
    product = an.laplace_all_roads(arg) * an.laplace_origin_road(
        fig4_params.z, r, 4.0, fig4_params.mu_v
    )
    assert abs(est.combined.mean - product) < 0.02
    assert abs(est.origin_road.mean - an.laplace_origin_road(
        fig4_params.z, r, 4.0, fig4_params.mu_v)) < 0.02


def test_laplace_functional_trivials(fig4_params):
    cfg = _cfg(fig4_params, trials=300)
    est = sim.estimate_laplace_functional(cfg, 0.0, 10.0)
    assert est.all_roads.mean == 1.0
    assert est.origin_road.mean == 1.0
    assert est.combined.mean == 1.0


def test_laplace_functional_no_vehicles_limit(fig4_params):
    sparse = replace(fig4_params, mu_v=1e-7)
    cfg = _cfg(sparse, trials=300)
    est = sim.estimate_laplace_functional(cfg, 1.0, 5.0)
    assert est.combined.mean > 0.999


def test_window_check_raises_with_guidance():
    p = NetworkParams(lambda_R=0.001, mu_v=0.1, lambda_b=2e-5, z=1e4)
    cfg = sim.SimConfig(params=p, window_radius=50.0, trials=10, seed=RngSeed(1))
    with pytest.raises(sim.WindowTooSmallError, match="window_radius"):
        sim.check_window(cfg)
    with pytest.raises(sim.WindowTooSmallError):
        sim.estimate_success(cfg, [p.z])


def test_zero_trials_rejected(fig4_params):
    cfg = sim.SimConfig(params=fig4_params, trials=0, seed=RngSeed(1))
    with pytest.raises(ValueError):
        sim.estimate_success(cfg, [1.0])
    with pytest.raises(ValueError):
        sim.estimate_association(cfg)


def test_config_validation(fig4_params):
    with pytest.raises(ValueError):
        sim.SimConfig(params=fig4_params, trials=-1)
    with pytest.raises(ValueError):
        sim.SimConfig(params=fig4_params, mode="other")
    with pytest.raises(ValueError):
        sim.SimConfig(params=fig4_params, ci_level=1.5)


def test_resampling_counted():
    # ~3% of draws hold a base station, so most trials resample a few times
    p = NetworkParams(lambda_R=0.005, mu_v=0.1, lambda_b=1e-6)
    cfg = sim.SimConfig(params=p, window_radius=100.0, trials=30, seed=RngSeed(9))
    cdf = sim.estimate_distance_cdf(cfg, [1.0, 10.0])
    assert cdf.resamples > 0
