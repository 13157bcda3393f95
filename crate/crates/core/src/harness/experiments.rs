use std::f64::consts::PI;
use std::sync::Arc;

use super::{num, Experiment, Report, Table, Verdict};
use crate::config::RunConfig;
use crate::ensemble::par_map;
use crate::error::{Error, Result};
use crate::fields::{make_test_battery, FieldContext, Side};
use crate::hydro::{hydro_solve, stationary_w, HydroBoundary, HydroProblem, HydroSolution, PhiMap};
use crate::measure;
use crate::rate::JumpRate;
use crate::rng::subseed;
use crate::singlesite::{self, SERIES_TOL};
use crate::spectral::{self, Boundary, EigenSystem, SlProblem};
use crate::stats::{ks_two_sample, slope_fit, MomentAccumulator};
use crate::steady::{AsymptoticProfiles, ModelParams, Regime, SteadyState};
use crate::testfn::{BoundaryData, FunctionClass, TestFunction};

pub(super) fn run(cfg: &RunConfig, experiment: Experiment) -> Result<Report> {
    let params = cfg.model.params()?;
    let mut r = Report::default();
    r.note("regime", params.regime());
    r.note("rate", params.rate.name());
    r.note("rate_bounded", params.rate.is_bounded());
    match experiment {
        Experiment::SteadyCheck => steady_check(cfg, &params, &mut r)?,
        Experiment::Simulate => simulate(cfg, &params, &mut r)?,
        Experiment::FluctVerify => fluct_verify(cfg, &params, &mut r)?,
        Experiment::BgCheck => bg_check(cfg, &params, &mut r)?,
        Experiment::BoundaryScaling => boundary_scaling(cfg, &params, &mut r)?,
        Experiment::Spectral => spectral_check(cfg, &params, &mut r)?,
        Experiment::Hydro => hydro_check(cfg, &params, &mut r)?,
        Experiment::ExtendedMartingale => extended(cfg, &params, &mut r)?,
    }
    Ok(r)
}

fn or<T: Clone>(v: &Option<T>, default: T) -> T {
    v.clone().unwrap_or(default)
}

const SE_BAND: f64 = 3.0;

/// Regime-correct battery, with the eigensystem it came from when `theta >= 0`.
fn battery(cfg: &RunConfig, p: &ModelParams, count: usize) -> Result<(Vec<TestFunction>, Option<Arc<EigenSystem>>)> {
    let data = BoundaryData { theta: p.theta, lambda: p.lambda, delta: p.delta };
    if p.regime() == Regime::DirichletStrong {
        return Ok((make_test_battery(&data, count, None)?, None));
    }
    let asy = AsymptoticProfiles::new(p);
    let modes = or(&cfg.experiment.modes, count.max(8));
    let grid = or(&cfg.experiment.spectral_grid, (64 * modes).max(1024));
    let sys = Arc::new(SlProblem::from_profiles(&asy, grid)?.solve(modes)?);
    Ok((make_test_battery(&data, count, Some(&sys))?, Some(sys)))
}

fn max_abs(xs: impl Iterator<Item = f64>) -> f64 {
    xs.fold(0.0, |m, x| m.max(x.abs()))
}

fn steady_check(cfg: &RunConfig, p: &ModelParams, r: &mut Report) -> Result<()> {
    let st = SteadyState::new(p.clone())?;
    let asy = st.asymptotic();
    let (phi, rho, var) = (st.phi_bar(), st.rho(), st.variance());
    let m = phi.len();

    let mut profile = Table::new("profile", &["x", "phi_bar", "rho_bar", "chi"]);
    for i in 0..m {
        profile.push(vec![(i + 1).to_string(), num(phi[i]), num(rho[i]), num(var[i])]);
    }
    r.tables.push(profile);
    let mut limit = Table::new("limit_profile", &["u", "phi", "rho", "chi"]);
    for j in 0..=100 {
        let u = j as f64 / 100.0;
        limit.push_nums(&[u, asy.fugacity(u), asy.density(u)?, asy.chi(u)?]);
    }
    r.tables.push(limit);

    let bound = p.admissibility_bound();
    let radius = p.rate.radius();
    r.note("admissibility_bound", bound);
    r.note("radius", num(radius));
    r.verdict("admissible", Verdict { pass: bound < radius, ..Verdict::at_most(bound, radius) });

    let (left, right) = (st.increment_left(), st.increment_right());
    let scale = max_abs(phi.iter().copied()).max(1.0) * [p.alpha, p.lambda, p.beta, p.delta, 1.0].into_iter().fold(0.0, f64::max);
    let tol = cfg.tolerance("affine-increment", 1e-12) * scale * (p.n as f64).powf(-p.theta).max(1.0);
    let worst = max_abs(phi.windows(2).map(|w| w[1] - w[0] - left)).max((left - right).abs());
    r.verdict("affine-increment", Verdict::at_most(worst, tol));
    let constant = left.abs() <= tol;
    r.note("constant_profile", constant);

    let eg = st.expected_g_profile();
    r.verdict("expected-g", Verdict::at_most(max_abs(eg.iter().zip(phi).map(|(a, b)| a - b)), cfg.tolerance("expected-g", 1e-9)));

    let draws = or(&cfg.experiment.static_samples, 10_000);
    let samples = par_map(subseed(cfg.experiment.seed, "ness"), draws, |_, rng| Ok(st.sample_ness(rng)))?;
    let mut means = Table::stats("sampler");
    let mut worst_z: f64 = 0.0;
    for i in 0..m {
        let acc = MomentAccumulator::from_slice(&samples.iter().map(|s| s[i] as f64).collect::<Vec<_>>());
        worst_z = worst_z.max((acc.mean - rho[i]).abs() / acc.se());
        means.push_stat(p.n, p.theta, &format!("x={}", i + 1), "mean_eta", acc.mean, Some(acc.se()), draws);
        means.push_stat(p.n, p.theta, &format!("x={}", i + 1), "rho_bar", rho[i], None, draws);
    }
    r.tables.push(means);
    r.verdict("sampler-means", Verdict { rule: format!("max standardised deviation at most {SE_BAND}"), ..Verdict::at_most(worst_z, SE_BAND) });
    if constant && m >= 2 {
        let a: Vec<f64> = samples.iter().map(|s| s[0] as f64).collect();
        let b: Vec<f64> = samples.iter().map(|s| s[m - 1] as f64).collect();
        let (d, pval) = ks_two_sample(&a, &b);
        r.note("ks_statistic", d);
        r.verdict("symmetric-ks", Verdict { pass: pval > 0.01, value: pval, target: 0.01, tolerance: 0.0, rule: "p-value above".into() });
    }

    let ladder = or(&cfg.experiment.n_ladder, (4..=10).map(|k| 1usize << k).collect());
    let mut gap = Table::stats("profile_gap");
    for &n in &ladder {
        let q = p.with_n(n)?;
        let g = max_abs((1..n).map(|x| q.profile_at(x) - asy.fugacity(x as f64 / n as f64)));
        gap.push_stat(n, p.theta, "-", "sup_gap", g, None, 0);
    }
    r.tables.push(gap);
    Ok(())
}

fn simulate(cfg: &RunConfig, p: &ModelParams, r: &mut Report) -> Result<()> {
    let st = Arc::new(SteadyState::new(p.clone())?);
    let t = or(&cfg.experiment.horizon, 1.0);
    let count = or(&cfg.experiment.trajectories, 200);
    let avgs = measure::site_time_averages(&st, t, count, subseed(cfg.experiment.seed, "simulate"))?;
    let mut table = Table::stats("time_averages");
    let mut worst: f64 = 0.0;
    for (i, a) in avgs.iter().enumerate() {
        let target = st.phi_bar()[i];
        worst = worst.max((a.mean - target).abs() / a.se());
        let id = format!("x={}", i + 1);
        table.push_stat(p.n, p.theta, &id, "time_avg_g", a.mean, Some(a.se()), count);
        table.push_stat(p.n, p.theta, &id, "phi_bar", target, None, count);
    }
    r.tables.push(table);
    r.verdict("ergodic-average", Verdict { rule: format!("max standardised deviation at most {SE_BAND}"), ..Verdict::at_most(worst, SE_BAND) });
    Ok(())
}

fn fluct_verify(cfg: &RunConfig, p: &ModelParams, r: &mut Report) -> Result<()> {
    let e = &cfg.experiment;
    let st = Arc::new(SteadyState::new(p.clone())?);
    let ctx = FieldContext::new(st.clone());
    let asy = st.asymptotic();
    let (battery, sys) = battery(cfg, p, or(&e.battery, 4))?;
    let nf = p.n as f64;
    let mut table = Table::stats("fluctuations");

    // Static covariance against the finite-N quadrature.
    let draws = or(&e.static_samples, 10_000);
    let samples = measure::static_field(&st, &battery, draws, subseed(e.seed, "static"))?;
    let tol = cfg.tolerance("static-variance", 0.05);
    for (j, h) in battery.iter().enumerate() {
        let acc = MomentAccumulator::from_slice(&samples.iter().map(|s| s[j]).collect::<Vec<_>>());
        let quad = st.variance().iter().enumerate().map(|(i, v)| h.value((i + 1) as f64 / nf).powi(2) * v).sum::<f64>() / nf;
        table.push_stat(p.n, p.theta, h.name(), "static_mean", acc.mean, Some(acc.se()), draws);
        table.push_stat(p.n, p.theta, h.name(), "static_variance", acc.variance(), None, draws);
        table.push_stat(p.n, p.theta, h.name(), "quadrature_variance", quad, None, draws);
        table.push_stat(p.n, p.theta, h.name(), "limit_variance", spectral::static_covariance(h, h, &asy)?, None, draws);
        r.verdict(format!("static-variance/{}", h.name()), Verdict::relative(acc.variance(), quad, tol));
    }

    // Martingale and quadratic variation.
    let t = or(&e.horizon, 0.1);
    let count = or(&e.trajectories, 2000);
    let stats = measure::martingale_stats(&ctx, &battery, t, count, subseed(e.seed, "martingale"))?;
    let norms: Vec<f64> = battery.iter().map(|h| spectral::qv_norm(h, &asy)).collect();
    let top = norms.iter().copied().fold(0.0, f64::max);
    let qv_tol = cfg.tolerance("qv-norm", 0.10);
    let mut checked = 0;
    for ((h, s), &norm) in battery.iter().zip(&stats).zip(&norms) {
        let id = h.name();
        for (name, a) in [
            ("m", &s.m),
            ("m2_over_t", &scaled(&s.m2, 1.0 / t)),
            ("bracket_over_t", &scaled(&s.bracket, 1.0 / t)),
            ("isometry", &s.isometry),
            ("jump_ratio", &s.jump_ratio),
            ("increment_given_negative", &s.conditional[0]),
            ("increment_given_nonnegative", &s.conditional[1]),
        ] {
            table.push_stat(p.n, p.theta, id, name, a.mean, Some(a.se()), a.count as usize);
        }
        table.push_stat(p.n, p.theta, id, "qv_norm", norm, None, count);
        if checked < 2 && norm > 1e-9 * top {
            checked += 1;
            r.verdict(format!("qv-norm/{id}"), Verdict::relative(s.m2.mean / t, norm, qv_tol));
            r.verdict(format!("isometry/{id}"), Verdict::within_se(s.isometry.mean, s.isometry.se(), 0.0, SE_BAND));
        }
    }

    // Stationary lag covariances against the limiting OU process.
    match sys {
        Some(sys) => {
            let lags = or(&e.lags, vec![0.0, 0.05, 0.1]);
            let dt = or(&e.snapshot_dt, 0.01);
            let last = lags.iter().copied().fold(0.0, f64::max);
            let horizon = 3.0 * last.max(dt);
            let funcs = &battery[..battery.len().min(2)];
            let cov = measure::lag_covariance(&ctx, funcs, &lags, dt, horizon, count, subseed(e.seed, "lag"))?;
            let lag_tol = cfg.tolerance("lag-covariance", 0.10);
            for (h, accs) in funcs.iter().zip(&cov) {
                for (&lag, a) in lags.iter().zip(accs) {
                    let target = spectral::ou_covariance(&sys, &asy, h, h, lag)?;
                    let stat = format!("lag_covariance@{lag:?}");
                    table.push_stat(p.n, p.theta, h.name(), &stat, a.mean, Some(a.se()), count);
                    table.push_stat(p.n, p.theta, h.name(), &format!("ou_covariance@{lag:?}"), target, None, count);
                    r.verdict(format!("lag-covariance/{}/{lag:?}", h.name()), Verdict::relative(a.mean, target, lag_tol));
                }
            }
            r.note("lag_horizon", horizon);
        }
        None => r.note("lag_covariance", "skipped: no eigensystem for theta < 0"),
    }
    r.tables.push(table);
    Ok(())
}

fn scaled(a: &MomentAccumulator, c: f64) -> MomentAccumulator {
    let mut out = *a;
    out.mean *= c;
    out.m2 *= c * c;
    out.max = out.max.map(|m| m * c);
    out
}

fn bg_check(cfg: &RunConfig, p: &ModelParams, r: &mut Report) -> Result<()> {
    let e = &cfg.experiment;
    let ladder = or(&e.n_ladder, vec![32, 64, 128]);
    let t = or(&e.horizon, 0.1);
    let count = or(&e.trajectories, 500);
    let eps = or(&e.eps, 0.25);
    let mut table = Table::stats("bg");
    let mut bg = Vec::new();
    for &n in &ladder {
        let ctx = FieldContext::new(Arc::new(SteadyState::new(p.with_n(n)?)?));
        let mut fs = vec![ctx.bg(|_| 1.0)];
        let local = ctx.box_sites(eps).is_ok();
        if local {
            fs.push(ctx.local_bg(eps, Side::Left)?);
            fs.push(ctx.local_bg(eps, Side::Right)?);
        }
        let acc = measure::integral_second_moments(&ctx, fs, t, count, subseed(e.seed, &format!("bg{n}")))?;
        table.push_stat(n, p.theta, "G=1", "bg_second_moment", acc[0].mean, Some(acc[0].se()), count);
        if local {
            table.push_stat(n, p.theta, "left", "local_bg_second_moment", acc[1].mean, Some(acc[1].se()), count);
            table.push_stat(n, p.theta, "right", "local_bg_second_moment", acc[2].mean, Some(acc[2].se()), count);
        }
        bg.push(acc[0].mean);
    }
    let decreasing = bg.windows(2).all(|w| w[1] < w[0]);
    r.verdict("bg-decreasing", Verdict::flag(decreasing, "second moment strictly decreasing along the ladder"));

    // The linear rate makes the integrand vanish identically.
    let n0 = ladder.iter().copied().min().unwrap_or(p.n);
    let lin = ModelParams::new(n0, p.theta, (p.alpha, p.lambda, p.beta, p.delta), Arc::new(JumpRate::linear(1.0)?))?;
    let ctx = FieldContext::new(Arc::new(SteadyState::new(lin)?));
    let acc = measure::integral_second_moment(&ctx, ctx.bg(|_| 1.0), t, count.min(50), subseed(e.seed, "bg-linear"))?;
    table.push_stat(n0, p.theta, "G=1", "bg_second_moment_linear_rate", acc.mean, Some(acc.se()), acc.count as usize);
    r.verdict("bg-linear-zero", Verdict::at_most(acc.mean, cfg.tolerance("bg-linear-zero", 1e-12)));

    r.tables.push(table);
    r.note("bg_site_range", "x = 2..N-2");
    r.note("local_bg_site_range", "x = 1..floor(eps N) on the left, N - floor(eps N)..N-1 on the right");
    r.note("local_bg_eps", eps);
    if !p.rate.is_bounded() {
        r.note("warning", "unbounded rate: the replacement theorem assumes a bounded rate");
    }
    Ok(())
}

fn boundary_scaling(cfg: &RunConfig, p: &ModelParams, r: &mut Report) -> Result<()> {
    let e = &cfg.experiment;
    let ladder = or(&e.n_ladder, vec![32, 64, 128, 256]);
    let t = or(&e.horizon, 0.1);
    let count = or(&e.trajectories, 300);
    let points = 64;
    let mut table = Table::stats("boundary_replacement");
    let mut pts = [Vec::new(), Vec::new()];
    for &n in &ladder {
        let ctx = FieldContext::new(Arc::new(SteadyState::new(p.with_n(n)?)?));
        let fs = vec![ctx.boundary_replacement(Side::Left), ctx.boundary_replacement(Side::Right)];
        let acc = measure::sup_integral_second_moments(&ctx, fs, t, points, count, subseed(e.seed, &format!("br{n}")))?;
        for (k, side) in ["left", "right"].into_iter().enumerate() {
            table.push_stat(n, p.theta, side, "sup_r2", acc[k].mean, Some(acc[k].se()), count);
            pts[k].push((n as f64, acc[k].mean));
        }
    }
    let target = p.theta - 2.0;
    let tol = cfg.tolerance("boundary-slope", 0.5);
    let mut slopes = Table::new("slopes", &["side", "slope", "stderr", "target"]);
    for (k, side) in ["left", "right"].into_iter().enumerate() {
        let fit = slope_fit(&pts[k])?;
        slopes.push(vec![side.into(), num(fit.slope), num(fit.stderr), num(target)]);
        r.verdict(format!("slope/{side}"), Verdict::absolute(fit.slope, target, tol));
    }
    r.tables.push(table);
    r.tables.push(slopes);
    r.note("sup_grid_points", points);
    r.note("sup_note", "the supremum is taken over a time grid and is a lower bound for the continuum supremum");
    Ok(())
}

fn spectral_check(cfg: &RunConfig, p: &ModelParams, r: &mut Report) -> Result<()> {
    let modes = or(&cfg.experiment.modes, 20).max(8);
    let grid = or(&cfg.experiment.spectral_grid, (64 * modes).max(1024));
    let mut table = Table::new("spectrum", &["case", "n", "gamma", "lower", "upper", "sign_changes"]);

    let tol = cfg.tolerance("closed-form", 1e-4);
    for (case, bc, shift) in [("dirichlet-constant", Boundary::Dirichlet, 0.0), ("neumann-constant", Boundary::Neumann, 1.0)] {
        let sys = SlProblem::constant(1.0, bc, grid)?.solve(8)?;
        let mut worst: f64 = 0.0;
        for n in 1..=8 {
            let exact = ((n as f64 - shift) * PI).powi(2);
            let g = sys.gamma(n);
            worst = worst.max(if exact == 0.0 { g.abs() } else { (g - exact).abs() / exact });
            table.push(vec![case.into(), n.to_string(), num(g), num(exact), num(exact), sys.sign_changes(n).to_string()]);
        }
        r.verdict(format!("closed-form/{case}"), Verdict::at_most(worst, tol));
    }

    // Variable coefficients from the model's limit profiles. The Neumann limit
    // profile is flat, so the Neumann case borrows the Dirichlet-regime coefficient.
    let at = |theta: f64| AsymptoticProfiles { theta, ..AsymptoticProfiles::new(p) };
    let dir = at(0.5);
    let cases: [(&str, AsymptoticProfiles, Boundary); 3] = [
        ("dirichlet", dir.clone(), Boundary::Dirichlet),
        ("robin", at(1.0), Boundary::Robin { lambda: p.lambda, delta: p.delta }),
        ("neumann", dir.clone(), Boundary::Neumann),
    ];
    for (case, asy, bc) in cases {
        let a = asy.clone();
        let coef: crate::testfn::Eval = Arc::new(move |u| a.dphi(u).unwrap_or(f64::NAN));
        let sys = SlProblem::new(coef, bc, grid)?.solve(modes)?;
        let (k1, k2) = sys.kappa();
        let mut sandwich = true;
        let mut oscillation = true;
        for n in 1..=modes {
            let g = sys.gamma(n);
            let lo = k1 * ((n as f64 - 2.0).max(0.0) * PI).powi(2);
            let hi = k2 * ((n as f64 + 1.0) * PI).powi(2);
            if n >= 2 {
                sandwich &= lo <= g && g <= hi;
            }
            oscillation &= sys.sign_changes(n) == n - 1;
            table.push(vec![case.into(), n.to_string(), num(g), num(lo), num(hi), sys.sign_changes(n).to_string()]);
        }
        r.verdict(format!("sandwich/{case}"), Verdict::flag(sandwich, format!("kappa bounds for n = 2..={modes}")));
        r.verdict(format!("oscillation/{case}"), Verdict::flag(oscillation, format!("n - 1 sign changes for n = 1..={modes}")));
        r.note(&format!("kappa/{case}"), [k1, k2]);
    }
    r.tables.push(table);
    r.note("neumann_coefficient", "Neumann case uses the theta < 1 limit coefficient so that A varies");
    Ok(())
}

fn hydro_check(cfg: &RunConfig, p: &ModelParams, r: &mut Report) -> Result<()> {
    let e = &cfg.experiment;
    let m = or(&e.hydro_grid, 128);
    let asy = AsymptoticProfiles::new(p);
    let phi_c = (p.alpha + p.beta) / (p.lambda + p.delta);
    let rho_c = singlesite::mean_density(&p.rate, phi_c, SERIES_TOL)?;
    let init = move |u: f64| rho_c * (1.0 + 0.5 * (PI * u).cos());
    let map = Arc::new(PhiMap::new(p.rate.clone(), 2.0 * rho_c + 1.0)?);

    // Default horizon: long enough for the slowest linearised mode to decay by 1e-7.
    let horizon = match e.horizon {
        Some(h) => h,
        None => {
            let robin = SlProblem::from_profiles(&AsymptoticProfiles { theta: 1.0, ..asy.clone() }, 256)?.solve(1)?.gamma(1);
            let neumann = map.dphi(rho_c)? * PI * PI;
            (16.0 / robin.min(neumann)).min(500.0)
        }
    };
    let frame_dt = or(&e.snapshot_dt, horizon / 20.0);
    r.note("horizon", horizon);

    let robin_bc = HydroBoundary::Robin { lambda: p.lambda, delta: p.delta, alpha: p.alpha, beta: p.beta };
    let robin = hydro_solve(&HydroProblem::new(map.clone(), robin_bc, m, init, horizon, frame_dt)?)?;
    let err = max_abs(robin.u.iter().zip(robin.final_w()).map(|(&u, w)| w - stationary_w(&robin_bc, u, 0.0)));
    r.verdict("robin-stationary", Verdict::at_most(err, cfg.tolerance("hydro-stationary", 1e-3)));
    r.tables.push(frames("robin", &robin));

    let neumann = hydro_solve(&HydroProblem::new(map.clone(), HydroBoundary::Neumann, m, init, horizon, frame_dt)?)?;
    let m0 = neumann.mass(0);
    let level = map.phi(m0)?;
    let err = max_abs(neumann.final_w().iter().map(|w| w - level));
    r.verdict("neumann-stationary", Verdict::at_most(err, cfg.tolerance("hydro-stationary", 1e-3)));
    let drift = max_abs((0..neumann.times.len()).map(|k| neumann.mass(k) - m0));
    r.verdict("neumann-mass", Verdict::at_most(drift, cfg.tolerance("hydro-mass", 1e-8)));
    r.tables.push(frames("neumann", &neumann));

    let own = HydroBoundary::for_params(p);
    if own.conjectural() {
        let dir = hydro_solve(&HydroProblem::new(map, own, m, init, horizon, frame_dt)?)?;
        r.tables.push(frames("dirichlet", &dir));
        r.note("dirichlet_conjectural", true);
    }
    Ok(())
}

fn frames(name: &str, sol: &HydroSolution) -> Table {
    let mut t = Table::new(name, &["t", "u", "rho", "w"]);
    for (k, &time) in sol.times.iter().enumerate() {
        for (j, &u) in sol.u.iter().enumerate() {
            t.push_nums(&[time, u, sol.rho[k][j], sol.w[k][j]]);
        }
    }
    t
}

fn extended(cfg: &RunConfig, p: &ModelParams, r: &mut Report) -> Result<()> {
    if p.theta < 1.0 {
        return Err(Error::RegimeMismatch { regime: p.regime().to_string(), reason: "the extended martingale needs theta >= 1".into() });
    }
    let e = &cfg.experiment;
    let st = Arc::new(SteadyState::new(p.clone())?);
    let ctx = FieldContext::new(st.clone());
    let asy = st.asymptotic();
    let eps = e.eps.unwrap_or_else(|| ctx.default_eps());
    let t = or(&e.horizon, 0.1);
    let count = or(&e.trajectories, 2000);
    let h = TestFunction::affine(0.0, 1.0, FunctionClass::Free).with_name("u");
    let ext = ctx.extended(&h, eps)?;
    let acc = measure::extended_second_moment(&ctx, &h, eps, t, count, subseed(e.seed, "extended"))?;
    let norm = spectral::starred_norm(&h, &asy)?;
    let mut table = Table::stats("extended");
    table.push_stat(p.n, p.theta, "u", "second_moment_over_t", acc.mean / t, Some(acc.se() / t), count);
    table.push_stat(p.n, p.theta, "u", "starred_norm", norm, None, count);
    table.push_stat(p.n, p.theta, "u", "c0", ext.c0, None, count);
    table.push_stat(p.n, p.theta, "u", "c1", ext.c1, None, count);
    r.verdict("starred-norm", Verdict::relative(acc.mean / t, norm, cfg.tolerance("starred-norm", 0.15)));

    let (battery, _) = battery(cfg, p, or(&e.battery, 4))?;
    let mut worst: f64 = 0.0;
    for b in &battery {
        let x = ctx.extended(b, eps)?;
        worst = worst.max(x.c0.abs()).max(x.c1.abs());
        table.push_stat(p.n, p.theta, b.name(), "c0", x.c0, None, 0);
        table.push_stat(p.n, p.theta, b.name(), "c1", x.c1, None, 0);
    }
    r.verdict("eigen-coefficients", Verdict::at_most(worst, cfg.tolerance("eigen-coefficients", 1e-8)));
    r.tables.push(table);
    r.note("eps", eps);
    r.note("box_sites", ext.box_sites);
    Ok(())
}
