//! Ensemble measurements of field statistics. Each function runs independent
//! trajectories from the steady state (unless stated) and reduces them to
//! moment accumulators in trajectory order.

use std::sync::Arc;

use serde::Serialize;

use crate::engine::{LatticeState, LinearFunctional, Snapshots};
use crate::ensemble::{par_map, Bank, Start};
use crate::error::{Error, Result};
use crate::fields::{dynkin_martingale, FieldContext, MartingaleSlots};
use crate::stats::MomentAccumulator;
use crate::steady::SteadyState;
use crate::testfn::TestFunction;

/// Martingale statistics of one test function at times `t/2` and `t`.
#[derive(Clone, Debug, Serialize)]
pub struct MartingaleStats {
    pub name: String,
    pub t: f64,
    /// `M_t`.
    pub m: MomentAccumulator,
    /// `M_t^2`.
    pub m2: MomentAccumulator,
    /// Integrated predictable bracket `<M>_t`.
    pub bracket: MomentAccumulator,
    /// Sum of squared jumps.
    pub jumps: MomentAccumulator,
    /// `M_t^2 - <M>_t`, mean zero by the isometry.
    pub isometry: MomentAccumulator,
    /// Per-trajectory `sum jumps^2 / <M>_t`.
    pub jump_ratio: MomentAccumulator,
    /// `M_t - M_{t/2}` split by the sign of `M_{t/2}` (negative, non-negative).
    pub conditional: [MomentAccumulator; 2],
}

pub fn martingale_stats(ctx: &FieldContext, battery: &[TestFunction], t: f64, count: usize, seed: u64) -> Result<Vec<MartingaleStats>> {
    let mut bank = Vec::with_capacity(3 * battery.len());
    for h in battery {
        bank.push(ctx.field(h));
        bank.push(ctx.dynkin(h));
        bank.push(ctx.quadratic_variation(h));
    }
    let runs = Bank::new(ctx.steady().clone(), bank, t).with_grid(t / 2.0).run(seed, count)?;
    let mut out: Vec<MartingaleStats> = battery
        .iter()
        .map(|h| MartingaleStats {
            name: h.name().to_string(),
            t,
            m: Default::default(),
            m2: Default::default(),
            bracket: Default::default(),
            jumps: Default::default(),
            isometry: Default::default(),
            jump_ratio: Default::default(),
            conditional: Default::default(),
        })
        .collect();
    for run in &runs {
        let rec = &run.recorder;
        for (j, s) in out.iter_mut().enumerate() {
            let slots = MartingaleSlots { field: 3 * j, drift: 3 * j + 1, qv: Some(3 * j + 2) };
            let path = dynkin_martingale(&rec.initial, &rec.records, slots);
            let (mid, end) = (path[path.len() - 2], path[path.len() - 1]);
            s.m.push(end.m);
            s.m2.push(end.m * end.m);
            s.bracket.push(end.bracket);
            s.jumps.push(end.jumps);
            s.isometry.push(end.m * end.m - end.bracket);
            if end.bracket > 0.0 {
                s.jump_ratio.push(end.jumps / end.bracket);
            }
            s.conditional[(mid.m >= 0.0) as usize].push(end.m - mid.m);
        }
    }
    Ok(out)
}

/// `Y(H_j)` for `count` exact steady-state draws, `samples[draw][j]`.
pub fn static_field(steady: &SteadyState, battery: &[TestFunction], count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let ctx = FieldContext::new(Arc::new(steady.clone()));
    let bank: Vec<LinearFunctional> = battery.iter().map(|h| ctx.field(h)).collect();
    let rate = steady.params().rate.clone();
    par_map(seed, count, |_, rng| {
        let eta = steady.sample_ness(rng);
        Ok(bank.iter().map(|f| f.eval(&eta, &rate)).collect())
    })
}

/// Stationary lag covariances `E[Y_{s+l}(H) Y_s(H)]`, averaged over origins
/// `s` on the grid within each trajectory; one sample per trajectory.
/// Result is indexed `[function][lag]`; lags must be grid multiples.
pub fn lag_covariance(
    ctx: &FieldContext,
    battery: &[TestFunction],
    lags: &[f64],
    dt: f64,
    horizon: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<MomentAccumulator>>> {
    let steps: Vec<usize> = lags
        .iter()
        .map(|&l| {
            let k = (l / dt).round();
            if (k * dt - l).abs() > 1e-9 * dt.max(l) {
                Err(Error::InvalidParameter(format!("lag {l} is not a multiple of the grid {dt}")))
            } else {
                Ok(k as usize)
            }
        })
        .collect::<Result<_>>()?;
    let bank: Vec<LinearFunctional> = battery.iter().map(|h| ctx.field(h)).collect();
    let runs = Bank::new(ctx.steady().clone(), bank, horizon).with_grid(dt).run(seed, count)?;
    let mut out = vec![vec![MomentAccumulator::new(); lags.len()]; battery.len()];
    let last_lag = steps.iter().copied().max().unwrap_or(0);
    for run in &runs {
        let rows = &run.recorder.records;
        if rows.len() <= last_lag {
            return Err(Error::InvalidParameter(format!("horizon {horizon} shorter than the largest lag")));
        }
        let origins = rows.len() - last_lag;
        for (j, acc) in out.iter_mut().enumerate() {
            for (a, &k) in acc.iter_mut().zip(&steps) {
                let s: f64 = (0..origins).map(|o| rows[o].values[j] * rows[o + k].values[j]).sum();
                a.push(s / origins as f64);
            }
        }
    }
    Ok(out)
}

/// Second moment of `int_0^t F(eta_s) ds`.
pub fn integral_second_moment(ctx: &FieldContext, f: LinearFunctional, t: f64, count: usize, seed: u64) -> Result<MomentAccumulator> {
    Ok(integral_second_moments(ctx, vec![f], t, count, seed)?.remove(0))
}

/// Second moments of `int_0^t F_j(eta_s) ds` for several functionals along
/// shared trajectories.
pub fn integral_second_moments(ctx: &FieldContext, fs: Vec<LinearFunctional>, t: f64, count: usize, seed: u64) -> Result<Vec<MomentAccumulator>> {
    let k = fs.len();
    let runs = Bank::new(ctx.steady().clone(), fs, t).run(seed, count)?;
    let mut acc = vec![MomentAccumulator::new(); k];
    for run in &runs {
        let row = run.recorder.records.last().expect("final row");
        for (a, x) in acc.iter_mut().zip(&row.integrals) {
            a.push(x * x);
        }
    }
    Ok(acc)
}

/// Second moment of `sup_k (int_0^{t_k} F)^2` over a grid of `points` times.
pub fn sup_integral_second_moment(ctx: &FieldContext, f: LinearFunctional, t: f64, points: usize, count: usize, seed: u64) -> Result<MomentAccumulator> {
    Ok(sup_integral_second_moments(ctx, vec![f], t, points, count, seed)?.remove(0))
}

/// [`sup_integral_second_moment`] for several functionals along shared trajectories.
pub fn sup_integral_second_moments(
    ctx: &FieldContext,
    fs: Vec<LinearFunctional>,
    t: f64,
    points: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<MomentAccumulator>> {
    let k = fs.len();
    let runs = Bank::new(ctx.steady().clone(), fs, t).with_grid(t / points as f64).run(seed, count)?;
    let mut acc = vec![MomentAccumulator::new(); k];
    for run in &runs {
        for (j, a) in acc.iter_mut().enumerate() {
            let sup = run.recorder.records.iter().map(|r| r.integrals[j] * r.integrals[j]).fold(0.0, f64::max);
            a.push(sup);
        }
    }
    Ok(acc)
}

/// Second moment of the extended martingale at time `t`.
pub fn extended_second_moment(ctx: &FieldContext, h: &TestFunction, eps: f64, t: f64, count: usize, seed: u64) -> Result<MomentAccumulator> {
    let ext = ctx.extended(h, eps)?;
    let bank = vec![ctx.field(h), ext.integrand];
    let runs = Bank::new(ctx.steady().clone(), bank, t).run(seed, count)?;
    let mut acc = MomentAccumulator::new();
    for run in &runs {
        let rec = &run.recorder;
        let path = dynkin_martingale(&rec.initial, &rec.records, MartingaleSlots { field: 0, drift: 1, qv: None });
        let m = path.last().map_or(0.0, |v| v.m);
        acc.push(m * m);
    }
    Ok(acc)
}

/// Time average of `g(eta(x))` over `[0, t]` per site, one sample per trajectory.
pub fn site_time_averages(steady: &Arc<SteadyState>, t: f64, count: usize, seed: u64) -> Result<Vec<MomentAccumulator>> {
    let m = steady.n() - 1;
    let bank: Vec<LinearFunctional> = (0..m)
        .map(|i| {
            let mut f = LinearFunctional::zeros(m);
            f.g_coef[i] = 1.0;
            f
        })
        .collect();
    let runs = Bank::new(steady.clone(), bank, t).run(seed, count)?;
    let mut out = vec![MomentAccumulator::new(); m];
    for run in &runs {
        let row = run.recorder.records.last().expect("final row");
        for (a, v) in out.iter_mut().zip(&row.integrals) {
            a.push(v / t);
        }
    }
    Ok(out)
}

/// Empirical one-site marginals at grid times `k dt`, `k = 1..=frames`;
/// indexed `[frame][site][k]` with the last bin collecting `eta >= cap`.
pub fn marginal_histograms(steady: &SteadyState, start: &Start, dt: f64, frames: usize, cap: usize, count: usize, seed: u64) -> Result<Vec<Vec<Vec<f64>>>> {
    let dynamics = Arc::new(crate::engine::Dynamics::new(steady.params()));
    let m = dynamics.sites();
    let horizon = dt * frames as f64;
    let snaps = par_map(seed, count, |_, rng| {
        let eta = match start {
            Start::Steady => steady.sample_ness(rng),
            Start::Empty => vec![0; m],
            Start::Fixed(e) => e.clone(),
        };
        let mut state = LatticeState::new(dynamics.clone(), eta);
        let mut obs = Snapshots::new(dt);
        state.run(horizon, &mut [&mut obs], rng, None);
        Ok(obs.configs)
    })?;
    let mut hist = vec![vec![vec![0.0; cap + 1]; m]; frames];
    for configs in &snaps {
        for (f, frame) in hist.iter_mut().enumerate() {
            for (site, h) in frame.iter_mut().enumerate() {
                let k = (configs[f + 1][site] as usize).min(cap);
                h[k] += 1.0;
            }
        }
    }
    let norm = 1.0 / count as f64;
    hist.iter_mut().flatten().flatten().for_each(|v| *v *= norm);
    Ok(hist)
}
