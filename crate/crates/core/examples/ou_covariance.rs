//! Stationary covariance of the limiting Ornstein-Uhlenbeck field, from the
//! eigen-expansion of the semigroup, against simulated lag covariances.

use std::sync::Arc;

use zrp::fields::{make_test_battery, FieldContext};
use zrp::measure::lag_covariance;
use zrp::spectral::{ou_covariance, SlProblem};
use zrp::testfn::BoundaryData;
use zrp::{JumpRate, ModelParams, SteadyState};

fn main() -> zrp::Result<()> {
    let p = ModelParams::new(64, 2.0, (0.05, 1.0, 0.05, 1.0), Arc::new(JumpRate::linear(1.0)?))?;
    let st = Arc::new(SteadyState::new(p)?);
    let asy = st.asymptotic();
    let sys = Arc::new(SlProblem::from_profiles(&asy, 512)?.solve(4)?);
    let battery = make_test_battery(&BoundaryData { theta: 2.0, lambda: 1.0, delta: 1.0 }, 2, Some(&sys))?;
    let lags = [0.0, 0.02, 0.05];
    let cov = lag_covariance(&FieldContext::new(st), &battery, &lags, 0.01, 0.15, 400, 2)?;
    for (h, row) in battery.iter().zip(&cov) {
        for (&lag, a) in lags.iter().zip(row) {
            let limit = ou_covariance(&sys, &asy, h, h, lag)?;
            println!("{} lag {lag:.2}: sampled {:.4} +- {:.4}, limit {limit:.4}", h.name(), a.mean, a.se());
        }
    }
    Ok(())
}
