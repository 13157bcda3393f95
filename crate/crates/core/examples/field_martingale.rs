//! Dynkin martingale of the fluctuation field and its quadratic variation,
//! compared with the limiting norm.

use std::sync::Arc;

use zrp::fields::{make_test_battery, FieldContext};
use zrp::measure::martingale_stats;
use zrp::spectral::{qv_norm, SlProblem};
use zrp::testfn::BoundaryData;
use zrp::{JumpRate, ModelParams, SteadyState};

fn main() -> zrp::Result<()> {
    let p = ModelParams::new(64, 1.0, (1.0, 2.0, 0.5, 2.0), Arc::new(JumpRate::constant(1.0)?))?;
    let st = Arc::new(SteadyState::new(p.clone())?);
    let asy = st.asymptotic();
    let sys = Arc::new(SlProblem::from_profiles(&asy, 512)?.solve(2)?);
    let battery = make_test_battery(&BoundaryData { theta: 1.0, lambda: 2.0, delta: 2.0 }, 2, Some(&sys))?;
    let t = 0.05;
    let stats = martingale_stats(&FieldContext::new(st), &battery, t, 300, 11)?;
    for (h, s) in battery.iter().zip(&stats) {
        println!(
            "{}: E[M^2]/t {:.3} +- {:.3}  E<M>/t {:.3}  limit {:.3}",
            h.name(),
            s.m2.mean / t,
            s.m2.se() / t,
            s.bracket.mean / t,
            qv_norm(h, &asy)
        );
    }
    Ok(())
}
