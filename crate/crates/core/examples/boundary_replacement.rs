//! Log-log slope of the boundary replacement statistic along an N ladder.

use std::sync::Arc;

use zrp::fields::{FieldContext, Side};
use zrp::measure::sup_integral_second_moment;
use zrp::stats::slope_fit;
use zrp::{JumpRate, ModelParams, SteadyState};

fn main() -> zrp::Result<()> {
    let mut pts = Vec::new();
    for n in [16, 32, 64] {
        let p = ModelParams::new(n, 1.0, (1.0, 2.0, 0.5, 2.0), Arc::new(JumpRate::constant(1.0)?))?;
        let ctx = FieldContext::new(Arc::new(SteadyState::new(p)?));
        let acc = sup_integral_second_moment(&ctx, ctx.boundary_replacement(Side::Left), 0.1, 64, 200, 5)?;
        println!("N {n:>3}: E[sup R^2] = {:.3e}", acc.mean);
        pts.push((n as f64, acc.mean));
    }
    let fit = slope_fit(&pts)?;
    println!("slope {:.3} +- {:.3}", fit.slope, fit.stderr);
    Ok(())
}
