//! Boltzmann-Gibbs residual shrinking with N, and vanishing for the linear rate.

use std::sync::Arc;

use zrp::fields::FieldContext;
use zrp::measure::integral_second_moment;
use zrp::{JumpRate, ModelParams, SteadyState};

fn main() -> zrp::Result<()> {
    for (label, rate) in [("indicator", JumpRate::constant(1.0)?), ("linear", JumpRate::linear(1.0)?)] {
        let rate = Arc::new(rate);
        for n in [16, 32, 64] {
            let p = ModelParams::new(n, 1.0, (1.0, 2.0, 0.5, 2.0), rate.clone())?;
            let ctx = FieldContext::new(Arc::new(SteadyState::new(p)?));
            let acc = integral_second_moment(&ctx, ctx.bg(|_| 1.0), 0.05, 200, 3)?;
            println!("{label:>9} N {n:>3}: E[B^2] = {:.3e} +- {:.1e}", acc.mean, acc.se());
        }
    }
    Ok(())
}
