//! Boundary-corrected martingale for a test function with no boundary
//! condition, in the Neumann regime.

use std::sync::Arc;

use zrp::fields::FieldContext;
use zrp::measure::extended_second_moment;
use zrp::spectral::starred_norm;
use zrp::testfn::{FunctionClass, TestFunction};
use zrp::{JumpRate, ModelParams, SteadyState};

fn main() -> zrp::Result<()> {
    let p = ModelParams::new(64, 2.0, (1.0, 2.0, 0.5, 2.0), Arc::new(JumpRate::constant(1.0)?))?;
    let st = Arc::new(SteadyState::new(p)?);
    let ctx = FieldContext::new(st.clone());
    let h = TestFunction::affine(0.0, 1.0, FunctionClass::Free);
    let eps = 1.0 / 16.0;
    let ext = ctx.extended(&h, eps)?;
    let t = 0.05;
    let acc = extended_second_moment(&ctx, &h, eps, t, 300, 9)?;
    println!("c0 {} c1 {} over {} boundary sites", ext.c0, ext.c1, ext.box_sites);
    println!("E[M*^2]/t = {:.3} +- {:.3}, norm {:.3}", acc.mean / t, acc.se() / t, starred_norm(&h, &st.asymptotic())?);
    Ok(())
}
