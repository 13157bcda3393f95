//! Relaxation of the hydrodynamic equation to its stationary fugacity profile.

use std::f64::consts::PI;
use std::sync::Arc;

use zrp::hydro::{hydro_solve, stationary_w, HydroBoundary, HydroProblem, PhiMap};
use zrp::JumpRate;

fn main() -> zrp::Result<()> {
    let map = Arc::new(PhiMap::new(Arc::new(JumpRate::constant(1.0)?), 5.0)?);
    let bc = HydroBoundary::Robin { lambda: 2.0, delta: 2.0, alpha: 1.0, beta: 0.5 };
    let sol = hydro_solve(&HydroProblem::new(map, bc, 64, |u| 1.0 + 0.5 * (PI * u).cos(), 4.0, 0.5)?)?;
    for (t, w) in sol.times.iter().zip(&sol.w) {
        let err = sol.u.iter().zip(w).map(|(&u, w)| (w - stationary_w(&bc, u, 0.0)).abs()).fold(0.0, f64::max);
        println!("t {t:.1}: sup |w - w_stat| = {err:.3e}");
    }
    println!("{} explicit steps", sol.steps);
    Ok(())
}
