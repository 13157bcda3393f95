//! Discrete and limiting steady-state profiles in each boundary regime, and
//! one exact draw from the product measure.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zrp::{JumpRate, ModelParams, SteadyState};

fn main() -> zrp::Result<()> {
    let rate = Arc::new(JumpRate::linear(1.0)?);
    for theta in [-1.0, 0.5, 1.0, 2.0] {
        let st = SteadyState::new(ModelParams::new(16, theta, (2.0, 1.5, 1.0, 0.5), rate.clone())?)?;
        let asy = st.asymptotic();
        println!("theta {theta:>4} ({})", st.params().regime());
        for x in [1, 4, 8, 12, 15] {
            let u = x as f64 / 16.0;
            println!("  x {x:>2}  phi_N {:.5}  phi_lim {:.5}  rho_N {:.5}", st.phi_bar()[x - 1], asy.fugacity(u), st.rho()[x - 1]);
        }
    }
    let st = SteadyState::new(ModelParams::new(16, 1.0, (2.0, 1.5, 1.0, 0.5), rate)?)?;
    let eta = st.sample_ness(&mut ChaCha8Rng::seed_from_u64(1));
    println!("sample {eta:?}");
    Ok(())
}
