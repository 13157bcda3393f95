//! Sturm-Liouville eigenvalues with a variable coefficient in each regime.

use std::sync::Arc;

use zrp::spectral::SlProblem;
use zrp::{AsymptoticProfiles, JumpRate, ModelParams};

fn main() -> zrp::Result<()> {
    let rate = Arc::new(JumpRate::constant(1.0)?);
    for theta in [0.5, 1.0] {
        let p = ModelParams::new(64, theta, (1.0, 3.0, 0.2, 1.0), rate.clone())?;
        let sys = SlProblem::from_profiles(&AsymptoticProfiles::new(&p), 512)?.solve(6)?;
        let (k1, k2) = sys.kappa();
        println!("theta {theta} ({:?}), A in [{k1:.4}, {k2:.4}]", sys.boundary());
        for n in 1..=6 {
            println!("  gamma_{n} = {:>10.4}  sign changes {}", sys.gamma(n), sys.sign_changes(n));
        }
    }
    Ok(())
}
