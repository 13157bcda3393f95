//! Single-site grand-canonical marginals: density, variance and the inverse
//! map for the shipped jump rates.

use zrp::singlesite::{fugacity_of_density, mean_density, variance, SERIES_TOL};
use zrp::JumpRate;

fn main() -> zrp::Result<()> {
    let rates = [JumpRate::constant(1.0)?, JumpRate::linear(1.0)?, JumpRate::alternating()];
    for rate in &rates {
        println!("{} (radius {})", rate.name(), rate.radius());
        for phi in [0.1, 0.3, 0.5, 0.8] {
            if phi >= rate.radius() {
                continue;
            }
            let rho = mean_density(rate, phi, SERIES_TOL)?;
            let back = fugacity_of_density(rate, rho, SERIES_TOL)?;
            println!("  phi {phi:.2}  R {rho:.6}  Var {:.6}  Phi(R) {back:.12}", variance(rate, phi)?);
        }
    }
    Ok(())
}
