//! Exact event-driven simulation from an empty lattice, with snapshots.

use std::sync::Arc;

use zrp::engine::{Dynamics, LatticeState, Snapshots};
use zrp::rng::stream;
use zrp::{JumpRate, ModelParams, SteadyState};

fn main() -> zrp::Result<()> {
    let p = ModelParams::new(32, 1.0, (1.0, 2.0, 0.5, 2.0), Arc::new(JumpRate::constant(1.0)?))?;
    let st = SteadyState::new(p.clone())?;
    let mut state = LatticeState::new(Arc::new(Dynamics::new(&p)), vec![0; 31]);
    let mut snaps = Snapshots::new(0.05);
    let status = state.run(0.5, &mut [&mut snaps], &mut stream(7, 0), None);
    println!("{} events up to t = {}", status.events, status.time);
    let target: f64 = st.rho().iter().sum();
    for (t, eta) in snaps.times.iter().zip(&snaps.configs) {
        println!("t {t:.2}  particles {:>3}  (steady mean {target:.1})", eta.iter().sum::<u64>());
    }
    Ok(())
}
