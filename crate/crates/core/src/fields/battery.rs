use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{Boundary, EigenSystem};
use crate::steady::Regime;
use crate::testfn::{BoundaryData, FunctionClass, TestFunction};

/// `count` regime-correct test functions. For `theta < 0` the bump family is
/// used and `system` is ignored; otherwise the first eigenfunctions of
/// `system`, whose boundary conditions must match the regime.
pub fn make_test_battery(data: &BoundaryData, count: usize, system: Option<&Arc<EigenSystem>>) -> Result<Vec<TestFunction>> {
    let regime = Regime::of(data.theta);
    if regime == Regime::DirichletStrong {
        let out: Vec<_> = (1..=count).map(TestFunction::bump).collect();
        for h in &out {
            h.check_membership(data, (1.0, 1.0))?;
        }
        return Ok(out);
    }
    let sys = system.ok_or_else(|| Error::RegimeMismatch {
        regime: regime.to_string(),
        reason: "an eigensystem is required for theta >= 0".into(),
    })?;
    let matches = match (regime, sys.boundary()) {
        (Regime::Dirichlet, Boundary::Dirichlet) | (Regime::Neumann, Boundary::Neumann) => true,
        (Regime::Robin, Boundary::Robin { lambda, delta }) => lambda == data.lambda && delta == data.delta,
        _ => false,
    };
    if !matches {
        return Err(Error::RegimeMismatch {
            regime: regime.to_string(),
            reason: format!("eigensystem has boundary {:?}", sys.boundary()),
        });
    }
    if count > sys.len() {
        return Err(Error::InvalidParameter(format!("battery of {count} needs that many modes, system has {}", sys.len())));
    }
    let ends = (sys.coefficient(0.0), sys.coefficient(1.0));
    (1..=count)
        .map(|n| {
            let h = sys.test_function(n, FunctionClass::Regime(regime));
            h.check_membership(data, ends)?;
            Ok(h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SlProblem;
    use std::f64::consts::PI;

    fn data(theta: f64) -> BoundaryData {
        BoundaryData { theta, lambda: 1.0, delta: 1.0 }
    }

    #[test]
    fn constant_coefficient_batteries_are_trig() {
        let neu = Arc::new(SlProblem::constant(1.0, Boundary::Neumann, 1024).unwrap().solve(4).unwrap());
        let b = make_test_battery(&data(2.0), 4, Some(&neu)).unwrap();
        for (k, h) in b.iter().enumerate() {
            for u in [0.1, 0.37, 0.8] {
                let want = if k == 0 { 1.0 } else { 2f64.sqrt() * (k as f64 * PI * u).cos() };
                assert!((h.value(u).abs() - want.abs()).abs() < 1e-5, "k={k} u={u}");
            }
        }
        let dir = Arc::new(SlProblem::constant(1.0, Boundary::Dirichlet, 1024).unwrap().solve(3).unwrap());
        let b = make_test_battery(&data(0.5), 3, Some(&dir)).unwrap();
        for (k, h) in b.iter().enumerate() {
            let want = 2f64.sqrt() * ((k + 1) as f64 * PI * 0.3).sin();
            assert!((h.value(0.3).abs() - want.abs()).abs() < 1e-5);
        }
    }

    #[test]
    fn strong_dirichlet_uses_bumps() {
        let b = make_test_battery(&data(-1.0), 3, None).unwrap();
        assert_eq!(b.len(), 3);
        for k in 0..=4 {
            assert!(b[0].derivative(k, 0.0).abs() < 1e-10);
        }
    }

    #[test]
    fn mismatched_system_is_rejected() {
        let neu = Arc::new(SlProblem::constant(1.0, Boundary::Neumann, 512).unwrap().solve(2).unwrap());
        assert!(matches!(make_test_battery(&data(1.0), 2, Some(&neu)), Err(Error::RegimeMismatch { .. })));
        assert!(matches!(make_test_battery(&data(0.5), 2, Some(&neu)), Err(Error::RegimeMismatch { .. })));
        assert!(make_test_battery(&data(0.5), 2, None).is_err());
        let rob = Arc::new(SlProblem::constant(1.0, Boundary::Robin { lambda: 2.0, delta: 1.0 }, 512).unwrap().solve(2).unwrap());
        assert!(make_test_battery(&data(1.0), 2, Some(&rob)).is_err());
    }
}
