//! Fluctuation-field observables. Every quantity here is a linear functional
//! `c + sum (a g(eta) + b eta)` of the configuration, so the engine can track
//! its value, time integral and jumps incrementally.

mod battery;
mod observables;

pub use battery::make_test_battery;
pub use observables::{dynkin_martingale, field_eval, ExtendedIntegrand, FieldContext, MartingaleSlots, MartingaleValue, Side};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Dynamics, LinearFunctional};
    use crate::rate::JumpRate;
    use crate::rng::stream;
    use crate::spectral::SlProblem;
    use crate::steady::{ModelParams, SteadyState};
    use crate::testfn::{BoundaryData, FunctionClass, Provenance, TestFunction};
    use proptest::prelude::*;
    use rand::Rng;
    use std::sync::Arc;

    fn context(n: usize, theta: f64, abld: (f64, f64, f64, f64), rate: JumpRate) -> FieldContext {
        let p = ModelParams::new(n, theta, abld, Arc::new(rate)).unwrap();
        FieldContext::new(Arc::new(SteadyState::new(p).unwrap()))
    }

    /// Random trigonometric polynomial with exact derivatives.
    fn trig(c: [f64; 4]) -> TestFunction {
        let f = move |k: usize, u: f64| {
            let mut s = 0.0;
            for (j, a) in c.iter().enumerate() {
                let w = (j + 1) as f64 * 1.3;
                let phase = w * u + j as f64;
                let d = w.powi(k as i32);
                s += a * d * match k % 4 {
                    0 => phase.sin(),
                    1 => phase.cos(),
                    2 => -phase.sin(),
                    _ => -phase.cos(),
                };
            }
            s
        };
        TestFunction::new(
            "trig",
            FunctionClass::Free,
            Provenance::User,
            (0..3).map(|k| -> crate::testfn::Eval { Arc::new(move |u| f(k, u)) }).collect(),
        )
    }

    /// `sum_channels rate (F(eta') - F(eta))^p` by enumeration.
    fn brute(d: &Dynamics, eta: &[u64], f: &LinearFunctional, power: i32) -> (f64, f64) {
        let y0 = f.eval(eta, d.rate());
        let mut s = 0.0;
        let mut scale = 0.0;
        for (ch, r) in d.channels(eta) {
            if r == 0.0 {
                continue;
            }
            let dy = f.eval(&d.apply(eta, ch), d.rate()) - y0;
            s += r * dy.powi(power);
            scale += (r * dy.powi(power)).abs();
        }
        (s, scale)
    }

    fn random_state<R: Rng>(rng: &mut R, m: usize) -> Vec<u64> {
        (0..m).map(|_| if rng.random_bool(0.3) { 0 } else { rng.random_range(0..6) }).collect()
    }

    fn check_generator(ctx: &FieldContext, abld: (f64, f64, f64, f64), theta: f64, seed: u64) {
        let st = ctx.steady();
        let p = ModelParams::new(st.n(), theta, abld, st.params().rate.clone()).unwrap();
        let d = Dynamics::new(&p);
        let mut rng = stream(seed, st.n() as u64);
        for _ in 0..100 {
            let c = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let h = trig(c);
            let eta = random_state(&mut rng, st.n() - 1);
            let y = ctx.field(&h);
            let (want, scale) = brute(&d, &eta, &y, 1);
            let got = ctx.dynkin(&h).eval(&eta, d.rate());
            assert!((got - want).abs() <= 1e-9 * scale.max(1e-300), "N={} got {got} want {want}", st.n());
            let (qv, qscale) = brute(&d, &eta, &y, 2);
            let got = ctx.quadratic_variation(&h).eval(&eta, d.rate());
            assert!((got - qv).abs() <= 1e-9 * qscale.max(1e-300));
        }
    }

    #[test]
    fn generator_matches_channel_sum() {
        let rates = [JumpRate::constant(1.0).unwrap(), JumpRate::linear(1.0).unwrap(), JumpRate::alternating()];
        for (j, rate) in rates.into_iter().enumerate() {
            for &n in &[2usize, 3, 4, 16] {
                for &theta in &[-1.0, 0.0, 0.5, 1.0, 2.5] {
                    let abld = (0.3, 2.0, 0.2, 2.5);
                    let ctx = context(n, theta, abld, rate.clone());
                    check_generator(&ctx, abld, theta, 11 + j as u64);
                }
            }
        }
    }

    #[test]
    fn field_functional_matches_direct_sum() {
        let ctx = context(20, 1.0, (1.0, 2.0, 0.5, 2.0), JumpRate::constant(1.0).unwrap());
        let h = trig([0.3, -0.2, 0.5, 0.1]);
        let mut rng = stream(3, 0);
        for _ in 0..20 {
            let eta = random_state(&mut rng, 19);
            let a = ctx.field(&h).eval(&eta, &JumpRate::constant(1.0).unwrap());
            let b = field_eval(&eta, ctx.steady().rho(), &h);
            assert!((a - b).abs() < 1e-12);
        }
        let one = TestFunction::constant(1.0, FunctionClass::Free);
        let zero = vec![0u64; 19];
        let want = -ctx.steady().rho().iter().sum::<f64>() / 20f64.sqrt();
        assert!((field_eval(&zero, ctx.steady().rho(), &one) - want).abs() < 1e-12);
    }

    #[test]
    fn dynkin_is_centred_under_the_steady_state() {
        for &theta in &[-0.5, 0.5, 1.0, 2.0] {
            let ctx = context(24, theta, (1.0, 2.0, 0.5, 2.0), JumpRate::constant(1.0).unwrap());
            let h = trig([0.4, 0.1, -0.3, 0.2]);
            let f = ctx.dynkin(&h);
            let eg = ctx.steady().expected_g_profile();
            let mean = f.constant + f.g_coef.iter().zip(&eg).map(|(a, g)| a * g).sum::<f64>();
            let scale: f64 = f.g_coef.iter().zip(&eg).map(|(a, g)| (a * g).abs()).sum();
            assert!(mean.abs() < 1e-10 * scale, "theta={theta} mean={mean}");
        }
    }

    #[test]
    fn affine_function_has_no_bulk_term() {
        let ctx = context(16, 0.5, (1.0, 2.0, 0.5, 2.0), JumpRate::constant(1.0).unwrap());
        let f = ctx.dynkin(&TestFunction::affine(2.0, -1.0, FunctionClass::Free));
        for a in &f.g_coef[1..14] {
            assert!(a.abs() < 1e-9);
        }
    }

    #[test]
    fn linear_rate_has_no_bg_residual() {
        let ctx = context(32, 1.0, (1.0, 2.0, 0.5, 2.0), JumpRate::linear(1.0).unwrap());
        let f = ctx.bg(|u| 1.0 + u);
        let rate = JumpRate::linear(1.0).unwrap();
        for eta in [vec![0u64; 31], (0..31).map(|i| i % 5).collect()] {
            assert!(f.eval(&eta, &rate).abs() < 1e-12);
        }
        let l = ctx.local_bg(0.25, Side::Right).unwrap();
        assert!(l.eval(&vec![3; 31], &rate).abs() < 1e-12);
    }

    #[test]
    fn residual_is_centred_site_by_site() {
        let ctx = context(16, 0.5, (1.0, 2.0, 0.5, 2.0), JumpRate::constant(1.0).unwrap());
        let st = ctx.steady();
        for (i, m) in st.marginals().iter().enumerate() {
            let ev = m.expect(|k| (k > 0) as u8 as f64 - st.phi_bar()[i] - st.dphi()[i] * (k as f64 - st.rho()[i]));
            assert!(ev.abs() < 1e-10);
        }
    }

    #[test]
    fn box_weights_and_rejections() {
        let ctx = context(64, 1.0, (1.0, 2.0, 0.5, 2.0), JumpRate::constant(1.0).unwrap());
        for eps in [0.07, 0.1, 0.25, 0.33] {
            let k = ctx.box_sites(eps).unwrap();
            let mass = k as f64 / (eps * 64.0);
            assert!(mass <= 1.0 + 1e-12 && mass > 1.0 - 1.0 / (eps * 64.0));
        }
        assert!(ctx.box_sites(0.05).is_err());
        assert!(ctx.box_sites(0.6).is_err());
        let f = ctx.local_bg(0.125, Side::Right).unwrap();
        let touched: Vec<usize> = (0..63).filter(|&i| f.g_coef[i] != 0.0).collect();
        assert_eq!(touched, (55..63).collect::<Vec<_>>());
    }

    #[test]
    fn eigenfunctions_have_vanishing_corrections() {
        for &theta in &[1.0, 2.0] {
            let ctx = context(128, theta, (1.0, 2.0, 0.5, 2.0), JumpRate::constant(1.0).unwrap());
            let asy = ctx.steady().asymptotic();
            let sys = Arc::new(SlProblem::from_profiles(&asy, 512).unwrap().solve(3).unwrap());
            let data = BoundaryData { theta, lambda: 2.0, delta: 2.0 };
            for h in make_test_battery(&data, 3, Some(&sys)).unwrap() {
                let e = ctx.extended(&h, 1.0 / 16.0).unwrap();
                assert!(e.c0.abs() < 1e-8 && e.c1.abs() < 1e-8, "{} {} {}", h.name(), e.c0, e.c1);
            }
        }
        let ctx = context(128, 0.5, (1.0, 2.0, 0.5, 2.0), JumpRate::constant(1.0).unwrap());
        assert!(ctx.extended(&TestFunction::affine(1.0, 0.0, FunctionClass::Free), 0.1).is_err());
    }

    #[test]
    fn extended_coefficients_for_identity() {
        let ctx = context(128, 2.0, (1.0, 2.0, 0.5, 2.0), JumpRate::constant(1.0).unwrap());
        let e = ctx.extended(&TestFunction::affine(0.0, 1.0, FunctionClass::Free), 1.0 / 16.0).unwrap();
        assert_eq!((e.c0, e.c1, e.box_sites), (1.0, 1.0, 8));
        assert!((ctx.default_eps() - 128f64.powf(-0.5)).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn generator_consistency(n in 2usize..12, theta in -1.5f64..2.5, seed in 0u64..1000,
                                 a in 0.1f64..2.0, l in 0.5f64..3.0, b in 0.1f64..2.0, d in 0.5f64..3.0) {
            let p = ModelParams::new(n, theta, (a, l, b, d), Arc::new(JumpRate::constant(1.0).unwrap()));
            prop_assume!(p.is_ok());
            let ctx = FieldContext::new(Arc::new(SteadyState::new(p.unwrap()).unwrap()));
            let dd = Dynamics::new(ctx.steady().params());
            let mut rng = stream(seed, 1);
            let h = trig([rng.random_range(-1.0..1.0), 0.5, rng.random_range(-1.0..1.0), 0.0]);
            let eta = random_state(&mut rng, n - 1);
            let (want, scale) = brute(&dd, &eta, &ctx.field(&h), 1);
            let got = ctx.dynkin(&h).eval(&eta, dd.rate());
            prop_assert!((got - want).abs() <= 1e-9 * scale.max(1e-300));
        }
    }
}
