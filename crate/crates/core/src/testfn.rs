//! Smooth test functions on `[0, 1]` with derivative evaluators and a tag
//! recording which boundary class they belong to.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::steady::Regime;

pub type Eval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Boundary class of a test function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionClass {
    Regime(Regime),
    /// Smooth with no boundary constraint.
    Free,
}

impl fmt::Display for FunctionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionClass::Regime(r) => r.fmt(f),
            FunctionClass::Free => f.write_str("free"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Eigenfunction(usize),
    Bump(usize),
    User,
}

/// Boundary data needed to check membership.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryData {
    pub theta: f64,
    pub lambda: f64,
    pub delta: f64,
}

/// `derivs[k]` evaluates the `k`-th derivative. Orders beyond the supplied
/// evaluators are obtained by sixth-order central differences of the highest
/// one available.
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    class: FunctionClass,
    provenance: Provenance,
    derivs: Vec<Eval>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("class", &self.class)
            .field("provenance", &self.provenance)
            .field("analytic_orders", &self.derivs.len())
            .finish()
    }
}

const FD_STEP: f64 = 1.0 / 4096.0;

impl TestFunction {
    pub fn new(name: impl Into<String>, class: FunctionClass, provenance: Provenance, derivs: Vec<Eval>) -> Self {
        assert!(!derivs.is_empty(), "a test function needs at least its value evaluator");
        Self { name: name.into(), class, provenance, derivs }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn class(&self) -> FunctionClass {
        self.class
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        (self.derivs[0])(u)
    }

    #[inline]
    pub fn d1(&self, u: f64) -> f64 {
        self.derivative(1, u)
    }

    #[inline]
    pub fn d2(&self, u: f64) -> f64 {
        self.derivative(2, u)
    }

    pub fn derivative(&self, k: usize, u: f64) -> f64 {
        if k < self.derivs.len() {
            return (self.derivs[k])(u);
        }
        let top = self.derivs.len() - 1;
        let f = &self.derivs[top];
        nth_difference(&|x| f(x), k - top, u, FD_STEP)
    }

    /// `c`.
    pub fn constant(c: f64, class: FunctionClass) -> Self {
        Self::new(
            format!("const({c})"),
            class,
            Provenance::User,
            vec![Arc::new(move |_| c), Arc::new(|_| 0.0), Arc::new(|_| 0.0)],
        )
    }

    /// `a + b u`.
    pub fn affine(a: f64, b: f64, class: FunctionClass) -> Self {
        Self::new(
            format!("affine({a},{b})"),
            class,
            Provenance::User,
            vec![Arc::new(move |u| a + b * u), Arc::new(move |_| b), Arc::new(|_| 0.0)],
        )
    }

    /// `sqrt(2) cos(k pi u)`.
    pub fn cosine(k: usize, class: FunctionClass) -> Self {
        let w = k as f64 * PI;
        let s = 2f64.sqrt();
        Self::new(
            format!("cos{k}"),
            class,
            Provenance::User,
            vec![
                Arc::new(move |u| s * (w * u).cos()),
                Arc::new(move |u| -s * w * (w * u).sin()),
                Arc::new(move |u| -s * w * w * (w * u).cos()),
                Arc::new(move |u| s * w * w * w * (w * u).sin()),
                Arc::new(move |u| s * w.powi(4) * (w * u).cos()),
            ],
        )
    }

    /// `sqrt(2) sin(k pi u)`.
    pub fn sine(k: usize, class: FunctionClass) -> Self {
        let w = k as f64 * PI;
        let s = 2f64.sqrt();
        Self::new(
            format!("sin{k}"),
            class,
            Provenance::User,
            vec![
                Arc::new(move |u| s * (w * u).sin()),
                Arc::new(move |u| s * w * (w * u).cos()),
                Arc::new(move |u| -s * w * w * (w * u).sin()),
                Arc::new(move |u| -s * w * w * w * (w * u).cos()),
                Arc::new(move |u| s * w.powi(4) * (w * u).sin()),
            ],
        )
    }

    /// `H_n(u) = sin(n pi u) exp(-1/(u(1-u)))`, scaled to unit sup norm. Flat
    /// to every order at both ends.
    pub fn bump(n: usize) -> Self {
        assert!(n >= 1);
        let raw = move |u: f64| bump_jet(n, u)[0];
        let scale = 1.0 / sup_abs(raw);
        let derivs: Vec<Eval> = (0..5)
            .map(|k| {
                let e: Eval = Arc::new(move |u| {
                    let j = bump_jet(n, u);
                    j[k] * FACT[k] * scale
                });
                e
            })
            .collect();
        Self::new(format!("bump{n}"), FunctionClass::Regime(Regime::DirichletStrong), Provenance::Bump(n), derivs)
    }

    /// Checks the boundary conditions that define the function's class.
    /// `dphi_ends` supplies `Phi'(rho(0))`, `Phi'(rho(1))` for the Dirichlet
    /// condition on `A H''`.
    pub fn check_membership(&self, data: &BoundaryData, dphi_ends: (f64, f64)) -> Result<()> {
        let class = match self.class {
            FunctionClass::Free => return Ok(()),
            FunctionClass::Regime(r) => r,
        };
        let expected = Regime::of(data.theta);
        if class != expected {
            return Err(Error::RegimeMismatch {
                regime: expected.to_string(),
                reason: format!("{} is tagged {class}", self.name),
            });
        }
        let fail = |reason: String| Error::RegimeMismatch { regime: class.to_string(), reason: format!("{}: {reason}", self.name) };
        match class {
            Regime::DirichletStrong => {
                for k in 0..=4 {
                    for u in [0.0, 1.0] {
                        let v = self.derivative(k, u);
                        if !(v.abs() < 1e-10) {
                            return Err(fail(format!("derivative {k} at {u} is {v:e}")));
                        }
                    }
                }
            }
            Regime::Dirichlet => {
                let scale = 1.0 + (0..=64).map(|i| self.d2(i as f64 / 64.0).abs()).fold(0.0, f64::max);
                for (u, a) in [(0.0, dphi_ends.0), (1.0, dphi_ends.1)] {
                    let v = self.value(u);
                    if !(v.abs() < 1e-8) {
                        return Err(fail(format!("value at {u} is {v:e}")));
                    }
                    let l = a * self.d2(u);
                    if !(l.abs() < 1e-8 * scale) {
                        return Err(fail(format!("A H'' at {u} is {l:e}")));
                    }
                }
            }
            Regime::Robin => {
                let l = self.d1(0.0) - data.lambda * self.value(0.0);
                let r = self.d1(1.0) + data.delta * self.value(1.0);
                if !(l.abs() < 1e-8 && r.abs() < 1e-8) {
                    return Err(fail(format!("Robin residuals {l:e}, {r:e}")));
                }
            }
            Regime::Neumann => {
                let (l, r) = (self.d1(0.0), self.d1(1.0));
                if !(l.abs() < 1e-8 && r.abs() < 1e-8) {
                    return Err(fail(format!("end slopes {l:e}, {r:e}")));
                }
            }
        }
        Ok(())
    }
}

const FACT: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

/// Sixth-order central difference for the `k`-th derivative, applied
/// recursively. Stencils reach `3kh` beyond `[0, 1]`, so the evaluator must be
/// defined there.
fn nth_difference(f: &dyn Fn(f64) -> f64, k: usize, u: f64, h: f64) -> f64 {
    if k == 0 {
        return f(u);
    }
    let d = |x: f64| {
        (-f(x - 3.0 * h) + 9.0 * f(x - 2.0 * h) - 45.0 * f(x - h) + 45.0 * f(x + h) - 9.0 * f(x + 2.0 * h)
            + f(x + 3.0 * h))
            / (60.0 * h)
    };
    if k == 1 {
        d(u)
    } else {
        nth_difference(&d, k - 1, u, h)
    }
}

fn sup_abs(f: impl Fn(f64) -> f64) -> f64 {
    let n = 20_000;
    let (mut best, mut at) = (0.0f64, 0usize);
    for i in 0..=n {
        let v = f(i as f64 / n as f64).abs();
        if v > best {
            best = v;
            at = i;
        }
    }
    // Golden-section refinement around the best grid point.
    let (mut a, mut b) = ((at.max(1) - 1) as f64 / n as f64, ((at + 1).min(n)) as f64 / n as f64);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c).abs() > f(d).abs() {
            b = d;
        } else {
            a = c;
        }
    }
    best.max(f(0.5 * (a + b)).abs())
}

/// Truncated Taylor coefficients `[f, f', f''/2, f'''/6, f''''/24]`.
type Jet = [f64; 5];

fn jet_mul(a: &Jet, b: &Jet) -> Jet {
    let mut c = [0.0; 5];
    for i in 0..5 {
        for j in 0..5 - i {
            c[i + j] += a[i] * b[j];
        }
    }
    c
}

/// `f(a)` from the Taylor coefficients `fk[k] = f^(k)(a0) / k!` of `f` at `a0 = a[0]`.
fn jet_compose(fk: &Jet, a: &Jet) -> Jet {
    let mut d = *a;
    d[0] = 0.0;
    let mut out = [fk[0], 0.0, 0.0, 0.0, 0.0];
    let mut p = d;
    for coef in fk.iter().skip(1) {
        for i in 0..5 {
            out[i] += coef * p[i];
        }
        p = jet_mul(&p, &d);
    }
    out
}

fn bump_jet(n: usize, u: f64) -> Jet {
    let w = u * (1.0 - u);
    if !(w > 1.0 / 700.0) {
        return [0.0; 5];
    }
    let x: Jet = [u, 1.0, 0.0, 0.0, 0.0];
    // w(u) = u - u^2 exactly.
    let wj: Jet = [w, 1.0 - 2.0 * u, -1.0, 0.0, 0.0];
    // 1/w via the Taylor series of 1/t at t = w.
    let inv = jet_compose(&[1.0 / w, -1.0 / (w * w), 1.0 / w.powi(3), -1.0 / w.powi(4), 1.0 / w.powi(5)], &wj);
    let neg = inv.map(|c| -c);
    let e = (-1.0 / w).exp();
    let ej = jet_compose(&[e, e, e / 2.0, e / 6.0, e / 24.0], &neg);
    let t = n as f64 * PI * x[0];
    let (s, c) = t.sin_cos();
    let a = n as f64 * PI;
    let sj: Jet = [s, a * c, -a * a * s / 2.0, -a.powi(3) * c / 6.0, a.powi(4) * s / 24.0];
    jet_mul(&sj, &ej)
}
