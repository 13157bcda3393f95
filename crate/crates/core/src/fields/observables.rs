use std::sync::Arc;

use serde::Serialize;

use crate::engine::{LinearFunctional, Record};
use crate::error::{Error, Result};
use crate::steady::{AsymptoticProfiles, SteadyState};
use crate::testfn::TestFunction;

/// `N^{-1/2} sum_x H(x/N)(eta(x) - rho(x))`, with `rho` indexed by site `x - 1`.
pub fn field_eval(eta: &[u64], rho: &[f64], h: &TestFunction) -> f64 {
    let n = (eta.len() + 1) as f64;
    let s: f64 = eta.iter().zip(rho).enumerate().map(|(i, (&k, r))| h.value((i + 1) as f64 / n) * (k as f64 - r)).sum();
    s / n.sqrt()
}

/// Which boundary a local statistic looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
}

/// Boundary-corrected integrand of the extended martingale together with its
/// correction coefficients.
#[derive(Clone, Debug)]
pub struct ExtendedIntegrand {
    pub integrand: LinearFunctional,
    pub c0: f64,
    pub c1: f64,
    pub eps: f64,
    /// Sites in each boundary box.
    pub box_sites: usize,
}

/// Builds the field observables of one steady state as linear functionals of
/// the configuration, ready for [`crate::engine::FunctionalRecorder`].
#[derive(Clone, Debug)]
pub struct FieldContext {
    steady: Arc<SteadyState>,
}

impl FieldContext {
    pub fn new(steady: Arc<SteadyState>) -> Self {
        Self { steady }
    }

    pub fn steady(&self) -> &Arc<SteadyState> {
        &self.steady
    }

    fn n(&self) -> usize {
        self.steady.n()
    }

    fn nf(&self) -> f64 {
        self.n() as f64
    }

    fn sites(&self) -> usize {
        self.n() - 1
    }

    fn grid(&self, h: &TestFunction) -> Vec<f64> {
        let n = self.nf();
        (0..=self.n()).map(|x| h.value(x as f64 / n)).collect()
    }

    /// `Y(H)`.
    pub fn field(&self, h: &TestFunction) -> LinearFunctional {
        let s = self.nf().powf(-0.5);
        let hv = self.grid(h);
        let mut f = LinearFunctional::zeros(self.sites());
        for (i, r) in self.steady.rho().iter().enumerate() {
            f.eta_coef[i] = s * hv[i + 1];
            f.constant -= s * hv[i + 1] * r;
        }
        f
    }

    /// Coefficient of `g(eta(x))` in `N^2 L Y(H)`, index `x - 1`. For `N >= 3`
    /// this is the centred display built from the discrete operators
    /// `grad+`, `grad-` and the discrete Laplacian; for `N = 2` the single site
    /// feels only the reservoirs.
    fn dynkin_coefficients(&self, h: &TestFunction) -> Vec<f64> {
        let p = self.steady.params();
        let n = self.nf();
        let sq = n.sqrt();
        let hv = self.grid(h);
        let bnd = n.powf(1.5 - p.theta);
        let m = self.sites();
        if m == 1 {
            return vec![-bnd * (p.lambda + p.delta) * hv[1]];
        }
        let lap = |x: usize| n * n * (hv[x + 1] - 2.0 * hv[x] + hv[x - 1]);
        let grad_plus = |x: usize| n * (hv[x + 1] - hv[x]);
        let grad_minus = |x: usize| n * (hv[x] - hv[x - 1]);
        let mut a = vec![0.0; m];
        for x in 2..=m.saturating_sub(1) {
            a[x - 1] = lap(x) / sq;
        }
        a[0] += sq * grad_plus(1) - p.lambda * bnd * hv[1];
        a[m - 1] += -sq * grad_minus(m) - p.delta * bnd * hv[m];
        a
    }

    /// `N^2 L Y(H)` as `sum_x a_x (g(eta(x)) - phi_N(x))`.
    pub fn dynkin(&self, h: &TestFunction) -> LinearFunctional {
        let a = self.dynkin_coefficients(h);
        let constant = -a.iter().zip(self.steady.phi_bar()).map(|(a, p)| a * p).sum::<f64>();
        LinearFunctional { constant, g_coef: a, eta_coef: vec![0.0; self.sites()] }
    }

    /// Integrand of the predictable quadratic variation:
    /// `N sum_{x~y} g(eta(x))(H(y/N) - H(x/N))^2` plus the two reservoir lines
    /// `N^{1-theta}(alpha + lambda g(eta(1))) H(1/N)^2` and its mirror.
    pub fn quadratic_variation(&self, h: &TestFunction) -> LinearFunctional {
        let p = self.steady.params();
        let n = self.nf();
        let hv = self.grid(h);
        let m = self.sites();
        let edge = n.powf(1.0 - p.theta);
        let mut f = LinearFunctional::zeros(m);
        for x in 1..=m {
            let mut c = 0.0;
            if x < m {
                c += (hv[x + 1] - hv[x]).powi(2);
            }
            if x > 1 {
                c += (hv[x - 1] - hv[x]).powi(2);
            }
            f.g_coef[x - 1] = n * c;
        }
        f.g_coef[0] += edge * p.lambda * hv[1] * hv[1];
        f.g_coef[m - 1] += edge * p.delta * hv[m] * hv[m];
        f.constant = edge * (p.alpha * hv[1] * hv[1] + p.beta * hv[m] * hv[m]);
        f
    }

    /// Adds `w V(eta(x))` with `V = g - phi_N - Phi'(rho_N)(eta - rho_N)` at site `x`.
    fn add_v(&self, f: &mut LinearFunctional, x: usize, w: f64) {
        let i = x - 1;
        let st = &self.steady;
        f.g_coef[i] += w;
        f.eta_coef[i] -= w * st.dphi()[i];
        f.constant += w * (st.dphi()[i] * st.rho()[i] - st.phi_bar()[i]);
    }

    /// Boltzmann–Gibbs integrand `N^{-1/2} sum_{x=2}^{N-2} G(x/N) V(eta(x))`.
    pub fn bg(&self, weight: impl Fn(f64) -> f64) -> LinearFunctional {
        let n = self.nf();
        let s = n.powf(-0.5);
        let mut f = LinearFunctional::zeros(self.sites());
        for x in 2..=self.n().saturating_sub(2) {
            self.add_v(&mut f, x, s * weight(x as f64 / n));
        }
        f
    }

    /// Number of sites in a box of macroscopic width `eps`; at least 4 required.
    pub fn box_sites(&self, eps: f64) -> Result<usize> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::InvalidParameter(format!("box width {eps} outside (0, 1/2)")));
        }
        let k = (eps * self.nf() + 1e-9).floor() as usize;
        if k < 4 {
            return Err(Error::InvalidParameter(format!("box of width {eps} holds {k} < 4 sites at N = {}", self.n())));
        }
        Ok(k)
    }

    fn box_range(&self, k: usize, side: Side) -> std::ops::RangeInclusive<usize> {
        match side {
            Side::Left => 1..=k,
            Side::Right => self.n() - k..=self.n() - 1,
        }
    }

    /// Local Boltzmann–Gibbs integrand `eps^{-1} N^{-1/2} sum_{x in box} V(eta(x))`.
    pub fn local_bg(&self, eps: f64, side: Side) -> Result<LinearFunctional> {
        let k = self.box_sites(eps)?;
        let w = self.nf().powf(-0.5) / eps;
        let mut f = LinearFunctional::zeros(self.sites());
        for x in self.box_range(k, side) {
            self.add_v(&mut f, x, w);
        }
        Ok(f)
    }

    /// `g(eta(b)) - phi_N(b)` with `b = 1` or `N - 1`.
    pub fn boundary_replacement(&self, side: Side) -> LinearFunctional {
        let i = match side {
            Side::Left => 0,
            Side::Right => self.sites() - 1,
        };
        let mut f = LinearFunctional::zeros(self.sites());
        f.g_coef[i] = 1.0;
        f.constant = -self.steady.phi_bar()[i];
        f
    }

    /// Integrand of the extended martingale for a free test function:
    /// `N^{-1/2} sum_x Phi'(rho_N(x)) H''(x/N) etabar(x) + c0 Y(Phi' iota0) - c1 Y(Phi' iota1)`
    /// with `c0 = H'(0) - 1{theta=1} lambda H(0)` and `c1 = H'(1) + 1{theta=1} delta H(1)`.
    pub fn extended(&self, h: &TestFunction, eps: f64) -> Result<ExtendedIntegrand> {
        let p = self.steady.params();
        if p.theta < 1.0 {
            return Err(Error::InvalidParameter(format!("extended martingale needs theta >= 1, got {}", p.theta)));
        }
        let k = self.box_sites(eps)?;
        let asy = AsymptoticProfiles::new(p);
        let robin = if p.theta == 1.0 { 1.0 } else { 0.0 };
        let c0 = h.d1(0.0) - robin * p.lambda * h.value(0.0);
        let c1 = h.d1(1.0) + robin * p.delta * h.value(1.0);
        let n = self.nf();
        let s = n.powf(-0.5);
        let st = &self.steady;
        let mut w = vec![0.0; self.sites()];
        for x in 1..=self.sites() {
            w[x - 1] = s * st.dphi()[x - 1] * h.d2(x as f64 / n);
        }
        for (side, c) in [(Side::Left, c0), (Side::Right, -c1)] {
            for x in self.box_range(k, side) {
                w[x - 1] += c * s / eps * asy.dphi(x as f64 / n)?;
            }
        }
        let mut f = LinearFunctional::zeros(self.sites());
        for (i, wi) in w.into_iter().enumerate() {
            f.eta_coef[i] = wi;
            f.constant -= wi * st.rho()[i];
        }
        Ok(ExtendedIntegrand { integrand: f, c0, c1, eps, box_sites: k })
    }

    /// Default box width: `N^{-1/2}`, widened to hold at least 4 sites.
    pub fn default_eps(&self) -> f64 {
        let n = self.nf();
        n.powf(-0.5).max(4.0 / n)
    }
}

/// Indices into a recorder bank for one test function.
#[derive(Clone, Copy, Debug)]
pub struct MartingaleSlots {
    pub field: usize,
    pub drift: usize,
    pub qv: Option<usize>,
}

/// Path statistics of one martingale at one record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MartingaleValue {
    pub t: f64,
    /// `Y_t - Y_0 - int drift`.
    pub m: f64,
    /// Integrated predictable quadratic variation.
    pub bracket: f64,
    /// Sum of squared jumps.
    pub jumps: f64,
}

/// Martingale path from a recorder run: the recorder's start values are
/// `initial`, rows are as recorded.
pub fn dynkin_martingale(initial: &[f64], records: &[Record], slots: MartingaleSlots) -> Vec<MartingaleValue> {
    records
        .iter()
        .map(|r| MartingaleValue {
            t: r.t,
            m: r.values[slots.field] - initial[slots.field] - r.integrals[slots.drift],
            bracket: slots.qv.map_or(f64::NAN, |q| r.integrals[q]),
            jumps: r.jump_sq[slots.field],
        })
        .collect()
}
