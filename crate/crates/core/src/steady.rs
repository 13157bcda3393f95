//! The non-equilibrium steady state.
//!
//! The stationary law of the boundary-driven process is a product of
//! single-site marginals whose fugacity `phi_N(x)` is affine in `x`. This module
//! holds the model parameters, the discrete profiles (fugacity, density,
//! variance, `Phi'`), their `N -> inf` limits, and an exact sampler.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rate::JumpRate;
use crate::singlesite::{self, SiteMarginal, SERIES_TOL};

/// Macroscopic boundary behaviour selected by the reservoir exponent `theta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `theta < 0`: test functions flat to all orders at the boundary.
    DirichletStrong,
    /// `0 <= theta < 1`.
    Dirichlet,
    /// `theta = 1`.
    Robin,
    /// `theta > 1`.
    Neumann,
}

impl Regime {
    pub fn of(theta: f64) -> Self {
        if theta < 0.0 {
            Regime::DirichletStrong
        } else if theta < 1.0 {
            Regime::Dirichlet
        } else if theta == 1.0 {
            Regime::Robin
        } else {
            Regime::Neumann
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::DirichletStrong => "dirichlet-strong",
            Regime::Dirichlet => "dirichlet",
            Regime::Robin => "robin",
            Regime::Neumann => "neumann",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ModelParams {
    /// Lattice size; the bulk is `I_N = {1, ..., N-1}`.
    pub n: usize,
    pub theta: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub beta: f64,
    pub delta: f64,
    pub rate: Arc<JumpRate>,
}

impl ModelParams {
    /// Validates positivity and admissibility at this `N`.
    pub fn new(
        n: usize,
        theta: f64,
        (alpha, lambda, beta, delta): (f64, f64, f64, f64),
        rate: Arc<JumpRate>,
    ) -> Result<Self> {
        let p = Self::unchecked(n, theta, (alpha, lambda, beta, delta), rate);
        p.validate()?;
        Ok(p)
    }

    pub fn unchecked(
        n: usize,
        theta: f64,
        (alpha, lambda, beta, delta): (f64, f64, f64, f64),
        rate: Arc<JumpRate>,
    ) -> Self {
        Self { n, theta, alpha, lambda, beta, delta, rate }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("N must be at least 2, got {}", self.n)));
        }
        if !self.theta.is_finite() {
            return Err(Error::InvalidParameter("theta must be finite".into()));
        }
        for (name, v) in [("alpha", self.alpha), ("lambda", self.lambda), ("beta", self.beta), ("delta", self.delta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        let bound = self.admissibility_bound();
        if !(bound < self.rate.radius()) {
            return Err(Error::Inadmissible { bound, radius: self.rate.radius() });
        }
        Ok(())
    }

    /// Same parameters at a different lattice size.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        let mut p = self.clone();
        p.n = n;
        p.validate()?;
        Ok(p)
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        let mut p = self.clone();
        p.theta = theta;
        p.validate()?;
        Ok(p)
    }

    pub fn sites(&self) -> usize {
        self.n - 1
    }

    pub fn regime(&self) -> Regime {
        Regime::of(self.theta)
    }

    /// `max{phi_N(1), phi_N(N-1)}`, which must stay below `phi*`.
    pub fn admissibility_bound(&self) -> f64 {
        let (a, b) = (self.profile_at(1), self.profile_at(self.n - 1));
        a.max(b)
    }

    /// `phi_N(x)` for a site label `x` in `1..=N-1`.
    pub fn profile_at(&self, x: usize) -> f64 {
        let n = self.n as f64;
        let (al, la, be, de) = (self.alpha, self.lambda, self.beta, self.delta);
        let gradient = -(al * de - be * la) * (x as f64 - 1.0);
        let bulk = al * de * (n - 2.0);
        let denom_bulk = la * de * (n - 2.0);
        // Divide through by whichever of 1, N^theta is larger so neither side overflows.
        if self.theta > 0.0 {
            let s = n.powf(-self.theta);
            let num = neumaier(&[gradient * s, bulk * s, al + be]);
            num / (denom_bulk * s + la + de)
        } else {
            let s = n.powf(self.theta);
            let num = neumaier(&[gradient, bulk, (al + be) * s]);
            num / (denom_bulk + (la + de) * s)
        }
    }
}

/// Compensated summation.
pub(crate) fn neumaier(xs: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// `phi_N(x)` for `x = 1..=N-1`; index `i` holds site `x = i + 1`.
pub fn fugacity_profile(params: &ModelParams) -> Result<Vec<f64>> {
    params.validate()?;
    Ok((1..params.n).map(|x| params.profile_at(x)).collect())
}

/// Limits of the discrete profiles on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct AsymptoticProfiles {
    pub theta: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub beta: f64,
    pub delta: f64,
    pub rate: Arc<JumpRate>,
}

impl AsymptoticProfiles {
    pub fn new(params: &ModelParams) -> Self {
        Self {
            theta: params.theta,
            alpha: params.alpha,
            lambda: params.lambda,
            beta: params.beta,
            delta: params.delta,
            rate: params.rate.clone(),
        }
    }

    pub fn regime(&self) -> Regime {
        Regime::of(self.theta)
    }

    /// Limiting fugacity `phi_theta(u)`; equals `Phi(rho_theta(u))`.
    pub fn fugacity(&self, u: f64) -> f64 {
        let (a, l, b, d) = (self.alpha, self.lambda, self.beta, self.delta);
        match self.regime() {
            Regime::DirichletStrong | Regime::Dirichlet => (-(a * d - b * l) * u + a * d) / (l * d),
            Regime::Robin => (-(a * d - b * l) * u + a * d + a + b) / (l * d + l + d),
            Regime::Neumann => (a + b) / (l + d),
        }
    }

    pub fn density(&self, u: f64) -> Result<f64> {
        singlesite::mean_density(&self.rate, self.fugacity(u), SERIES_TOL)
    }

    /// `chi_theta(u) = phi R'(phi)`, the single-site variance at `phi_theta(u)`.
    pub fn chi(&self, u: f64) -> Result<f64> {
        singlesite::variance(&self.rate, self.fugacity(u))
    }

    /// `Phi'(rho_theta(u))`, the diffusion coefficient of the limit equation.
    pub fn dphi(&self, u: f64) -> Result<f64> {
        singlesite::dphi_at_fugacity(&self.rate, self.fugacity(u))
    }

    /// Checks that the whole limit profile stays inside the domain of `Z`.
    pub fn validate(&self) -> Result<()> {
        let top = self.fugacity(0.0).max(self.fugacity(1.0));
        if !(top < self.rate.radius()) {
            return Err(Error::Inadmissible { bound: top, radius: self.rate.radius() });
        }
        Ok(())
    }
}

/// Discrete steady state with per-site marginals.
#[derive(Clone, Debug)]
pub struct SteadyState {
    params: ModelParams,
    phi_bar: Vec<f64>,
    rho: Vec<f64>,
    variance: Vec<f64>,
    dphi: Vec<f64>,
    marginals: Vec<SiteMarginal>,
}

impl SteadyState {
    pub fn new(params: ModelParams) -> Result<Self> {
        let phi_bar = fugacity_profile(&params)?;
        let mut rho = Vec::with_capacity(phi_bar.len());
        let mut variance = Vec::with_capacity(phi_bar.len());
        let mut dphi = Vec::with_capacity(phi_bar.len());
        let mut marginals = Vec::with_capacity(phi_bar.len());
        for &phi in &phi_bar {
            let m = singlesite::series_moments(&params.rate, phi, SERIES_TOL)?;
            rho.push(m.mean);
            variance.push(m.variance);
            dphi.push(if phi == 0.0 { params.rate.g(1) } else { phi / m.variance });
            marginals.push(SiteMarginal::new(params.rate.clone(), phi)?);
        }
        Ok(Self { params, phi_bar, rho, variance, dphi, marginals })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    /// `phi_N(x)`, index `x - 1`.
    pub fn phi_bar(&self) -> &[f64] {
        &self.phi_bar
    }

    /// `rho_N(x) = R(phi_N(x))`.
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// `Var_{nu_N}(eta(x))`.
    pub fn variance(&self) -> &[f64] {
        &self.variance
    }

    /// `Phi'(rho_N(x))`.
    pub fn dphi(&self) -> &[f64] {
        &self.dphi
    }

    pub fn marginals(&self) -> &[SiteMarginal] {
        &self.marginals
    }

    pub fn asymptotic(&self) -> AsymptoticProfiles {
        AsymptoticProfiles::new(&self.params)
    }

    /// Exact draw from the product measure.
    pub fn sample_ness<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        self.marginals.iter().map(|m| m.sample(rng)).collect()
    }

    /// `E[g(eta(x))]` summed over the truncated marginal; equals `phi_N(x)`.
    pub fn expected_g_profile(&self) -> Vec<f64> {
        let rate = &self.params.rate;
        self.marginals.iter().map(|m| m.expect(|k| rate.g(k))).collect()
    }

    /// Common increment `phi_N(x+1) - phi_N(x)`, written through the left
    /// boundary as `(lambda phi_N(1) - alpha) / N^theta`.
    pub fn increment_left(&self) -> f64 {
        let p = &self.params;
        (p.lambda * self.phi_bar[0] - p.alpha) * (p.n as f64).powf(-p.theta)
    }

    /// The same increment through the right boundary, `(beta - delta phi_N(N-1)) / N^theta`.
    pub fn increment_right(&self) -> f64 {
        let p = &self.params;
        (p.beta - p.delta * self.phi_bar[self.phi_bar.len() - 1]) * (p.n as f64).powf(-p.theta)
    }
}
