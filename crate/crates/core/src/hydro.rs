//! Explicit finite-difference solver for `d_t rho = Laplacian Phi(rho)` on
//! `[0, 1]` with Dirichlet, Robin or Neumann conditions on `w = Phi(rho)`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rate::JumpRate;
use crate::singlesite::{self, SERIES_TOL};
use crate::steady::{ModelParams, Regime};

/// Boundary behaviour of the limit equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HydroBoundary {
    /// `w(0) = left`, `w(1) = right`, imposed strongly.
    Dirichlet { left: f64, right: f64 },
    /// `w'(0) = lambda w(0) - alpha`, `w'(1) = beta - delta w(1)`.
    Robin { lambda: f64, delta: f64, alpha: f64, beta: f64 },
    /// Zero flux.
    Neumann,
}

impl HydroBoundary {
    pub fn for_params(p: &ModelParams) -> Self {
        match p.regime() {
            Regime::DirichletStrong | Regime::Dirichlet => {
                HydroBoundary::Dirichlet { left: p.alpha / p.lambda, right: p.beta / p.delta }
            }
            Regime::Robin => HydroBoundary::Robin { lambda: p.lambda, delta: p.delta, alpha: p.alpha, beta: p.beta },
            Regime::Neumann => HydroBoundary::Neumann,
        }
    }

    /// The Dirichlet regime is only conjectured to be the limit.
    pub fn conjectural(&self) -> bool {
        matches!(self, HydroBoundary::Dirichlet { .. })
    }
}

/// Density-to-fugacity map `Phi`, interpolated by cubic Hermite on a table of
/// `(R(phi), phi)` pairs with exact slopes `1 / R'(phi)`. Densities beyond the
/// table fall back to Newton inversion.
#[derive(Clone, Debug)]
pub struct PhiMap {
    rate: Arc<JumpRate>,
    rho: Vec<f64>,
    phi: Vec<f64>,
    slope: Vec<f64>,
}

const TABLE_NODES: usize = 4096;

impl PhiMap {
    /// Covers densities up to at least `rho_max`, or as far as the radius of
    /// convergence allows.
    pub fn new(rate: Arc<JumpRate>, rho_max: f64) -> Result<Self> {
        let radius = rate.radius();
        let mut top = if radius.is_finite() { radius * (1.0 - 1e-3) } else { 1.0 };
        if radius.is_infinite() {
            while singlesite::mean_density(&rate, top, SERIES_TOL)? < rho_max {
                top *= 2.0;
            }
        }
        let mut rho = Vec::with_capacity(TABLE_NODES + 1);
        let mut phi = Vec::with_capacity(TABLE_NODES + 1);
        let mut slope = Vec::with_capacity(TABLE_NODES + 1);
        // Near a finite radius the density blows up; nodes uniform in
        // -ln(1 - phi / radius) keep the relative density spacing bounded.
        let node = |s: f64| {
            if radius.is_finite() {
                radius * -(s * (1.0 - top / radius).ln()).exp_m1()
            } else {
                top * s
            }
        };
        for i in 0..=TABLE_NODES {
            let f = node(i as f64 / TABLE_NODES as f64);
            rho.push(singlesite::mean_density(&rate, f, SERIES_TOL)?);
            phi.push(f);
            slope.push(1.0 / singlesite::dmean(&rate, f)?);
        }
        Ok(Self { rate, rho, phi, slope })
    }

    pub fn rate(&self) -> &Arc<JumpRate> {
        &self.rate
    }

    /// `Phi(rho)`.
    pub fn phi(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::NegativeDensity(r));
        }
        let last = self.rho.len() - 1;
        if r > self.rho[last] {
            return singlesite::fugacity_of_density(&self.rate, r, SERIES_TOL);
        }
        let j = self.rho.partition_point(|&x| x <= r).clamp(1, last) - 1;
        let (x0, x1) = (self.rho[j], self.rho[j + 1]);
        let h = x1 - x0;
        let s = (r - x0) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        Ok(h00 * self.phi[j] + h10 * h * self.slope[j] + h01 * self.phi[j + 1] + h11 * h * self.slope[j + 1])
    }

    /// `Phi'(rho)`.
    pub fn dphi(&self, r: f64) -> Result<f64> {
        let f = self.phi(r)?;
        singlesite::dphi_at_fugacity(&self.rate, f)
    }

    /// `R(phi)`.
    pub fn density(&self, phi: f64) -> Result<f64> {
        singlesite::mean_density(&self.rate, phi, SERIES_TOL)
    }
}

#[derive(Clone, Debug)]
pub struct HydroProblem {
    pub map: Arc<PhiMap>,
    pub boundary: HydroBoundary,
    /// Initial density at the nodes `j / m`, `j = 0..=m`.
    pub initial: Vec<f64>,
    pub horizon: f64,
    /// Spacing of stored frames; the horizon is always stored.
    pub frame_dt: f64,
}

impl HydroProblem {
    pub fn new(map: Arc<PhiMap>, boundary: HydroBoundary, m: usize, initial: impl Fn(f64) -> f64, horizon: f64, frame_dt: f64) -> Result<Self> {
        let initial = (0..=m).map(|j| initial(j as f64 / m as f64)).collect();
        let p = Self { map, boundary, initial, horizon, frame_dt };
        p.validate()?;
        Ok(p)
    }

    pub fn m(&self) -> usize {
        self.initial.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.m() < 64 {
            return Err(Error::InvalidParameter(format!("hydro grid needs m >= 64, got {}", self.m())));
        }
        if let Some(r) = self.initial.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(Error::NegativeDensity(*r));
        }
        if !(self.horizon >= 0.0 && self.frame_dt > 0.0) {
            return Err(Error::InvalidParameter("horizon must be >= 0 and frame spacing > 0".into()));
        }
        Ok(())
    }
}

/// Stored frames of a solve.
#[derive(Clone, Debug, Serialize)]
pub struct HydroSolution {
    pub boundary: HydroBoundary,
    pub conjectural: bool,
    pub u: Vec<f64>,
    pub times: Vec<f64>,
    pub rho: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
    pub steps: u64,
}

impl HydroSolution {
    pub fn final_rho(&self) -> &[f64] {
        self.rho.last().expect("a solution has at least one frame")
    }

    pub fn final_w(&self) -> &[f64] {
        self.w.last().expect("a solution has at least one frame")
    }

    /// Trapezoid mass `int rho_t` of frame `k`.
    pub fn mass(&self, k: usize) -> f64 {
        trapezoid(&self.rho[k])
    }
}

fn trapezoid(v: &[f64]) -> f64 {
    let m = v.len() - 1;
    let h = 1.0 / m as f64;
    h * (0.5 * (v[0] + v[m]) + v[1..m].iter().sum::<f64>())
}

const RESTEP_EVERY: u64 = 64;
const CFL: f64 = 0.4;
const MAX_HALVINGS: u32 = 30;

struct Stepper<'a> {
    problem: &'a HydroProblem,
    h: f64,
    w: Vec<f64>,
    lap: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(problem: &'a HydroProblem) -> Self {
        let m = problem.m();
        Self { problem, h: 1.0 / m as f64, w: vec![0.0; m + 1], lap: vec![0.0; m + 1] }
    }

    fn fill_w(&mut self, rho: &[f64]) -> Result<()> {
        for (w, &r) in self.w.iter_mut().zip(rho) {
            *w = self.problem.map.phi(r)?;
        }
        if let HydroBoundary::Dirichlet { left, right } = self.problem.boundary {
            let m = self.w.len() - 1;
            self.w[0] = left;
            self.w[m] = right;
        }
        Ok(())
    }

    /// Discrete Laplacian of `w` with ghost values carrying the boundary flux.
    fn fill_lap(&mut self) {
        let m = self.w.len() - 1;
        let h2 = self.h * self.h;
        let w = &self.w;
        for j in 1..m {
            self.lap[j] = (w[j + 1] - 2.0 * w[j] + w[j - 1]) / h2;
        }
        let (ghost_l, ghost_r) = match self.problem.boundary {
            HydroBoundary::Dirichlet { .. } => {
                self.lap[0] = 0.0;
                self.lap[m] = 0.0;
                return;
            }
            HydroBoundary::Robin { lambda, delta, alpha, beta } => (
                w[1] - 2.0 * self.h * (lambda * w[0] - alpha),
                w[m - 1] + 2.0 * self.h * (beta - delta * w[m]),
            ),
            HydroBoundary::Neumann => (w[1], w[m - 1]),
        };
        self.lap[0] = (w[1] - 2.0 * w[0] + ghost_l) / h2;
        self.lap[m] = (ghost_r - 2.0 * w[m] + w[m - 1]) / h2;
    }

    fn max_dphi(&self, rho: &[f64]) -> Result<f64> {
        let mut top = 0.0f64;
        for &r in rho {
            top = top.max(self.problem.map.dphi(r)?);
        }
        Ok(top.max(1e-12))
    }

    fn stable_dt(&self, rho: &[f64]) -> Result<f64> {
        let extra = match self.problem.boundary {
            HydroBoundary::Robin { lambda, delta, .. } => 1.0 + self.h * lambda.max(delta),
            _ => 1.0,
        };
        Ok(CFL * self.h * self.h / (self.max_dphi(rho)? * extra))
    }
}

/// Runs the explicit scheme `rho += dt Laplacian w` and stores frames at
/// multiples of `frame_dt` and at the horizon.
pub fn hydro_solve(problem: &HydroProblem) -> Result<HydroSolution> {
    problem.validate()?;
    let m = problem.m();
    let mut st = Stepper::new(problem);
    let mut rho = problem.initial.clone();
    st.fill_w(&rho)?;
    if problem.boundary.conjectural() {
        rho[0] = problem.map.density(st.w[0])?;
        rho[m] = problem.map.density(st.w[m])?;
    }
    let mut sol = HydroSolution {
        boundary: problem.boundary,
        conjectural: problem.boundary.conjectural(),
        u: (0..=m).map(|j| j as f64 / m as f64).collect(),
        times: vec![0.0],
        rho: vec![rho.clone()],
        w: vec![st.w.clone()],
        steps: 0,
    };
    let mut t = 0.0;
    let mut dt = st.stable_dt(&rho)?;
    let mut frame = 1u64;
    let mut next = rho.clone();
    while t < problem.horizon {
        let target = (frame as f64 * problem.frame_dt).min(problem.horizon);
        if sol.steps.is_multiple_of(RESTEP_EVERY) {
            dt = st.stable_dt(&rho)?;
        }
        let mut step = dt.min(target - t);
        st.fill_lap();
        let mut halvings = 0;
        loop {
            for j in 0..=m {
                next[j] = rho[j] + step * st.lap[j];
            }
            if next.iter().all(|&r| r >= 0.0) {
                break;
            }
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(Error::NegativeSolution { step: sol.steps as usize });
            }
            step *= 0.5;
        }
        std::mem::swap(&mut rho, &mut next);
        t = if step == target - t { target } else { t + step };
        sol.steps += 1;
        st.fill_w(&rho)?;
        if t >= target {
            sol.times.push(t);
            sol.rho.push(rho.clone());
            sol.w.push(st.w.clone());
            frame += 1;
        }
    }
    Ok(sol)
}

/// Space-time test function with the derivatives needed by the weak form.
#[derive(Clone)]
pub struct SpaceTimeTest {
    pub g: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub dt: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub du: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub duu: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl SpaceTimeTest {
    /// Time-independent `G(u)` from its value and two derivatives.
    pub fn stationary(
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        du: impl Fn(f64) -> f64 + Send + Sync + 'static,
        duu: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            g: Arc::new(move |_, u| g(u)),
            dt: Arc::new(|_, _| 0.0),
            du: Arc::new(move |_, u| du(u)),
            duu: Arc::new(move |_, u| duu(u)),
        }
    }

    pub fn zero() -> Self {
        Self::stationary(|_| 0.0, |_| 0.0, |_| 0.0)
    }
}

/// Weak-form residual at the last frame, with trapezoid quadrature in space
/// and time over the stored frames:
/// `<rho_t,G_t> - <rho_0,G_0> - int (<rho,d_s G> + <w, G''>) + int (w(1) G'(1) - w(0) G'(0))`
/// `- 1{robin} int ((beta - delta w(1)) G(1) - (lambda w(0) - alpha) G(0))`.
pub fn weak_form_residual(sol: &HydroSolution, test: &SpaceTimeTest) -> f64 {
    let m = sol.u.len() - 1;
    let inner = |v: &[f64], f: &dyn Fn(f64) -> f64| -> f64 {
        let vals: Vec<f64> = (0..=m).map(|j| v[j] * f(sol.u[j])).collect();
        trapezoid(&vals)
    };
    let integrand = |k: usize| -> f64 {
        let s = sol.times[k];
        let (rho, w) = (&sol.rho[k], &sol.w[k]);
        let mut v = inner(rho, &|u| (test.dt)(s, u)) + inner(w, &|u| (test.duu)(s, u));
        v -= w[m] * (test.du)(s, 1.0) - w[0] * (test.du)(s, 0.0);
        if let HydroBoundary::Robin { lambda, delta, alpha, beta } = sol.boundary {
            v += (beta - delta * w[m]) * (test.g)(s, 1.0) - (lambda * w[0] - alpha) * (test.g)(s, 0.0);
        }
        v
    };
    let last = sol.times.len() - 1;
    let mut time_int = 0.0;
    let mut prev = integrand(0);
    for k in 1..=last {
        let cur = integrand(k);
        time_int += 0.5 * (prev + cur) * (sol.times[k] - sol.times[k - 1]);
        prev = cur;
    }
    let (t0, t1) = (sol.times[0], sol.times[last]);
    inner(&sol.rho[last], &|u| (test.g)(t1, u)) - inner(&sol.rho[0], &|u| (test.g)(t0, u)) - time_int
}

/// Stationary `w` profile of the regime: affine with the boundary data, or
/// the constant fugacity of the conserved mass for Neumann.
pub fn stationary_w(boundary: &HydroBoundary, u: f64, neumann_level: f64) -> f64 {
    match *boundary {
        HydroBoundary::Dirichlet { left, right } => left + (right - left) * u,
        HydroBoundary::Robin { lambda, delta, alpha, beta } => {
            let (a, l, b, d) = (alpha, lambda, beta, delta);
            (-(a * d - b * l) * u + a * d + a + b) / (l * d + l + d)
        }
        HydroBoundary::Neumann => neumann_level,
    }
}
