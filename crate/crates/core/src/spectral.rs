//! Sturm-Liouville eigensystems of `A(u) psi'' + gamma psi = 0` on `[0, 1]`
//! with `A = Phi'(rho_theta)`, and the objects built from them: the semigroup
//! `P_t`, the quadratic-variation norms and stationary OU covariances.
//!
//! The operator is discretised by second-order central differences on a
//! uniform grid with ghost points folding the boundary conditions in. The
//! generalised problem `K psi = gamma W psi`, `W = diag(1/A)` with half
//! weights at Robin/Neumann end nodes, is symmetrised by `W^{-1/2}` and solved
//! by Sturm bisection plus inverse iteration. Every eigenvalue is computed on
//! grids `m` and `2m` and Richardson-extrapolated.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::steady::{AsymptoticProfiles, Regime};
use crate::testfn::{Eval, FunctionClass, Provenance, TestFunction};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Boundary {
    /// `psi(0) = psi(1) = 0`.
    Dirichlet,
    /// `psi'(0) = lambda psi(0)`, `psi'(1) = -delta psi(1)`.
    Robin { lambda: f64, delta: f64 },
    /// `psi'(0) = psi'(1) = 0`.
    Neumann,
}

impl Boundary {
    pub fn for_profiles(asy: &AsymptoticProfiles) -> Self {
        match asy.regime() {
            Regime::DirichletStrong | Regime::Dirichlet => Boundary::Dirichlet,
            Regime::Robin => Boundary::Robin { lambda: asy.lambda, delta: asy.delta },
            Regime::Neumann => Boundary::Neumann,
        }
    }

    fn ends(&self) -> Option<(f64, f64)> {
        match *self {
            Boundary::Dirichlet => None,
            Boundary::Robin { lambda, delta } => Some((lambda, delta)),
            Boundary::Neumann => Some((0.0, 0.0)),
        }
    }
}

#[derive(Clone)]
pub struct SlProblem {
    coef: Eval,
    bc: Boundary,
    m: usize,
}

impl SlProblem {
    /// `m` is the number of grid intervals; eigenvectors come from `2m`.
    pub fn new(coef: Eval, bc: Boundary, m: usize) -> Result<Self> {
        if m < 8 || !m.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("grid size must be even and at least 8, got {m}")));
        }
        if let Boundary::Robin { lambda, delta } = bc {
            if !(lambda > 0.0 && delta > 0.0) {
                return Err(Error::InvalidParameter("Robin coefficients must be positive".into()));
            }
        }
        Ok(Self { coef, bc, m })
    }

    pub fn constant(a: f64, bc: Boundary, m: usize) -> Result<Self> {
        Self::new(Arc::new(move |_| a), bc, m)
    }

    /// `A = Phi'(rho_theta)` with the boundary condition of the regime.
    pub fn from_profiles(asy: &AsymptoticProfiles, m: usize) -> Result<Self> {
        asy.validate()?;
        let a = asy.clone();
        let coef: Eval = Arc::new(move |u| a.dphi(u).unwrap_or(f64::NAN));
        Self::new(coef, Boundary::for_profiles(asy), m)
    }

    pub fn boundary(&self) -> Boundary {
        self.bc
    }

    pub fn solve(&self, n_max: usize) -> Result<EigenSystem> {
        if n_max == 0 || self.m < 64 * n_max {
            return Err(Error::InvalidParameter(format!(
                "grid size {} must be at least 64 n_max = {}",
                self.m,
                64 * n_max
            )));
        }
        let fine = 2 * self.m;
        let a: Vec<f64> = (0..=fine).map(|j| (self.coef)(j as f64 / fine as f64)).collect();
        if let Some(bad) = a.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!("SL coefficient must be finite and positive, got {bad}")));
        }
        let coarse_a: Vec<f64> = a.iter().step_by(2).copied().collect();
        let (g_coarse, _) = discrete(&coarse_a, self.bc, n_max, false);
        let (g_fine, vecs) = discrete(&a, self.bc, n_max, true);
        let h = 1.0 / fine as f64;
        let mut gammas = Vec::with_capacity(n_max);
        let mut richardson = Vec::with_capacity(n_max);
        for n in 0..n_max {
            let est = (g_fine[n] - g_coarse[n]).abs() / 3.0;
            let gamma = g_fine[n] + (g_fine[n] - g_coarse[n]) / 3.0;
            let limit = 1e-3 * gamma.abs() + 1e-6;
            if est > limit {
                return Err(Error::Accuracy { index: n + 1, estimate: est, limit });
            }
            gammas.push(gamma);
            richardson.push(est);
        }
        let mut psi = Vec::with_capacity(n_max);
        let mut dpsi = Vec::with_capacity(n_max);
        for mut v in vecs {
            let w: Vec<f64> = v.iter().zip(&a).map(|(p, a)| p * p / a).collect();
            let norm = simpson(&w, h).sqrt();
            // Sign: positive just inside the left end.
            let lead = v.iter().find(|x| x.abs() > 1e-8 * norm).copied().unwrap_or(1.0);
            let s = lead.signum() / norm;
            v.iter_mut().for_each(|x| *x *= s);
            dpsi.push(node_derivatives(&v, h, self.bc));
            psi.push(v);
        }
        Ok(EigenSystem { bc: self.bc, m: fine, a, gammas, richardson, psi, dpsi, coef: self.coef.clone() })
    }
}

/// Lowest `count` eigenpairs of the grid problem with coefficient values `a`
/// at nodes `0..=m`. Vectors are returned on all nodes (zero at Dirichlet ends)
/// and are `W`-orthogonal but not yet normalised.
fn discrete(a: &[f64], bc: Boundary, count: usize, vectors: bool) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = a.len() - 1;
    let h = 1.0 / m as f64;
    let ih2 = 1.0 / (h * h);
    let (first, last, ends) = match bc.ends() {
        None => (1, m - 1, None),
        Some(e) => (0, m, Some(e)),
    };
    let size = last - first + 1;
    let mut diag = vec![2.0 * ih2; size];
    let off = vec![-ih2; size - 1];
    let mut w: Vec<f64> = (first..=last).map(|j| 1.0 / a[j]).collect();
    if let Some((l, d)) = ends {
        diag[0] = (1.0 + h * l) * ih2;
        diag[size - 1] = (1.0 + h * d) * ih2;
        w[0] *= 0.5;
        w[size - 1] *= 0.5;
    }
    let sq: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let sdiag: Vec<f64> = diag.iter().zip(&w).map(|(d, w)| d / w).collect();
    let soff: Vec<f64> = off.iter().enumerate().map(|(i, e)| e / (sq[i] * sq[i + 1])).collect();

    let (lo, hi) = tridiag::gershgorin(&sdiag, &soff);
    let gammas: Vec<f64> = (0..count).map(|k| tridiag::kth_eigenvalue(&sdiag, &soff, k, lo, hi)).collect();
    let mut vecs = Vec::new();
    if vectors {
        for &g in &gammas {
            let y = tridiag::inverse_iteration(&sdiag, &soff, g);
            let mut v = vec![0.0; m + 1];
            for (i, yi) in y.iter().enumerate() {
                v[first + i] = yi / sq[i];
            }
            vecs.push(v);
        }
    }
    (gammas, vecs)
}

fn node_derivatives(v: &[f64], h: f64, bc: Boundary) -> Vec<f64> {
    let m = v.len() - 1;
    let mut d = vec![0.0; m + 1];
    for j in 1..m {
        d[j] = (v[j + 1] - v[j - 1]) / (2.0 * h);
    }
    match bc {
        Boundary::Robin { lambda, delta } => {
            d[0] = lambda * v[0];
            d[m] = -delta * v[m];
        }
        Boundary::Neumann => {
            d[0] = 0.0;
            d[m] = 0.0;
        }
        Boundary::Dirichlet => {
            d[0] = (-11.0 * v[0] + 18.0 * v[1] - 9.0 * v[2] + 2.0 * v[3]) / (6.0 * h);
            d[m] = (11.0 * v[m] - 18.0 * v[m - 1] + 9.0 * v[m - 2] - 2.0 * v[m - 3]) / (6.0 * h);
        }
    }
    d
}

/// Composite Simpson rule for samples on a uniform grid with an even number of intervals.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let m = values.len() - 1;
    debug_assert!(m.is_multiple_of(2) && m >= 2);
    let mut s = values[0] + values[m];
    for (j, v) in values.iter().enumerate().take(m).skip(1) {
        s += if j % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

/// Simpson quadrature of `f` over `[0, 1]` with `m` intervals.
pub fn integrate(f: impl Fn(f64) -> f64, m: usize) -> f64 {
    let h = 1.0 / m as f64;
    let v: Vec<f64> = (0..=m).map(|j| f(j as f64 * h)).collect();
    simpson(&v, h)
}

/// Eigenpairs `(gamma_n, psi_n)`, `n = 1, 2, ...`, with `psi_n` orthonormal in
/// `L^2(A^{-1} du)`.
#[derive(Clone)]
pub struct EigenSystem {
    bc: Boundary,
    m: usize,
    a: Vec<f64>,
    gammas: Vec<f64>,
    richardson: Vec<f64>,
    psi: Vec<Vec<f64>>,
    dpsi: Vec<Vec<f64>>,
    coef: Eval,
}

impl std::fmt::Debug for EigenSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EigenSystem")
            .field("bc", &self.bc)
            .field("m", &self.m)
            .field("gammas", &self.gammas)
            .finish()
    }
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn boundary(&self) -> Boundary {
        self.bc
    }

    /// Intervals of the grid carrying the eigenvectors.
    pub fn grid_size(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 / self.m as f64
    }

    /// `A` at the grid nodes.
    pub fn coefficient_nodes(&self) -> &[f64] {
        &self.a
    }

    pub fn coefficient(&self, u: f64) -> f64 {
        (self.coef)(u)
    }

    /// `(kappa_1, kappa_2) = (inf A, sup A)` over the grid.
    pub fn kappa(&self) -> (f64, f64) {
        let lo = self.a.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.a.iter().copied().fold(0.0, f64::max);
        (lo, hi)
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// `gamma_n`, 1-based.
    pub fn gamma(&self, n: usize) -> f64 {
        self.gammas[n - 1]
    }

    /// Richardson error estimates, aligned with [`Self::gammas`].
    pub fn richardson(&self) -> &[f64] {
        &self.richardson
    }

    /// `psi_n` at the grid nodes.
    pub fn psi_nodes(&self, n: usize) -> &[f64] {
        &self.psi[n - 1]
    }

    fn locate(&self, u: f64) -> (usize, f64) {
        let x = (u.clamp(0.0, 1.0)) * self.m as f64;
        let j = (x.floor() as usize).min(self.m - 1);
        (j, x - j as f64)
    }

    /// Cubic Hermite interpolation of `psi_n`.
    pub fn psi(&self, n: usize, u: f64) -> f64 {
        let (j, s) = self.locate(u);
        if s == 0.0 {
            return self.psi[n - 1][j];
        }
        let (p0, p1) = (self.psi[n - 1][j], self.psi[n - 1][j + 1]);
        let (d0, d1) = (self.dpsi[n - 1][j] * self.h(), self.dpsi[n - 1][j + 1] * self.h());
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * p0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * p1 + (s3 - s2) * d1
    }

    pub fn dpsi(&self, n: usize, u: f64) -> f64 {
        let (j, s) = self.locate(u);
        if s == 0.0 {
            return self.dpsi[n - 1][j];
        }
        let (p0, p1) = (self.psi[n - 1][j], self.psi[n - 1][j + 1]);
        let (d0, d1) = (self.dpsi[n - 1][j] * self.h(), self.dpsi[n - 1][j + 1] * self.h());
        let s2 = s * s;
        let v = (6.0 * s2 - 6.0 * s) * p0 + (3.0 * s2 - 4.0 * s + 1.0) * d0 + (-6.0 * s2 + 6.0 * s) * p1 + (3.0 * s2 - 2.0 * s) * d1;
        v / self.h()
    }

    /// `psi_n'' = -gamma_n psi_n / A`, read off the equation.
    pub fn d2psi(&self, n: usize, u: f64) -> f64 {
        -self.gamma(n) * self.psi(n, u) / self.coefficient(u)
    }

    pub fn sup_norm(&self, n: usize) -> f64 {
        self.psi[n - 1].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sign changes of `psi_n` strictly inside `(0, 1)`.
    pub fn sign_changes(&self, n: usize) -> usize {
        let v = &self.psi[n - 1];
        let tol = 1e-9 * self.sup_norm(n);
        let mut count = 0;
        let mut prev = 0.0;
        for &x in &v[1..self.m] {
            if x.abs() <= tol {
                continue;
            }
            if prev != 0.0 && x.signum() != prev {
                count += 1;
            }
            prev = x.signum();
        }
        count
    }

    /// `int f g / A` by Simpson on the eigen grid.
    pub fn weighted_inner(&self, f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> f64 {
        let v: Vec<f64> = (0..=self.m).map(|j| {
            let u = self.node(j);
            f(u) * g(u) / self.a[j]
        }).collect();
        simpson(&v, self.h())
    }

    /// `<psi_i, psi_j>_{A^{-1}}` from the stored node values.
    pub fn gram(&self, i: usize, j: usize) -> f64 {
        let v: Vec<f64> = (0..=self.m).map(|k| self.psi[i - 1][k] * self.psi[j - 1][k] / self.a[k]).collect();
        simpson(&v, self.h())
    }

    /// `psi_n` as a test function carrying its eigen provenance.
    pub fn test_function(self: &Arc<Self>, n: usize, class: FunctionClass) -> TestFunction {
        assert!(n >= 1 && n <= self.len(), "eigenfunction {n} not computed");
        let (s0, s1, s2) = (self.clone(), self.clone(), self.clone());
        TestFunction::new(
            format!("psi{n}"),
            class,
            Provenance::Eigenfunction(n),
            vec![
                Arc::new(move |u| s0.psi(n, u)),
                Arc::new(move |u| s1.dpsi(n, u)),
                Arc::new(move |u| s2.d2psi(n, u)),
            ],
        )
    }
}

/// `P_t h` as a truncated eigen-expansion.
#[derive(Clone, Debug)]
pub struct ModalExpansion {
    system: Arc<EigenSystem>,
    /// `a_n e^{-gamma_n t}` for `n = 1..=n_cut`.
    pub coeffs: Vec<f64>,
    /// Estimated truncation error in sup norm (for `t > 0`), or the `A^{-1}`
    /// weighted `L^2` residual of the reconstruction at `t = 0`.
    pub residual: f64,
    /// True when the requested tolerance was not met with the available modes.
    pub truncated: bool,
}

impl ModalExpansion {
    pub fn eval(&self, u: f64) -> f64 {
        self.coeffs.iter().enumerate().map(|(i, c)| c * self.system.psi(i + 1, u)).sum()
    }

    pub fn n_cut(&self) -> usize {
        self.coeffs.len()
    }
}

/// `P_t h = sum_n <h, psi_n>_{A^{-1}} e^{-gamma_n t} psi_n`.
pub fn semigroup_apply(sys: &Arc<EigenSystem>, h: impl Fn(f64) -> f64, t: f64, tol: f64) -> Result<ModalExpansion> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be non-negative, got {t}")));
    }
    let hv: Vec<f64> = (0..=sys.m).map(|j| h(sys.node(j))).collect();
    let a: Vec<f64> = (1..=sys.len())
        .map(|n| {
            let v: Vec<f64> = (0..=sys.m).map(|j| hv[j] * sys.psi[n - 1][j] / sys.a[j]).collect();
            simpson(&v, sys.h())
        })
        .collect();
    let terms: Vec<f64> = a.iter().enumerate().map(|(i, c)| c * (-sys.gammas[i] * t).exp()).collect();
    if t > 0.0 {
        // Smallest n_cut whose discarded terms, bounded in sup norm, sum below tol.
        let bound = |i: usize| terms[i].abs() * sys.sup_norm(i + 1);
        let mut tail: f64 = 0.0;
        let mut n_cut = terms.len();
        for i in (0..terms.len()).rev() {
            if tail + bound(i) >= tol {
                break;
            }
            tail += bound(i);
            n_cut = i;
        }
        // Modes beyond the computed set decay at least as fast as the last one.
        let last = terms.len() - 1;
        let beyond = bound(last) * (-(sys.gammas[last] - sys.gammas[last.saturating_sub(1)]) * t).exp();
        let n_cut = n_cut.max(1);
        return Ok(ModalExpansion {
            system: sys.clone(),
            coeffs: terms[..n_cut].to_vec(),
            residual: tail + beyond,
            truncated: tail + beyond >= tol,
        });
    }
    // t = 0: all modes, with the achieved reconstruction residual reported.
    let recon: Vec<f64> = (0..=sys.m)
        .map(|j| terms.iter().enumerate().map(|(i, c)| c * sys.psi[i][j]).sum::<f64>())
        .collect();
    let r: Vec<f64> = (0..=sys.m).map(|j| (hv[j] - recon[j]).powi(2) / sys.a[j]).collect();
    let residual = simpson(&r, sys.h()).max(0.0).sqrt();
    Ok(ModalExpansion { system: sys.clone(), coeffs: terms, residual, truncated: residual >= tol })
}

const NORM_GRID: usize = 1 << 12;

/// `||grad H||^2_{L^2, theta} = 2 int Phi(rho) (H')^2 + 1{theta=1}[(alpha/lambda^2 + Phi(rho(0))/lambda) H'(0)^2 + (beta/delta^2 + Phi(rho(1))/delta) H'(1)^2]`.
pub fn qv_norm(h: &TestFunction, asy: &AsymptoticProfiles) -> f64 {
    let bulk = 2.0 * integrate(|u| asy.fugacity(u) * h.d1(u).powi(2), NORM_GRID);
    if asy.regime() != Regime::Robin {
        return bulk;
    }
    let (al, la, be, de) = (asy.alpha, asy.lambda, asy.beta, asy.delta);
    let left = (al / (la * la) + asy.fugacity(0.0) / la) * h.d1(0.0).powi(2);
    let right = (be / (de * de) + asy.fugacity(1.0) / de) * h.d1(1.0).powi(2);
    bulk + left + right
}

/// `||H||^2_{L^2, theta, *} = 2 int Phi(rho) (H')^2 + 1{theta=1}[(alpha + lambda Phi(rho(0))) H(0)^2 + (beta + delta Phi(rho(1))) H(1)^2]`.
pub fn starred_norm(h: &TestFunction, asy: &AsymptoticProfiles) -> Result<f64> {
    if asy.theta < 1.0 {
        return Err(Error::RegimeMismatch {
            regime: asy.regime().to_string(),
            reason: "the starred norm needs theta >= 1".into(),
        });
    }
    let bulk = 2.0 * integrate(|u| asy.fugacity(u) * h.d1(u).powi(2), NORM_GRID);
    if asy.regime() != Regime::Robin {
        return Ok(bulk);
    }
    let left = (asy.alpha + asy.lambda * asy.fugacity(0.0)) * h.value(0.0).powi(2);
    let right = (asy.beta + asy.delta * asy.fugacity(1.0)) * h.value(1.0).powi(2);
    Ok(bulk + left + right)
}

/// `int H G chi_theta du`, the stationary covariance of the limit field.
pub fn static_covariance(h: &TestFunction, g: &TestFunction, asy: &AsymptoticProfiles) -> Result<f64> {
    let m = NORM_GRID;
    let mut v = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let u = j as f64 / m as f64;
        v.push(h.value(u) * g.value(u) * asy.chi(u)?);
    }
    Ok(simpson(&v, 1.0 / m as f64))
}

/// `E[Y_t(H) Y_0(G)] = int (P_t H) G chi_theta du` under stationarity.
pub fn ou_covariance(
    sys: &Arc<EigenSystem>,
    asy: &AsymptoticProfiles,
    h: &TestFunction,
    g: &TestFunction,
    t: f64,
) -> Result<f64> {
    if t == 0.0 {
        return static_covariance(h, g, asy);
    }
    let pt = semigroup_apply(sys, |u| h.value(u), t, 1e-12)?;
    let mut v = Vec::with_capacity(sys.m + 1);
    for j in 0..=sys.m {
        let u = sys.node(j);
        v.push(pt.eval(u) * g.value(u) * asy.chi(u)?);
    }
    Ok(simpson(&v, sys.h()))
}

mod tridiag {
    /// Interval containing the spectrum.
    pub fn gershgorin(d: &[f64], e: &[f64]) -> (f64, f64) {
        let n = d.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
            lo = lo.min(d[i] - r);
            hi = hi.max(d[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = d[0] - x;
        for i in 0..d.len() {
            if i > 0 {
                q = d[i] - x - e[i - 1] * e[i - 1] / q;
            }
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// `k`-th smallest eigenvalue, 0-based, by bisection to full precision.
    pub fn kth_eigenvalue(d: &[f64], e: &[f64], k: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(d, e, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for the eigenvalue nearest `sigma`, unit Euclidean norm.
    pub fn inverse_iteration(d: &[f64], e: &[f64], sigma: f64) -> Vec<f64> {
        let n = d.len();
        let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs())) + e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let lu = Lu::factor(d, e, sigma, scale);
        // Deterministic start with components in every direction.
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
        for _ in 0..4 {
            lu.solve(&mut x);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
        }
        x
    }

    /// LU with partial pivoting of the tridiagonal `T - sigma I`.
    struct Lu {
        /// Upper factor: main, first and second superdiagonal.
        u0: Vec<f64>,
        u1: Vec<f64>,
        u2: Vec<f64>,
        /// Multipliers and row swaps.
        l: Vec<f64>,
        swap: Vec<bool>,
    }

    impl Lu {
        fn factor(d: &[f64], e: &[f64], sigma: f64, scale: f64) -> Self {
            let n = d.len();
            let eps = f64::EPSILON * scale;
            let mut a: Vec<f64> = d.iter().map(|v| v - sigma).collect();
            let mut b: Vec<f64> = e.to_vec();
            b.push(0.0);
            let mut c: Vec<f64> = vec![0.0; n];
            let mut sub: Vec<f64> = e.to_vec();
            sub.push(0.0);
            let mut l = vec![0.0; n];
            let mut swap = vec![false; n];
            for i in 0..n.saturating_sub(1) {
                if sub[i].abs() > a[i].abs() {
                    swap[i] = true;
                    // Swap rows i and i+1 in columns i..i+2.
                    let (ai, bi, ci) = (a[i], b[i], c[i]);
                    a[i] = sub[i];
                    b[i] = a[i + 1];
                    c[i] = b[i + 1];
                    let li = ai / a[i];
                    l[i] = li;
                    a[i + 1] = bi - li * b[i];
                    b[i + 1] = ci - li * c[i];
                } else {
                    if a[i] == 0.0 {
                        a[i] = eps;
                    }
                    let li = sub[i] / a[i];
                    l[i] = li;
                    a[i + 1] -= li * b[i];
                    b[i + 1] -= li * c[i];
                }
            }
            if a[n - 1] == 0.0 {
                a[n - 1] = eps;
            }
            Lu { u0: a, u1: b, u2: c, l, swap }
        }

        fn solve(&self, x: &mut [f64]) {
            let n = x.len();
            for i in 0..n.saturating_sub(1) {
                if self.swap[i] {
                    x.swap(i, i + 1);
                }
                x[i + 1] -= self.l[i] * x[i];
            }
            for i in (0..n).rev() {
                let mut s = x[i];
                if i + 1 < n {
                    s -= self.u1[i] * x[i + 1];
                }
                if i + 2 < n {
                    s -= self.u2[i] * x[i + 2];
                }
                x[i] = s / self.u0[i];
            }
        }
    }
}
