//! Single-site thermodynamics of the zero-range marginal
//! `mu_phi(k) = phi^k / (g(k)! Z(phi))`.
//!
//! Everything here is computed from the power series in `phi` with a rigorous
//! geometric tail bound: the series is cut at index `k` only once the block
//! ratio `phi^p / (g(j+1)...g(j+p))` is below `0.999` for every `j >= k` and
//! the bounded tail is below the requested relative tolerance.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rate::JumpRate;

/// Relative accuracy used internally when a series value feeds another
/// computation (root finding, profiles).
pub const SERIES_TOL: f64 = 1e-15;

const RATIO_CAP: f64 = 0.999;
const MAX_TERMS: usize = 100_000_000;
const RESCALE_AT: f64 = 1e250;

/// `Z`, the mean and the variance of `mu_phi`, from one series pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesMoments {
    pub ln_z: f64,
    pub mean: f64,
    pub variance: f64,
    pub terms: usize,
}

impl SeriesMoments {
    pub fn z(&self) -> f64 {
        self.ln_z.exp()
    }
}

fn check_domain(rate: &JumpRate, phi: f64) -> Result<()> {
    if !(phi >= 0.0) || phi >= rate.radius() || !phi.is_finite() {
        return Err(Error::FugacityDomain { phi, radius: rate.radius() });
    }
    Ok(())
}

/// Sums `Z = sum t_j`, `sum j t_j` and `sum j^2 t_j` with `t_j = phi^j / g(j)!`.
pub fn series_moments(rate: &JumpRate, phi: f64, tol: f64) -> Result<SeriesMoments> {
    check_domain(rate, phi)?;
    if phi == 0.0 {
        return Ok(SeriesMoments { ln_z: 0.0, mean: 0.0, variance: 0.0, terms: 1 });
    }
    let p = rate.period();
    let (mut s0, mut s1, mut s2) = (1.0f64, 0.0f64, 0.0f64);
    // Last `p` terms, most recent first.
    let mut last = [1.0f64, 0.0f64];
    let mut ln_scale = 0.0f64;
    let mut k: u64 = 0;
    loop {
        let t = last[0] * phi / rate.g(k + 1);
        last = [t, last[0]];
        k += 1;
        let kf = k as f64;
        s0 += t;
        s1 += kf * t;
        s2 += kf * kf * t;
        if s0 > RESCALE_AT {
            let f = 1.0 / RESCALE_AT;
            s0 *= f;
            s1 *= f;
            s2 *= f;
            last[0] *= f;
            last[1] *= f;
            ln_scale += RESCALE_AT.ln();
        }
        if k as usize >= p {
            let r = rate.block_ratio_bound(phi, k);
            if r < 1.0 {
                let g0 = r / (1.0 - r);
                let g1 = r / ((1.0 - r) * (1.0 - r));
                let g2 = r * (1.0 + r) / ((1.0 - r) * (1.0 - r) * (1.0 - r));
                let b = p as f64;
                if rate.ratio_is_exact_from(k + 1 - p as u64) {
                    // t_{a + m p} = t_a r^m for each of the last p indices a.
                    for (i, &ta) in last.iter().take(p).enumerate() {
                        let a = kf - i as f64;
                        s0 += ta * g0;
                        s1 += ta * (a * g0 + b * g1);
                        s2 += ta * (a * a * g0 + 2.0 * a * b * g1 + b * b * g2);
                    }
                    break;
                }
                if r < RATIO_CAP {
                    let block: f64 = last.iter().take(p).sum();
                    let a = kf + b;
                    let tail0 = block * g0;
                    let tail2 = block * (a * a * g0 + 2.0 * a * b * g1 + b * b * g2);
                    if tail0 <= tol * s0 && tail2 <= tol * s2 {
                        break;
                    }
                }
            }
        }
        if k as usize > MAX_TERMS || !last[0].is_finite() {
            return Err(Error::Divergence { phi, terms: k as usize });
        }
    }
    let mean = s1 / s0;
    let variance = (s2 / s0 - mean * mean).max(0.0);
    Ok(SeriesMoments { ln_z: s0.ln() + ln_scale, mean, variance, terms: k as usize + 1 })
}

/// `Z(phi) = sum_{j>=0} phi^j / g(j)!` to relative accuracy `tol`.
pub fn partition_function(rate: &JumpRate, phi: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    Ok(series_moments(rate, phi, tol)?.z())
}

/// `R(phi) = E_phi[eta]`.
pub fn mean_density(rate: &JumpRate, phi: f64, tol: f64) -> Result<f64> {
    Ok(series_moments(rate, phi, tol.min(SERIES_TOL))?.mean)
}

/// `Var_phi(eta)`.
pub fn variance(rate: &JumpRate, phi: f64) -> Result<f64> {
    Ok(series_moments(rate, phi, SERIES_TOL)?.variance)
}

/// `R'(phi) = Var_phi(eta) / phi`, with `R'(0) = 1 / g(1)`.
pub fn dmean(rate: &JumpRate, phi: f64) -> Result<f64> {
    if phi == 0.0 {
        return Ok(1.0 / rate.g(1));
    }
    let m = series_moments(rate, phi, SERIES_TOL)?;
    Ok(m.variance / phi)
}

/// `Phi(rho) = R^{-1}(rho)`: safeguarded Newton inside a monotone bracket.
pub fn fugacity_of_density(rate: &JumpRate, rho: f64, tol: f64) -> Result<f64> {
    fugacity_of_density_from(rate, rho, None, tol)
}

/// As [`fugacity_of_density`], starting Newton from `guess` when it is inside
/// the domain. Useful when `Phi` is re-evaluated on a slowly varying profile.
pub fn fugacity_of_density_from(rate: &JumpRate, rho: f64, guess: Option<f64>, tol: f64) -> Result<f64> {
    if !(rho >= 0.0) {
        return Err(Error::NegativeDensity(rho));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    let radius = rate.radius();
    let r_at = |phi: f64| series_moments(rate, phi, SERIES_TOL);

    let guess = guess.filter(|g| *g > 0.0 && *g < radius);
    let mut lo = 0.0f64;
    let mut hi = None;
    if let Some(g) = guess {
        if r_at(g)?.mean < rho {
            lo = g;
        } else {
            hi = Some(g);
        }
    }
    let mut hi = match hi {
        Some(h) => h,
        None if radius.is_infinite() => {
            let mut h = (2.0 * lo).max(1.0);
            while r_at(h)?.mean < rho {
                lo = h;
                h *= 2.0;
                if !h.is_finite() {
                    return Err(Error::DensityOutOfRange { rho, radius });
                }
            }
            h
        }
        None => {
            let mut found = None;
            for e in 1..=12 {
                let h = radius * (1.0 - 10f64.powi(-e));
                if h <= lo {
                    continue;
                }
                if r_at(h)?.mean >= rho {
                    found = Some(h);
                    break;
                }
                lo = h;
            }
            found.ok_or(Error::DensityOutOfRange { rho, radius })?
        }
    };

    let mut x = match guess {
        Some(g) if g >= lo && g <= hi => g,
        _ => 0.5 * (lo + hi),
    };
    for _ in 0..200 {
        let m = r_at(x)?;
        let f = m.mean - rho;
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = m.variance / x;
        let mut next = if slope > 0.0 { x - f / slope } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= tol * x || (hi - lo) <= tol * x {
            return Ok(x);
        }
    }
    Ok(x)
}

/// `Phi'(rho) = Phi(rho) / Var_{Phi(rho)}(eta)`; at `rho = 0` the limit `g(1)`.
pub fn dphi(rate: &JumpRate, rho: f64, tol: f64) -> Result<f64> {
    if !(rho >= 0.0) {
        return Err(Error::NegativeDensity(rho));
    }
    if rho == 0.0 {
        return Ok(rate.g(1));
    }
    let phi = fugacity_of_density(rate, rho, tol)?;
    dphi_at_fugacity(rate, phi)
}

/// `Phi'(R(phi)) = phi / Var_phi(eta)`, without the inversion step.
pub fn dphi_at_fugacity(rate: &JumpRate, phi: f64) -> Result<f64> {
    if phi == 0.0 {
        return Ok(rate.g(1));
    }
    let var = variance(rate, phi)?;
    if !(var > f64::EPSILON * phi) {
        return Err(Error::NonPositiveVariance { phi, variance: var });
    }
    Ok(phi / var)
}

/// Truncated single-site marginal with an inverse-CDF sampler.
#[derive(Clone, Debug)]
pub struct SiteMarginal {
    rate: Arc<JumpRate>,
    fugacity: f64,
    pmf: Vec<f64>,
    cdf: Vec<f64>,
    tail: f64,
}

/// Bound on the probability mass dropped by [`SiteMarginal`].
pub const MARGINAL_TAIL: f64 = 1e-12;

impl SiteMarginal {
    pub fn new(rate: Arc<JumpRate>, phi: f64) -> Result<Self> {
        let m = series_moments(&rate, phi, SERIES_TOL)?;
        let inv_z = (-m.ln_z).exp();
        let mut pmf = vec![inv_z];
        let mut tail = if phi == 0.0 { 0.0 } else { 1.0 - inv_z };
        let p = rate.period();
        let mut k: u64 = 0;
        while phi > 0.0 && tail > MARGINAL_TAIL {
            let next = pmf[k as usize] * phi / rate.g(k + 1);
            pmf.push(next);
            k += 1;
            if k as usize >= p {
                let rho = rate.block_ratio_bound(phi, k);
                if rho < RATIO_CAP {
                    let block: f64 = pmf[pmf.len() - p..].iter().sum();
                    tail = block * rho / (1.0 - rho);
                }
            }
            if k as usize > MAX_TERMS {
                return Err(Error::Divergence { phi, terms: k as usize });
            }
        }
        let mut cdf = Vec::with_capacity(pmf.len());
        let mut acc = 0.0;
        for q in &pmf {
            acc += q;
            cdf.push(acc);
        }
        Ok(Self { rate, fugacity: phi, pmf, cdf, tail })
    }

    pub fn fugacity(&self) -> f64 {
        self.fugacity
    }

    pub fn rate(&self) -> &JumpRate {
        &self.rate
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn cutoff(&self) -> usize {
        self.pmf.len() - 1
    }

    /// Bound on the mass beyond the cutoff.
    pub fn cutoff_tail(&self) -> f64 {
        self.tail
    }

    /// `sum_{k <= K} f(k) p(k)`.
    pub fn expect(&self, f: impl Fn(u64) -> f64) -> f64 {
        self.pmf.iter().enumerate().map(|(k, p)| f(k as u64) * p).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random::<f64>();
        let idx = self.cdf.partition_point(|c| *c <= u);
        idx.min(self.pmf.len() - 1) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ind() -> JumpRate {
        JumpRate::constant(1.0).unwrap()
    }
    fn lin() -> JumpRate {
        JumpRate::linear(1.0).unwrap()
    }

    /// Independent oracle: plain summation of `phi^j / g(j)!` for many terms.
    fn brute_z(rate: &JumpRate, phi: f64, n: u64) -> f64 {
        let mut t = 1.0;
        let mut s = 1.0;
        for j in 1..n {
            t *= phi / rate.g(j);
            s += t;
        }
        s
    }

    #[test]
    fn partition_function_examples() {
        assert!((partition_function(&ind(), 0.5, 1e-14).unwrap() - 2.0).abs() < 1e-13);
        assert_eq!(partition_function(&ind(), 0.0, 1e-10).unwrap(), 1.0);
        let e = brute_z(&lin(), 1.0, 40);
        assert!((partition_function(&lin(), 1.0, 1e-14).unwrap() - e).abs() < 1e-13);
        assert!((e - std::f64::consts::E).abs() < 1e-14);
        let a = JumpRate::alternating();
        let z = partition_function(&a, 0.8, 1e-14).unwrap();
        assert!((z - brute_z(&a, 0.8, 2000)).abs() < 1e-12 * z);
    }

    #[test]
    fn partition_function_errors() {
        assert!(matches!(partition_function(&ind(), 1.0, 1e-10), Err(Error::FugacityDomain { .. })));
        assert!(matches!(partition_function(&ind(), -0.1, 1e-10), Err(Error::FugacityDomain { .. })));
        assert!(partition_function(&ind(), 0.5, 0.0).is_err());
    }

    #[test]
    fn mean_density_examples() {
        assert!((mean_density(&ind(), 0.5, 1e-14).unwrap() - 1.0).abs() < 1e-13);
        assert_eq!(mean_density(&ind(), 0.0, 1e-14).unwrap(), 0.0);
        assert!((mean_density(&lin(), 2.0, 1e-14).unwrap() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn fugacity_of_density_examples() {
        assert!((fugacity_of_density(&ind(), 1.0, 1e-13).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(fugacity_of_density(&ind(), 0.0, 1e-13).unwrap(), 0.0);
        assert!((fugacity_of_density(&lin(), 3.0, 1e-13).unwrap() - 3.0).abs() < 1e-11);
        assert!(matches!(fugacity_of_density(&ind(), -1.0, 1e-13), Err(Error::NegativeDensity(_))));
        // Large densities approach the radius for bounded rates.
        let phi = fugacity_of_density(&ind(), 1000.0, 1e-13).unwrap();
        assert!((phi - 1000.0 / 1001.0).abs() < 1e-10);
    }

    #[test]
    fn dphi_examples() {
        for rho in [0.1, 1.0, 4.0] {
            assert!((dphi(&lin(), rho, 1e-13).unwrap() - 1.0).abs() < 1e-10);
        }
        assert!((dphi(&ind(), 1.0, 1e-13).unwrap() - 0.25).abs() < 1e-11);
        assert_eq!(dphi(&ind(), 0.0, 1e-13).unwrap(), 1.0);
        assert_eq!(dphi(&JumpRate::alternating(), 0.0, 1e-13).unwrap(), 0.5);
    }

    #[test]
    fn dphi_inverse_identity() {
        let rates = [ind(), lin(), JumpRate::alternating()];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for rate in &rates {
            for _ in 0..20 {
                let rho: f64 = rng.random_range(0.05..5.0);
                let phi = fugacity_of_density(rate, rho, 1e-14).unwrap();
                let prod = dphi(rate, rho, 1e-14).unwrap() * dmean(rate, phi).unwrap();
                assert!((prod - 1.0).abs() < 1e-8, "{rate}: {prod}");
            }
        }
    }

    #[test]
    fn variance_matches_finite_difference() {
        for rate in [ind(), lin(), JumpRate::alternating()] {
            for phi in [0.1, 0.3, 0.6] {
                let h = 1e-5 * phi;
                let rp = mean_density(&rate, phi + h, 1e-15).unwrap();
                let rm = mean_density(&rate, phi - h, 1e-15).unwrap();
                let fd = phi * (rp - rm) / (2.0 * h);
                let v = variance(&rate, phi).unwrap();
                assert!((fd - v).abs() < 1e-6 * v, "{rate} phi={phi}: {fd} vs {v}");
            }
        }
    }

    #[test]
    fn round_trip_log_grid() {
        for rate in [ind(), lin(), JumpRate::alternating()] {
            for i in 0..=24 {
                let rho = 10f64.powf(-3.0 + 6.0 * i as f64 / 24.0);
                let phi = fugacity_of_density(&rate, rho, 1e-14).unwrap();
                let back = mean_density(&rate, phi, 1e-15).unwrap();
                assert!((back - rho).abs() <= 1e-8 * (1.0 + rho), "{rate} rho={rho}: {back}");
            }
        }
    }

    #[test]
    fn marginal_ratio_identity_and_tail() {
        let rate = Arc::new(JumpRate::alternating());
        let m = SiteMarginal::new(rate.clone(), 0.7).unwrap();
        assert!(m.cutoff_tail() <= MARGINAL_TAIL);
        let total: f64 = m.pmf().iter().sum();
        assert!(total >= 1.0 - 1e-12 - 1e-14);
        for k in 0..m.cutoff() {
            let ratio = m.pmf()[k + 1] / m.pmf()[k];
            let expect = 0.7 / rate.g(k as u64 + 1);
            assert!((ratio - expect).abs() <= 4.0 * f64::EPSILON * expect);
        }
        let zero = SiteMarginal::new(rate, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..100).all(|_| zero.sample(&mut rng) == 0));
    }

    #[test]
    fn sampler_geometric_mean() {
        let m = SiteMarginal::new(Arc::new(ind()), 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000;
        let mut s = 0.0;
        let mut s2 = 0.0;
        for _ in 0..n {
            let k = m.sample(&mut rng) as f64;
            s += k;
            s2 += k * k;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn sampler_poisson_variance() {
        let m = SiteMarginal::new(Arc::new(lin()), 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 1_000_000usize;
        let xs: Vec<f64> = (0..n).map(|_| m.sample(&mut rng) as f64).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = dev.iter().sum::<f64>() / (n - 1) as f64;
        let m4 = dev.iter().map(|d| d * d).sum::<f64>() / n as f64;
        let se = ((m4 - var * var) / n as f64).sqrt();
        assert!((var - 2.0).abs() < 3.0 * se, "{var} ± {se}");
    }

    #[test]
    fn moments_finite_and_match_sampler() {
        for (rate, phi) in [(ind(), 0.5), (JumpRate::alternating(), 0.8)] {
            let m = SiteMarginal::new(Arc::new(rate), phi).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let n = 200_000;
            let xs: Vec<f64> = (0..n).map(|_| m.sample(&mut rng) as f64).collect();
            for l in 1..=4 {
                let exact = m.expect(|k| (k as f64).powi(l));
                assert!(exact.is_finite());
                let vals: Vec<f64> = xs.iter().map(|x| x.powi(l)).collect();
                let mean = vals.iter().sum::<f64>() / n as f64;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
                let se = (var / n as f64).sqrt();
                assert!((mean - exact).abs() < 3.5 * se, "l={l}: {mean} vs {exact} ± {se}");
            }
        }
    }

    #[test]
    fn mean_is_monotone() {
        for rate in [ind(), JumpRate::alternating(), lin()] {
            let top = rate.radius().min(5.0) * 0.99;
            let mut prev = -1.0;
            for i in 0..=50 {
                let phi = top * i as f64 / 50.0;
                let r = mean_density(&rate, phi, 1e-15).unwrap();
                assert!(r > prev);
                prev = r;
            }
        }
    }

    #[test]
    fn partition_function_diverges_at_radius() {
        // Z grows without bound as phi approaches phi* for the shipped bounded rates.
        for rate in [ind(), JumpRate::alternating()] {
            let mut prev = 0.0;
            for e in 1..=5 {
                let phi = rate.radius() * (1.0 - 10f64.powi(-e));
                let z = partition_function(&rate, phi, 1e-12).unwrap();
                assert!(z > 5.0 * prev);
                prev = z;
            }
        }
    }
}
