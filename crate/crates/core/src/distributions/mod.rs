//! Univariate and product-form distributions used as full conditionals.
//!
//! Every distribution exposes exact CDF and interval-mass queries; the CMH
//! acceptance ratio is built from these masses, so they must not be estimated.

mod noncentral;
pub mod special;

pub use noncentral::{noncentral_chi2_cdf, SERIES_TAIL_BOUND};

use crate::error::{Error, Result};
use crate::rng::UniformSource;
use special::{
    ln_gamma, regularized_gamma, std_normal_cdf, std_normal_interval, std_normal_pdf, std_normal_quantile,
    std_normal_sf,
};

/// Bracketing bisection tolerance for quantiles without a closed form.
pub const QUANTILE_TOLERANCE: f64 = 1e-10;

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability must lie in (0, 1), got {p}")))
    }
}

/// Common interface of the scalar conditionals.
pub trait Univariate {
    fn cdf(&self, x: f64) -> f64;

    /// Upper tail `1 - cdf(x)`; implementors override where it can be computed directly.
    fn sf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    fn pdf(&self, x: f64) -> f64;

    fn quantile(&self, p: f64) -> Result<f64>;

    fn mean(&self) -> f64;

    fn sd(&self) -> f64;

    fn sample<R: UniformSource + ?Sized>(&self, rng: &mut R) -> f64;

    /// Mass of the interval `[lo, hi]`.
    fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        (self.cdf(hi) - self.cdf(lo)).clamp(0.0, 1.0)
    }

    /// Mass outside `[lo, hi]`, computed from the two tails.
    fn outside_mass(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 1.0;
        }
        (self.cdf(lo) + self.sf(hi)).clamp(0.0, 1.0)
    }
}

/// Normal distribution with mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian1D {
    mean: f64,
    sd: f64,
}

impl Gaussian1D {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !mean.is_finite() || !(sd > 0.0) || !sd.is_finite() {
            return Err(Error::Domain(format!(
                "gaussian needs finite mean and positive sd, got mean={mean} sd={sd}"
            )));
        }
        Ok(Self { mean, sd })
    }

    pub fn standard() -> Self {
        Self { mean: 0.0, sd: 1.0 }
    }

    pub fn variance(&self) -> f64 {
        self.sd * self.sd
    }

    #[inline]
    fn standardize(&self, x: f64) -> f64 {
        (x - self.mean) / self.sd
    }

    /// Inverse-CDF transform of a single stream uniform.
    #[inline]
    pub fn from_uniform(&self, u: f64) -> f64 {
        self.mean + self.sd * std_normal_quantile(u)
    }
}

impl Univariate for Gaussian1D {
    fn cdf(&self, x: f64) -> f64 {
        std_normal_cdf(self.standardize(x))
    }

    fn sf(&self, x: f64) -> f64 {
        std_normal_sf(self.standardize(x))
    }

    fn pdf(&self, x: f64) -> f64 {
        std_normal_pdf(self.standardize(x)) / self.sd
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        Ok(self.from_uniform(p))
    }

    fn mean(&self) -> f64 {
        self.mean
    }

    fn sd(&self) -> f64 {
        self.sd
    }

    #[inline]
    fn sample<R: UniformSource + ?Sized>(&self, rng: &mut R) -> f64 {
        self.from_uniform(rng.uniform())
    }

    fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        std_normal_interval(self.standardize(lo), self.standardize(hi))
    }
}

/// Gamma distribution in the shape/rate parameterization, density ∝ x^{shape-1} e^{-rate x}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gamma1D {
    shape: f64,
    rate: f64,
}

impl Gamma1D {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0) || !(rate > 0.0) || !shape.is_finite() || !rate.is_finite() {
            return Err(Error::Domain(format!(
                "gamma needs positive shape and rate, got shape={shape} rate={rate}"
            )));
        }
        Ok(Self { shape, rate })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    fn pq(&self, x: f64) -> (f64, f64) {
        regularized_gamma(self.shape, self.rate * x)
            .expect("incomplete gamma failed for a validated gamma distribution")
    }
}

/// Marsaglia-Tsang squeeze for Gamma(shape, 1) with normals from the inverse CDF.
fn standard_gamma<R: UniformSource + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        let boosted = standard_gamma(shape + 1.0, rng);
        return boosted * rng.uniform().powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let z = std_normal_quantile(rng.uniform());
        let t = 1.0 + c * z;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.uniform();
        if u < 1.0 - 0.0331 * z.powi(4) || u.ln() < 0.5 * z * z + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

impl Univariate for Gamma1D {
    fn cdf(&self, x: f64) -> f64 {
        self.pq(x).0
    }

    fn sf(&self, x: f64) -> f64 {
        self.pq(x).1
    }

    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            return if self.shape < 1.0 {
                f64::INFINITY
            } else if self.shape == 1.0 {
                self.rate
            } else {
                0.0
            };
        }
        (self.shape * self.rate.ln() + (self.shape - 1.0) * x.ln() - self.rate * x - ln_gamma(self.shape)).exp()
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        let mut lo = 0.0;
        let mut hi = self.mean() + 12.0 * self.sd();
        while self.cdf(hi) < p {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            let value = self.cdf(mid);
            if (value - p).abs() <= QUANTILE_TOLERANCE * 1e-2 || mid <= lo || mid >= hi {
                return Ok(mid);
            }
            if value < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    fn sd(&self) -> f64 {
        self.shape.sqrt() / self.rate
    }

    fn sample<R: UniformSource + ?Sized>(&self, rng: &mut R) -> f64 {
        standard_gamma(self.shape, rng) / self.rate
    }

    fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        let lo = lo.max(0.0);
        if hi <= lo {
            return 0.0;
        }
        let (p_lo, q_lo) = self.pq(lo);
        let (p_hi, q_hi) = self.pq(hi);
        if lo >= self.mean() {
            (q_lo - q_hi).clamp(0.0, 1.0)
        } else {
            (p_hi - p_lo).clamp(0.0, 1.0)
        }
    }
}

/// Uniform distribution on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Uniform01;

impl Univariate for Uniform01 {
    fn cdf(&self, x: f64) -> f64 {
        x.clamp(0.0, 1.0)
    }

    fn pdf(&self, x: f64) -> f64 {
        if (0.0..=1.0).contains(&x) {
            1.0
        } else {
            0.0
        }
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        Ok(p)
    }

    fn mean(&self) -> f64 {
        0.5
    }

    fn sd(&self) -> f64 {
        (1.0f64 / 12.0).sqrt()
    }

    fn sample<R: UniformSource + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.uniform()
    }
}

/// Independent normal coordinates sharing one standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicGaussianBlock {
    mean: Vec<f64>,
    sd: f64,
}

impl IsotropicGaussianBlock {
    pub fn new(mean: Vec<f64>, sd: f64) -> Result<Self> {
        if mean.is_empty() || mean.iter().any(|m| !m.is_finite()) || !(sd > 0.0) || !sd.is_finite() {
            return Err(Error::Domain(format!(
                "isotropic gaussian needs a nonempty finite mean and positive sd, got sd={sd}"
            )));
        }
        Ok(Self { mean, sd })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Marginal law of coordinate `k`.
    pub fn marginal(&self, k: usize) -> Gaussian1D {
        Gaussian1D {
            mean: self.mean[k],
            sd: self.sd,
        }
    }

    pub fn sample_into<R: UniformSource + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.mean
                .iter()
                .map(|&m| m + self.sd * std_normal_quantile(rng.uniform())),
        );
    }

    pub fn sample<R: UniformSource + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        self.sample_into(rng, &mut out);
        out
    }

    /// Mass of the closed Euclidean ball of `radius` around `center`.
    ///
    /// Equals P(χ'²_K(δ) ≤ r²/σ²) with δ = ‖center − mean‖²/σ².
    pub fn ball_mass(&self, center: &[f64], radius: f64) -> Result<f64> {
        if !(radius >= 0.0) {
            return Err(Error::Domain(format!("ball radius must be nonnegative, got {radius}")));
        }
        if center.len() != self.dim() {
            return Err(Error::Domain(format!(
                "ball center has dimension {} but the block has dimension {}",
                center.len(),
                self.dim()
            )));
        }
        if radius == 0.0 {
            return Ok(0.0);
        }
        let var = self.sd * self.sd;
        let delta = center
            .iter()
            .zip(&self.mean)
            .map(|(c, m)| (c - m) * (c - m))
            .sum::<f64>()
            / var;
        noncentral_chi2_cdf(radius * radius / var, self.dim() as f64, delta)
    }
}

/// Full-conditional law of one block.
#[derive(Debug, Clone, PartialEq)]
pub enum Conditional {
    Gaussian(Gaussian1D),
    Uniform(Uniform01),
    Gamma(Gamma1D),
    IsotropicGaussian(IsotropicGaussianBlock),
    /// Two independent gamma coordinates updated together.
    GammaPair([Gamma1D; 2]),
}

impl Conditional {
    pub fn dim(&self) -> usize {
        match self {
            Conditional::Gaussian(_) | Conditional::Uniform(_) | Conditional::Gamma(_) => 1,
            Conditional::IsotropicGaussian(block) => block.dim(),
            Conditional::GammaPair(_) => 2,
        }
    }

    /// Draws one block value into `out` (cleared first).
    pub fn sample_into<R: UniformSource + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        match self {
            Conditional::Gaussian(d) => {
                out.clear();
                out.push(d.sample(rng));
            }
            Conditional::Uniform(d) => {
                out.clear();
                out.push(d.sample(rng));
            }
            Conditional::Gamma(d) => {
                out.clear();
                out.push(d.sample(rng));
            }
            Conditional::IsotropicGaussian(block) => block.sample_into(rng, out),
            Conditional::GammaPair([first, second]) => {
                out.clear();
                out.push(first.sample(rng));
                out.push(second.sample(rng));
            }
        }
    }

    pub fn sample<R: UniformSource + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        self.sample_into(rng, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{chain_rng, ScriptedUniforms};

    #[test]
    fn gaussian_cdf_examples() {
        let g = Gaussian1D::standard();
        assert_eq!(g.cdf(0.0), 0.5);
        let mass = g.cdf(0.1573) - g.cdf(-0.1573);
        assert!((mass - 0.125).abs() < 1e-4);
    }

    #[test]
    fn gamma_cdf_matches_quadrature_oracle() {
        // ∫_0^31.5 x^30.5 e^{-x} / Γ(31.5) dx, adaptive quadrature (scipy.integrate.quad).
        let g = Gamma1D::new(31.5, 1.0).unwrap();
        assert!((g.cdf(31.5) - 0.523_697_616_661_880_1).abs() < 1e-12);
    }

    #[test]
    fn quantile_examples() {
        let g = Gaussian1D::standard();
        assert_eq!(g.quantile(0.5).unwrap(), 0.0);
        // Bisection of Φ(x) = 0.975 to 1e-15.
        assert!((g.quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-9);
        assert_eq!(Uniform01.quantile(0.3).unwrap(), 0.3);
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(g.quantile(p).is_err());
            assert!(Uniform01.quantile(p).is_err());
            assert!(Gamma1D::new(2.0, 1.0).unwrap().quantile(p).is_err());
        }
    }

    #[test]
    fn quantile_cdf_round_trip_within_tolerance() {
        let gamma = Gamma1D::new(3.5, 2.0).unwrap();
        let gauss = Gaussian1D::new(-1.0, 2.5).unwrap();
        for i in 1..100 {
            let p = i as f64 / 100.0;
            assert!((gamma.cdf(gamma.quantile(p).unwrap()) - p).abs() < 1e-10);
            assert!((gauss.cdf(gauss.quantile(p).unwrap()) - p).abs() < 1e-10);
        }
    }

    #[test]
    fn stream_driven_samples() {
        let g = Gaussian1D::standard();
        let mut s = ScriptedUniforms::new(vec![0.5]);
        assert_eq!(g.sample(&mut s), 0.0);
        let mut s = ScriptedUniforms::new(vec![0.42]);
        assert_eq!(Uniform01.sample(&mut s), 0.42);
    }

    #[test]
    fn gamma_sample_mean() {
        let g = Gamma1D::new(2.0, 2.0).unwrap();
        let mut rng = chain_rng(11, "gamma-mean", 0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| g.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.003, "{mean}");
    }

    #[test]
    fn small_shape_gamma_sample_mean() {
        let g = Gamma1D::new(0.5, 1.0).unwrap();
        let mut rng = chain_rng(12, "gamma-mean", 0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| g.sample(&mut rng)).sum::<f64>() / n as f64;
        // sd of the mean: sqrt(0.5)/1000
        assert!((mean - 0.5).abs() < 4.0 * 0.5f64.sqrt() / 1000.0, "{mean}");
    }

    #[test]
    fn constructors_reject_invalid_parameters() {
        assert!(Gaussian1D::new(0.0, 0.0).is_err());
        assert!(Gaussian1D::new(f64::NAN, 1.0).is_err());
        assert!(Gamma1D::new(0.0, 1.0).is_err());
        assert!(Gamma1D::new(1.0, -1.0).is_err());
        assert!(IsotropicGaussianBlock::new(vec![], 1.0).is_err());
        assert!(IsotropicGaussianBlock::new(vec![0.0], -1.0).is_err());
    }

    #[test]
    fn ball_mass_examples() {
        let block = IsotropicGaussianBlock::new(vec![0.0; 3], 1.0).unwrap();
        assert_eq!(block.ball_mass(&[0.0; 3], 0.0).unwrap(), 0.0);
        let centered = block.ball_mass(&[0.0; 3], 1.0).unwrap();
        assert!((centered - 0.1987).abs() < 1e-4);
        assert!(block.ball_mass(&[0.0; 3], -1.0).is_err());
        assert!(block.ball_mass(&[0.0; 2], 1.0).is_err());
    }

    #[test]
    fn ball_mass_one_dimensional_is_interval_mass() {
        let block = IsotropicGaussianBlock::new(vec![0.3], 1.7).unwrap();
        let g = block.marginal(0);
        for &(c, r) in &[(0.0, 0.5), (2.0, 1.0), (-4.0, 3.0), (0.3, 0.01)] {
            let ball = block.ball_mass(&[c], r).unwrap();
            assert!((ball - g.interval_mass(c - r, c + r)).abs() < 1e-10, "c={c} r={r}");
        }
    }

    #[test]
    fn gamma_interval_clips_at_zero() {
        let g = Gamma1D::new(2.0, 1.0).unwrap();
        assert_eq!(g.interval_mass(-5.0, 1.0), g.cdf(1.0));
        assert_eq!(g.pdf(-1.0), 0.0);
    }
}
