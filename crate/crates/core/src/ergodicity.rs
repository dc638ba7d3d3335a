//! Sufficient conditions for geometric ergodicity of the CMH, the neighborhood
//! size thresholds they imply, and a Monte Carlo check of the Normal-Normal
//! drift condition.
//!
//! Every threshold here is a boundary of a *sufficient* condition. Neighborhoods
//! larger than a threshold are not thereby shown to be non-ergodic.

use crate::distributions::special::std_normal_cdf;
use crate::error::{Error, Result};
use crate::models::NormalNormalModel;
use crate::rng::UniformSource;
use crate::sampler::{gibbs_step, StateVector};

/// Function-value tolerance of the threshold root finder.
pub const ROOT_TOLERANCE: f64 = 1e-10;

const ROOT_LOWER: f64 = 1e-12;
const ROOT_MAX_ITERATIONS: usize = 400;

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("drift rate must lie in (0, 1), got {gamma}")))
    }
}

/// A geometric drift condition `PV <= gamma V + b` with its drift function.
#[derive(Debug, Clone, Copy)]
pub struct DriftSpec {
    pub gamma: f64,
    pub b: f64,
    pub v: fn(&StateVector) -> f64,
}

impl DriftSpec {
    pub fn new(gamma: f64, b: f64, v: fn(&StateVector) -> f64) -> Result<Self> {
        check_gamma(gamma)?;
        if !b.is_finite() {
            return Err(Error::Domain(format!("drift constant must be finite, got {b}")));
        }
        Ok(Self { gamma, b, v })
    }

    /// `V(x1, x2) = x1² + 2 x2²` with rate 3/4 and constant 1; for the Normal-Normal
    /// GS this holds with equality.
    pub fn normal_normal() -> Self {
        Self {
            gamma: 0.75,
            b: 1.0,
            v: normal_normal_v,
        }
    }

    /// The right-hand side `gamma V(x) + b`.
    pub fn bound(&self, state: &StateVector) -> f64 {
        self.gamma * (self.v)(state) + self.b
    }
}

/// Drift function of the Normal-Normal model.
pub fn normal_normal_v(state: &StateVector) -> f64 {
    let x1 = state.block(0)[0];
    let x2 = state.block(1)[0];
    x1 * x1 + 2.0 * x2 * x2
}

/// Neighborhood-mass bounds and drift rate entering the CMH ergodicity condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Inputs {
    pub gamma: f64,
    pub q_min: f64,
    pub q_max: f64,
}

impl Theorem1Inputs {
    pub fn new(gamma: f64, q_min: f64, q_max: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if !(0.0 <= q_min && q_min <= q_max && q_max < 1.0) {
            return Err(Error::Domain(format!(
                "need 0 <= q_min <= q_max < 1, got q_min = {q_min}, q_max = {q_max}"
            )));
        }
        Ok(Self { gamma, q_min, q_max })
    }
}

/// True iff `q_max < 1/2` and `(1 - 2 q_max + q_min q_max) / (1 - q_min) > gamma`.
pub fn theorem1_check(inputs: &Theorem1Inputs) -> bool {
    let Theorem1Inputs { gamma, q_min, q_max } = *inputs;
    q_max < 0.5 && (1.0 - 2.0 * q_max + q_min * q_max) / (1.0 - q_min) > gamma
}

/// Root of an increasing function `f` on (0, ∞) with `f(0+) < 0`.
fn increasing_root<F: Fn(f64) -> f64>(f: F) -> Result<f64> {
    let mut lo = ROOT_LOWER;
    if f(lo) >= 0.0 {
        return Err(Error::Domain("threshold equation has no positive root".into()));
    }
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Domain("threshold equation never changes sign".into()));
        }
    }
    for _ in 0..ROOT_MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let value = f(mid);
        if value.abs() <= ROOT_TOLERANCE || mid == lo || mid == hi {
            return Ok(mid);
        }
        if value < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Mass of a symmetric ±c interval around a Gaussian mean, in sd units.
fn central_mass(c: f64) -> f64 {
    2.0 * std_normal_cdf(c) - 1.0
}

/// Largest sd-scaled halfwidth `c` for which the CMH_c on the Normal-Normal model
/// satisfies the sufficient condition with `q_min = 0` and `q_max = 2Φ(c) − 1`:
/// the root of `2Φ(c) − 1 = (1 − γ)/2`.
pub fn solve_cmh_c_threshold(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let target = 0.5 * (1.0 - gamma);
    increasing_root(|c| central_mass(c) - target)
}

/// Largest fixed neighborhood mass `q` (with `q_min = q_max = q`) meeting the condition.
pub fn solve_cmh_q_threshold(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(0.5f64.min(1.0 - gamma))
}

/// Neighborhood-size thresholds for the random effects CMH and their round-trip residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReThresholds {
    pub eps_theta: f64,
    pub eps_mu: f64,
    pub eps_lambda: f64,
    /// Common right-hand side `(1 − γ)/2`.
    pub target: f64,
    pub residual_theta: f64,
    pub residual_mu: f64,
    pub residual_lambda: f64,
}

/// Mass bound of the θ hypercube of half-width ε (sd units) in `k` dimensions.
pub fn re_theta_mass_bound(eps: f64, k: usize) -> f64 {
    central_mass(eps).powi(k as i32)
}

/// Mass bound of the μ interval of half-width ε (sd units).
pub fn re_mu_mass_bound(eps: f64) -> f64 {
    central_mass(eps)
}

/// Mass bound of the λ rectangle, through the exponential transform `β λ ~ Exp(α)`.
pub fn re_lambda_mass_bound(eps: f64, alpha1: f64, alpha2: f64) -> f64 {
    let exp_cdf = |x: f64, a: f64| -(-a * x).exp_m1();
    exp_cdf(2.0 * eps * alpha1.sqrt(), alpha1) * exp_cdf(2.0 * eps * alpha2.sqrt(), alpha2)
}

/// Thresholds for the three blocks of the random effects CMH_ε with `k` subjects,
/// `m` replicates and gamma prior shapes `a1`, `a2`.
pub fn solve_re_thresholds(k: usize, m: usize, a1: f64, a2: f64, gamma: f64) -> Result<ReThresholds> {
    check_gamma(gamma)?;
    if k == 0 || m == 0 {
        return Err(Error::Domain(format!("need K >= 1 and m >= 1, got K = {k}, m = {m}")));
    }
    if !(a1 > 0.0 && a2 > 0.0 && a1.is_finite() && a2.is_finite()) {
        return Err(Error::Domain(format!("gamma shapes must be positive, got {a1}, {a2}")));
    }
    let target = 0.5 * (1.0 - gamma);
    let alpha1 = k as f64 / 2.0 + a1;
    let alpha2 = (k * m) as f64 / 2.0 + a2;

    let eps_theta = increasing_root(|e| re_theta_mass_bound(e, k) - target)?;
    let eps_mu = increasing_root(|e| re_mu_mass_bound(e) - target)?;
    let eps_lambda = increasing_root(|e| re_lambda_mass_bound(e, alpha1, alpha2) - target)?;
    Ok(ReThresholds {
        eps_theta,
        eps_mu,
        eps_lambda,
        target,
        residual_theta: re_theta_mass_bound(eps_theta, k) - target,
        residual_mu: re_mu_mass_bound(eps_mu) - target,
        residual_lambda: re_lambda_mass_bound(eps_lambda, alpha1, alpha2) - target,
    })
}

/// Monte Carlo estimate of `P_GS V(x)` at one probe state.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftProbe {
    pub state: [f64; 2],
    pub v: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    pub closed_form: f64,
}

impl DriftProbe {
    /// Distance between estimate and closed form in Monte Carlo standard errors.
    pub fn z_score(&self) -> f64 {
        let gap = (self.mc_mean - self.closed_form).abs();
        if gap == 0.0 {
            0.0
        } else {
            gap / self.mc_se
        }
    }
}

/// Runs `draws` single GS transitions from each probe state of the Normal-Normal
/// model and compares the average of `V` after the step with `0.75 V(x) + 1`.
pub fn verify_nn_drift<R: UniformSource + ?Sized>(
    probes: &[[f64; 2]],
    draws: usize,
    rng: &mut R,
) -> Result<Vec<DriftProbe>> {
    if draws < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 draws per probe, got {draws}"
        )));
    }
    let model = NormalNormalModel::new();
    let drift = DriftSpec::normal_normal();
    probes
        .iter()
        .map(|&probe| {
            let start = StateVector::from_scalars(&probe)?;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let mut state = start.clone();
            for _ in 0..draws {
                state.clone_from(&start);
                gibbs_step(&model, &mut state, rng)?;
                let v = (drift.v)(&state);
                sum += v;
                sum_sq += v * v;
            }
            let n = draws as f64;
            let mean = sum / n;
            let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
            Ok(DriftProbe {
                state: probe,
                v: (drift.v)(&start),
                mc_mean: mean,
                mc_se: (var / n).sqrt(),
                closed_form: drift.bound(&start),
            })
        })
        .collect()
}
