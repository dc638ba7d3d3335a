//! Noncentral chi-square CDF as a Poisson mixture of central chi-square CDFs.
//!
//! P(χ'²_k(δ) ≤ x) = Σ_j Pois(j; δ/2) · P(k/2 + j, x/2)
//!
//! Terms are summed outward from the Poisson mode, always taking the side with
//! the larger next weight. Each central CDF lies in [0, 1], so the truncation
//! error is bounded by the Poisson mass not yet visited; summation stops once
//! that mass drops below [`SERIES_TAIL_BOUND`].

use super::special::{ln_gamma, regularized_gamma};
use crate::error::{Error, Result};

/// Maximum discarded Poisson weight.
pub const SERIES_TAIL_BOUND: f64 = 1e-12;

const MAX_TERMS: usize = 1_000_000;

/// Term `x^a e^{-x} / Γ(a + 1)`, the step between P(a, x) and P(a + 1, x).
#[inline]
fn gamma_step(a: f64, half_x: f64) -> f64 {
    (a * half_x.ln() - half_x - ln_gamma(a + 1.0)).exp()
}

/// CDF of the noncentral chi-square with `dof` degrees of freedom and
/// noncentrality `delta`, evaluated at `x`.
pub fn noncentral_chi2_cdf(x: f64, dof: f64, delta: f64) -> Result<f64> {
    if !(dof > 0.0) {
        return Err(Error::Domain(format!("degrees of freedom must be positive, got {dof}")));
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::Domain(format!(
            "noncentrality must be finite and nonnegative, got {delta}"
        )));
    }
    if x.is_nan() {
        return Err(Error::Domain("noncentral chi-square argument is NaN".into()));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let half_x = 0.5 * x;
    let half_dof = 0.5 * dof;
    let lambda = 0.5 * delta;
    if lambda == 0.0 {
        return Ok(regularized_gamma(half_dof, half_x)?.0);
    }

    let mode = lambda.floor();
    let mode_weight = (-lambda + mode * lambda.ln() - ln_gamma(mode + 1.0)).exp();
    let mode_cdf = regularized_gamma(half_dof + mode, half_x)?.0;

    let mut total = mode_weight * mode_cdf;
    let mut weight_sum = mode_weight;

    // Upward cursor: next index mode + 1.
    let mut up_j = mode;
    let mut up_weight = mode_weight;
    let mut up_cdf = mode_cdf;
    // Downward cursor: next index mode - 1.
    let mut down_j = mode;
    let mut down_weight = mode_weight;
    let mut down_cdf = mode_cdf;

    for _ in 0..MAX_TERMS {
        if 1.0 - weight_sum < SERIES_TAIL_BOUND {
            break;
        }
        let next_up = up_weight * lambda / (up_j + 1.0);
        let next_down = if down_j >= 1.0 {
            down_weight * down_j / lambda
        } else {
            0.0
        };
        if next_up == 0.0 && next_down == 0.0 {
            break;
        }
        if next_up >= next_down {
            // P(a + 1, x) = P(a, x) - x^a e^{-x} / Γ(a + 1)
            up_cdf = (up_cdf - gamma_step(half_dof + up_j, half_x)).max(0.0);
            up_j += 1.0;
            up_weight = next_up;
            total += up_weight * up_cdf;
            weight_sum += up_weight;
        } else {
            down_j -= 1.0;
            down_cdf = (down_cdf + gamma_step(half_dof + down_j, half_x)).min(1.0);
            down_weight = next_down;
            total += down_weight * down_cdf;
            weight_sum += down_weight;
        }
    }
    Ok(total.clamp(0.0, 1.0))
}
