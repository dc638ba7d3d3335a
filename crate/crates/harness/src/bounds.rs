//! Ergodicity thresholds as a key-value table.

use cmh_core::distributions::{Gaussian1D, Univariate};
use cmh_core::ergodicity::{
    re_lambda_mass_bound, re_mu_mass_bound, re_theta_mass_bound, solve_cmh_c_threshold, solve_cmh_q_threshold,
    solve_re_thresholds, theorem1_check, Theorem1Inputs,
};

use crate::error::Result;

/// Offset on either side of a threshold at which the sufficient condition is re-checked.
pub const STRADDLE: f64 = 1e-3;

/// Ordered `(key, value)` pairs.
pub type BoundsTable = Vec<(String, String)>;

fn holds(gamma: f64, q_min: f64, q_max: f64) -> Result<bool> {
    Ok(theorem1_check(&Theorem1Inputs::new(
        gamma,
        q_min,
        q_max.min(1.0 - f64::EPSILON),
    )?))
}

fn push(table: &mut BoundsTable, key: &str, value: impl ToString) {
    table.push((key.to_owned(), value.to_string()));
}

pub fn normal_normal_bounds(gamma: f64) -> Result<BoundsTable> {
    let c = solve_cmh_c_threshold(gamma)?;
    let q = solve_cmh_q_threshold(gamma)?;
    let mass = |c: f64| Gaussian1D::standard().interval_mass(-c, c);
    let target = 0.5 * (1.0 - gamma);
    let mut t = BoundsTable::new();
    push(&mut t, "model", "normal-normal");
    push(&mut t, "gamma", gamma);
    push(&mut t, "target", target);
    push(&mut t, "c_star", c);
    push(&mut t, "c_residual", format!("{:e}", mass(c) - target));
    push(&mut t, "q_star", q);
    push(&mut t, "condition_below_c_star", holds(gamma, 0.0, mass(c - STRADDLE))?);
    push(&mut t, "condition_above_c_star", holds(gamma, 0.0, mass(c + STRADDLE))?);
    push(
        &mut t,
        "condition_below_q_star",
        holds(gamma, q - STRADDLE, q - STRADDLE)?,
    );
    push(
        &mut t,
        "condition_above_q_star",
        holds(gamma, q + STRADDLE, q + STRADDLE)?,
    );
    Ok(t)
}

pub fn random_effects_bounds(k: usize, m: usize, a1: f64, a2: f64, gamma: f64) -> Result<BoundsTable> {
    let r = solve_re_thresholds(k, m, a1, a2, gamma)?;
    let alpha1 = k as f64 / 2.0 + a1;
    let alpha2 = (k * m) as f64 / 2.0 + a2;
    let mut t = BoundsTable::new();
    push(&mut t, "model", "random-effects");
    push(&mut t, "K", k);
    push(&mut t, "m", m);
    push(&mut t, "a1", a1);
    push(&mut t, "a2", a2);
    push(&mut t, "alpha1", alpha1);
    push(&mut t, "alpha2", alpha2);
    push(&mut t, "gamma", gamma);
    push(&mut t, "target", r.target);
    push(&mut t, "eps_theta", r.eps_theta);
    push(&mut t, "eps_mu", r.eps_mu);
    push(&mut t, "eps_lambda", r.eps_lambda);
    push(&mut t, "residual_theta", format!("{:e}", r.residual_theta));
    push(&mut t, "residual_mu", format!("{:e}", r.residual_mu));
    push(&mut t, "residual_lambda", format!("{:e}", r.residual_lambda));
    let checks = [
        (
            "theta",
            re_theta_mass_bound(r.eps_theta - STRADDLE, k),
            re_theta_mass_bound(r.eps_theta + STRADDLE, k),
        ),
        (
            "mu",
            re_mu_mass_bound(r.eps_mu - STRADDLE),
            re_mu_mass_bound(r.eps_mu + STRADDLE),
        ),
        (
            "lambda",
            re_lambda_mass_bound((r.eps_lambda - STRADDLE).max(0.0), alpha1, alpha2),
            re_lambda_mass_bound(r.eps_lambda + STRADDLE, alpha1, alpha2),
        ),
    ];
    for (name, below, above) in checks {
        push(
            &mut t,
            &format!("condition_below_eps_{name}"),
            holds(gamma, 0.0, below)?,
        );
        push(
            &mut t,
            &format!("condition_above_eps_{name}"),
            holds(gamma, 0.0, above)?,
        );
    }
    Ok(t)
}

/// Renders `key = value` lines with aligned values.
pub fn render(table: &BoundsTable) -> String {
    let width = table.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    table.iter().map(|(k, v)| format!("{k:<width$} = {v}\n")).collect()
}
