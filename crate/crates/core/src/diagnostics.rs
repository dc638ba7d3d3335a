//! Efficiency estimators over replicated chains: mean squared jump distance,
//! mean squared error of a Monte Carlo average, their GS/CMH ratios and
//! acceptance rates.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampler::{KernelStepRecord, StateVector};

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub se: f64,
}

impl Estimate {
    pub fn new(estimate: f64, se: f64) -> Self {
        Self { estimate, se }
    }
}

/// Sample mean and its standard error (sample sd with N - 1 denominator, over √N).
pub fn mean_with_se(values: &[f64]) -> Result<Estimate> {
    if values.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 replicates, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    // Shifting by the first value keeps constant inputs exact and limits cancellation.
    let shift = values[0];
    let mean = shift + values.iter().map(|v| v - shift).sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(Estimate::new(mean, (var / n).sqrt()))
}

/// The scalar functional f(X) averaged along a chain: one coordinate of one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Functional {
    pub block: usize,
    pub coordinate: usize,
}

impl Functional {
    pub fn new(block: usize, coordinate: usize) -> Self {
        Self { block, coordinate }
    }

    #[inline]
    pub fn eval(&self, state: &StateVector) -> f64 {
        state.block(self.block)[self.coordinate]
    }
}

/// Per-chain efficiency summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSummary {
    pub msjd: f64,
    /// Average of the functional over iterations 0..n-1 (no burn-in).
    pub beta_hat: f64,
    pub accept_count: u64,
    pub step_count: u64,
}

/// Mean squared Euclidean jump between consecutive states (all blocks concatenated).
pub fn msjd(chain: &[StateVector]) -> Result<f64> {
    if chain.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "jump distance needs a chain of length >= 2, got {}",
            chain.len()
        )));
    }
    let total: f64 = chain.windows(2).map(|w| w[1].squared_distance(&w[0])).sum();
    Ok(total / (chain.len() - 1) as f64)
}

/// Streaming version of [`msjd`] and the Monte Carlo average, so chains need not be stored.
#[derive(Debug, Clone)]
pub struct ChainAccumulator {
    functional: Functional,
    previous: Vec<f64>,
    scratch: Vec<f64>,
    sum_sq_jump: f64,
    sum_f: f64,
    states: u64,
    accepts: u64,
}

impl ChainAccumulator {
    pub fn new(functional: Functional, initial: &StateVector) -> Self {
        Self {
            functional,
            previous: initial.coords().collect(),
            scratch: Vec::new(),
            sum_sq_jump: 0.0,
            sum_f: functional.eval(initial),
            states: 1,
            accepts: 0,
        }
    }

    /// Adds the state reached by one more kernel step.
    pub fn push(&mut self, next: &StateVector, accepted: bool) {
        self.scratch.clear();
        self.scratch.extend(next.coords());
        self.sum_sq_jump += self
            .scratch
            .iter()
            .zip(&self.previous)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        std::mem::swap(&mut self.previous, &mut self.scratch);
        self.sum_f += self.functional.eval(next);
        self.states += 1;
        if accepted {
            self.accepts += 1;
        }
    }

    pub fn states(&self) -> u64 {
        self.states
    }

    pub fn finish(&self) -> Result<ChainSummary> {
        if self.states < 2 {
            return Err(Error::InsufficientData("chain summary needs at least 2 states".into()));
        }
        Ok(ChainSummary {
            msjd: self.sum_sq_jump / (self.states - 1) as f64,
            beta_hat: self.sum_f / self.states as f64,
            accept_count: self.accepts,
            step_count: self.states - 1,
        })
    }
}

/// Average MSJD across replicate chains.
pub fn esjd(summaries: &[ChainSummary]) -> Result<Estimate> {
    let values: Vec<f64> = summaries.iter().map(|s| s.msjd).collect();
    mean_with_se(&values)
}

/// Mean squared deviation of replicate estimates from `beta_ref`.
pub fn mse(beta_hats: &[f64], beta_ref: f64) -> Result<Estimate> {
    let squared: Vec<f64> = beta_hats.iter().map(|b| (b - beta_ref) * (b - beta_ref)).collect();
    mean_with_se(&squared)
}

/// Ratio of two independent estimates with a first-order delta-method standard error.
pub fn ratio_with_se(num: Estimate, den: Estimate) -> Result<Estimate> {
    if !(den.estimate > 0.0) {
        return Err(Error::Domain(format!(
            "ratio denominator must be positive, got {}",
            den.estimate
        )));
    }
    let ratio = num.estimate / den.estimate;
    // ratio * sqrt((se_n/n)^2 + (se_d/d)^2), written so that n = 0 is harmless
    let se = ((num.se / den.estimate).powi(2) + (ratio * den.se / den.estimate).powi(2)).sqrt();
    Ok(Estimate::new(ratio, se))
}

/// Fraction of kernel steps whose proposal was accepted.
pub fn acceptance_rate(records: &[KernelStepRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::InsufficientData("acceptance rate of an empty run".into()));
    }
    Ok(records.iter().filter(|r| r.accepted).count() as f64 / records.len() as f64)
}

/// Pooled acceptance rate of several chains.
pub fn pooled_acceptance_rate(summaries: &[ChainSummary]) -> Result<f64> {
    let steps: u64 = summaries.iter().map(|s| s.step_count).sum();
    if steps == 0 {
        return Err(Error::InsufficientData("acceptance rate of an empty run".into()));
    }
    Ok(summaries.iter().map(|s| s.accept_count).sum::<u64>() as f64 / steps as f64)
}

/// One GS-versus-CMH comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config_id: String,
    pub esjd_gs: f64,
    pub se_esjd_gs: f64,
    pub mse_gs: f64,
    pub se_mse_gs: f64,
    /// CMH ESJD estimate.
    pub esjd_hat: f64,
    /// CMH MSE estimate.
    pub mse_hat: f64,
    pub esjdr: f64,
    pub se_esjdr: f64,
    pub mser: f64,
    pub se_mser: f64,
    pub accept_rate: f64,
    pub beta_ref: f64,
}

impl ExperimentReport {
    /// Aggregates replicate summaries of both samplers.
    pub fn from_summaries(
        config_id: impl Into<String>,
        gs: &[ChainSummary],
        cmh: &[ChainSummary],
        beta_ref: f64,
        accept_rate: f64,
    ) -> Result<Self> {
        let esjd_gs = esjd(gs)?;
        let esjd_cmh = esjd(cmh)?;
        let gs_betas: Vec<f64> = gs.iter().map(|s| s.beta_hat).collect();
        let cmh_betas: Vec<f64> = cmh.iter().map(|s| s.beta_hat).collect();
        let mse_gs = mse(&gs_betas, beta_ref)?;
        let mse_cmh = mse(&cmh_betas, beta_ref)?;
        let esjdr = ratio_with_se(esjd_cmh, esjd_gs)?;
        let mser = ratio_with_se(mse_cmh, mse_gs)?;
        Ok(Self {
            config_id: config_id.into(),
            esjd_gs: esjd_gs.estimate,
            se_esjd_gs: esjd_gs.se,
            mse_gs: mse_gs.estimate,
            se_mse_gs: mse_gs.se,
            esjd_hat: esjd_cmh.estimate,
            mse_hat: mse_cmh.estimate,
            esjdr: esjdr.estimate,
            se_esjdr: esjdr.se,
            mser: mser.estimate,
            se_mser: mser.se,
            accept_rate,
            beta_ref,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalars(points: &[[f64; 2]]) -> Vec<StateVector> {
        points.iter().map(|p| StateVector::from_scalars(p).unwrap()).collect()
    }

    fn summary(msjd: f64, beta_hat: f64) -> ChainSummary {
        ChainSummary {
            msjd,
            beta_hat,
            accept_count: 0,
            step_count: 1,
        }
    }

    #[test]
    fn msjd_examples() {
        assert_eq!(msjd(&scalars(&[[1.0, 2.0]; 5])).unwrap(), 0.0);
        assert_eq!(msjd(&scalars(&[[0.0, 0.0], [1.0, 1.0]])).unwrap(), 2.0);
        assert!(msjd(&scalars(&[[0.0, 0.0]])).is_err());
    }

    #[test]
    fn accumulator_matches_batch_msjd() {
        let chain = scalars(&[[0.0, 0.0], [1.0, 0.0], [1.0, -2.0], [0.5, -2.0]]);
        let mut acc = ChainAccumulator::new(Functional::new(0, 0), &chain[0]);
        for s in &chain[1..] {
            acc.push(s, true);
        }
        let sum = acc.finish().unwrap();
        assert!((sum.msjd - msjd(&chain).unwrap()).abs() < 1e-15);
        assert_eq!(sum.beta_hat, (0.0 + 1.0 + 1.0 + 0.5) / 4.0);
        assert_eq!((sum.accept_count, sum.step_count), (3, 3));
    }

    #[test]
    fn esjd_examples() {
        let flat = [summary(0.7, 0.0), summary(0.7, 0.0), summary(0.7, 0.0)];
        assert_eq!(esjd(&flat).unwrap(), Estimate::new(0.7, 0.0));
        let two = [summary(1.0, 0.0), summary(3.0, 0.0)];
        let e = esjd(&two).unwrap();
        assert_eq!(e.estimate, 2.0);
        assert!((e.se - 1.0).abs() < 1e-15);
        assert!(esjd(&two[..1]).is_err());
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[0.3, 0.3], 0.3).unwrap(), Estimate::new(0.0, 0.0));
        assert_eq!(mse(&[-0.5, 1.5], 0.5).unwrap(), Estimate::new(1.0, 0.0));
        assert!(mse(&[1.0], 0.0).is_err());
    }

    #[test]
    fn ratio_examples() {
        let r = ratio_with_se(Estimate::new(1.3, 0.1), Estimate::new(1.3, 0.1)).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert_eq!(
            ratio_with_se(Estimate::new(2.0, 0.0), Estimate::new(1.0, 0.0)).unwrap(),
            Estimate::new(2.0, 0.0)
        );
        let r = ratio_with_se(Estimate::new(2.0, 0.2), Estimate::new(4.0, 0.2)).unwrap();
        let expected = 0.5 * (0.1f64.powi(2) + 0.05f64.powi(2)).sqrt();
        assert!((r.se - expected).abs() < 1e-15);
        assert!(ratio_with_se(Estimate::new(1.0, 0.0), Estimate::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn acceptance_rate_counts_accepts() {
        let rec = |accepted| KernelStepRecord {
            selected_block: 0,
            proposal: None,
            accepted,
            alpha: 1.0,
            proposal_attempts: 1,
        };
        assert_eq!(acceptance_rate(&[rec(true), rec(true)]).unwrap(), 1.0);
        assert_eq!(
            acceptance_rate(&[rec(true), rec(false), rec(false), rec(true)]).unwrap(),
            0.5
        );
        assert!(acceptance_rate(&[]).is_err());
    }
}
