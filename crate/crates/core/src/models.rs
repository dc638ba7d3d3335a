//! Target models: the bivariate Normal-Normal toy, the uniform unit square,
//! and the Bayesian one-way random effects posterior.

use serde::{Deserialize, Serialize};

use crate::distributions::{Conditional, Gamma1D, Gaussian1D, IsotropicGaussianBlock, Uniform01, Univariate};
use crate::error::{Error, Result};
use crate::rng::{chain_rng, UniformSource};
use crate::sampler::{ScanProbabilities, StateVector, TargetModel};

fn check_block(block: usize, blocks: usize) -> Result<()> {
    if block < blocks {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "block index {block} out of range for {blocks} blocks"
        )))
    }
}

/// Bivariate normal with mean zero and covariance [[2, 1], [1, 1]].
///
/// Full conditionals: X1 | X2 ~ N(x2, 1) and X2 | X1 ~ N(x1 / 2, 1 / 2).
/// Starts at the origin and scans both blocks with probability 1/2.
#[derive(Debug, Clone)]
pub struct NormalNormalModel {
    scan: ScanProbabilities,
}

impl Default for NormalNormalModel {
    fn default() -> Self {
        Self {
            scan: ScanProbabilities::uniform(2),
        }
    }
}

impl NormalNormalModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Conditional of block 0 (X1) or block 1 (X2) given the other coordinate.
    pub fn nn_conditional(&self, block: usize, state: &StateVector) -> Result<Gaussian1D> {
        check_block(block, 2)?;
        match block {
            0 => Gaussian1D::new(state.block(1)[0], 1.0),
            _ => Gaussian1D::new(0.5 * state.block(0)[0], 0.5f64.sqrt()),
        }
    }
}

impl TargetModel for NormalNormalModel {
    fn block_dims(&self) -> Vec<usize> {
        vec![1, 1]
    }

    fn scan_probabilities(&self) -> &ScanProbabilities {
        &self.scan
    }

    fn initial_state(&self) -> StateVector {
        StateVector::from_scalars(&[0.0, 0.0]).expect("origin is a valid state")
    }

    fn conditional(&self, block: usize, state: &StateVector) -> Result<Conditional> {
        self.nn_conditional(block, state).map(Conditional::Gaussian)
    }
}

/// Uniform distribution on [0, 1]²; both conditionals are Uniform(0, 1).
#[derive(Debug, Clone)]
pub struct UnitSquareModel {
    scan: ScanProbabilities,
}

impl Default for UnitSquareModel {
    fn default() -> Self {
        Self {
            scan: ScanProbabilities::uniform(2),
        }
    }
}

impl UnitSquareModel {
    pub fn new() -> Self {
        Self::default()
    }
}

impl TargetModel for UnitSquareModel {
    fn block_dims(&self) -> Vec<usize> {
        vec![1, 1]
    }

    fn scan_probabilities(&self) -> &ScanProbabilities {
        &self.scan
    }

    fn initial_state(&self) -> StateVector {
        StateVector::from_scalars(&[0.5, 0.5]).expect("center is a valid state")
    }

    fn conditional(&self, block: usize, _state: &StateVector) -> Result<Conditional> {
        check_block(block, 2)?;
        Ok(Conditional::Uniform(Uniform01))
    }
}

/// Hyperparameters used to simulate a random effects dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratingHyper {
    pub m0: f64,
    pub s0: f64,
    /// Gamma shape of both precisions.
    pub a: f64,
    /// Gamma rate of both precisions.
    pub b: f64,
}

impl Default for GeneratingHyper {
    fn default() -> Self {
        Self {
            m0: 0.0,
            s0: 1.0,
            a: 2.0,
            b: 2.0,
        }
    }
}

/// Prior hyperparameters of the fitted random effects model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferenceHyper {
    pub m0: f64,
    pub s0: f64,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl Default for InferenceHyper {
    fn default() -> Self {
        Self {
            m0: 0.0,
            s0: 1.0,
            a1: 30.0,
            b1: 30.0,
            a2: 30.0,
            b2: 30.0,
        }
    }
}

/// Balanced one-way layout: `y[i][j]` is observation `j` on subject `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReDataset {
    y: Vec<Vec<f64>>,
}

impl ReDataset {
    pub fn new(y: Vec<Vec<f64>>) -> Result<Self> {
        let m = y.first().map_or(0, Vec::len);
        if y.is_empty() || m == 0 {
            return Err(Error::Config(
                "dataset needs at least one subject and one replicate".into(),
            ));
        }
        if y.iter().any(|row| row.len() != m) {
            return Err(Error::Config(
                "dataset must be balanced (equal replicates per subject)".into(),
            ));
        }
        if y.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Domain("dataset contains non-finite observations".into()));
        }
        Ok(Self { y })
    }

    /// Number of subjects K.
    pub fn subjects(&self) -> usize {
        self.y.len()
    }

    /// Replicates per subject m.
    pub fn replicates(&self) -> usize {
        self.y[0].len()
    }

    pub fn observations(&self) -> &[Vec<f64>] {
        &self.y
    }

    /// Per-subject means ȳ_i.
    pub fn subject_means(&self) -> Vec<f64> {
        self.y
            .iter()
            .map(|row| row.iter().sum::<f64>() / row.len() as f64)
            .collect()
    }

    /// Within-subject sum of squares Σ_ij (y_ij − ȳ_i)².
    pub fn sse(&self) -> f64 {
        self.y
            .iter()
            .zip(self.subject_means())
            .map(|(row, mean)| row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>())
            .sum()
    }

    /// Mean of the subject means.
    pub fn grand_mean(&self) -> f64 {
        let means = self.subject_means();
        means.iter().sum::<f64>() / means.len() as f64
    }
}

/// Parameter values drawn while simulating a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ReTruth {
    pub theta: Vec<f64>,
    pub mu: f64,
    pub lambda_theta: f64,
    pub lambda_e: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedReData {
    pub dataset: ReDataset,
    pub truth: ReTruth,
}

/// Draws `y_ij ~ N(theta_i, 1/lambda_e)` for `m` replicates per subject.
pub fn simulate_re_observations<R: UniformSource + ?Sized>(
    theta: &[f64],
    lambda_e: f64,
    m: usize,
    rng: &mut R,
) -> Result<ReDataset> {
    if theta.is_empty() || m == 0 {
        return Err(Error::Config("simulation needs K >= 1 and m >= 1".into()));
    }
    let noise_sd = 1.0 / lambda_e.sqrt();
    let y = theta
        .iter()
        .map(|&t| {
            let law = Gaussian1D::new(t, noise_sd)?;
            Ok((0..m).map(|_| law.sample(rng)).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    ReDataset::new(y)
}

/// Simulates a full hierarchy: precisions, μ, θ and then the observations.
pub fn simulate_re_data(k: usize, m: usize, hyper: &GeneratingHyper, seed: u64) -> Result<SimulatedReData> {
    if k == 0 || m == 0 {
        return Err(Error::Config("simulation needs K >= 1 and m >= 1".into()));
    }
    let mut rng = chain_rng(seed, "re-data", 0);
    let precision = Gamma1D::new(hyper.a, hyper.b)?;
    let lambda_theta = precision.sample(&mut rng);
    let lambda_e = precision.sample(&mut rng);
    let mu = Gaussian1D::new(hyper.m0, 1.0 / hyper.s0.sqrt())?.sample(&mut rng);
    let theta_law = Gaussian1D::new(mu, 1.0 / lambda_theta.sqrt())?;
    let theta: Vec<f64> = (0..k).map(|_| theta_law.sample(&mut rng)).collect();
    let dataset = simulate_re_observations(&theta, lambda_e, m, &mut rng)?;
    Ok(SimulatedReData {
        dataset,
        truth: ReTruth {
            theta,
            mu,
            lambda_theta,
            lambda_e,
        },
    })
}

/// Structured view of a random effects state.
#[derive(Debug, Clone, PartialEq)]
pub struct REState {
    pub theta: Vec<f64>,
    pub mu: f64,
    pub lambda_theta: f64,
    pub lambda_e: f64,
}

impl REState {
    pub fn to_state_vector(&self) -> Result<StateVector> {
        StateVector::new(vec![
            self.theta.clone(),
            vec![self.mu],
            vec![self.lambda_theta, self.lambda_e],
        ])
    }

    pub fn from_state_vector(state: &StateVector) -> Result<Self> {
        if state.block_count() != 3 || state.block(1).len() != 1 || state.block(2).len() != 2 {
            return Err(Error::Config(format!(
                "random effects state needs blocks (theta, mu, lambda), got dims {:?}",
                state.dims()
            )));
        }
        Ok(Self {
            theta: state.block(0).to_vec(),
            mu: state.block(1)[0],
            lambda_theta: state.block(2)[0],
            lambda_e: state.block(2)[1],
        })
    }

    pub fn theta_mean(&self) -> f64 {
        self.theta.iter().sum::<f64>() / self.theta.len() as f64
    }
}

/// All four full conditionals at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct ReConditionals {
    pub theta: IsotropicGaussianBlock,
    pub mu: Gaussian1D,
    pub lambda_theta: Gamma1D,
    pub lambda_e: Gamma1D,
}

/// Posterior of the one-way random effects model
///
/// ```text
/// y_ij | θ, μ, λ ~ N(θ_i, 1/λ_e)      θ_i | μ, λ ~ N(μ, 1/λ_θ)
/// μ ~ N(m0, 1/s0)   λ_θ ~ Gamma(a1, b1)   λ_e ~ Gamma(a2, b2)
/// ```
///
/// Blocks are θ (K coordinates), μ, and λ = (λ_θ, λ_e), each scanned with probability 1/3.
#[derive(Debug, Clone)]
pub struct RandomEffectsModel {
    k: usize,
    m: usize,
    hyper: InferenceHyper,
    ybar: Vec<f64>,
    sse: f64,
    grand_mean: f64,
    alpha1: f64,
    alpha2: f64,
    scan: ScanProbabilities,
}

impl RandomEffectsModel {
    pub const THETA_BLOCK: usize = 0;
    pub const MU_BLOCK: usize = 1;
    pub const LAMBDA_BLOCK: usize = 2;

    pub fn new(data: &ReDataset, hyper: InferenceHyper) -> Result<Self> {
        let positive = [
            ("s0", hyper.s0),
            ("a1", hyper.a1),
            ("b1", hyper.b1),
            ("a2", hyper.a2),
            ("b2", hyper.b2),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "hyperparameter {name} must be positive, got {v}"
                )));
            }
        }
        if !hyper.m0.is_finite() {
            return Err(Error::Config("hyperparameter m0 must be finite".into()));
        }
        let k = data.subjects();
        let m = data.replicates();
        Ok(Self {
            k,
            m,
            hyper,
            ybar: data.subject_means(),
            sse: data.sse(),
            grand_mean: data.grand_mean(),
            alpha1: k as f64 / 2.0 + hyper.a1,
            alpha2: (k * m) as f64 / 2.0 + hyper.a2,
            scan: ScanProbabilities::uniform(3),
        })
    }

    pub fn subjects(&self) -> usize {
        self.k
    }

    pub fn replicates(&self) -> usize {
        self.m
    }

    pub fn hyper(&self) -> &InferenceHyper {
        &self.hyper
    }

    pub fn subject_means(&self) -> &[f64] {
        &self.ybar
    }

    pub fn sse(&self) -> f64 {
        self.sse
    }

    pub fn grand_mean(&self) -> f64 {
        self.grand_mean
    }

    /// Shape of the λ_θ conditional, K/2 + a1.
    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    /// Shape of the λ_e conditional, Km/2 + a2.
    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    /// Rate of the λ_θ conditional: Σ(θ_i − μ)²/2 + b1.
    pub fn beta1(&self, theta: &[f64], mu: f64) -> f64 {
        theta.iter().map(|t| (t - mu) * (t - mu)).sum::<f64>() / 2.0 + self.hyper.b1
    }

    /// Rate of the λ_e conditional: (Σ m(θ_i − ȳ_i)² + SSE)/2 + b2.
    pub fn beta2(&self, theta: &[f64]) -> f64 {
        let m = self.m as f64;
        let between: f64 = theta.iter().zip(&self.ybar).map(|(t, y)| m * (t - y) * (t - y)).sum();
        (between + self.sse) / 2.0 + self.hyper.b2
    }

    fn check_state(&self, state: &REState) -> Result<()> {
        if state.theta.len() != self.k {
            return Err(Error::Config(format!(
                "state has {} random effects, model has {}",
                state.theta.len(),
                self.k
            )));
        }
        if !(state.lambda_theta > 0.0) || !(state.lambda_e > 0.0) {
            return Err(Error::Domain(format!(
                "precisions must be positive, got lambda_theta={} lambda_e={}",
                state.lambda_theta, state.lambda_e
            )));
        }
        Ok(())
    }

    fn theta_conditional(&self, state: &REState) -> Result<IsotropicGaussianBlock> {
        let m = self.m as f64;
        let precision = state.lambda_theta + m * state.lambda_e;
        let mean = self
            .ybar
            .iter()
            .map(|y| (state.lambda_theta * state.mu + m * state.lambda_e * y) / precision)
            .collect();
        IsotropicGaussianBlock::new(mean, 1.0 / precision.sqrt())
    }

    fn mu_conditional(&self, state: &REState) -> Result<Gaussian1D> {
        let k = self.k as f64;
        let precision = self.hyper.s0 + k * state.lambda_theta;
        let mean = (self.hyper.s0 * self.hyper.m0 + k * state.lambda_theta * state.theta_mean()) / precision;
        Gaussian1D::new(mean, 1.0 / precision.sqrt())
    }

    fn lambda_conditionals(&self, state: &REState) -> Result<[Gamma1D; 2]> {
        Ok([
            Gamma1D::new(self.alpha1, self.beta1(&state.theta, state.mu))?,
            Gamma1D::new(self.alpha2, self.beta2(&state.theta))?,
        ])
    }

    /// All full conditionals at `state`.
    pub fn re_conditionals(&self, state: &REState) -> Result<ReConditionals> {
        self.check_state(state)?;
        let [lambda_theta, lambda_e] = self.lambda_conditionals(state)?;
        Ok(ReConditionals {
            theta: self.theta_conditional(state)?,
            mu: self.mu_conditional(state)?,
            lambda_theta,
            lambda_e,
        })
    }

    /// θ = ȳ, μ = 0, λ = (1, 1).
    pub fn re_initial_state(&self) -> REState {
        REState {
            theta: self.ybar.clone(),
            mu: 0.0,
            lambda_theta: 1.0,
            lambda_e: 1.0,
        }
    }
}

impl TargetModel for RandomEffectsModel {
    fn block_dims(&self) -> Vec<usize> {
        vec![self.k, 1, 2]
    }

    fn scan_probabilities(&self) -> &ScanProbabilities {
        &self.scan
    }

    fn initial_state(&self) -> StateVector {
        self.re_initial_state()
            .to_state_vector()
            .expect("subject means are finite")
    }

    fn conditional(&self, block: usize, state: &StateVector) -> Result<Conditional> {
        check_block(block, 3)?;
        let state = REState::from_state_vector(state)?;
        self.check_state(&state)?;
        match block {
            Self::THETA_BLOCK => self.theta_conditional(&state).map(Conditional::IsotropicGaussian),
            Self::MU_BLOCK => self.mu_conditional(&state).map(Conditional::Gaussian),
            _ => self.lambda_conditionals(&state).map(Conditional::GammaPair),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nn_conditional_examples() {
        let model = NormalNormalModel::new();
        let at = |x1: f64, x2: f64| StateVector::from_scalars(&[x1, x2]).unwrap();
        assert_eq!(model.nn_conditional(0, &at(5.0, 0.0)).unwrap(), Gaussian1D::standard());
        let c = model.nn_conditional(1, &at(2.0, 9.0)).unwrap();
        assert_eq!(c.mean(), 1.0);
        assert!((c.variance() - 0.5).abs() < 1e-15);
        let c = model.nn_conditional(1, &at(0.0, 9.0)).unwrap();
        assert_eq!(c.mean(), 0.0);
        assert!(model.nn_conditional(2, &at(0.0, 0.0)).is_err());
    }

    #[test]
    fn unit_square_conditionals_ignore_state() {
        let model = UnitSquareModel::new();
        let s = StateVector::from_scalars(&[0.1, 0.9]).unwrap();
        assert_eq!(model.conditional(0, &s).unwrap(), Conditional::Uniform(Uniform01));
        assert_eq!(model.conditional(1, &s).unwrap(), Conditional::Uniform(Uniform01));
        assert!(model.conditional(2, &s).is_err());
    }

    fn zero_data(k: usize, m: usize) -> ReDataset {
        ReDataset::new(vec![vec![0.0; m]; k]).unwrap()
    }

    #[test]
    fn theta_conditional_substitution() {
        let model = RandomEffectsModel::new(&zero_data(3, 10), InferenceHyper::default()).unwrap();
        let state = REState {
            theta: vec![0.0; 3],
            mu: 0.0,
            lambda_theta: 1.0,
            lambda_e: 1.0,
        };
        let c = model.re_conditionals(&state).unwrap();
        assert_eq!(c.theta.mean(), &[0.0, 0.0, 0.0]);
        assert!((c.theta.sd() * c.theta.sd() - 1.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn gamma_shapes_and_rates() {
        let model = RandomEffectsModel::new(&zero_data(3, 10), InferenceHyper::default()).unwrap();
        assert_eq!(model.alpha1(), 31.5);
        assert_eq!(model.alpha2(), 45.0);
        assert_eq!(model.beta1(&[0.7, 0.7, 0.7], 0.7), 30.0);
        assert!(model.beta1(&[1.0, -2.0, 0.5], 0.3) >= 30.0);
        assert!(model.beta2(&[1.0, -2.0, 0.5]) >= 30.0);
    }

    #[test]
    fn mu_conditional_formula() {
        let data = zero_data(2, 4);
        let hyper = InferenceHyper {
            m0: 1.0,
            s0: 2.0,
            ..InferenceHyper::default()
        };
        let model = RandomEffectsModel::new(&data, hyper).unwrap();
        let state = REState {
            theta: vec![1.0, 3.0],
            mu: 0.0,
            lambda_theta: 0.5,
            lambda_e: 1.0,
        };
        let mu = model.re_conditionals(&state).unwrap().mu;
        // (s0 m0 + K λθ θ̄) / (s0 + K λθ) = (2 + 2) / 3
        assert!((mu.mean() - 4.0 / 3.0).abs() < 1e-15);
        assert!((mu.variance() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_precision_is_rejected() {
        let model = RandomEffectsModel::new(&zero_data(3, 10), InferenceHyper::default()).unwrap();
        let state = REState {
            theta: vec![0.0; 3],
            mu: 0.0,
            lambda_theta: 0.0,
            lambda_e: 1.0,
        };
        assert!(model.re_conditionals(&state).is_err());
        let bad = InferenceHyper {
            b1: 0.0,
            ..InferenceHyper::default()
        };
        assert!(RandomEffectsModel::new(&zero_data(3, 10), bad).is_err());
    }

    #[test]
    fn initial_state_uses_subject_means() {
        let data = ReDataset::new(vec![vec![1.0, 3.0], vec![-1.0, 0.0], vec![5.0, 5.0]]).unwrap();
        let model = RandomEffectsModel::new(&data, InferenceHyper::default()).unwrap();
        let init = model.re_initial_state();
        assert_eq!(init.theta, vec![2.0, -0.5, 5.0]);
        assert_eq!(init.mu, 0.0);
        assert_eq!((init.lambda_theta, init.lambda_e), (1.0, 1.0));
        assert_eq!(model.initial_state().dims(), vec![3, 1, 2]);
    }

    #[test]
    fn simulated_statistics_are_consistent() {
        let sim = simulate_re_data(3, 10, &GeneratingHyper::default(), 99).unwrap();
        let data = &sim.dataset;
        assert_eq!(data.observations().iter().map(Vec::len).sum::<usize>(), 30);
        let means = data.subject_means();
        let mut sse = 0.0;
        for (row, mean) in data.observations().iter().zip(&means) {
            for v in row {
                sse += (v - mean) * (v - mean);
            }
        }
        assert!((sse - data.sse()).abs() < 1e-9);
        assert!((data.grand_mean() - means.iter().sum::<f64>() / 3.0).abs() < 1e-12);
        assert_eq!(simulate_re_data(3, 10, &GeneratingHyper::default(), 99).unwrap(), sim);
    }

    #[test]
    fn within_group_variance_tracks_injected_precision() {
        let mut rng = chain_rng(5, "inject", 0);
        // 100 subjects x 20 replicates: 1900 residual degrees of freedom, relative sd ~3%.
        let theta: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let data = simulate_re_observations(&theta, 1e6, 20, &mut rng).unwrap();
        let estimate = data.sse() / (100.0 * 19.0);
        assert!((estimate / 1e-6 - 1.0).abs() < 0.1, "{estimate}");
    }

    #[test]
    fn unbalanced_data_rejected() {
        assert!(ReDataset::new(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(ReDataset::new(vec![]).is_err());
        assert!(simulate_re_data(0, 10, &GeneratingHyper::default(), 1).is_err());
    }
}
