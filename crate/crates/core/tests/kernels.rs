use cmh_core::distributions::{Gamma1D, Gaussian1D, Univariate};
use cmh_core::neighborhoods::{check_admissibility, realize, NeighborhoodSpec, Region, Scaling};
use cmh_core::rng::chain_rng;
use cmh_core::sampler::{cmh_move_mass, gibbs_move_mass, Kernel};
use cmh_core::{
    simulate_re_data, Conditional, GeneratingHyper, InferenceHyper, NormalNormalModel, RandomEffectsModel, StateVector,
    TargetModel, UniformSource, UnitSquareModel,
};

fn sd_interval(c: f64) -> NeighborhoodSpec {
    NeighborhoodSpec::interval(c, Scaling::ConditionalSd).unwrap()
}

fn run(kernel: &Kernel, model: &dyn TargetModel, seed: u64, steps: usize) -> Vec<StateVector> {
    let mut rng = chain_rng(seed, "test", 0);
    let mut state = model.initial_state();
    let mut path = vec![state.clone()];
    for _ in 0..steps {
        kernel.step(model, &mut state, &mut rng).unwrap();
        path.push(state.clone());
    }
    path
}

/// Mean and batch-means standard error of a stationary series.
fn batch_mean(values: &[f64], batches: usize) -> (f64, f64) {
    let size = values.len() / batches;
    let means: Vec<f64> = values
        .chunks_exact(size)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let n = means.len() as f64;
    let mean = means.iter().sum::<f64>() / n;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn empty_neighborhoods_reproduce_the_gibbs_path() {
    let model = NormalNormalModel::new();
    let gs = run(&Kernel::Gibbs, &model, 11, 20_000);
    let cmh = run(&Kernel::cmh(vec![NeighborhoodSpec::empty(); 2]), &model, 11, 20_000);
    assert_eq!(gs, cmh);
}

#[test]
fn identical_seeds_give_identical_paths() {
    let model = NormalNormalModel::new();
    let kernel = Kernel::cmh(vec![sd_interval(1.5); 2]);
    assert_eq!(run(&kernel, &model, 5, 5_000), run(&kernel, &model, 5, 5_000));
    assert_ne!(run(&kernel, &model, 5, 50), run(&kernel, &model, 6, 50));
}

#[test]
fn rejections_leave_the_state_untouched() {
    let model = NormalNormalModel::new();
    let kernel = Kernel::cmh(vec![sd_interval(3.0); 2]);
    let mut rng = chain_rng(3, "test", 0);
    let mut state = model.initial_state();
    let mut rejections = 0;
    for _ in 0..20_000 {
        let before = state.clone();
        let record = kernel.step(&model, &mut state, &mut rng).unwrap();
        if record.accepted {
            assert_eq!(state.block(record.selected_block), record.proposal.as_deref().unwrap());
        } else {
            rejections += 1;
            assert_eq!(before, state);
            assert!(record.alpha < 1.0);
        }
    }
    assert!(rejections > 1_000);
}

#[test]
fn cmh_c_leaves_the_bivariate_normal_invariant() {
    let model = NormalNormalModel::new();
    let kernel = Kernel::cmh(vec![sd_interval(1.5); 2]);
    let mut rng = chain_rng(2024, "test", 0);
    let mut state = model.initial_state();
    let n = 1_000_000;
    let (mut x1, mut x2) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        kernel.step(&model, &mut state, &mut rng).unwrap();
        x1.push(state.block(0)[0]);
        x2.push(state.block(1)[0]);
    }
    let (m1, se1) = batch_mean(&x1, 1000);
    assert!(m1.abs() < 4.0 * se1, "mean {m1} se {se1}");
    let sq1: Vec<f64> = x1.iter().map(|v| v * v).collect();
    let sq2: Vec<f64> = x2.iter().map(|v| v * v).collect();
    let cross: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a * b).collect();
    let v1 = batch_mean(&sq1, 1000).0;
    let v2 = batch_mean(&sq2, 1000).0;
    let c12 = batch_mean(&cross, 1000).0;
    assert!((v1 / 2.0 - 1.0).abs() < 0.02, "var x1 {v1}");
    assert!((v2 - 1.0).abs() < 0.02, "var x2 {v2}");
    assert!((c12 - 1.0).abs() < 0.03, "cov {c12}");
}

#[test]
fn fixed_density_steps_always_accept() {
    let model = NormalNormalModel::new();
    for q in [0.05, 0.5, 0.9] {
        let kernel = Kernel::cmh(vec![NeighborhoodSpec::fixed_density(q).unwrap(); 2]);
        let mut rng = chain_rng(9, "test", 0);
        let mut state = model.initial_state();
        for _ in 0..20_000 {
            let r = kernel.step(&model, &mut state, &mut rng).unwrap();
            assert!(r.accepted && r.alpha == 1.0);
        }
    }
}

#[test]
fn fixed_density_mass_is_exact_on_random_probes() {
    let spec = NeighborhoodSpec::fixed_density(0.37).unwrap();
    let mut rng = chain_rng(1, "probe", 0);
    for _ in 0..1000 {
        let mean = 20.0 * rng.uniform() - 10.0;
        let sd = 0.1 + 3.0 * rng.uniform();
        let d = Gaussian1D::new(mean, sd).unwrap();
        let x = mean + sd * (12.0 * rng.uniform() - 6.0);
        let nb = realize(&spec, 0, &Conditional::Gaussian(d), &[x]).unwrap();
        let Region::Interval { lo, hi } = nb.region else {
            panic!()
        };
        assert!((d.interval_mass(lo, hi) - 0.37).abs() < 1e-9);
        assert_eq!(nb.mass, 0.37);
    }
}

#[test]
fn sd_interval_mass_peaks_at_the_conditional_mean() {
    let c = 1.5;
    let d = Gaussian1D::new(0.4, 1.7).unwrap();
    let peak = Gaussian1D::standard().interval_mass(-c, c);
    for i in 0..=2000 {
        let x = 0.4 + 1.7 * (-8.0 + 16.0 * i as f64 / 2000.0);
        let nb = realize(&sd_interval(c), 0, &Conditional::Gaussian(d), &[x]).unwrap();
        assert!(nb.mass <= peak + 1e-12);
        assert!(nb.mass < 1.0);
    }
}

#[test]
fn rectangle_mass_matches_monte_carlo() {
    let pair = [Gamma1D::new(31.5, 20.0).unwrap(), Gamma1D::new(45.0, 40.0).unwrap()];
    let current = [1.4, 1.2];
    let spec = NeighborhoodSpec::rectangle([0.8, 0.6], Scaling::ConditionalSd).unwrap();
    let cond = Conditional::GammaPair(pair);
    let nb = realize(&spec, 2, &cond, &current).unwrap();
    let mut rng = chain_rng(77, "rect", 0);
    let draws = 1_000_000;
    let hits = (0..draws)
        .filter(|_| nb.region.contains(&cond.sample(&mut rng)))
        .count() as f64;
    let p = hits / draws as f64;
    let se = (nb.mass * (1.0 - nb.mass) / draws as f64).sqrt();
    assert!((p - nb.mass).abs() < 4.0 * se, "mc {p} exact {}", nb.mass);
}

#[test]
fn cmh_move_mass_is_dominated_by_gibbs() {
    let model = NormalNormalModel::new();
    let spec = sd_interval(1.5);
    let q_max = Gaussian1D::standard().interval_mass(-1.5, 1.5);
    let mut rng = chain_rng(10, "domination", 0);
    for _ in 0..100 {
        let state = StateVector::from_scalars(&[8.0 * rng.uniform() - 4.0, 6.0 * rng.uniform() - 3.0]).unwrap();
        let block = (rng.uniform() * 2.0) as usize;
        let cond = model.conditional(block, &state).unwrap();
        let lo = 10.0 * rng.uniform() - 5.0;
        let hi = lo + 4.0 * rng.uniform();
        let current = state.block(block)[0];
        let cmh = cmh_move_mass(&cond, &spec, current, lo, hi).unwrap();
        let gs = gibbs_move_mass(&cond, lo, hi).unwrap();
        assert!(cmh <= gs / (1.0 - q_max) * (1.0 + 1e-9) + 1e-15, "{cmh} vs {gs}");
    }
}

#[test]
fn unit_square_moves_clear_the_neighborhood() {
    let model = UnitSquareModel::new();
    let kernel = Kernel::cmh(vec![NeighborhoodSpec::interval(0.3, Scaling::Absolute).unwrap(); 2]);
    let mut rng = chain_rng(8, "test", 0);
    let mut state = model.initial_state();
    for _ in 0..20_000 {
        let before = state.clone();
        let r = kernel.step(&model, &mut state, &mut rng).unwrap();
        let b = r.selected_block;
        if r.accepted {
            assert!((state.block(b)[0] - before.block(b)[0]).abs() >= 0.3);
        }
    }
}

#[test]
fn random_effects_chain_runs_and_stays_admissible() {
    let data = simulate_re_data(3, 10, &GeneratingHyper::default(), 2013).unwrap();
    let model = RandomEffectsModel::new(&data.dataset, InferenceHyper::default()).unwrap();
    let specs = vec![
        NeighborhoodSpec::ball(0.6, Scaling::ConditionalSd).unwrap(),
        sd_interval(0.15),
        NeighborhoodSpec::rectangle([0.4, 0.4], Scaling::ConditionalSd).unwrap(),
    ];
    let kernel = Kernel::cmh(specs.clone());
    kernel.validate_for(&model).unwrap();
    let path = run(&kernel, &model, 4, 5_000);
    let audit = check_admissibility(&specs, &model, &path).unwrap();
    assert!(!audit.violation);
    assert!(audit.q_max_observed < 0.5);
    for s in &path {
        assert!(s.block(2).iter().all(|&l| l > 0.0));
    }
}

#[test]
fn random_effects_block_conditionals_match_their_draws() {
    let data = simulate_re_data(3, 10, &GeneratingHyper::default(), 99).unwrap();
    let model = RandomEffectsModel::new(&data.dataset, InferenceHyper::default()).unwrap();
    let state = model.initial_state();
    let mut rng = chain_rng(5, "conditional", 0);
    let draws = 1_000_000;
    for block in 0..3 {
        let cond = model.conditional(block, &state).unwrap();
        let (means, sds): (Vec<f64>, Vec<f64>) = match &cond {
            Conditional::IsotropicGaussian(b) => (b.mean().to_vec(), vec![b.sd(); b.dim()]),
            Conditional::Gaussian(d) => (vec![d.mean()], vec![d.sd()]),
            Conditional::GammaPair(p) => (p.iter().map(|g| g.mean()).collect(), p.iter().map(|g| g.sd()).collect()),
            other => panic!("unexpected {other:?}"),
        };
        let mut sum = vec![0.0; means.len()];
        let mut sum_sq = vec![0.0; means.len()];
        for _ in 0..draws {
            for (k, v) in cond.sample(&mut rng).into_iter().enumerate() {
                sum[k] += v;
                sum_sq[k] += v * v;
            }
        }
        for k in 0..means.len() {
            let n = draws as f64;
            let mean = sum[k] / n;
            let var = sum_sq[k] / n - mean * mean;
            assert!(
                (mean - means[k]).abs() < 4.0 * sds[k] / n.sqrt(),
                "block {block} coord {k}"
            );
            // variance of a sample variance is about 2σ⁴/n for near-normal draws
            assert!((var - sds[k].powi(2)).abs() < 4.0 * sds[k].powi(2) * (2.0 / n).sqrt() * 1.5);
        }
    }
}
