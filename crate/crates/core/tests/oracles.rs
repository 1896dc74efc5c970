//! Library outputs checked against independently computed references.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erf;

use rgld_core::geometry::FeasibleDomain;
use rgld_core::harness::checks::{finite_difference, grid_minimizer};
use rgld_core::harness::{preset_gibbs1d, preset_gm2d, preset_rastrigin, preset_rosenbrock};
use rgld_core::measure::{build_oracle, gibbs_gap_bound, gibbs_mean_f, tv_distance, Histogram};
use rgld_core::objectives::{reference_minimum, Objective, MIXTURE_TARGET_MEAN};

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `Z = int_{-1}^{1} exp(-x^2) dx = sqrt(pi) erf(1)`.
fn gibbs1d_z() -> f64 {
    std::f64::consts::PI.sqrt() * erf(1.0)
}

#[test]
fn gibbs1d_normalizer_matches_erf() {
    let q = Objective::quadratic(1, 1.0).unwrap();
    let b = FeasibleDomain::centered_ball(1, 1.0).unwrap();
    let o = build_oracle(&q, &b, 2.0, 256).unwrap();
    let z = gibbs1d_z();
    assert!((z - 1.493648265624854).abs() < 1e-9);
    assert!((o.normalizing_constant() - z).abs() / z < 1e-5);
}

#[test]
fn gibbs1d_mean_matches_closed_form() {
    // E[x^2] = (sqrt(pi) erf(1) / 2 - e^{-1}) / Z, and f = x^2 / 2
    let z = gibbs1d_z();
    let ex2 = (0.5 * z - (-1.0f64).exp()) / z;
    let q = Objective::quadratic(1, 1.0).unwrap();
    let b = FeasibleDomain::centered_ball(1, 1.0).unwrap();
    let o = build_oracle(&q, &b, 2.0, 256).unwrap();
    assert!((gibbs_mean_f(&o) - 0.5 * ex2).abs() < 1e-5);
}

#[test]
fn quadrature_converges_under_refinement() {
    for spec in [preset_gibbs1d(), preset_gm2d()] {
        let p = spec.prepare().unwrap();
        let coarse = build_oracle(&p.objective, &p.domain, spec.beta, 128).unwrap();
        let fine = build_oracle(&p.objective, &p.domain, spec.beta, 512).unwrap();
        let rel = (coarse.normalizing_constant() - fine.normalizing_constant()).abs()
            / fine.normalizing_constant();
        assert!(rel <= 0.005, "{}: Z changed by {rel}", spec.name);
        assert!((gibbs_mean_f(&coarse) - gibbs_mean_f(&fine)).abs() < 0.01);
    }
}

#[test]
fn gibbs_mean_decreases_with_beta() {
    let p = preset_gm2d().prepare().unwrap();
    let means: Vec<f64> = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&beta| gibbs_mean_f(&build_oracle(&p.objective, &p.domain, beta, 128).unwrap()))
        .collect();
    for w in means.windows(2) {
        assert!(w[1] < w[0], "{means:?}");
    }
    let min_f = p.min_f.unwrap();
    assert!(means.iter().all(|m| *m > min_f));
}

/// Independent multinomial draws from the oracle give the TV floor an ideal
/// sampler would reach at the same sample size and binning.
fn iid_tv(n: usize, seed: u64) -> f64 {
    let p = preset_gibbs1d().prepare().unwrap();
    let o = build_oracle(&p.objective, &p.domain, 2.0, 256).unwrap();
    let dist = WeightedIndex::new(o.probabilities()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; o.probabilities().len()];
    for _ in 0..n {
        counts[dist.sample(&mut rng)] += 1;
    }
    tv_distance(&Histogram::from_counts(&o, counts).unwrap(), &o).unwrap()
}

#[test]
fn tv_threshold_sits_between_iid_floors() {
    // at 2e6 samples an ideal sampler is far below 0.05 ...
    let full: f64 = (0..4).map(|s| iid_tv(2_000_000, s)).sum::<f64>() / 4.0;
    assert!(full < 0.005, "iid TV at 2e6 samples: {full}");
    // ... while 0.05 is the floor of roughly 1e4 independent samples, so the
    // threshold tolerates a chain with an effective sample size of that order
    let small: f64 = (0..20).map(|s| iid_tv(10_000, s)).sum::<f64>() / 20.0;
    assert!(
        (0.03..0.08).contains(&small),
        "iid TV at 1e4 samples: {small}"
    );
}

#[test]
fn mixture_minimizer_matches_dense_grid() {
    let p = preset_gm2d().prepare().unwrap();
    let grid = grid_minimizer(&p.objective, &p.domain, 400).unwrap();
    let spacing = 8.0 / 400.0;
    let Objective::GaussianMixture(gm) = &p.objective else {
        panic!("gm2d uses a mixture")
    };
    let stored = gm.minimizer().unwrap();
    assert!(norm(&diff(stored, &grid)) < spacing);
    assert!(norm(&diff(&grid, &MIXTURE_TARGET_MEAN)) <= 0.2);
    let min_f = p.min_f.unwrap();
    assert!(min_f <= p.objective.value(&grid).unwrap());
}

#[test]
fn gm2d_mixture_seed_is_the_first_trapping_seed() {
    use rgld_core::dynamics::{run_chain, ChainConfig, Method};
    use rgld_core::harness::{ObjectiveSpec, GM2D_MIXTURE_SEED};
    let base = preset_gm2d();
    let trapping = |seed: u64| {
        let spec = rgld_core::harness::ExperimentSpec {
            objective: ObjectiveSpec::BenchmarkMixture { seed },
            ..base.clone()
        };
        let p = spec.prepare().unwrap();
        let grid = grid_minimizer(&p.objective, &p.domain, 201).unwrap();
        let near = norm(&diff(&grid, &MIXTURE_TARGET_MEAN)) < 0.2;
        let cfg = ChainConfig::new(
            Method::Pg,
            base.eta,
            base.beta,
            base.steps,
            0,
            p.chains[0].x0.clone(),
        );
        let rec = run_chain(&cfg, &p.objective, &p.domain).unwrap();
        let gap = rec.final_cumulative_min() - p.objective.value(&grid).unwrap();
        near && gap > 0.05
    };
    assert!(trapping(GM2D_MIXTURE_SEED));
    assert!((0..GM2D_MIXTURE_SEED).all(|s| !trapping(s)));
}

fn preset_cases() -> Vec<(String, Objective, FeasibleDomain)> {
    let mut specs = vec![preset_gibbs1d(), preset_gm2d()];
    specs.extend([4, 10, 20].map(|d| preset_rosenbrock(d).unwrap()));
    specs.extend([2, 5, 30].map(|d| preset_rastrigin(d).unwrap()));
    specs
        .into_iter()
        .map(|s| {
            let p = s.prepare().unwrap();
            (s.name, p.objective, p.domain)
        })
        .collect()
}

#[test]
fn lipschitz_bounds_hold_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, f, k) in preset_cases() {
        let b = f.lipschitz_bounds(&k).unwrap();
        for _ in 0..2_000 {
            let x = k.sample_uniform(&mut rng);
            // near pairs probe the local slope, far pairs the global one
            let y = if rng.random::<bool>() {
                k.sample_uniform(&mut rng)
            } else {
                let z: Vec<f64> = x
                    .iter()
                    .map(|v| v + 1e-3 * rng.random_range(-1.0..1.0))
                    .collect();
                if !k.contains(&z).unwrap() {
                    continue;
                }
                z
            };
            let dxy = norm(&diff(&x, &y));
            let df = (f.value(&x).unwrap() - f.value(&y).unwrap()).abs();
            let gx = f.gradient(&x).unwrap();
            let dg = norm(&diff(&gx, &f.gradient(&y).unwrap()));
            assert!(
                df <= b.lipschitz * dxy * (1.0 + 1e-12) + 1e-12,
                "{name}: value slope"
            );
            assert!(
                dg <= b.smoothness * dxy * (1.0 + 1e-12) + 1e-12,
                "{name}: gradient slope"
            );
            assert!(norm(&gx) <= b.gradient_bound, "{name}: gradient norm");
        }
    }
}

#[test]
fn gradients_match_finite_differences_on_presets() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (name, f, k) in preset_cases() {
        for _ in 0..50 {
            let x = k.sample_uniform(&mut rng);
            let g = f.gradient(&x).unwrap();
            let fd = finite_difference(&f, &x).unwrap();
            let err = norm(&diff(&g, &fd)) / norm(&g).max(1.0);
            assert!(err < 1e-5, "{name}: relative error {err}");
        }
    }
}

#[test]
fn gap_bound_matches_hand_computation() {
    // d = 1, beta = 2, r = R = L = 1
    let want = 0.5 * (2.0 * f64::max(2.0, 2.0 * (1.0 + 2f64.sqrt()) / 2f64.ln())).ln();
    let got = gibbs_gap_bound(1, 2.0, 1.0, 1.0, 1.0).unwrap();
    assert!((got - want).abs() < 1e-14);
    assert!((got - 1.3171).abs() < 1e-4);
}

#[test]
fn reference_minima_are_not_beaten_by_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (name, f, k) in preset_cases() {
        let m = reference_minimum(&f, &k).unwrap();
        for _ in 0..20_000 {
            let x = k.sample_uniform(&mut rng);
            assert!(f.value(&x).unwrap() >= m - 1e-12, "{name}");
        }
    }
}
