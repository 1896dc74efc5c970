//! Sampler kernels and the seeded chain runner.
//!
//! All three methods share the Langevin proposal
//! `x' = x - eta grad f(x) + sqrt(2 eta / beta) xi` (without the noise term
//! for projected gradient descent) and differ only in how `x'` is brought
//! back into the domain: reflection through the projection point (RGLD) or
//! projection (PGLD, PG).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::FeasibleDomain;
use crate::objectives::{LipschitzBounds, Objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Reflected gradient Langevin dynamics.
    Rgld,
    /// Projected gradient Langevin dynamics.
    Pgld,
    /// Projected gradient descent.
    Pg,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rgld => "rgld",
            Method::Pgld => "pgld",
            Method::Pg => "pg",
        }
    }

    pub fn is_noisy(self) -> bool {
        !matches!(self, Method::Pg)
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rgld" => Ok(Method::Rgld),
            "pgld" => Ok(Method::Pgld),
            "pg" => Ok(Method::Pg),
            other => Err(Error::Parse(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    #[default]
    Rademacher,
    Gaussian,
}

/// What to do when the worst-case step overshoot exceeds the reflection margin.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepCheck {
    /// Reject the configuration before running.
    #[default]
    Enforce,
    /// Run anyway; out-of-margin proposals are counted as fallbacks.
    Monitor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub method: Method,
    pub eta: f64,
    /// Inverse temperature; unused by [`Method::Pg`].
    pub beta: f64,
    /// Number of recorded iterates `X_0, ..., X_{steps-1}`.
    pub steps: usize,
    pub seed: u64,
    pub noise: NoiseKind,
    pub x0: Vec<f64>,
    pub record_trajectory: bool,
    pub step_check: StepCheck,
}

impl ChainConfig {
    pub fn new(method: Method, eta: f64, beta: f64, steps: usize, seed: u64, x0: Vec<f64>) -> Self {
        ChainConfig {
            method,
            eta,
            beta,
            steps,
            seed,
            noise: NoiseKind::default(),
            x0,
            record_trajectory: false,
            step_check: StepCheck::default(),
        }
    }

    /// Worst-case distance a single proposal can land outside the domain:
    /// `eta G + sqrt(2 eta d / beta)`, without the noise term for PG.
    pub fn worst_case_overshoot(&self, gradient_bound: f64, dim: usize) -> f64 {
        let drift = self.eta * gradient_bound;
        if self.method.is_noisy() {
            drift + (2.0 * self.eta * dim as f64 / self.beta).sqrt()
        } else {
            drift
        }
    }

    /// Checks the configuration against the objective and domain.
    pub fn validate(&self, obj: &Objective, domain: &FeasibleDomain) -> Result<()> {
        self.validate_with(obj, domain, None)
    }

    /// As [`Self::validate`], reusing `bounds` for the step check when given.
    pub fn validate_with(
        &self,
        obj: &Objective,
        domain: &FeasibleDomain,
        bounds: Option<&LipschitzBounds>,
    ) -> Result<()> {
        if obj.dim() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                actual: obj.dim(),
            });
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::config(
                "eta",
                format!("must be positive, got {}", self.eta),
            ));
        }
        if self.method.is_noisy() && !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config(
                "beta",
                format!("must be positive, got {}", self.beta),
            ));
        }
        if self.steps == 0 {
            return Err(Error::config("steps", "must be at least 1"));
        }
        if self.x0.len() != domain.dim() {
            return Err(Error::config(
                "x0",
                format!(
                    "has dimension {}, domain has {}",
                    self.x0.len(),
                    domain.dim()
                ),
            ));
        }
        if !domain.contains(&self.x0)? {
            return Err(Error::config("x0", "initial point lies outside the domain"));
        }
        if self.step_check == StepCheck::Enforce {
            let owned;
            let bounds = match bounds {
                Some(b) => b,
                None => {
                    owned = obj.lipschitz_bounds(domain)?;
                    &owned
                }
            };
            let overshoot = self.worst_case_overshoot(bounds.gradient_bound, domain.dim());
            let margin = domain.reflection_margin();
            if overshoot > margin {
                return Err(Error::config(
                    "eta",
                    format!(
                        "worst-case overshoot {overshoot:.6} exceeds reflection margin {margin:.6}"
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// Per-iterate statistics of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config: ChainConfig,
    /// `f(X_k)` for `k = 0..steps`.
    pub f_value: Vec<f64>,
    /// `min_{j <= k} f(X_j)`.
    pub cumulative_min: Vec<f64>,
    /// `X_k` was produced by a reflection or projection.
    pub boundary: Vec<bool>,
    /// `X_k` was produced by the projection fallback.
    pub fallback: Vec<bool>,
    pub reflection_events: u64,
    pub projection_events: u64,
    pub fallback_count: u64,
    /// Last iterate `X_{steps-1}`.
    pub final_point: Vec<f64>,
    /// Row-major `steps x d` iterates, when requested.
    pub trajectory: Option<Vec<f64>>,
}

impl RunRecord {
    pub fn dim(&self) -> usize {
        self.final_point.len()
    }

    pub fn trajectory_point(&self, k: usize) -> Option<&[f64]> {
        let d = self.dim();
        self.trajectory
            .as_ref()
            .and_then(|t| t.get(k * d..(k + 1) * d))
    }

    pub fn final_cumulative_min(&self) -> f64 {
        *self.cumulative_min.last().expect("at least one iterate")
    }
}

/// Vector of independent +1/-1 coordinates.
pub fn rademacher_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

/// Unconstrained Langevin proposal. With `noise = None` this is a plain
/// gradient step.
pub fn langevin_proposal(
    x: &[f64],
    obj: &Objective,
    eta: f64,
    beta: f64,
    noise: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let g = obj.gradient(x)?;
    let mut out: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - eta * gi).collect();
    if let Some(xi) = noise {
        if xi.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                actual: xi.len(),
            });
        }
        let scale = (2.0 * eta / beta).sqrt();
        out.iter_mut().zip(xi).for_each(|(o, n)| *o += scale * n);
    }
    Ok(out)
}

/// One RGLD step. Returns the reflected iterate and whether the proposal left
/// the domain; fails with [`Error::ReflectionUndefined`] when the proposal is
/// beyond the reflection margin.
pub fn rgld_step(
    x: &[f64],
    obj: &Objective,
    domain: &FeasibleDomain,
    eta: f64,
    beta: f64,
    noise: &[f64],
) -> Result<(Vec<f64>, bool)> {
    let proposal = langevin_proposal(x, obj, eta, beta, Some(noise))?;
    domain.reflect(&proposal)
}

/// One PGLD step. Returns the projected iterate and whether projection moved it.
pub fn pgld_step(
    x: &[f64],
    obj: &Objective,
    domain: &FeasibleDomain,
    eta: f64,
    beta: f64,
    noise: &[f64],
) -> Result<(Vec<f64>, bool)> {
    let proposal = langevin_proposal(x, obj, eta, beta, Some(noise))?;
    project_flagged(domain, &proposal)
}

/// One projected gradient descent step.
pub fn pg_step(x: &[f64], obj: &Objective, domain: &FeasibleDomain, eta: f64) -> Result<Vec<f64>> {
    let proposal = langevin_proposal(x, obj, eta, 1.0, None)?;
    domain.project(&proposal)
}

fn project_flagged(domain: &FeasibleDomain, x: &[f64]) -> Result<(Vec<f64>, bool)> {
    let outside = !domain.contains(x)?;
    Ok((domain.project(x)?, outside))
}

/// Runs one chain. The generator is ChaCha8 seeded from `config.seed`; one
/// noise vector is drawn per transition, before the gradient step, and PG
/// draws none. Output is bitwise reproducible for a given configuration.
pub fn run_chain(
    config: &ChainConfig,
    obj: &Objective,
    domain: &FeasibleDomain,
) -> Result<RunRecord> {
    config.validate(obj, domain)?;
    let n = config.steps;
    let d = domain.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut f_value = Vec::with_capacity(n);
    let mut cumulative_min = Vec::with_capacity(n);
    let mut boundary = Vec::with_capacity(n);
    let mut fallback = Vec::with_capacity(n);
    let mut trajectory = config.record_trajectory.then(|| Vec::with_capacity(n * d));
    let (mut reflections, mut projections, mut fallbacks) = (0u64, 0u64, 0u64);

    let mut x = config.x0.clone();
    let mut hit = false;
    let mut fell_back = false;
    let mut best = f64::INFINITY;
    for k in 0..n {
        let fx = obj.value_unchecked(&x);
        best = best.min(fx);
        f_value.push(fx);
        cumulative_min.push(best);
        boundary.push(hit);
        fallback.push(fell_back);
        if let Some(t) = trajectory.as_mut() {
            t.extend_from_slice(&x);
        }
        if k + 1 == n {
            break;
        }

        let noise = match (config.method.is_noisy(), config.noise) {
            (false, _) => None,
            (true, NoiseKind::Rademacher) => Some(rademacher_vector(&mut rng, d)),
            (true, NoiseKind::Gaussian) => Some(gaussian_vector(&mut rng, d)),
        };
        let proposal = langevin_proposal(&x, obj, config.eta, config.beta, noise.as_deref())?;
        fell_back = false;
        (x, hit) = match config.method {
            Method::Rgld => match domain.reflect(&proposal) {
                Ok((y, reflected)) => {
                    reflections += reflected as u64;
                    (y, reflected)
                }
                Err(Error::ReflectionUndefined { .. }) => {
                    fallbacks += 1;
                    fell_back = true;
                    (domain.project(&proposal)?, true)
                }
                Err(e) => return Err(e),
            },
            Method::Pgld | Method::Pg => {
                let (y, projected) = project_flagged(domain, &proposal)?;
                projections += projected as u64;
                (y, projected)
            }
        };
    }

    Ok(RunRecord {
        config: config.clone(),
        f_value,
        cumulative_min,
        boundary,
        fallback,
        reflection_events: reflections,
        projection_events: projections,
        fallback_count: fallbacks,
        final_point: x,
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dist, norm};

    fn quad_ball() -> (Objective, FeasibleDomain) {
        (
            Objective::quadratic(2, 1.0).unwrap(),
            FeasibleDomain::centered_ball(2, 2.0).unwrap(),
        )
    }

    #[test]
    fn rademacher_coordinates_and_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in [1, 3, 7] {
            let v = rademacher_vector(&mut rng, d);
            assert!(v.iter().all(|c| *c == 1.0 || *c == -1.0));
            assert_eq!(norm(&v), (d as f64).sqrt());
        }
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        let a1 = rademacher_vector(&mut a, 3);
        let a2 = rademacher_vector(&mut a, 3);
        assert_eq!(a1, rademacher_vector(&mut b, 3));
        assert_eq!(a2, rademacher_vector(&mut b, 3));
    }

    #[test]
    fn rgld_interior_step_by_hand() {
        let (f, b) = quad_ball();
        let (y, hit) = rgld_step(&[1.0, 0.0], &f, &b, 0.1, 2.0, &[1.0, -1.0]).unwrap();
        assert!(!hit);
        let s = 0.1f64.sqrt();
        assert!((y[0] - (0.9 + s)).abs() < 1e-15);
        assert!((y[1] + s).abs() < 1e-15);
        assert!((y[0] - 1.216228).abs() < 1e-6 && (y[1] + 0.316228).abs() < 1e-6);
        let (p, moved) = pgld_step(&[1.0, 0.0], &f, &b, 0.1, 2.0, &[1.0, -1.0]).unwrap();
        assert!(!moved);
        assert_eq!(p, y);
    }

    #[test]
    fn rgld_step_vanishes_with_eta() {
        let (f, b) = quad_ball();
        let x = [0.4, -0.3];
        let mut prev = f64::INFINITY;
        for eta in [1e-2, 1e-4, 1e-6, 1e-8] {
            let (y, _) = rgld_step(&x, &f, &b, eta, 1.0, &[1.0, 1.0]).unwrap();
            let gap = dist(&y, &x);
            assert!(gap < prev);
            prev = gap;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn rgld_outside_matches_reflection_formula() {
        let f = Objective::quadratic(2, 1.0).unwrap();
        let s = FeasibleDomain::centered_shell(2, 0.9, 4.0).unwrap();
        let x = [3.9, 0.1];
        let noise = [1.0, 1.0];
        let prop = langevin_proposal(&x, &f, 0.01, 0.01, Some(&noise)).unwrap();
        assert!(!s.contains(&prop).unwrap());
        let (y, hit) = rgld_step(&x, &f, &s, 0.01, 0.01, &noise).unwrap();
        assert!(hit);
        let p = s.project(&prop).unwrap();
        for i in 0..2 {
            assert!((y[i] - (2.0 * p[i] - prop[i])).abs() < 1e-12);
        }
        // projection output is the midpoint of the proposal and its reflection
        let (q, moved) = pgld_step(&x, &f, &s, 0.01, 0.01, &noise).unwrap();
        assert!(moved);
        for i in 0..2 {
            assert!((q[i] - 0.5 * (prop[i] + y[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn pg_steps() {
        let (f, b) = quad_ball();
        let y = pg_step(&[1.0, 0.0], &f, &b, 0.1).unwrap();
        assert!((y[0] - 0.9).abs() < 1e-15 && y[1] == 0.0);
        let r = Objective::rastrigin(2).unwrap();
        assert_eq!(pg_step(&[0.0, 0.0], &r, &b, 0.1).unwrap(), vec![0.0, 0.0]);
        let s = FeasibleDomain::centered_shell(2, 0.9, 4.0).unwrap();
        // gradient (5, 0) at x = (10, 0) with eta = 1 lands on (5, 0), projected to (4, 0)
        let q = Objective::quadratic(2, 0.5).unwrap();
        assert_eq!(pg_step(&[10.0, 0.0], &q, &s, 1.0).unwrap(), vec![4.0, 0.0]);
    }

    #[test]
    fn pg_chain_contracts_geometrically() {
        let (f, b) = quad_ball();
        let cfg = ChainConfig::new(Method::Pg, 0.1, 1.0, 3, 0, vec![1.0, 0.0]);
        let rec = run_chain(&cfg, &f, &b).unwrap();
        let want = [0.5, 0.405, 0.32805];
        for (got, w) in rec.f_value.iter().zip(want) {
            assert!((got - w).abs() < 1e-15, "{got} vs {w}");
        }
        assert_eq!(rec.cumulative_min, rec.f_value);
    }

    #[test]
    fn pg_stays_in_rastrigin_basin() {
        let f = Objective::rastrigin(2).unwrap();
        let s = FeasibleDomain::centered_shell(2, 0.9, 5.12).unwrap();
        let cfg = ChainConfig::new(Method::Pg, 1e-3, 1.0, 101, 0, vec![2.1, -0.95]);
        let rec = run_chain(&cfg, &f, &s).unwrap();
        for w in rec.f_value.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{} > {}", w[1], w[0]);
        }
        assert!(dist(&rec.final_point, &[2.0, -1.0]) < 0.2);
    }

    #[test]
    fn run_chain_is_deterministic() {
        let (f, b) = quad_ball();
        let mut cfg = ChainConfig::new(Method::Rgld, 0.05, 1.0, 2000, 17, vec![0.5, 0.5]);
        cfg.record_trajectory = true;
        let a = run_chain(&cfg, &f, &b).unwrap();
        let c = run_chain(&cfg, &f, &b).unwrap();
        assert_eq!(a, c);
        cfg.seed = 18;
        assert_ne!(a.f_value, run_chain(&cfg, &f, &b).unwrap().f_value);
    }

    #[test]
    fn invalid_configs_are_rejected_before_running() {
        let (f, b) = quad_ball();
        let base = ChainConfig::new(Method::Rgld, 0.05, 1.0, 10, 0, vec![0.5, 0.5]);
        let cases: Vec<(ChainConfig, &str)> = vec![
            (
                ChainConfig {
                    x0: vec![3.0, 0.0],
                    ..base.clone()
                },
                "x0",
            ),
            (
                ChainConfig {
                    x0: vec![0.0],
                    ..base.clone()
                },
                "x0",
            ),
            (
                ChainConfig {
                    eta: 0.0,
                    ..base.clone()
                },
                "eta",
            ),
            (
                ChainConfig {
                    beta: -1.0,
                    ..base.clone()
                },
                "beta",
            ),
            (
                ChainConfig {
                    steps: 0,
                    ..base.clone()
                },
                "steps",
            ),
            // sqrt(2 * 1.5 * 2) alone exceeds the margin of 2
            (
                ChainConfig {
                    eta: 1.5,
                    ..base.clone()
                },
                "eta",
            ),
        ];
        for (cfg, field) in cases {
            match run_chain(&cfg, &f, &b) {
                Err(Error::InvalidConfig { field: got, .. }) => assert_eq!(got, field),
                other => panic!("expected config error on {field}, got {other:?}"),
            }
        }
        // PG ignores beta
        let pg = ChainConfig {
            method: Method::Pg,
            beta: 0.0,
            ..base
        };
        assert!(run_chain(&pg, &f, &b).is_ok());
    }

    #[test]
    fn monitored_chain_counts_fallbacks() {
        // steep quadratic: x - eta grad f = -4x lands far past the outer wall
        let f = Objective::quadratic(2, 100.0).unwrap();
        let s = FeasibleDomain::centered_shell(2, 0.9, 4.0).unwrap();
        let mut cfg = ChainConfig::new(Method::Rgld, 0.05, 1.0, 50, 0, vec![-3.9, 0.0]);
        assert!(run_chain(&cfg, &f, &s).is_err());
        cfg.step_check = StepCheck::Monitor;
        cfg.record_trajectory = true;
        let rec = run_chain(&cfg, &f, &s).unwrap();
        assert!(rec.fallback_count > 0);
        assert_eq!(
            rec.fallback.iter().filter(|b| **b).count() as u64,
            rec.fallback_count
        );
        for k in 0..rec.f_value.len() {
            assert!(s.contains(rec.trajectory_point(k).unwrap()).unwrap());
        }
    }

    #[test]
    fn rademacher_increment_has_exact_scale() {
        let f = Objective::rastrigin(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let xi = rademacher_vector(&mut rng, 3);
            let (eta, beta) = (5e-4, 0.15);
            let prop = langevin_proposal(&x, &f, eta, beta, Some(&xi)).unwrap();
            let g = f.gradient(&x).unwrap();
            let inc: Vec<f64> = (0..3).map(|i| prop[i] - x[i] + eta * g[i]).collect();
            let want = (2.0 * eta / beta).sqrt() * 3f64.sqrt();
            assert!((norm(&inc) - want).abs() < 1e-12);
        }
    }
}
