//! End-to-end invariant and behaviour checks.
//!
//! Each check returns a [`CheckOutcome`]; a check fails when its assertion
//! fails or when it exceeds its runtime budget. Long simulations are shared
//! between checks through [`Checker`].

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    median, preset_by_name, preset_gibbs1d, preset_gm2d, preset_gm2d_pgld_vs_rgld,
    preset_rosenbrock, simulate, write_outputs, ExperimentSpec, Simulation,
};
use crate::dynamics::Method;
use crate::error::{Error, Result};
use crate::geometry::FeasibleDomain;
use crate::linalg::{dot, norm, sub};
use crate::measure::{build_oracle, gibbs_gap_bound, gibbs_mean_f, CellPartition};
use crate::objectives::{make_benchmark_mixture, Objective, MIXTURE_TARGET_MEAN};

pub const GEOMETRY_POINTS: usize = 10_000;
pub const GRADIENT_POINTS: usize = 100;
pub const IDEMPOTENCE_TOL: f64 = 1e-12;
pub const ISOMETRY_TOL: f64 = 1e-10;
pub const NORMAL_TOL: f64 = 1e-10;
pub const GRADIENT_REL_TOL: f64 = 1e-5;
pub const GM_GRID_PER_AXIS: usize = 400;
pub const GM_MINIMIZER_TOL: f64 = 0.2;
pub const TV_THRESHOLD: f64 = 0.05;
/// PG counts as trapped when its cumulative minimum moves by at most this
/// much after step [`PG_TRAP_AFTER`].
pub const PG_TRAP_TOL: f64 = 1e-6;
pub const PG_TRAP_AFTER: usize = 500;
pub const PG_TRAP_MIN_SEEDS: usize = 15;
pub const COUPLING_REL_TOL: f64 = 0.1;
/// Seeds and steps used for the determinism reruns.
pub const DETERMINISM_SEEDS: [u64; 2] = [0, 1];
pub const DETERMINISM_STEPS: usize = 5_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<24} {:>7.2}s/{:>4}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

fn outcome(
    name: &'static str,
    budget_secs: u64,
    start: Instant,
    result: Result<(bool, String)>,
) -> CheckOutcome {
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_secs);
    let (ok, mut detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    if elapsed > budget {
        detail.push_str(" [over runtime budget]");
    }
    CheckOutcome {
        name,
        passed: ok && elapsed <= budget,
        detail,
        elapsed,
        budget,
    }
}

/// Runs checks and caches the simulations they share.
pub struct Checker {
    workers: usize,
    gibbs1d: Option<(Simulation, Duration)>,
    gm2d: Option<(Simulation, Duration)>,
    coupling: Option<(Simulation, Duration)>,
    rosenbrock: Option<(Simulation, Duration)>,
}

impl Checker {
    pub fn new(workers: usize) -> Self {
        Checker {
            workers: workers.max(1),
            gibbs1d: None,
            gm2d: None,
            coupling: None,
            rosenbrock: None,
        }
    }

    fn with_workers(&self, mut spec: ExperimentSpec) -> ExperimentSpec {
        spec.workers = self.workers;
        spec
    }

    fn cached(
        slot: &mut Option<(Simulation, Duration)>,
        spec: ExperimentSpec,
    ) -> Result<(&Simulation, Duration)> {
        if slot.is_none() {
            let t = Instant::now();
            let sim = simulate(&spec)?;
            *slot = Some((sim, t.elapsed()));
        }
        let (sim, dt) = slot.as_ref().expect("filled above");
        Ok((sim, *dt))
    }

    /// Projection, reflection and normal invariants on random points.
    pub fn geometry(&self) -> CheckOutcome {
        let t = Instant::now();
        outcome("geometry-suite", 5, t, geometry_suite(GEOMETRY_POINTS))
    }

    pub fn gradients(&self) -> CheckOutcome {
        let t = Instant::now();
        outcome("gradient-suite", 5, t, gradient_suite(GRADIENT_POINTS))
    }

    pub fn known_minima(&self) -> CheckOutcome {
        let t = Instant::now();
        outcome("known-minima", 30, t, known_minima())
    }

    /// TV distance of the gibbs1d chain to its quadrature oracle.
    pub fn stationarity(&mut self) -> CheckOutcome {
        let t = Instant::now();
        let spec = self.with_workers(preset_gibbs1d());
        let res = Self::cached(&mut self.gibbs1d, spec).map(|(sim, _)| {
            let tv: Vec<f64> = sim
                .tv_curve
                .as_ref()
                .map(|c| c.iter().map(|(_, v)| *v).collect())
                .unwrap_or_default();
            let last = tv.last().copied().unwrap_or(f64::INFINITY);
            let inversions = tv.windows(2).filter(|w| w[1] > w[0]).count();
            let pass = last <= TV_THRESHOLD && inversions <= 1;
            (
                pass,
                format!(
                    "tv over prefixes {:?}; final {last:.4} <= {TV_THRESHOLD}; {inversions} inversion(s)",
                    tv.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
                ),
            )
        });
        outcome("stationarity-gibbs1d", 60, t, res)
    }

    /// Gibbs expected suboptimality against the closed-form bound.
    pub fn gibbs_gap(&self) -> CheckOutcome {
        let t = Instant::now();
        let res = (|| {
            let mut lines = Vec::new();
            let mut pass = true;
            for spec in [preset_gibbs1d(), preset_gm2d()] {
                let p = spec.prepare()?;
                let min_f = p.min_f.ok_or_else(|| Error::InvalidArgument {
                    name: "preset",
                    reason: format!("{} has no reference minimum", spec.name),
                })?;
                let oracle = build_oracle(&p.objective, &p.domain, spec.beta, 256)?;
                let gap = gibbs_mean_f(&oracle) - min_f;
                let l = p.objective.lipschitz_bounds(&p.domain)?.lipschitz;
                let bound = gibbs_gap_bound(
                    p.domain.dim(),
                    spec.beta,
                    p.domain.inner_ball_radius(),
                    p.domain.enclosing_radius(),
                    l,
                )?;
                if bound <= 0.0 {
                    lines.push(format!(
                        "{}: skipped, bound {bound:.4} is non-positive",
                        spec.name
                    ));
                    continue;
                }
                pass &= gap <= bound;
                lines.push(format!("{}: gap {gap:.4} <= bound {bound:.4}", spec.name));
            }
            Ok((pass, lines.join("; ")))
        })();
        outcome("gibbs-gap-bound", 30, t, res)
    }

    /// RGLD against PG on the planar mixture.
    pub fn gm_comparison(&mut self) -> CheckOutcome {
        let t = Instant::now();
        let spec = self.with_workers(preset_gm2d());
        let res = Self::cached(&mut self.gm2d, spec).map(|(sim, _)| {
            let rgld = median(&sim.final_errors(Method::Rgld));
            let pg = median(&sim.final_errors(Method::Pg));
            let trapped = sim
                .records_for(Method::Pg)
                .iter()
                .filter(|r| {
                    let c = &r.cumulative_min;
                    c.len() > PG_TRAP_AFTER
                        && c[PG_TRAP_AFTER..]
                            .iter()
                            .all(|v| (v - c[PG_TRAP_AFTER - 1]).abs() <= PG_TRAP_TOL)
                })
                .count();
            let n = sim.records_for(Method::Pg).len();
            (
                rgld < pg && trapped >= PG_TRAP_MIN_SEEDS,
                format!(
                    "median error rgld {rgld:.4e} < pg {pg:.4e}; pg flat after step {PG_TRAP_AFTER} in {trapped}/{n} seeds (need {PG_TRAP_MIN_SEEDS})"
                ),
            )
        });
        outcome("gm-comparison", 120, t, res)
    }

    pub fn rosenbrock_comparison(&mut self) -> CheckOutcome {
        let t = Instant::now();
        let res = preset_rosenbrock(4).and_then(|spec| {
            let spec = self.with_workers(spec);
            Self::cached(&mut self.rosenbrock, spec).map(|(sim, _)| {
                let rgld = median(&sim.final_errors(Method::Rgld));
                let pg = median(&sim.final_errors(Method::Pg));
                (
                    rgld < pg,
                    format!("d=4 median error rgld {rgld:.4e} < pg {pg:.4e}"),
                )
            })
        });
        outcome("rosenbrock-d4", 180, t, res)
    }

    /// RGLD and PGLD share noise, so they agree until the first boundary event.
    pub fn coupling(&mut self) -> CheckOutcome {
        let t = Instant::now();
        let spec = self.with_workers(preset_gm2d_pgld_vs_rgld());
        let res = Self::cached(&mut self.coupling, spec).map(|(sim, _)| {
            let r = sim.records_for(Method::Rgld);
            let p = sim.records_for(Method::Pgld);
            let mut coupled = 0;
            for (a, b) in r.iter().zip(&p) {
                let first_a = a.boundary.iter().position(|&x| x);
                let first_b = b.boundary.iter().position(|&x| x);
                let upto = first_a.unwrap_or(a.f_value.len());
                let same = first_a == first_b
                    && a.f_value[..upto]
                        .iter()
                        .zip(&b.f_value[..upto])
                        .all(|(x, y)| x.to_bits() == y.to_bits());
                coupled += same as usize;
            }
            let mr = median(&sim.final_errors(Method::Rgld));
            let mp = median(&sim.final_errors(Method::Pgld));
            let rel = (mr - mp).abs() / mr.max(mp).max(f64::MIN_POSITIVE);
            (
                coupled == r.len() && rel < COUPLING_REL_TOL,
                format!(
                    "coupled until first boundary event in {coupled}/{} seeds; median error rgld {mr:.4e} pgld {mp:.4e} (relative difference {rel:.3}, need < {COUPLING_REL_TOL})",
                    r.len()
                ),
            )
        });
        outcome("rgld-pgld-coupling", 120, t, res)
    }

    /// Every preset, run twice, writes byte-identical files.
    pub fn determinism(&self, scratch: &std::path::Path) -> CheckOutcome {
        let t = Instant::now();
        let res = determinism(scratch, self.workers);
        outcome("determinism", 60, t, res)
    }

    /// No projection fallback in any preset run used above.
    pub fn step_size_safety(&mut self) -> CheckOutcome {
        let t = Instant::now();
        let mut parts = Vec::new();
        let mut total = 0;
        for (name, slot) in [
            ("gibbs1d", &self.gibbs1d),
            ("gm2d", &self.gm2d),
            ("gm2d-pgld-vs-rgld", &self.coupling),
            ("rosenbrock-d4", &self.rosenbrock),
        ] {
            match slot {
                Some((sim, _)) => {
                    let n = sim.total_fallbacks();
                    total += n;
                    parts.push(format!("{name}: {n}"));
                }
                None => parts.push(format!("{name}: not run")),
            }
        }
        let ran = parts.iter().all(|p| !p.ends_with("not run"));
        outcome(
            "step-size-safety",
            1,
            t,
            Ok((ran && total == 0, format!("fallbacks {}", parts.join(", ")))),
        )
    }

    /// Runs every check in order.
    pub fn run_all(&mut self, scratch: &std::path::Path) -> Vec<CheckOutcome> {
        vec![
            self.geometry(),
            self.gradients(),
            self.known_minima(),
            self.stationarity(),
            self.gibbs_gap(),
            self.gm_comparison(),
            self.rosenbrock_comparison(),
            self.coupling(),
            self.determinism(scratch),
            self.step_size_safety(),
        ]
    }
}

fn test_domains() -> Result<Vec<FeasibleDomain>> {
    Ok(vec![
        FeasibleDomain::ball(vec![0.3, -0.2], 1.5)?,
        FeasibleDomain::centered_ball(10, 2.0)?,
        FeasibleDomain::centered_shell(2, 0.9, 4.0)?,
        FeasibleDomain::shell(vec![1.0, 0.5, -0.5, 0.0, 2.0], 1.0, 2.0)?,
        FeasibleDomain::centered_shell(20, 0.5 * 20f64.sqrt(), 2.0 * 20f64.sqrt())?,
    ])
}

/// Random point whose distance from the center is uniform over the band
/// widened by the reflection margin, so reflection is always defined.
fn point_near<R: Rng>(domain: &FeasibleDomain, rng: &mut R) -> Vec<f64> {
    let d = domain.dim();
    let (lo, hi) = match domain {
        FeasibleDomain::Ball { radius, .. } => (0.0, *radius),
        FeasibleDomain::SphericalShell {
            inner_radius,
            outer_radius,
            ..
        } => (*inner_radius, *outer_radius),
    };
    let m = domain.reflection_margin();
    let rho = rng.random_range((lo - m).max(0.0)..=hi + m);
    let mut u: Vec<f64> = (0..d)
        .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect();
    let n = norm(&u);
    for ui in &mut u {
        *ui *= rho / n;
    }
    u.iter().zip(domain.center()).map(|(a, c)| a + c).collect()
}

/// Geometry invariants on `n` random points per domain.
pub fn geometry_suite(n: usize) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e0);
    let mut worst_idem = 0.0f64;
    let mut worst_iso = 0.0f64;
    let mut worst_normal = 0.0f64;
    let mut infeasible = 0usize;
    let domains = test_domains()?;
    for k in &domains {
        for _ in 0..n {
            let x = point_near(k, &mut rng);
            let p = k.project(&x)?;
            let pp = k.project(&p)?;
            worst_idem = worst_idem.max(norm(&sub(&pp, &p)));
            infeasible += !k.contains(&p)? as usize;

            let (r, _) = k.reflect(&x)?;
            infeasible += !k.contains(&r)? as usize;
            let lhs = norm(&sub(&r, &p));
            let rhs = norm(&sub(&x, &p));
            worst_iso = worst_iso.max((lhs - rhs).abs());

            if !k.contains(&x)? {
                let v = sub(&x, &p);
                let nv = k.outward_normal(&p)?;
                let cos = dot(&v, &nv) / norm(&v);
                worst_normal = worst_normal.max(1.0 - cos);
            }
        }
    }
    let pass = worst_idem <= IDEMPOTENCE_TOL
        && worst_iso <= ISOMETRY_TOL
        && worst_normal <= NORMAL_TOL
        && infeasible == 0;
    Ok((
        pass,
        format!(
            "{} domains x {n} points: idempotence {worst_idem:.1e}, isometry {worst_iso:.1e}, normal {worst_normal:.1e}, infeasible {infeasible}",
            domains.len()
        ),
    ))
}

/// Central finite difference of `f` at `x`.
pub fn finite_difference(obj: &Objective, x: &[f64]) -> Result<Vec<f64>> {
    let mut g = Vec::with_capacity(x.len());
    let mut y = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-6 * x[i].abs().max(1.0);
        y[i] = x[i] + h;
        let fp = obj.value(&y)?;
        y[i] = x[i] - h;
        let fm = obj.value(&y)?;
        y[i] = x[i];
        g.push((fp - fm) / (2.0 * h));
    }
    Ok(g)
}

/// Analytic against central-difference gradients at `n` random points per
/// objective.
pub fn gradient_suite(n: usize) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6ad);
    let cases = vec![
        (
            Objective::quadratic(3, 2.5)?,
            FeasibleDomain::centered_ball(3, 3.0)?,
        ),
        (
            make_benchmark_mixture(0),
            FeasibleDomain::centered_shell(2, 0.9, 4.0)?,
        ),
        (
            Objective::rosenbrock(4)?,
            FeasibleDomain::centered_shell(4, 1.0, 4.0)?,
        ),
        (
            Objective::rastrigin(5)?,
            FeasibleDomain::centered_shell(5, 0.9, 5.12)?,
        ),
    ];
    let mut worst = 0.0f64;
    for (obj, k) in &cases {
        for _ in 0..n {
            let x = k.sample_uniform(&mut rng);
            let g = obj.gradient(&x)?;
            let fd = finite_difference(obj, &x)?;
            let scale = norm(&g).max(1.0);
            worst = worst.max(norm(&sub(&g, &fd)) / scale);
        }
    }
    Ok((
        worst <= GRADIENT_REL_TOL,
        format!("{} objectives x {n} points: worst relative error {worst:.2e} <= {GRADIENT_REL_TOL:.0e}", cases.len()),
    ))
}

/// Grid minimizer of `obj` over `domain` on an `n x n` grid of cell midpoints.
pub fn grid_minimizer(obj: &Objective, domain: &FeasibleDomain, n: usize) -> Result<Vec<f64>> {
    let (lo, hi) = domain.bounding_box();
    let part = CellPartition::new(lo, hi, n)?;
    let mut best = (f64::INFINITY, Vec::new());
    for i in 0..part.n_cells() {
        let m = part.midpoint(i);
        if domain.contains(&m)? {
            let v = obj.value(&m)?;
            if v < best.0 {
                best = (v, m);
            }
        }
    }
    Ok(best.1)
}

pub fn known_minima() -> Result<(bool, String)> {
    let r = Objective::rosenbrock(4)?;
    let at_ones = r.value(&[1.0; 4])?;
    let at_flip = r.value(&[-1.0, 1.0, 1.0, 1.0])?;
    let ras = Objective::rastrigin(4)?.value(&[0.0; 4])?;
    let preset = preset_gm2d().prepare()?;
    let m = grid_minimizer(&preset.objective, &preset.domain, GM_GRID_PER_AXIS)?;
    let off = norm(&sub(&m, &MIXTURE_TARGET_MEAN));
    let pass = at_ones == 0.0 && at_flip == 4.0 && ras == 0.0 && off <= GM_MINIMIZER_TOL;
    Ok((
        pass,
        format!(
            "rosenbrock {at_ones}, {at_flip}; rastrigin {ras}; mixture grid minimizer ({:.3}, {:.3}) at distance {off:.3} <= {GM_MINIMIZER_TOL}",
            m[0], m[1]
        ),
    ))
}

fn determinism(scratch: &std::path::Path, workers: usize) -> Result<(bool, String)> {
    let names = [
        "gm2d",
        "gm2d-pgld-vs-rgld",
        "gm2d-beta-sweep",
        "gm2d-eta-sweep",
        "gibbs1d",
        "rosenbrock:4",
        "rosenbrock:10",
        "rosenbrock:20",
        "rastrigin:2",
        "rastrigin:3",
        "rastrigin:5",
        "rastrigin:10",
        "rastrigin:20",
        "rastrigin:30",
    ];
    let mut files = 0;
    let mut mismatched = Vec::new();
    for name in names {
        for mut spec in preset_by_name(name)? {
            spec.seeds = DETERMINISM_SEEDS.to_vec();
            spec.steps = DETERMINISM_STEPS;
            spec.workers = workers;
            if let Some(st) = &mut spec.stationarity {
                st.prefixes = vec![DETERMINISM_STEPS / 10, DETERMINISM_STEPS];
            }
            let mut outputs = Vec::new();
            for run in ["a", "b"] {
                let dir = scratch.join(run).join(&spec.name);
                let sim = simulate(&spec)?;
                let paths = write_outputs(&sim, &dir)?;
                let contents = paths
                    .iter()
                    .map(|p| Ok((p.file_name().map(|s| s.to_owned()), std::fs::read(p)?)))
                    .collect::<Result<Vec<_>>>()?;
                outputs.push(contents);
            }
            files += outputs[0].len();
            if outputs[0] != outputs[1] {
                mismatched.push(spec.name.clone());
            }
        }
    }
    Ok((
        mismatched.is_empty(),
        format!(
            "{files} files compared across all presets ({} seeds, {DETERMINISM_STEPS} steps); mismatched: {mismatched:?}",
            DETERMINISM_SEEDS.len()
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_suite_small() {
        let (ok, detail) = geometry_suite(200).unwrap();
        assert!(ok, "{detail}");
    }

    #[test]
    fn gradient_suite_small() {
        let (ok, detail) = gradient_suite(10).unwrap();
        assert!(ok, "{detail}");
    }

    #[test]
    fn sampled_points_stay_within_margin() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in test_domains().unwrap() {
            for _ in 0..500 {
                let x = point_near(&k, &mut rng);
                assert!(k.distance_to_set(&x).unwrap() <= k.reflection_margin() + 1e-12);
            }
        }
    }

    #[test]
    fn outcome_respects_budget() {
        let t = Instant::now() - Duration::from_secs(3);
        let o = outcome("x", 1, t, Ok((true, String::new())));
        assert!(!o.passed);
        assert!(o.to_string().starts_with("FAIL"));
    }
}
