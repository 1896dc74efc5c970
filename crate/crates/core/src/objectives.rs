//! Test objectives with closed-form gradients.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::FeasibleDomain;
use crate::linalg::{dist, norm};

/// Mixture of isotropic unit-variance Gaussian wells,
/// `f(x) = -sum_i w_i exp(-|x - m_i|^2 / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    /// Located global minimizer, when one has been computed.
    minimizer: Option<Vec<f64>>,
}

impl GaussianMixture {
    pub fn new(weights: Vec<f64>, means: Vec<Vec<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != means.len() {
            return Err(Error::InvalidObjective(format!(
                "need one weight per mean, got {} weights and {} means",
                weights.len(),
                means.len()
            )));
        }
        let d = means[0].len();
        if d == 0 || means.iter().any(|m| m.len() != d) {
            return Err(Error::InvalidObjective(
                "means must share a positive dimension".into(),
            ));
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidObjective("weights must be positive".into()));
        }
        if means.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidObjective("means must be finite".into()));
        }
        Ok(GaussianMixture {
            weights,
            means,
            minimizer: None,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn minimizer(&self) -> Option<&[f64]> {
        self.minimizer.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        -self
            .weights
            .iter()
            .zip(&self.means)
            .map(|(w, m)| w * (-0.5 * sq_dist(x, m)).exp())
            .sum::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for (w, m) in self.weights.iter().zip(&self.means) {
            let e = w * (-0.5 * sq_dist(x, m)).exp();
            for ((gi, xi), mi) in g.iter_mut().zip(x).zip(m) {
                *gi += e * (xi - mi);
            }
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `scale * |x|^2 / 2`
    Quadratic {
        dim: usize,
        scale: f64,
    },
    GaussianMixture(GaussianMixture),
    Rosenbrock {
        dim: usize,
    },
    Rastrigin {
        dim: usize,
    },
}

/// Upper bounds for an objective over a domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzBounds {
    /// Lipschitz constant of `f`.
    pub lipschitz: f64,
    /// Lipschitz constant of the gradient (Hessian operator-norm bound).
    pub smoothness: f64,
    /// Bound on the gradient norm; equals `lipschitz`.
    pub gradient_bound: f64,
}

impl Objective {
    pub fn quadratic(dim: usize, scale: f64) -> Result<Self> {
        if dim == 0 || !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidObjective(format!(
                "quadratic needs dim >= 1 and scale > 0, got dim={dim}, scale={scale}"
            )));
        }
        Ok(Objective::Quadratic { dim, scale })
    }

    pub fn rosenbrock(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidObjective(format!(
                "rosenbrock needs dim >= 2, got {dim}"
            )));
        }
        Ok(Objective::Rosenbrock { dim })
    }

    pub fn rastrigin(dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidObjective("rastrigin needs dim >= 1".into()));
        }
        Ok(Objective::Rastrigin { dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            Objective::Quadratic { dim, .. }
            | Objective::Rosenbrock { dim }
            | Objective::Rastrigin { dim } => *dim,
            Objective::GaussianMixture(gm) => gm.dim(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Objective::Quadratic { .. } => "quadratic",
            Objective::GaussianMixture(_) => "gaussian-mixture",
            Objective::Rosenbrock { .. } => "rosenbrock",
            Objective::Rastrigin { .. } => "rastrigin",
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.value_unchecked(x))
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self.gradient_unchecked(x))
    }

    pub(crate) fn value_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Objective::Quadratic { scale, .. } => {
                0.5 * scale * x.iter().map(|v| v * v).sum::<f64>()
            }
            Objective::GaussianMixture(gm) => gm.value(x),
            Objective::Rosenbrock { .. } => x
                .windows(2)
                .map(|w| {
                    let a = w[1] - w[0] * w[0];
                    let b = 1.0 - w[0];
                    100.0 * a * a + b * b
                })
                .sum(),
            Objective::Rastrigin { dim } => {
                10.0 * *dim as f64
                    + x.iter()
                        .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
                        .sum::<f64>()
            }
        }
    }

    pub(crate) fn gradient_unchecked(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Objective::Quadratic { scale, .. } => x.iter().map(|v| scale * v).collect(),
            Objective::GaussianMixture(gm) => gm.gradient(x),
            Objective::Rosenbrock { .. } => {
                let mut g = vec![0.0; x.len()];
                for i in 0..x.len() - 1 {
                    let a = x[i + 1] - x[i] * x[i];
                    g[i] += -400.0 * x[i] * a - 2.0 * (1.0 - x[i]);
                    g[i + 1] += 200.0 * a;
                }
                g
            }
            Objective::Rastrigin { .. } => x
                .iter()
                .map(|v| 2.0 * v + 20.0 * PI * (2.0 * PI * v).sin())
                .collect(),
        }
    }

    /// Bounds on `sup |grad f|` and on the Hessian norm over `domain`.
    ///
    /// The bounds are valid but not tight; every variant maximizes a
    /// closed-form majorant over the ball `|x| <= R` enclosing the domain.
    /// Mixtures in one or two dimensions are instead bounded by a dense grid
    /// maximum of `|grad f|` plus the smoothness constant times the grid's
    /// covering radius, which is much tighter.
    pub fn lipschitz_bounds(&self, domain: &FeasibleDomain) -> Result<LipschitzBounds> {
        if domain.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: domain.dim(),
            });
        }
        let r = domain.enclosing_radius();
        let d = self.dim() as f64;
        let (lipschitz, smoothness) = match self {
            Objective::Quadratic { scale, .. } => (scale * r, *scale),
            Objective::Rastrigin { .. } => (2.0 * r + 20.0 * PI * d.sqrt(), 2.0 + 40.0 * PI * PI),
            Objective::Rosenbrock { .. } => {
                // per-coordinate gradient majorant, then |g| <= sqrt(d) max_i |g_i|
                let gi = 400.0 * r * (r + r * r) + 2.0 * (1.0 + r) + 200.0 * (r + r * r);
                // row-sum (Gershgorin) bound on the tridiagonal Hessian
                let row = 1200.0 * r * r + 400.0 * r + 202.0 + 800.0 * r;
                (d.sqrt() * gi, row)
            }
            Objective::GaussianMixture(gm) => {
                // each well has Hessian w e^{-t^2/2} (u u^T - I); its norm is at most w
                let smooth: f64 = gm.weights.iter().sum();
                // t e^{-t^2/2} peaks at t = 1
                let closed = smooth * (-0.5f64).exp();
                let lip = if gm.dim() <= 2 {
                    closed.min(grid_gradient_bound(self, domain, smooth))
                } else {
                    closed
                };
                (lip, smooth)
            }
        };
        Ok(LipschitzBounds {
            lipschitz,
            smoothness,
            gradient_bound: lipschitz,
        })
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `max |grad f|` over a grid covering the bounding box, plus the worst-case
/// growth between a point and its nearest grid node.
fn grid_gradient_bound(obj: &Objective, domain: &FeasibleDomain, smoothness: f64) -> f64 {
    const NODES: usize = 401;
    let (lo, hi) = domain.bounding_box();
    let d = lo.len();
    let h: Vec<f64> = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| (b - a) / (NODES - 1) as f64)
        .collect();
    let cover = 0.5 * norm(&h);
    let total = NODES.pow(d as u32);
    let mut x = vec![0.0; d];
    let mut best = 0.0f64;
    for flat in 0..total {
        let mut rem = flat;
        for k in 0..d {
            x[k] = lo[k] + (rem % NODES) as f64 * h[k];
            rem /= NODES;
        }
        best = best.max(norm(&obj.gradient_unchecked(&x)));
    }
    best + smoothness * cover
}

/// Weight on the well at `(0, -2)` in the benchmark mixture.
pub const MIXTURE_TARGET_WEIGHT: f64 = 3.0;
/// Other wells draw weights uniformly from `[lo, hi)`.
pub const MIXTURE_OTHER_WEIGHT_RANGE: (f64, f64) = (0.0, 0.5);
/// Location of the dominant well.
pub const MIXTURE_TARGET_MEAN: [f64; 2] = [0.0, -2.0];

/// The 25-well planar benchmark mixture with means on `{-2,...,2}^2`.
///
/// Weights of the other wells are drawn from a ChaCha8 generator seeded
/// with `seed`; the well at `(0, -2)` receives [`MIXTURE_TARGET_WEIGHT`],
/// which for most seeds puts the global minimizer next to it. The minimizer is then located
/// by gradient descent started at `(0, -2)` and stored on the objective.
pub fn make_benchmark_mixture(seed: u64) -> Objective {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = MIXTURE_OTHER_WEIGHT_RANGE;
    let mut means = Vec::with_capacity(25);
    let mut weights = Vec::with_capacity(25);
    for a in -2..=2 {
        for b in -2..=2 {
            let m = vec![a as f64, b as f64];
            let w = if m == MIXTURE_TARGET_MEAN {
                MIXTURE_TARGET_WEIGHT
            } else {
                // open at zero: keep weights strictly positive
                let u: f64 = rng.random();
                lo + (hi - lo) * u.max(f64::MIN_POSITIVE)
            };
            means.push(m);
            weights.push(w);
        }
    }
    let mut gm = GaussianMixture::new(weights, means).expect("benchmark mixture is valid");
    let rough = descend(
        &Objective::GaussianMixture(gm.clone()),
        &MIXTURE_TARGET_MEAN,
    );
    gm.minimizer = Some(newton_polish(&gm, rough));
    Objective::GaussianMixture(gm)
}

/// Newton iterations on a planar mixture, kept only while they reduce the
/// gradient norm.
fn newton_polish(gm: &GaussianMixture, mut x: Vec<f64>) -> Vec<f64> {
    for _ in 0..20 {
        let g = gm.gradient(&x);
        let gn = norm(&g);
        if gn == 0.0 {
            break;
        }
        // H = sum_i e_i (I - (x - m_i)(x - m_i)^T)
        let mut h = [0.0; 4];
        for (w, m) in gm.weights.iter().zip(&gm.means) {
            let e = w * (-0.5 * sq_dist(&x, m)).exp();
            let (u, v) = (x[0] - m[0], x[1] - m[1]);
            h[0] += e * (1.0 - u * u);
            h[1] -= e * u * v;
            h[3] += e * (1.0 - v * v);
        }
        h[2] = h[1];
        let det = h[0] * h[3] - h[1] * h[2];
        if !(det > 0.0 && h[0] > 0.0) {
            break;
        }
        let y = vec![
            x[0] - (h[3] * g[0] - h[1] * g[1]) / det,
            x[1] - (h[0] * g[1] - h[2] * g[0]) / det,
        ];
        if norm(&gm.gradient(&y)) >= gn {
            break;
        }
        x = y;
    }
    x
}

/// Plain gradient descent with backtracking, to a tight gradient tolerance.
fn descend(obj: &Objective, start: &[f64]) -> Vec<f64> {
    let mut x = start.to_vec();
    let mut fx = obj.value_unchecked(&x);
    let mut step = 0.5;
    for _ in 0..10_000 {
        let g = obj.gradient_unchecked(&x);
        let gn = norm(&g);
        if gn < 1e-13 {
            break;
        }
        loop {
            let y: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
            let fy = obj.value_unchecked(&y);
            if fy <= fx - 0.5 * step * gn * gn {
                x = y;
                fx = fy;
                step = (step * 2.0).min(1.0);
                break;
            }
            step *= 0.5;
            if step < 1e-16 {
                return x;
            }
        }
    }
    x
}

/// Minimum of `f` over `domain`, when it is known in closed form or stored.
///
/// * Quadratic: the projection of the origin.
/// * Rosenbrock: 0 when `(1, ..., 1)` is feasible.
/// * Rastrigin: 0 when the origin is feasible; on an origin-centered shell
///   whose inner radius is below the first off-origin local minimizer `t*`
///   of the one-dimensional term, the value `g(t*)` attained at `t* e_1`.
/// * Mixture: the stored minimizer, if feasible.
pub fn reference_minimum(obj: &Objective, domain: &FeasibleDomain) -> Option<f64> {
    if obj.dim() != domain.dim() {
        return None;
    }
    let d = obj.dim();
    match obj {
        Objective::Quadratic { .. } => {
            let p = domain.project(&vec![0.0; d]).ok()?;
            Some(obj.value_unchecked(&p))
        }
        Objective::Rosenbrock { .. } => {
            let ones = vec![1.0; d];
            domain.contains(&ones).ok()?.then_some(0.0)
        }
        Objective::Rastrigin { .. } => {
            let origin = vec![0.0; d];
            if domain.contains(&origin).ok()? {
                return Some(0.0);
            }
            match domain {
                FeasibleDomain::SphericalShell {
                    center,
                    inner_radius,
                    outer_radius,
                } if norm(center) == 0.0 => {
                    let t = rastrigin_first_local_min();
                    let mut x = origin;
                    x[0] = t;
                    (*inner_radius <= t && t <= *outer_radius).then(|| obj.value_unchecked(&x))
                }
                _ => None,
            }
        }
        Objective::GaussianMixture(gm) => {
            let m = gm.minimizer()?;
            domain.contains(m).ok()?.then(|| obj.value_unchecked(m))
        }
    }
}

/// Minimizer of `t^2 - 10 cos(2 pi t)` near `t = 1`, by Newton's method.
pub fn rastrigin_first_local_min() -> f64 {
    let mut t = 1.0f64;
    for _ in 0..50 {
        let g = 2.0 * t + 20.0 * PI * (2.0 * PI * t).sin();
        let h = 2.0 + 40.0 * PI * PI * (2.0 * PI * t).cos();
        let next = t - g / h;
        if (next - t).abs() < 1e-16 {
            break;
        }
        t = next;
    }
    t
}

/// Distance from the stored mixture minimizer to the dominant well.
pub fn mixture_minimizer_offset(obj: &Objective) -> Option<f64> {
    match obj {
        Objective::GaussianMixture(gm) => gm.minimizer().map(|m| dist(m, &MIXTURE_TARGET_MEAN)),
        _ => None,
    }
}
