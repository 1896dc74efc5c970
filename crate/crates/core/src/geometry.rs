//! Feasible regions and the projection / reflection operators.
//!
//! Both supported regions are radially symmetric about a center `c`: a closed
//! ball `{x : |x - c| <= R}` and a spherical shell
//! `{x : r_in <= |x - c| <= r_out}`. Every operator is therefore computed in
//! polar form around `c`, which keeps the results exactly testable.
//!
//! Membership is an exact inequality on squared radii. Points produced by
//! [`FeasibleDomain::project`], [`FeasibleDomain::reflect`] and
//! [`FeasibleDomain::sample_uniform`] are snapped so that they pass that
//! exact test despite rounding in the radial rescale.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Radial tolerance used to decide whether a point lies on the boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleDomain {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    SphericalShell {
        center: Vec<f64>,
        inner_radius: f64,
        outer_radius: f64,
    },
}

impl FeasibleDomain {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidDomain("dimension must be positive".into()));
        }
        check_finite_center(&center)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(FeasibleDomain::Ball { center, radius })
    }

    /// Ball of the given radius centered at the origin of `R^dim`.
    pub fn centered_ball(dim: usize, radius: f64) -> Result<Self> {
        Self::ball(vec![0.0; dim], radius)
    }

    pub fn shell(center: Vec<f64>, inner_radius: f64, outer_radius: f64) -> Result<Self> {
        if center.len() < 2 {
            // a one-dimensional shell is two disjoint intervals
            return Err(Error::InvalidDomain(format!(
                "spherical shell requires dimension >= 2, got {}",
                center.len()
            )));
        }
        check_finite_center(&center)?;
        if !(inner_radius > 0.0 && inner_radius < outer_radius && outer_radius.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "shell radii must satisfy 0 < r_in < r_out, got r_in={inner_radius}, r_out={outer_radius}"
            )));
        }
        Ok(FeasibleDomain::SphericalShell {
            center,
            inner_radius,
            outer_radius,
        })
    }

    /// Shell centered at the origin of `R^dim`.
    pub fn centered_shell(dim: usize, inner_radius: f64, outer_radius: f64) -> Result<Self> {
        Self::shell(vec![0.0; dim], inner_radius, outer_radius)
    }

    pub fn dim(&self) -> usize {
        self.center().len()
    }

    pub fn center(&self) -> &[f64] {
        match self {
            FeasibleDomain::Ball { center, .. } => center,
            FeasibleDomain::SphericalShell { center, .. } => center,
        }
    }

    /// Inner and outer radius of the radial band; a ball has inner radius 0.
    fn band(&self) -> (f64, f64) {
        match *self {
            FeasibleDomain::Ball { radius, .. } => (0.0, radius),
            FeasibleDomain::SphericalShell {
                inner_radius,
                outer_radius,
                ..
            } => (inner_radius, outer_radius),
        }
    }

    /// Radius `r` of a Euclidean ball contained in the domain.
    pub fn inner_ball_radius(&self) -> f64 {
        let (lo, hi) = self.band();
        match self {
            FeasibleDomain::Ball { .. } => hi,
            FeasibleDomain::SphericalShell { .. } => (hi - lo) / 2.0,
        }
    }

    /// Radius `R` of a sphere centered at the origin that contains the domain.
    pub fn enclosing_radius(&self) -> f64 {
        norm(self.center()) + self.band().1
    }

    /// Largest distance outside the domain at which reflection is accepted.
    pub fn reflection_margin(&self) -> f64 {
        let (lo, hi) = self.band();
        match self {
            FeasibleDomain::Ball { .. } => hi,
            FeasibleDomain::SphericalShell { .. } => lo.min((hi - lo) / 2.0),
        }
    }

    /// Largest gap beyond one wall whose radial mirror image still lies in
    /// the domain with a unique projection: the ball radius, the shell width
    /// past the outer sphere, and `min(r_in, width)` inside the cavity.
    /// Never smaller than [`Self::reflection_margin`].
    pub fn wall_margin(&self, outer: bool) -> f64 {
        let (lo, hi) = self.band();
        match (self, outer) {
            (FeasibleDomain::Ball { .. }, _) => hi,
            (FeasibleDomain::SphericalShell { .. }, true) => hi - lo,
            (FeasibleDomain::SphericalShell { .. }, false) => lo.min(hi - lo),
        }
    }

    /// Axis-aligned bounding box `(lower, upper)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let hi = self.band().1;
        let c = self.center();
        (
            c.iter().map(|ci| ci - hi).collect(),
            c.iter().map(|ci| ci + hi).collect(),
        )
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

    fn radius_sq_of(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.center())
            .map(|(xi, ci)| (xi - ci) * (xi - ci))
            .sum()
    }

    fn contains_unchecked(&self, x: &[f64]) -> bool {
        let (lo, hi) = self.band();
        let r2 = self.radius_sq_of(x);
        r2 <= hi * hi && r2 >= lo * lo
    }

    /// Closed-set membership.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.contains_unchecked(x))
    }

    /// Unit direction from the center towards `x`, and the distance to the center.
    /// At the center the first canonical axis is used.
    fn polar(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let rho = self.radius_sq_of(x).sqrt();
        if rho > 0.0 {
            let u = x
                .iter()
                .zip(self.center())
                .map(|(xi, ci)| (xi - ci) / rho)
                .collect();
            (u, rho)
        } else {
            let mut u = vec![0.0; self.dim()];
            u[0] = 1.0;
            (u, 0.0)
        }
    }

    /// `c + rho * u`, nudged radially until it passes the exact membership test.
    fn place(&self, u: &[f64], rho: f64) -> Vec<f64> {
        let (lo, hi) = self.band();
        let c = self.center();
        let mut target = rho.clamp(lo, hi);
        let mut nudge = f64::EPSILON * hi.max(1.0);
        for _ in 0..128 {
            let y: Vec<f64> = c.iter().zip(u).map(|(ci, ui)| ci + target * ui).collect();
            let r2 = self.radius_sq_of(&y);
            if r2 > hi * hi {
                target -= nudge;
            } else if r2 < lo * lo {
                target += nudge;
            } else {
                return y;
            }
            nudge *= 2.0;
        }
        unreachable!("radial snap failed to converge for rho={rho}")
    }

    /// Nearest point of the domain; identity on the domain.
    ///
    /// At the center of a shell the minimizer is not unique and the point
    /// `c + r_in * e_1` is returned.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        if self.contains_unchecked(x) {
            return Ok(x.to_vec());
        }
        let (lo, hi) = self.band();
        let (u, rho) = self.polar(x);
        let target = if rho > hi { hi } else { lo };
        Ok(self.place(&u, target))
    }

    /// Euclidean distance from `x` to the domain.
    pub fn distance_to_set(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        if self.contains_unchecked(x) {
            return Ok(0.0);
        }
        let (lo, hi) = self.band();
        let rho = self.radius_sq_of(x).sqrt();
        Ok(if rho > hi { rho - hi } else { lo - rho })
    }

    /// Mirror image `2 P(x) - x` of `x` through its projection.
    ///
    /// Returns the image and whether a reflection actually happened (`x` was
    /// outside). Points farther past a wall than [`Self::wall_margin`] are
    /// rejected.
    pub fn reflect(&self, x: &[f64]) -> Result<(Vec<f64>, bool)> {
        self.check_dim(x)?;
        if self.contains_unchecked(x) {
            return Ok((x.to_vec(), false));
        }
        let (lo, hi) = self.band();
        let (u, rho) = self.polar(x);
        let (wall, gap) = if rho > hi {
            (hi, rho - hi)
        } else {
            (lo, lo - rho)
        };
        let margin = self.wall_margin(rho > hi);
        if gap > margin {
            return Err(Error::ReflectionUndefined {
                distance: gap,
                margin,
            });
        }
        Ok((self.place(&u, 2.0 * wall - rho), true))
    }

    /// Outer unit normal at a boundary point. On the inner wall of a shell it
    /// points towards the cavity.
    pub fn outward_normal(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let (lo, hi) = self.band();
        let (u, rho) = self.polar(x);
        if (rho - hi).abs() <= BOUNDARY_TOLERANCE {
            Ok(u)
        } else if lo > 0.0 && rho > 0.0 && (rho - lo).abs() <= BOUNDARY_TOLERANCE {
            Ok(u.into_iter().map(|v| -v).collect())
        } else {
            let gap = (rho - hi).abs().min((rho - lo).abs());
            Err(Error::NotOnBoundary { gap })
        }
    }

    /// Draws a point uniformly distributed over the domain.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let d = self.dim();
        let (lo, hi) = self.band();
        let mut dir: Vec<f64> = loop {
            let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            if dot(&g, &g) > 0.0 {
                break g;
            }
        };
        let n = norm(&dir);
        dir.iter_mut().for_each(|v| *v /= n);
        let di = d as i32;
        let u: f64 = rng.random();
        let rho = (lo.powi(di) + u * (hi.powi(di) - lo.powi(di))).powf(1.0 / d as f64);
        self.place(&dir, rho)
    }
}

fn check_finite_center(center: &[f64]) -> Result<()> {
    if center.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidDomain("center must be finite".into()))
    }
}
