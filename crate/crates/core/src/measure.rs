//! Quadrature representation of the Gibbs density `exp(-beta f)` restricted
//! to a low-dimensional domain, plus empirical comparisons against it.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::FeasibleDomain;
use crate::harness::csv::fmt_float;
use crate::objectives::Objective;

/// Smallest accepted number of cells per axis.
pub const MIN_CELLS_PER_AXIS: usize = 32;

/// Tensor grid of equal cells over an axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct CellPartition {
    lower: Vec<f64>,
    upper: Vec<f64>,
    n_per_axis: usize,
}

impl CellPartition {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, n_per_axis: usize) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidGrid(
                "box corners must share a positive dimension".into(),
            ));
        }
        if n_per_axis == 0 {
            return Err(Error::InvalidGrid("need at least one cell per axis".into()));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(a, b)| a >= b || !a.is_finite() || !b.is_finite())
        {
            return Err(Error::InvalidGrid(
                "box must have positive finite extent".into(),
            ));
        }
        Ok(CellPartition {
            lower,
            upper,
            n_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn n_per_axis(&self) -> usize {
        self.n_per_axis
    }

    pub fn n_cells(&self) -> usize {
        self.n_per_axis.pow(self.dim() as u32)
    }

    fn width(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.n_per_axis as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.width(k)).product()
    }

    /// Midpoint of cell `index`; the first axis varies fastest.
    pub fn midpoint(&self, index: usize) -> Vec<f64> {
        let mut rem = index;
        (0..self.dim())
            .map(|k| {
                let i = rem % self.n_per_axis;
                rem /= self.n_per_axis;
                self.lower[k] + (i as f64 + 0.5) * self.width(k)
            })
            .collect()
    }

    /// Index of the cell containing `x`, or `None` outside the box. The upper
    /// face of the box belongs to the last cell.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim() {
            return None;
        }
        let mut index = 0;
        let mut stride = 1;
        for (k, &v) in x.iter().enumerate() {
            if !(v >= self.lower[k] && v <= self.upper[k]) {
                return None;
            }
            let i = (((v - self.lower[k]) / self.width(k)) as usize).min(self.n_per_axis - 1);
            index += i * stride;
            stride *= self.n_per_axis;
        }
        Some(index)
    }
}

/// Midpoint-rule discretization of the Gibbs measure on a domain.
#[derive(Debug, Clone)]
pub struct GibbsOracle {
    partition: CellPartition,
    beta: f64,
    in_domain: Vec<bool>,
    /// `f` at each cell midpoint; unused (0) outside the domain.
    f_mid: Vec<f64>,
    probabilities: Vec<f64>,
    log_z: f64,
}

/// Builds the quadrature oracle with `n_per_axis` cells per axis over the
/// domain's bounding box. Cells whose midpoint lies outside the domain get
/// zero weight.
pub fn build_oracle(
    obj: &Objective,
    domain: &FeasibleDomain,
    beta: f64,
    n_per_axis: usize,
) -> Result<GibbsOracle> {
    let d = domain.dim();
    if obj.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: obj.dim(),
        });
    }
    if d > 2 {
        return Err(Error::InvalidGrid(format!(
            "quadrature supports dimension 1 or 2, got {d}"
        )));
    }
    if n_per_axis < MIN_CELLS_PER_AXIS {
        return Err(Error::InvalidGrid(format!(
            "need at least {MIN_CELLS_PER_AXIS} cells per axis, got {n_per_axis}"
        )));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument {
            name: "beta",
            reason: format!("must be finite and non-negative, got {beta}"),
        });
    }
    let (lo, hi) = domain.bounding_box();
    let partition = CellPartition::new(lo, hi, n_per_axis)?;

    let evaluated: Vec<Option<f64>> = (0..partition.n_cells())
        .into_par_iter()
        .map(|i| {
            let m = partition.midpoint(i);
            domain
                .contains(&m)
                .unwrap_or(false)
                .then(|| obj.value_unchecked(&m))
        })
        .collect();

    let f_min = evaluated
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !f_min.is_finite() {
        return Err(Error::InvalidGrid(
            "no cell midpoint lies inside the domain".into(),
        ));
    }
    // shift by the minimum so the largest weight is exactly 1
    let weights: Vec<f64> = evaluated
        .iter()
        .map(|v| v.map_or(0.0, |f| (-beta * (f - f_min)).exp()))
        .collect();
    let total: f64 = weights.iter().sum();
    let log_z = -beta * f_min + (total * partition.cell_volume()).ln();
    if !log_z.is_finite() {
        return Err(Error::InvalidGrid(
            "normalizing constant is not finite".into(),
        ));
    }
    Ok(GibbsOracle {
        beta,
        in_domain: evaluated.iter().map(Option::is_some).collect(),
        f_mid: evaluated.iter().map(|v| v.unwrap_or(0.0)).collect(),
        probabilities: weights.iter().map(|w| w / total).collect(),
        partition,
        log_z,
    })
}

impl GibbsOracle {
    pub fn partition(&self) -> &CellPartition {
        &self.partition
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn in_domain(&self) -> &[bool] {
        &self.in_domain
    }

    /// `Z = int_K exp(-beta f)`.
    pub fn normalizing_constant(&self) -> f64 {
        self.log_z.exp()
    }

    pub fn log_normalizing_constant(&self) -> f64 {
        self.log_z
    }

    /// Quadrature estimate of `E_pi f`.
    pub fn mean_f(&self) -> f64 {
        self.probabilities
            .iter()
            .zip(&self.f_mid)
            .map(|(p, f)| p * f)
            .sum()
    }

    /// Empty histogram over this oracle's cells.
    pub fn histogram(&self) -> Histogram {
        Histogram {
            partition: self.partition.clone(),
            in_domain: self.in_domain.clone(),
            counts: vec![0; self.partition.n_cells()],
            excluded: 0,
        }
    }

    /// Writes `cell,x1[,x2],probability,count` rows for every in-domain cell.
    pub fn write_csv<W: Write>(&self, hist: Option<&Histogram>, out: W) -> Result<()> {
        if let Some(h) = hist {
            if !h.matches(self) {
                return Err(Error::PartitionMismatch);
            }
        }
        let mut w = csv::Writer::from_writer(out);
        let d = self.partition.dim();
        let mut header = vec!["cell".to_string()];
        header.extend((1..=d).map(|k| format!("x{k}")));
        header.push("probability".into());
        header.push("count".into());
        w.write_record(&header).map_err(csv_err)?;
        for i in (0..self.partition.n_cells()).filter(|i| self.in_domain[*i]) {
            let mut row = vec![i.to_string()];
            row.extend(self.partition.midpoint(i).into_iter().map(fmt_float));
            row.push(fmt_float(self.probabilities[i]));
            row.push(hist.map_or(0, |h| h.counts[i]).to_string());
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// `E_pi f` under the oracle.
pub fn gibbs_mean_f(oracle: &GibbsOracle) -> f64 {
    oracle.mean_f()
}

/// Sample counts over an oracle's cells.
///
/// Samples that fall in a cell excluded from the oracle (its midpoint is
/// outside the domain) or outside the bounding box are tallied in
/// [`Histogram::excluded`]; per-cell counts of excluded cells stay zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    partition: CellPartition,
    in_domain: Vec<bool>,
    counts: Vec<u64>,
    excluded: u64,
}

impl Histogram {
    pub fn add(&mut self, x: &[f64]) {
        match self.partition.locate(x) {
            Some(i) if self.in_domain[i] => self.counts[i] += 1,
            _ => self.excluded += 1,
        }
    }

    pub fn extend<'a, I: IntoIterator<Item = &'a [f64]>>(&mut self, samples: I) {
        for x in samples {
            self.add(x);
        }
    }

    /// Builds a histogram from explicit per-cell counts. Counts on cells
    /// outside the domain are rejected.
    pub fn from_counts(oracle: &GibbsOracle, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != oracle.partition.n_cells() {
            return Err(Error::PartitionMismatch);
        }
        if counts
            .iter()
            .zip(&oracle.in_domain)
            .any(|(c, inside)| *c > 0 && !inside)
        {
            return Err(Error::InvalidArgument {
                name: "counts",
                reason: "cells outside the domain must have zero count".into(),
            });
        }
        Ok(Histogram {
            partition: oracle.partition.clone(),
            in_domain: oracle.in_domain.clone(),
            counts,
            excluded: 0,
        })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn excluded(&self) -> u64 {
        self.excluded
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.excluded
    }

    fn matches(&self, oracle: &GibbsOracle) -> bool {
        self.partition == oracle.partition && self.in_domain == oracle.in_domain
    }
}

/// Total variation distance `1/2 sum |counts/total - p|` between a histogram
/// and the oracle. Excluded samples count as mass where the oracle has none.
pub fn tv_distance(hist: &Histogram, oracle: &GibbsOracle) -> Result<f64> {
    if !hist.matches(oracle) {
        return Err(Error::PartitionMismatch);
    }
    let total = hist.total();
    if total == 0 {
        return Err(Error::InvalidArgument {
            name: "hist",
            reason: "histogram is empty".into(),
        });
    }
    let t = total as f64;
    let inside: f64 = hist
        .counts
        .iter()
        .zip(&oracle.probabilities)
        .map(|(c, p)| (*c as f64 / t - p).abs())
        .sum();
    Ok(0.5 * (inside + hist.excluded as f64 / t))
}

/// Total variation distance between two probability vectors on one partition.
pub fn tv_between(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::PartitionMismatch);
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Upper bound on `E_pi f - min_K f` for an `L`-Lipschitz objective on a
/// domain that contains a ball of radius `r` and sits inside a sphere of
/// radius `R` about the origin:
///
/// `(d / beta) log(2 R max{2 / r, L beta (r + sqrt(r^2 + R^2)) / (r log 2)})`.
pub fn gibbs_gap_bound(d: usize, beta: f64, r: f64, big_r: f64, lipschitz: f64) -> Result<f64> {
    let positive = |name: &'static str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument {
                name,
                reason: format!("must be positive, got {v}"),
            })
        }
    };
    if d == 0 {
        return Err(Error::InvalidArgument {
            name: "d",
            reason: "must be positive".into(),
        });
    }
    positive("beta", beta)?;
    positive("r", r)?;
    positive("R", big_r)?;
    positive("L", lipschitz)?;
    let first = 2.0 / r;
    let second =
        lipschitz * beta * (r + (r * r + big_r * big_r).sqrt()) / (r * std::f64::consts::LN_2);
    Ok(d as f64 / beta * (2.0 * big_r * first.max(second)).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_interval() -> FeasibleDomain {
        FeasibleDomain::centered_ball(1, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        let f = Objective::quadratic(3, 1.0).unwrap();
        let b3 = FeasibleDomain::centered_ball(3, 1.0).unwrap();
        assert!(matches!(
            build_oracle(&f, &b3, 1.0, 64),
            Err(Error::InvalidGrid(_))
        ));
        let g = Objective::quadratic(1, 1.0).unwrap();
        assert!(matches!(
            build_oracle(&g, &unit_interval(), 1.0, 16),
            Err(Error::InvalidGrid(_))
        ));
        assert!(build_oracle(&g, &unit_interval(), -1.0, 64).is_err());
        assert!(build_oracle(&f, &unit_interval(), 1.0, 64).is_err());
    }

    #[test]
    fn zero_beta_is_uniform_over_domain_cells() {
        let f = Objective::rastrigin(2).unwrap();
        let s = FeasibleDomain::centered_shell(2, 0.9, 4.0).unwrap();
        let o = build_oracle(&f, &s, 0.0, 64).unwrap();
        let inside = o.in_domain().iter().filter(|b| **b).count();
        let u = 1.0 / inside as f64;
        for (p, inn) in o.probabilities().iter().zip(o.in_domain()) {
            if *inn {
                assert!((p - u).abs() < 1e-15);
            } else {
                assert_eq!(*p, 0.0);
            }
        }
        let sum: f64 = o.probabilities().iter().sum();
        assert!((sum - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constant_objective_is_uniform() {
        // a mixture with a single far-away well is numerically constant on the ball
        let gm = crate::objectives::GaussianMixture::new(vec![1.0], vec![vec![1e3, 1e3]]).unwrap();
        let f = Objective::GaussianMixture(gm);
        let b = FeasibleDomain::centered_ball(2, 1.0).unwrap();
        let o = build_oracle(&f, &b, 3.0, 48).unwrap();
        let inside = o.in_domain().iter().filter(|b| **b).count() as f64;
        for (p, inn) in o.probabilities().iter().zip(o.in_domain()) {
            if *inn {
                assert!((p - 1.0 / inside).abs() < 1e-15);
            }
        }
        assert_eq!(gibbs_mean_f(&o), 0.0);
    }

    #[test]
    fn partition_locate_roundtrip() {
        let p = CellPartition::new(vec![-1.0, -2.0], vec![1.0, 2.0], 40).unwrap();
        for i in [0, 1, 39, 40, 799, 1599] {
            assert_eq!(p.locate(&p.midpoint(i)), Some(i));
        }
        assert_eq!(p.locate(&[1.0, 2.0]), Some(1599));
        assert_eq!(p.locate(&[1.0 + 1e-12, 0.0]), None);
        assert_eq!(p.locate(&[0.0]), None);
    }

    #[test]
    fn tv_edge_cases() {
        let f = Objective::quadratic(1, 1.0).unwrap();
        let o = build_oracle(&f, &unit_interval(), 0.0, 32).unwrap();
        let mut h = o.histogram();
        assert!(tv_distance(&h, &o).is_err());
        h.add(&[0.01]);
        // all mass on one cell of 32 equally likely ones
        assert!((tv_distance(&h, &o).unwrap() - 31.0 / 32.0).abs() < 1e-12);
        h.add(&[5.0]);
        assert_eq!(h.excluded(), 1);
        assert_eq!(h.total(), 2);

        let other = build_oracle(&f, &unit_interval(), 0.0, 64).unwrap();
        assert_eq!(
            tv_distance(&other.histogram(), &o),
            Err(Error::PartitionMismatch)
        );

        // point mass oracle: beta huge concentrates everything in the central cells
        let sharp = build_oracle(&f, &unit_interval(), 1e6, 33).unwrap();
        let peak = sharp
            .probabilities()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!((sharp.probabilities()[peak] - 1.0).abs() < 1e-12);
        let mut counts = vec![0; 33];
        counts[peak] = 10;
        let hp = Histogram::from_counts(&sharp, counts).unwrap();
        assert!(tv_distance(&hp, &sharp).unwrap() < 1e-12);
        let mut counts = vec![0; 33];
        counts[0] = 10;
        let hd = Histogram::from_counts(&sharp, counts).unwrap();
        assert!((tv_distance(&hd, &sharp).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn from_counts_rejects_mass_outside_domain() {
        let f = Objective::quadratic(2, 1.0).unwrap();
        let s = FeasibleDomain::centered_shell(2, 0.9, 4.0).unwrap();
        let o = build_oracle(&f, &s, 1.0, 32).unwrap();
        let mut counts = vec![0; o.partition().n_cells()];
        counts[0] = 1; // corner of the bounding box
        assert!(Histogram::from_counts(&o, counts).is_err());
    }

    #[test]
    fn gap_bound_examples() {
        // first branch: 2/r = 2 beats L (1 + sqrt 2) / log 2 for tiny L
        let v = gibbs_gap_bound(1, 1.0, 1.0, 1.0, 1e-3).unwrap();
        assert!((v - 4f64.ln()).abs() < 1e-15);
        assert!(gibbs_gap_bound(1, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(gibbs_gap_bound(0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(gibbs_gap_bound(1, 1.0, -1.0, 1.0, 1.0).is_err());

        // second branch: doubling beta scales the log argument by 2
        let (d, b, r, rr, l) = (2, 3.0, 1.0, 4.0, 10.0);
        let v1 = gibbs_gap_bound(d, b, r, rr, l).unwrap();
        let v2 = gibbs_gap_bound(d, 2.0 * b, r, rr, l).unwrap();
        let expect = d as f64 / (2.0 * b) * (v1 * b / d as f64 + 2f64.ln());
        assert!((v2 - expect).abs() < 1e-12);
    }

    #[test]
    fn csv_export_lists_domain_cells() {
        let f = Objective::quadratic(1, 1.0).unwrap();
        let o = build_oracle(&f, &unit_interval(), 2.0, 32).unwrap();
        let mut h = o.histogram();
        h.add(&[0.0]);
        let mut buf = Vec::new();
        o.write_csv(Some(&h), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "cell,x1,probability,count");
        assert_eq!(lines.len(), 33);
        assert!(lines[17].ends_with(",1"));
    }

    proptest! {
        #[test]
        fn tv_is_a_metric(
            raw in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 8), 3)
        ) {
            let norm = |v: &Vec<f64>| {
                let s: f64 = v.iter().sum::<f64>() + 1e-9;
                v.iter().map(|x| (x + 1e-9 / 8.0) / s).collect::<Vec<_>>()
            };
            let (p, q, r) = (norm(&raw[0]), norm(&raw[1]), norm(&raw[2]));
            let pq = tv_between(&p, &q).unwrap();
            prop_assert!((pq - tv_between(&q, &p).unwrap()).abs() < 1e-15);
            prop_assert!(pq <= tv_between(&p, &r).unwrap() + tv_between(&r, &q).unwrap() + 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&pq));
            prop_assert_eq!(tv_between(&p, &p).unwrap(), 0.0);
        }
    }
}
