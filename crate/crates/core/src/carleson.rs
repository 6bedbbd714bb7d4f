//! Pseudohyperbolic geometry and the scalar interpolation constants of a
//! finite point sequence.

use std::collections::HashSet;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::inner::{UnitPoint, ANGLE_TOL};
use crate::par::Exec;

/// Above this length the Carleson products are summed in log space.
const LOG_PRODUCT_THRESHOLD: usize = 64;

/// Lower end of the bisection bracket for [`interpolation_threshold`].
const THRESHOLD_FLOOR: f64 = 1e-9;

/// An ordered list of distinct points, each carrying a stable id.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSequence {
    ids: Vec<u64>,
    points: Vec<UnitPoint>,
}

impl PointSequence {
    /// Assigns ids `0..n`.
    pub fn new(points: Vec<UnitPoint>) -> Result<Self> {
        let ids = (0..points.len() as u64).collect();
        PointSequence::with_ids(ids, points)
    }

    pub fn with_ids(ids: Vec<u64>, points: Vec<UnitPoint>) -> Result<Self> {
        if ids.len() != points.len() {
            return Err(invalid(format!(
                "{} ids for {} points",
                ids.len(),
                points.len()
            )));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for &id in &ids {
            if !seen.insert(id) {
                return Err(invalid(format!("duplicate point id {id}")));
            }
        }
        check_distinct(&ids, &points)?;
        Ok(PointSequence { ids, points })
    }

    /// Builds a sequence of interior points from complex values.
    pub fn from_complex(values: &[Complex64]) -> Result<Self> {
        let pts = values
            .iter()
            .map(|&z| UnitPoint::new(z))
            .collect::<Result<Vec<_>>>()?;
        PointSequence::new(pts)
    }

    pub fn empty() -> Self {
        PointSequence {
            ids: Vec::new(),
            points: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn points(&self) -> &[UnitPoint] {
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &UnitPoint)> {
        self.ids.iter().copied().zip(self.points.iter())
    }

    pub fn position(&self, id: u64) -> Option<usize> {
        self.ids.iter().position(|&i| i == id)
    }

    /// Sub-sequence at the given positions, in the given order.
    pub fn subset(&self, positions: &[usize]) -> PointSequence {
        PointSequence {
            ids: positions.iter().map(|&p| self.ids[p]).collect(),
            points: positions.iter().map(|&p| self.points[p]).collect(),
        }
    }

    /// Sub-sequence with the given ids, in the given order.
    pub fn select_ids(&self, ids: &[u64]) -> Result<PointSequence> {
        let positions = ids
            .iter()
            .map(|&id| {
                self.position(id)
                    .ok_or_else(|| invalid(format!("unknown point id {id}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.subset(&positions))
    }

    /// Interior values; errors naming the first boundary point.
    pub fn interior_values(&self) -> Result<Vec<Complex64>> {
        self.iter()
            .map(|(id, p)| match *p {
                UnitPoint::Interior(z) => Ok(z),
                UnitPoint::Boundary(_) => Err(Error::DegeneratePoint {
                    id,
                    reason: "boundary point where an interior point is required".into(),
                }),
            })
            .collect()
    }
}

fn check_distinct(ids: &[u64], points: &[UnitPoint]) -> Result<()> {
    let mut interior: Vec<(Complex64, u64)> = Vec::new();
    let mut boundary: Vec<(f64, u64)> = Vec::new();
    for (&id, p) in ids.iter().zip(points) {
        match *p {
            UnitPoint::Interior(z) => interior.push((z, id)),
            UnitPoint::Boundary(a) => boundary.push((a, id)),
        }
    }
    interior.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    for w in interior.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(invalid(format!(
                "points {} and {} coincide",
                w[0].1, w[1].1
            )));
        }
    }
    boundary.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = boundary.len();
    if n < 2 {
        return Ok(());
    }
    // neighbors in angle order, including the wrap-around pair
    for k in 0..n {
        let (a, ia) = boundary[k];
        let (b, ib) = boundary[(k + 1) % n];
        let gap = if k + 1 == n { b + TAU - a } else { b - a };
        if gap <= ANGLE_TOL {
            return Err(invalid(format!("boundary points {ia} and {ib} coincide")));
        }
    }
    Ok(())
}

/// `|λ - μ| / |1 - μ̄λ|` for interior points.
pub fn pseudohyperbolic(lambda: &UnitPoint, mu: &UnitPoint) -> Result<f64> {
    match (*lambda, *mu) {
        (UnitPoint::Interior(l), UnitPoint::Interior(m)) => Ok(rho(l, m)),
        _ => Err(invalid(
            "pseudohyperbolic distance needs two interior points",
        )),
    }
}

pub(crate) fn rho(l: Complex64, m: Complex64) -> f64 {
    ((l - m).norm() / (1.0 - m.conj() * l).norm()).min(1.0)
}

/// `δ(B_Λ)` together with the id of the point attaining the infimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlesonConstant {
    pub delta: f64,
    pub witness_id: u64,
}

/// Summary of the interpolation geometry of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarlesonReport {
    pub delta: f64,
    pub embedding_sup: f64,
    pub witness_index: u64,
}

fn product_excluding(values: &[Complex64], n: usize) -> f64 {
    let l = values[n];
    let others = values
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != n)
        .map(|(_, &m)| rho(l, m));
    if values.len() > LOG_PRODUCT_THRESHOLD {
        others.map(f64::ln).sum::<f64>().exp()
    } else {
        others.product()
    }
}

pub fn carleson_constant(seq: &PointSequence) -> Result<CarlesonConstant> {
    carleson_constant_with(seq, Exec::default())
}

/// `min_n ∏_{k≠n} ρ(λ_n, λ_k)`; ties go to the earliest point.
pub fn carleson_constant_with(seq: &PointSequence, exec: Exec) -> Result<CarlesonConstant> {
    if seq.is_empty() {
        return Err(invalid("Carleson constant of an empty sequence"));
    }
    let values = seq.interior_values()?;
    let products = exec.map_range(values.len(), |n| product_excluding(&values, n));
    let (best, delta) = products
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, p)| if p < acc.1 { (i, p) } else { acc });
    Ok(CarlesonConstant {
        delta: delta.clamp(0.0, 1.0),
        witness_id: seq.ids()[best],
    })
}

pub fn embedding_sup(seq: &PointSequence) -> Result<f64> {
    embedding_sup_with(seq, Exec::default())
}

/// `max_m Σ_n (1-|λ_m|²)(1-|λ_n|²)/|1-λ̄_m λ_n|²`.
pub fn embedding_sup_with(seq: &PointSequence, exec: Exec) -> Result<f64> {
    if seq.is_empty() {
        return Err(invalid("embedding sum of an empty sequence"));
    }
    let values = seq.interior_values()?;
    let rows = exec.map_range(values.len(), |m| {
        let lm = values[m];
        let wm = 1.0 - lm.norm_sqr();
        values
            .iter()
            .enumerate()
            .map(|(n, &ln)| {
                if n == m {
                    1.0
                } else {
                    wm * (1.0 - ln.norm_sqr()) / (1.0 - lm.conj() * ln).norm_sqr()
                }
            })
            .sum::<f64>()
    });
    Ok(rows.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

pub fn carleson_report(seq: &PointSequence) -> Result<CarlesonReport> {
    let c = carleson_constant(seq)?;
    Ok(CarlesonReport {
        delta: c.delta,
        embedding_sup: embedding_sup(seq)?,
        witness_index: c.witness_id,
    })
}

/// Earl's bound `φ(δ) = (2 - δ² + 2√(1-δ²)) / δ²` on the interpolation
/// constant of a sequence with Carleson constant `δ`.
pub fn earl_bound(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid(format!("Earl bound needs 0 < δ <= 1, got {delta}")));
    }
    let d2 = delta * delta;
    Ok((2.0 - d2 + 2.0 * (1.0 - d2).sqrt()) / d2)
}

/// The `δ*` with `φ(δ*) = 1/γ`, by bisection on `[1e-9, 1]`.
///
/// The returned value is the upper end of the final bracket, so
/// `φ(δ) < 1/γ` for every `δ >= δ*`.
pub fn interpolation_threshold(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid(format!(
            "interpolation threshold needs 0 < γ < 1, got {gamma}"
        )));
    }
    let target = 1.0 / gamma;
    let phi = |d: f64| earl_bound(d).expect("bracket stays in (0, 1]");
    let (mut lo, mut hi) = (THRESHOLD_FLOOR, 1.0);
    if phi(lo) < target {
        return Ok(lo);
    }
    // Bisect until the bracket cannot shrink further (well below 1e-12).
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) < target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(values: &[(f64, f64)]) -> PointSequence {
        let v: Vec<Complex64> = values.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        PointSequence::from_complex(&v).unwrap()
    }

    fn ip(re: f64, im: f64) -> UnitPoint {
        UnitPoint::interior(Complex64::new(re, im)).unwrap()
    }

    #[test]
    fn pseudohyperbolic_examples() {
        assert_eq!(pseudohyperbolic(&ip(0.0, 0.0), &ip(0.5, 0.0)).unwrap(), 0.5);
        assert!((pseudohyperbolic(&ip(0.5, 0.0), &ip(-0.5, 0.0)).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(pseudohyperbolic(&ip(0.3, 0.1), &ip(0.3, 0.1)).unwrap(), 0.0);
        assert!(pseudohyperbolic(&ip(0.3, 0.1), &UnitPoint::boundary(0.0)).is_err());
    }

    #[test]
    fn carleson_examples() {
        let c = carleson_constant(&seq(&[(0.5, 0.0)])).unwrap();
        assert_eq!(c.delta, 1.0);
        assert_eq!(carleson_constant(&seq(&[(0.0, 0.0), (0.5, 0.0)])).unwrap().delta, 0.5);
        let c = carleson_constant(&seq(&[(0.0, 0.0), (0.5, 0.0), (-0.5, 0.0)])).unwrap();
        assert!((c.delta - 0.25).abs() < 1e-15);
        assert_eq!(c.witness_id, 0);
        assert!(carleson_constant(&PointSequence::empty()).is_err());
    }

    #[test]
    fn log_and_direct_products_agree() {
        let values: Vec<Complex64> = (0..80)
            .map(|k| Complex64::from_polar(0.9, TAU * k as f64 / 80.0))
            .collect();
        let s = PointSequence::from_complex(&values).unwrap();
        let direct: f64 = (1..80).map(|k| rho(values[0], values[k])).product();
        let c = carleson_constant(&s).unwrap();
        assert!(((c.delta - direct) / direct).abs() < 1e-10);
    }

    #[test]
    fn embedding_examples() {
        assert_eq!(embedding_sup(&seq(&[(0.0, 0.0)])).unwrap(), 1.0);
        assert_eq!(embedding_sup(&seq(&[(0.0, 0.0), (0.5, 0.0)])).unwrap(), 1.75);
        assert!(PointSequence::from_complex(&[Complex64::new(0.0, 0.0); 2]).is_err());
    }

    #[test]
    fn report_serializes() {
        let r = carleson_report(&seq(&[(0.0, 0.0), (0.5, 0.0)])).unwrap();
        let js = serde_json::to_string(&r).unwrap();
        assert_eq!(js, r#"{"delta":0.5,"embedding_sup":1.75,"witness_index":0}"#);
    }

    #[test]
    fn earl_examples() {
        assert_eq!(earl_bound(1.0).unwrap(), 1.0);
        assert!((earl_bound(0.6).unwrap() - 9.0).abs() < 1e-12);
        assert!((earl_bound(0.8).unwrap() - 4.0).abs() < 1e-12);
        assert!(earl_bound(0.0).is_err());
        assert!(earl_bound(-0.1).is_err());
        assert!(earl_bound(1.5).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert!((interpolation_threshold(1.0 / 9.0).unwrap() - 0.6).abs() < 1e-12);
        assert!((interpolation_threshold(0.25).unwrap() - 0.8).abs() < 1e-12);
        let mut last = 1.0;
        for k in 1..12 {
            let g = 0.5f64.powi(k);
            let d = interpolation_threshold(g).unwrap();
            assert!(d < last);
            last = d;
        }
        assert!(interpolation_threshold(0.0).is_err());
        assert!(interpolation_threshold(1.0).is_err());
    }

    #[test]
    fn threshold_inverts_earl() {
        for k in 1..10 {
            let g = k as f64 / 10.0;
            let d = interpolation_threshold(g).unwrap();
            let phi = earl_bound(d).unwrap();
            assert!((phi * g - 1.0).abs() < 1e-10);
            assert!(phi < 1.0 / g);
        }
    }

    #[test]
    fn boundary_points_are_rejected_by_constants() {
        let s = PointSequence::new(vec![ip(0.1, 0.0), UnitPoint::boundary(1.0)]).unwrap();
        assert!(matches!(carleson_constant(&s), Err(Error::DegeneratePoint { id: 1, .. })));
    }

    #[test]
    fn sequence_validation() {
        assert!(PointSequence::with_ids(vec![1, 1], vec![ip(0.1, 0.0), ip(0.2, 0.0)]).is_err());
        assert!(PointSequence::new(vec![UnitPoint::boundary(0.0), UnitPoint::boundary(TAU - 1e-13)]).is_err());
        let s = PointSequence::with_ids(vec![7, 3], vec![ip(0.1, 0.0), ip(0.2, 0.0)]).unwrap();
        assert_eq!(s.select_ids(&[3]).unwrap().points(), &[ip(0.2, 0.0)]);
        assert!(s.select_ids(&[4]).is_err());
    }
}
