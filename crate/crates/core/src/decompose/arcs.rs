use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::carleson::PointSequence;
use crate::clark::{level_alpha, level_set_with, ClarkOptions};
use crate::error::{invalid, Result};
use crate::inner::{normalize_angle, InnerFunction, UnitPoint};
use crate::par::Exec;
use crate::quad;

/// An arc `(start, start + length]` between consecutive level points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arc {
    pub start: f64,
    pub length: f64,
    /// The counterclockwise endpoint, met first when moving clockwise.
    pub zeta: f64,
    /// Level `l` in `1..=N` of `zeta`, i.e. `Θ(ζ) = e^{2πil/N}`.
    pub level: usize,
    /// `∫_J |Θ'| dm` by adaptive quadrature; `1/N` up to quadrature error.
    pub mass: f64,
}

impl Arc {
    /// Half-open membership `(start, start + length]`.
    pub fn contains_angle(&self, angle: f64) -> bool {
        let mut d = normalize_angle(angle - self.start);
        if d == 0.0 {
            d = TAU;
        }
        d <= self.length
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcSystem {
    pub n_levels: usize,
    /// Sorted by `start`.
    pub arcs: Vec<Arc>,
    /// Set when arcs next to atoms were left out.
    pub truncated: bool,
}

impl ArcSystem {
    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.arcs.iter().map(|a| a.mass).sum()
    }

    /// Largest relative deviation of an arc mass from `1/N`.
    pub fn mass_deviation(&self) -> f64 {
        let target = 1.0 / self.n_levels as f64;
        self.arcs
            .iter()
            .map(|a| ((a.mass - target) / target).abs())
            .fold(0.0, f64::max)
    }

    pub fn arc_containing(&self, angle: f64) -> Option<usize> {
        if self.arcs.is_empty() {
            return None;
        }
        let x = normalize_angle(angle);
        let k = self.arcs.partition_point(|a| a.start < x);
        let candidate = if k == 0 { self.arcs.len() - 1 } else { k - 1 };
        self.arcs[candidate].contains_angle(x).then_some(candidate)
    }

    /// Per arc, `max |Θ'| / min |Θ'|` over `points + 1` equally spaced angles.
    pub fn derivative_spread(&self, theta: &InnerFunction, points: usize) -> Vec<f64> {
        self.arcs
            .iter()
            .map(|a| {
                let (lo, hi) = (0..=points)
                    .map(|j| theta.boundary_derivative_at(a.start + a.length * j as f64 / points as f64))
                    .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
                hi / lo
            })
            .collect()
    }
}

pub fn build_arc_system(theta: &InnerFunction, n_levels: usize) -> Result<ArcSystem> {
    build_arc_system_with(theta, n_levels, &ClarkOptions::default(), Exec::default())
}

/// Merges the level sets for `α = e^{2πil/N}`, `l = 1..=N`, into arcs and
/// measures each arc.
pub fn build_arc_system_with(
    theta: &InnerFunction,
    n_levels: usize,
    opts: &ClarkOptions,
    exec: Exec,
) -> Result<ArcSystem> {
    if n_levels == 0 {
        return Err(invalid("the level count must be at least 1"));
    }
    let families = exec.try_map_range(n_levels, |i| level_set_with(theta, level_alpha(i + 1, n_levels), opts))?;
    let truncated = families.iter().any(|f| f.truncated);
    let mut marks: Vec<(f64, usize)> = families
        .iter()
        .enumerate()
        .flat_map(|(i, f)| f.points.iter().map(move |&a| (a, i + 1)))
        .collect();
    marks.sort_by(|a, b| a.0.total_cmp(&b.0));
    let m = marks.len();
    let atoms: Vec<f64> = theta.atoms().iter().map(|a| a.angle).collect();
    let shapes: Vec<(f64, f64, usize)> = (0..m)
        .map(|k| {
            let (start, _) = marks[k];
            let (end, level) = marks[(k + 1) % m];
            let mut length = end - start;
            if length <= 0.0 {
                length += TAU;
            }
            (start, length, level)
        })
        .filter(|&(start, length, _)| {
            !atoms
                .iter()
                .any(|&a| normalize_angle(a - start) < length)
        })
        .collect();
    let arcs = exec.map_range(shapes.len(), |k| {
        let (start, length, level) = shapes[k];
        let mass = quad::integrate(|t| theta.boundary_derivative_at(t), start, start + length, 1e-11) / TAU;
        Arc {
            start,
            length,
            zeta: normalize_angle(start + length),
            level,
            mass,
        }
    });
    Ok(ArcSystem {
        n_levels,
        arcs,
        truncated: truncated || shapes.len() < m,
    })
}

/// The Carleson square `{rζ : ζ ∈ J, inner_radius <= r <= 1}` over an arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Square {
    pub arc: usize,
    pub start: f64,
    pub length: f64,
    pub zeta: f64,
    pub level: usize,
    pub inner_radius: f64,
}

impl Square {
    pub fn contains(&self, p: &UnitPoint) -> bool {
        let arc = Arc {
            start: self.start,
            length: self.length,
            zeta: self.zeta,
            level: self.level,
            mass: 0.0,
        };
        p.modulus() >= self.inner_radius && arc.contains_angle(p.angle())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquareSystem {
    pub n_levels: usize,
    pub squares: Vec<Square>,
}

pub fn build_squares(arcs: &ArcSystem) -> SquareSystem {
    let squares = arcs
        .arcs
        .iter()
        .enumerate()
        .map(|(k, a)| Square {
            arc: k,
            start: a.start,
            length: a.length,
            zeta: a.zeta,
            level: a.level,
            inner_radius: (1.0 - a.length / TAU).max(0.0),
        })
        .collect();
    SquareSystem {
        n_levels: arcs.n_levels,
        squares,
    }
}

impl SquareSystem {
    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    /// Index of the square containing `p`, if any.
    pub fn square_of(&self, p: &UnitPoint) -> Option<usize> {
        if self.squares.is_empty() {
            return None;
        }
        let x = p.angle();
        let k = self.squares.partition_point(|s| s.start < x);
        let candidate = if k == 0 { self.squares.len() - 1 } else { k - 1 };
        self.squares[candidate].contains(p).then_some(candidate)
    }

    /// Indices of the squares tagged with level `l`.
    pub fn level(&self, l: usize) -> impl Iterator<Item = usize> + '_ {
        self.squares
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.level == l)
            .map(|(k, _)| k)
    }

    fn adjacent(&self, k: usize) -> bool {
        let a = &self.squares[k];
        let b = &self.squares[(k + 1) % self.squares.len()];
        crate::inner::angle_distance(a.start + a.length, b.start) <= 1e-12
    }
}

/// Sampled bound for `|Θ|` on the part of `∂G` inside the disk, where `G`
/// is the disk minus the closed squares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GRegion {
    /// `max |Θ|` over the samples.
    pub delta: f64,
    /// Largest `C` with `log|Θ(z)| <= -C(1-|z|)|Θ'(z/|z|)|` at every sample.
    pub decay_constant: f64,
    pub samples: usize,
}

/// Samples the inner sides of the squares and the radial segments joining
/// squares of different depth.
pub fn region_g_delta(theta: &InnerFunction, squares: &SquareSystem, samples: usize) -> GRegion {
    let n = squares.len();
    if n == 0 {
        return GRegion {
            delta: 1.0,
            decay_constant: 0.0,
            samples: 0,
        };
    }
    let per = samples.div_ceil(n).max(4);
    let mut pts: Vec<Complex64> = Vec::with_capacity(2 * n * per);
    for (k, s) in squares.squares.iter().enumerate() {
        for j in 0..per {
            let t = s.start + s.length * j as f64 / (per - 1) as f64;
            pts.push(Complex64::from_polar(s.inner_radius, t));
        }
        let end = s.start + s.length;
        let next = &squares.squares[(k + 1) % n];
        let radial: Vec<(f64, f64, f64)> = if squares.adjacent(k) {
            let (lo, hi) = if s.inner_radius <= next.inner_radius {
                (s.inner_radius, next.inner_radius)
            } else {
                (next.inner_radius, s.inner_radius)
            };
            vec![(end, lo, hi)]
        } else {
            // a gap at an atom: the region reaches the circle on both sides
            vec![(end, s.inner_radius, 1.0 - 1e-9), (next.start, next.inner_radius, 1.0 - 1e-9)]
        };
        for (angle, lo, hi) in radial {
            if hi <= lo {
                continue;
            }
            let m = (per / 2).max(2);
            for j in 0..=m {
                pts.push(Complex64::from_polar(lo + (hi - lo) * j as f64 / m as f64, angle));
            }
        }
    }
    let mut delta = 0.0f64;
    let mut decay = f64::INFINITY;
    for &z in &pts {
        let v = theta.eval(z).norm();
        delta = delta.max(v);
        let r = z.norm();
        if r > 0.0 && r < 1.0 && v > 0.0 {
            let d = theta.boundary_derivative_at(z.arg());
            if d.is_finite() && d > 0.0 {
                decay = decay.min(-v.ln() / ((1.0 - r) * d));
            }
        }
    }
    GRegion {
        delta,
        decay_constant: if decay.is_finite() { decay } else { 0.0 },
        samples: pts.len(),
    }
}

/// Membership counts of a sequence in the squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquareCounts {
    pub m_observed: usize,
    /// Points per square.
    pub counts: Vec<usize>,
    /// `histogram[k]` is the number of squares holding `k` points.
    pub histogram: Vec<usize>,
    /// Square of each point, in sequence order.
    pub membership: Vec<Option<usize>>,
}

pub fn count_per_square(squares: &SquareSystem, seq: &PointSequence) -> SquareCounts {
    let membership: Vec<Option<usize>> = seq.points().iter().map(|p| squares.square_of(p)).collect();
    let mut counts = vec![0usize; squares.len()];
    for k in membership.iter().flatten() {
        counts[*k] += 1;
    }
    let m_observed = counts.iter().copied().max().unwrap_or(0);
    let mut histogram = vec![0usize; m_observed + 1];
    for &c in &counts {
        histogram[c] += 1;
    }
    SquareCounts {
        m_observed,
        counts,
        histogram,
        membership,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inner::SingularAtom;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn power_two_eight_arcs() {
        let a = build_arc_system(&InnerFunction::power(2), 4).unwrap();
        assert_eq!(a.len(), 8);
        for arc in &a.arcs {
            assert!((arc.length / TAU - 1.0 / 8.0).abs() < 1e-12);
            assert!((arc.mass - 0.25).abs() < 1e-10);
        }
        assert!((a.total_mass() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn identity_single_arc() {
        let a = build_arc_system(&InnerFunction::power(1), 1).unwrap();
        assert_eq!(a.len(), 1);
        assert!((a.arcs[0].length - TAU).abs() < 1e-12);
        assert_eq!(a.arcs[0].level, 1);
        let s = build_squares(&a);
        assert_eq!(s.squares[0].inner_radius, 0.0);
        assert_eq!(s.square_of(&UnitPoint::Interior(c(0.3, -0.2))), Some(0));
        assert_eq!(s.square_of(&UnitPoint::boundary(a.arcs[0].zeta)), Some(0));
        let g = region_g_delta(&InnerFunction::power(1), &s, 64);
        assert_eq!(g.delta, 0.0);
    }

    #[test]
    fn nonuniform_arcs_keep_equal_mass() {
        let t = InnerFunction::blaschke(vec![c(0.5, 0.0), c(-0.5, 0.0)]).unwrap();
        let a = build_arc_system(&t, 8).unwrap();
        assert_eq!(a.len(), 16);
        assert!(a.mass_deviation() < 1e-6);
        let lengths: Vec<f64> = a.arcs.iter().map(|x| x.length).collect();
        let spread = lengths.iter().cloned().fold(0.0, f64::max) / lengths.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread > 2.0);
        // levels cycle around the circle
        for k in 0..a.len() {
            let next = a.arcs[(k + 1) % a.len()].level;
            assert_eq!(next, a.arcs[k].level % 8 + 1);
        }
    }

    #[test]
    fn square_membership() {
        let a = build_arc_system(&InnerFunction::power(1), 8).unwrap();
        let s = build_squares(&a);
        for sq in &s.squares {
            assert!((sq.inner_radius - 0.875).abs() < 1e-12);
        }
        let sq = s.squares[3];
        let mid = sq.start + sq.length / 2.0;
        assert!(sq.contains(&UnitPoint::Interior(Complex64::from_polar(0.99, mid))));
        assert!(!sq.contains(&UnitPoint::Interior(Complex64::from_polar(0.999, mid + sq.length))));
        assert!(!sq.contains(&UnitPoint::Interior(Complex64::from_polar(0.5, mid))));
        // half-open: the clockwise end belongs to the previous square
        assert!(!sq.contains(&UnitPoint::boundary(sq.start)));
        assert!(sq.contains(&UnitPoint::boundary(sq.zeta)));
    }

    #[test]
    fn region_delta_for_powers() {
        for d in [1usize, 3] {
            for n in [8usize, 16] {
                let t = InnerFunction::power(d);
                let s = build_squares(&build_arc_system(&t, n).unwrap());
                let g = region_g_delta(&t, &s, 2048);
                let expected = (1.0 - 1.0 / (n * d) as f64).powi(d as i32);
                assert!((g.delta - expected).abs() < 1e-12, "{} vs {expected}", g.delta);
                assert!(g.decay_constant > 0.0);
            }
        }
    }

    #[test]
    fn counts() {
        let t = InnerFunction::power(3);
        let s = build_squares(&build_arc_system(&t, 4).unwrap());
        let inside: Vec<Complex64> = (0..5).map(|k| c(0.1 * k as f64, 0.0)).collect();
        let r = count_per_square(&s, &PointSequence::from_complex(&inside).unwrap());
        assert_eq!(r.m_observed, 0);

        let sq = s.squares[2];
        let cluster: Vec<Complex64> = (0..5)
            .map(|k| Complex64::from_polar(0.99, sq.start + sq.length * (k as f64 + 1.0) / 7.0))
            .collect();
        let r = count_per_square(&s, &PointSequence::from_complex(&cluster).unwrap());
        assert_eq!(r.m_observed, 5);
        assert_eq!(r.histogram[5], 1);
    }

    #[test]
    fn atoms_leave_gaps() {
        let t = InnerFunction::new(vec![c(0.2, 0.0)], vec![SingularAtom { angle: 3.0, mass: 0.2 }]).unwrap();
        let a = build_arc_system_with(&t, 4, &ClarkOptions { max_per_arc: 64 }, Exec::Sequential).unwrap();
        assert!(a.truncated);
        assert!(a.arc_containing(3.0).is_none());
        assert!(a.mass_deviation() < 1e-6);
        let g = region_g_delta(&t, &build_squares(&a), 512);
        assert!(g.delta > 0.99);
    }
}
