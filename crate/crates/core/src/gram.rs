//! Finite sections of normalized-kernel systems: Gram matrices, their
//! extreme eigenvalues, and a Hankel lower bound for `dist(ΘB̄_Λ, H^∞)`.
//!
//! Every verdict here is a statement about the finite section that was
//! assembled. A certified section is necessary for the infinite system
//! to be a Riesz sequence with the same floor, never sufficient.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::carleson::PointSequence;
use crate::error::{invalid, Error, Result};
use crate::inner::{InnerFunction, KernelNormSq};
use crate::linalg::{iterative_extremes, jacobi_eigenvalues, spectral_norm, CMatrix};
use crate::par::Exec;

/// Sections up to this size use dense Jacobi; larger ones use iteration.
pub const DENSE_LIMIT: usize = 512;

/// A bound of `1 - WITNESS_MARGIN` or more is reported as `dist >= 1`.
pub const WITNESS_MARGIN: f64 = 1e-6;

const MAX_FFT_LOG2: u32 = 16;

/// Hermitian matrix `G_ij = ⟨k̃_{λ_j}, k̃_{λ_i}⟩` with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: CMatrix,
    point_ids: Vec<u64>,
}

impl GramMatrix {
    /// Wraps precomputed entries; checks shape and the Hermitian,
    /// unit-diagonal invariants.
    pub fn from_entries(entries: CMatrix, point_ids: Vec<u64>) -> Result<Self> {
        if entries.dim() != point_ids.len() {
            return Err(invalid("Gram dimension does not match the id list"));
        }
        for i in 0..entries.dim() {
            if (entries.get(i, i) - 1.0).norm() > 1e-12 {
                return Err(invalid(format!("Gram diagonal entry {i} is not 1")));
            }
        }
        if entries.hermitian_deviation() > 1e-12 {
            return Err(invalid("Gram matrix is not Hermitian"));
        }
        Ok(GramMatrix { entries, point_ids })
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn ids(&self) -> &[u64] {
        &self.point_ids
    }

    pub fn dim(&self) -> usize {
        self.point_ids.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries.get(i, j)
    }

    /// Gram of the sub-system at the given positions.
    pub fn principal(&self, positions: &[usize]) -> GramMatrix {
        GramMatrix {
            entries: self.entries.principal(positions),
            point_ids: positions.iter().map(|&p| self.point_ids[p]).collect(),
        }
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.max(self.get(i, j).norm());
                }
            }
        }
        m
    }
}

/// Extreme eigenvalues of a finite Gram section: `lambda_min` is the
/// lower Riesz bound and `lambda_max` the Bessel bound of the section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameBounds {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CertifiedRiesz,
    Indeterminate,
}

/// Frame bounds with the verdict at a floor, as written to reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub n: usize,
    pub verdict: Verdict,
    pub floor: f64,
    /// Always `"finite_section"`.
    pub scope: String,
}

impl FrameReport {
    pub fn new(bounds: FrameBounds, floor: f64) -> Self {
        FrameReport {
            lambda_min: bounds.lambda_min,
            lambda_max: bounds.lambda_max,
            n: bounds.n,
            verdict: verdict_at(&bounds, floor),
            floor,
            scope: "finite_section".into(),
        }
    }

    pub fn bounds(&self) -> FrameBounds {
        FrameBounds {
            lambda_min: self.lambda_min,
            lambda_max: self.lambda_max,
            n: self.n,
        }
    }
}

fn verdict_at(bounds: &FrameBounds, floor: f64) -> Verdict {
    if bounds.lambda_min >= floor {
        Verdict::CertifiedRiesz
    } else {
        Verdict::Indeterminate
    }
}

/// Finite, positive kernel norms; errors name the offending id.
pub(crate) fn kernel_norms(theta: &InnerFunction, seq: &PointSequence) -> Result<Vec<f64>> {
    seq.iter()
        .map(|(id, p)| {
            let degenerate = |reason: String| Error::DegeneratePoint { id, reason };
            match theta.kernel_norm_sq(p) {
                Ok(KernelNormSq::Finite(v)) if v > 0.0 && v.is_finite() => Ok(v.sqrt()),
                Ok(KernelNormSq::Finite(v)) => Err(degenerate(format!("kernel norm² = {v}"))),
                Ok(KernelNormSq::Infinite) => Err(degenerate("infinite kernel norm".into())),
                Err(Error::OnSpectrum { .. }) => {
                    Err(degenerate("lies on the spectrum of the inner function".into()))
                }
                Err(e) => Err(e),
            }
        })
        .collect()
}

pub fn gram(theta: &InnerFunction, seq: &PointSequence) -> Result<GramMatrix> {
    gram_with(theta, seq, Exec::default())
}

/// Assembles the normalized Gram matrix from the closed kernel formula.
pub fn gram_with(theta: &InnerFunction, seq: &PointSequence, exec: Exec) -> Result<GramMatrix> {
    let norms = kernel_norms(theta, seq)?;
    let pts = seq.points();
    let vals = pts.iter().map(|p| theta.eval_inner(p)).collect::<Result<Vec<_>>>()?;
    let n = pts.len();
    let rows = exec.try_map_range(n, |i| -> Result<Vec<Complex64>> {
        let (li, ti) = (pts[i].value(), vals[i]);
        (i + 1..n)
            .map(|j| {
                // k_{λ_j}(λ_i)
                let denom = 1.0 - pts[j].value().conj() * li;
                if denom.norm() < 1e-14 {
                    return Err(Error::Numerical(format!(
                        "kernel denominator vanishes for ids {} and {}",
                        seq.ids()[j],
                        seq.ids()[i]
                    )));
                }
                Ok((1.0 - vals[j].conj() * ti) / denom / (norms[i] * norms[j]))
            })
            .collect()
    })?;
    let mut m = CMatrix::identity(n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            m.set(i, j, v);
            m.set(j, i, v.conj());
        }
    }
    Ok(GramMatrix {
        entries: m,
        point_ids: seq.ids().to_vec(),
    })
}

pub fn extremal_eigs(g: &GramMatrix) -> Result<FrameBounds> {
    extremal_eigs_with(g, DENSE_LIMIT)
}

/// Jacobi up to `dense_limit`, shifted power / inverse iteration above.
pub fn extremal_eigs_with(g: &GramMatrix, dense_limit: usize) -> Result<FrameBounds> {
    let n = g.dim();
    if n == 0 {
        return Err(invalid("frame bounds of an empty system"));
    }
    let (lambda_min, lambda_max) = if n <= dense_limit {
        let e = jacobi_eigenvalues(&g.entries)?;
        (e[0], e[n - 1])
    } else {
        iterative_extremes(&g.entries)?
    };
    Ok(FrameBounds {
        lambda_min: lambda_min.max(0.0),
        lambda_max,
        n,
    })
}

/// Frame bounds of the normalized kernels at `seq`.
pub fn frame_bounds(theta: &InnerFunction, seq: &PointSequence) -> Result<FrameBounds> {
    extremal_eigs(&gram(theta, seq)?)
}

/// Largest Gram eigenvalue of the section: a lower bound for the Bessel
/// constant of the full system.
pub fn bessel_constant_estimate(theta: &InnerFunction, seq: &PointSequence) -> Result<f64> {
    Ok(frame_bounds(theta, seq)?.lambda_max)
}

pub fn riesz_verdict(
    theta: &InnerFunction,
    seq: &PointSequence,
    floor: f64,
) -> Result<(Verdict, FrameBounds)> {
    if seq.is_empty() {
        return Err(invalid("Riesz verdict of an empty system"));
    }
    let b = frame_bounds(theta, seq)?;
    Ok((verdict_at(&b, floor), b))
}

/// Largest singular value of an `n × n` Hankel section of `ΘB̄_Λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HankelBound {
    pub value: f64,
    pub section: usize,
    pub nodes: usize,
    /// Radius of the sampling circle; below 1 when `Θ` has atoms.
    pub radius: f64,
    pub dist_ge_one_witnessed: bool,
}

fn hankel_grid(section: usize, lambda_radius: f64, theta_radius: f64, atoms: bool) -> Result<(usize, f64)> {
    let cap = 1usize << MAX_FFT_LOG2;
    let resolve = |d: f64| if d < 1.0 { 80.0 / (1.0 - d) } else { f64::INFINITY };
    let want = if atoms {
        resolve(lambda_radius)
    } else {
        // coefficients on the circle decay like radius^k
        resolve(lambda_radius.max(theta_radius)).min(cap as f64)
    };
    if want > cap as f64 {
        return Err(invalid(format!(
            "Hankel section needs more than 2^{MAX_FFT_LOG2} nodes for points at radius {lambda_radius}"
        )));
    }
    let nodes = (8 * section).max(64).max(want as usize).next_power_of_two();
    if nodes > cap {
        return Err(invalid(format!(
            "Hankel section {section} needs more than 2^{MAX_FFT_LOG2} nodes"
        )));
    }
    let radius = if atoms { 1.0 - 40.0 / nodes as f64 } else { 1.0 };
    Ok((nodes, radius))
}

/// Lower bound for `dist(ΘB̄_Λ, H^∞)` from the Hankel section built out of
/// the negative Fourier coefficients `û(-1), …, û(-(2n-1))`.
///
/// By Nehari's theorem the distance equals the norm of the full Hankel
/// operator, which dominates every finite section. The negative
/// coefficients come from the poles of `Θ/B_Λ` at `Λ` alone, so with atoms
/// present they are read off a circle `|z| = r < 1` where `Θ` is smooth.
pub fn hankel_distance_lb(
    theta: &InnerFunction,
    seq: &PointSequence,
    section: usize,
) -> Result<HankelBound> {
    if section == 0 {
        return Err(invalid("Hankel section size must be at least 1"));
    }
    let zeros = seq.interior_values()?;
    let radius_of = |z: &[Complex64]| z.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let (nodes, r) = hankel_grid(
        section,
        radius_of(&zeros),
        radius_of(theta.zeros()),
        !theta.atoms().is_empty(),
    )?;
    let blaschke = InnerFunction::blaschke(zeros)?;

    let mut buf: Vec<Complex64> = (0..nodes)
        .map(|k| {
            let w = Complex64::from_polar(r, TAU * k as f64 / nodes as f64);
            if r == 1.0 {
                theta.eval(w) * blaschke.eval(w).conj()
            } else {
                theta.eval(w) / blaschke.eval(w)
            }
        })
        .collect();
    FftPlanner::new().plan_fft_forward(nodes).process(&mut buf);
    // û(-j) = r^j X_{M-j} / M
    let coeff = |j: usize| r.powi(j as i32) * buf[(nodes - j) % nodes] / nodes as f64;
    let h = CMatrix::from_fn(section, |a, b| coeff(a + b + 1));
    let value = spectral_norm(&h)?;
    Ok(HankelBound {
        value,
        section,
        nodes,
        radius: r,
        dist_ge_one_witnessed: value >= 1.0 - WITNESS_MARGIN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inner::UnitPoint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn boundary(angle: f64) -> UnitPoint {
        UnitPoint::boundary(angle)
    }

    fn roots_of_unity(n: usize, offset: f64) -> PointSequence {
        PointSequence::new((0..n).map(|k| boundary(offset + TAU * k as f64 / n as f64)).collect()).unwrap()
    }

    #[test]
    fn clark_family_gram_is_identity() {
        let g = gram(&InnerFunction::power(3), &roots_of_unity(3, 0.0)).unwrap();
        assert!(g.max_off_diagonal() < 1e-15);
        let b = extremal_eigs(&g).unwrap();
        assert!((b.lambda_min - 1.0).abs() < 1e-12 && (b.lambda_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singleton_and_two_point_examples() {
        let t = InnerFunction::power(2);
        let g = gram(&t, &PointSequence::from_complex(&[c(0.3, 0.1)]).unwrap()).unwrap();
        assert_eq!(g.dim(), 1);
        assert_eq!(g.get(0, 0), c(1.0, 0.0));

        let s = PointSequence::from_complex(&[c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        let g = gram(&t, &s).unwrap();
        let expected = 1.0 / 1.25f64.sqrt();
        assert!((g.get(0, 1).re - expected).abs() < 1e-15);
        assert!((g.get(0, 1).re - 0.894_427).abs() < 1e-6);
        let b = extremal_eigs(&g).unwrap();
        assert!((b.lambda_min - (1.0 - expected)).abs() < 1e-14);
        assert!((b.lambda_max - (1.0 + expected)).abs() < 1e-14);
    }

    #[test]
    fn identity_bounds() {
        let g = GramMatrix::from_entries(CMatrix::identity(5), (0..5).collect()).unwrap();
        let b = extremal_eigs(&g).unwrap();
        assert_eq!((b.lambda_min, b.lambda_max, b.n), (1.0, 1.0, 5));
    }

    #[test]
    fn two_by_two_real_off_diagonal() {
        for g in [0.0, 0.25, 0.9] {
            let m = CMatrix::from_rows(2, vec![c(1.0, 0.0), c(g, 0.0), c(g, 0.0), c(1.0, 0.0)]).unwrap();
            let b = extremal_eigs(&GramMatrix::from_entries(m, vec![0, 1]).unwrap()).unwrap();
            assert!((b.lambda_min - (1.0 - g)).abs() < 1e-15);
            assert!((b.lambda_max - (1.0 + g)).abs() < 1e-15);
        }
    }

    #[test]
    fn close_pair_pushes_bessel_estimate_to_two() {
        let t = InnerFunction::power(2);
        let mut last = 0.0;
        for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
            let s = PointSequence::from_complex(&[c(0.3, 0.0), c(0.3 + eps, 0.0)]).unwrap();
            let est = bessel_constant_estimate(&t, &s).unwrap();
            assert!(est > last && est <= 2.0 + 1e-12);
            last = est;
        }
        assert!((last - 2.0).abs() < 1e-3);
    }

    #[test]
    fn interleaved_clark_families() {
        // Brute force: the exact 2N×2N Gram of two interleaved families.
        let n = 6;
        let t = InnerFunction::power(n);
        let pts: Vec<UnitPoint> = (0..2 * n).map(|k| boundary(TAU * k as f64 / (2 * n) as f64)).collect();
        let s = PointSequence::new(pts).unwrap();
        let est = bessel_constant_estimate(&t, &s).unwrap();
        assert!(est > 1.0 && est <= 2.0 + 1e-12, "{est}");
        // The union of two orthonormal bases of an N-dim space is a tight frame with bound 2.
        assert!((est - 2.0).abs() < 1e-10);
    }

    #[test]
    fn verdicts() {
        let t = InnerFunction::power(4);
        let (v, b) = riesz_verdict(&t, &roots_of_unity(4, 0.3), 0.99).unwrap();
        assert_eq!(v, Verdict::CertifiedRiesz);
        assert!((b.lambda_min - 1.0).abs() < 1e-12);

        let t = InnerFunction::blaschke(vec![c(0.2, 0.1), c(-0.4, 0.0), c(0.0, 0.7)]).unwrap();
        let l = c(0.1, 0.2);
        // pseudohyperbolic distance ≈ 1e-6 between the pair
        let mu = l + 1e-6 * (1.0 - l.norm_sqr());
        let s = PointSequence::from_complex(&[l, mu, c(-0.5, 0.3)]).unwrap();
        let (v, b) = riesz_verdict(&t, &s, 0.1).unwrap();
        assert_eq!(v, Verdict::Indeterminate);
        assert!(b.lambda_min < 1e-3);

        assert!(riesz_verdict(&t, &PointSequence::empty(), 0.1).is_err());
    }

    #[test]
    fn degenerate_points_are_named() {
        let t = InnerFunction::new(vec![], vec![crate::inner::SingularAtom { angle: 1.0, mass: 1.0 }]).unwrap();
        let s = PointSequence::with_ids(vec![4, 9], vec![boundary(0.0), boundary(1.0)]).unwrap();
        assert!(matches!(gram(&t, &s), Err(Error::DegeneratePoint { id: 9, .. })));
    }

    #[test]
    fn parallel_and_sequential_assembly_agree() {
        let t = InnerFunction::blaschke(vec![c(0.2, 0.1), c(-0.4, 0.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v: Vec<Complex64> = (0..40)
            .map(|_| Complex64::from_polar(rng.gen_range(0.0..0.99), rng.gen_range(0.0..TAU)))
            .collect();
        let s = PointSequence::from_complex(&v).unwrap();
        assert_eq!(gram_with(&t, &s, Exec::Sequential).unwrap(), gram_with(&t, &s, Exec::Parallel).unwrap());
    }

    #[test]
    fn iterative_path_matches_dense() {
        let t = InnerFunction::blaschke(vec![c(0.5, 0.0), c(0.0, -0.6), c(-0.3, 0.3)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v: Vec<Complex64> = (0..60)
            .map(|_| Complex64::from_polar(rng.gen_range(0.5..0.95), rng.gen_range(0.0..TAU)))
            .collect();
        let g = gram(&t, &PointSequence::from_complex(&v).unwrap()).unwrap();
        let dense = extremal_eigs_with(&g, usize::MAX).unwrap();
        let iter = extremal_eigs_with(&g, 0).unwrap();
        assert!(((dense.lambda_max - iter.lambda_max) / dense.lambda_max).abs() < 1e-10);
        assert!((dense.lambda_min - iter.lambda_min).abs() < 1e-10 * dense.lambda_max);
    }

    #[test]
    fn hankel_examples() {
        // Θ = B_Λ: u is constant, no antianalytic part.
        let zs = vec![c(0.3, 0.2), c(-0.5, 0.1)];
        let t = InnerFunction::blaschke(zs.clone()).unwrap();
        let b = hankel_distance_lb(&t, &PointSequence::from_complex(&zs).unwrap(), 6).unwrap();
        assert!(b.value < 1e-12);
        assert!(!b.dist_ge_one_witnessed);

        // u = conj(z)
        let origin = PointSequence::from_complex(&[c(0.0, 0.0)]).unwrap();
        for n in [1, 3, 8] {
            let b = hankel_distance_lb(&InnerFunction::constant(), &origin, n).unwrap();
            assert!((b.value - 1.0).abs() < 1e-12);
            assert!(b.dist_ge_one_witnessed);
        }
        assert!(hankel_distance_lb(&InnerFunction::constant(), &origin, 0).is_err());
    }

    #[test]
    fn hankel_bound_is_monotone_in_section() {
        let t = InnerFunction::new(
            vec![c(0.6, 0.2)],
            vec![crate::inner::SingularAtom { angle: 0.0, mass: 0.5 }],
        )
        .unwrap();
        let s = PointSequence::from_complex(&[c(0.5, 0.0), c(-0.2, 0.7), c(0.0, -0.8)]).unwrap();
        let mut last = 0.0;
        for n in 1..12 {
            let b = hankel_distance_lb(&t, &s, n).unwrap();
            assert!(b.value >= last - 1e-12);
            assert!(b.nodes >= 8 * n);
            last = b.value;
        }
    }

    #[test]
    fn frame_report_json() {
        let r = FrameReport::new(
            FrameBounds {
                lambda_min: 0.5,
                lambda_max: 1.5,
                n: 2,
            },
            0.1,
        );
        let js = serde_json::to_string(&r).unwrap();
        assert_eq!(
            js,
            r#"{"lambda_min":0.5,"lambda_max":1.5,"n":2,"verdict":"certified_riesz","floor":0.1,"scope":"finite_section"}"#
        );
    }
}
