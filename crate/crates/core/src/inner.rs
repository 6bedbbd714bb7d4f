//! Inner functions with finitely many Blaschke zeros and singular atoms,
//! together with the reproducing kernels of the model space they generate.
//!
//! An inner function is stored as
//!
//! ```text
//! Θ(z) = ∏_n b_{z_n}(z) · exp(-Σ_k m_k (τ_k + z)/(τ_k - z))
//! ```
//!
//! where `b_η(z) = (|η|/η)(η - z)/(1 - η̄z)` and `b_0(z) = z`. Every
//! quantity below is an exact finite sum or product over this data.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Points with `||z| - 1| <= BOUNDARY_TOL` are treated as boundary points.
pub const BOUNDARY_TOL: f64 = 1e-14;

/// Two boundary angles closer than this are the same point.
pub const ANGLE_TOL: f64 = 1e-12;

/// Reduces an angle to `[0, 2π)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Distance between two angles measured around the circle, in `[0, π]`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = normalize_angle(a - b);
    d.min(TAU - d)
}

/// A point of the closed unit disk.
///
/// Boundary points are stored by their angle so that repeated
/// conversions never drift off the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnitPoint {
    Interior(Complex64),
    Boundary(f64),
}

impl UnitPoint {
    /// Classifies `z`; values within [`BOUNDARY_TOL`] of the circle become
    /// boundary points.
    pub fn new(z: Complex64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(invalid(format!("non-finite point {z}")));
        }
        let r = z.norm();
        if r > 1.0 + BOUNDARY_TOL {
            Err(invalid(format!("point {z} lies outside the closed disk")))
        } else if (r - 1.0).abs() <= BOUNDARY_TOL {
            Ok(UnitPoint::boundary(z.arg()))
        } else {
            Ok(UnitPoint::Interior(z))
        }
    }

    pub fn interior(z: Complex64) -> Result<Self> {
        match UnitPoint::new(z)? {
            p @ UnitPoint::Interior(_) => Ok(p),
            UnitPoint::Boundary(_) => Err(invalid(format!("point {z} is not interior"))),
        }
    }

    pub fn boundary(angle: f64) -> Self {
        UnitPoint::Boundary(normalize_angle(angle))
    }

    pub fn value(&self) -> Complex64 {
        match *self {
            UnitPoint::Interior(z) => z,
            UnitPoint::Boundary(a) => Complex64::from_polar(1.0, a),
        }
    }

    pub fn is_boundary(&self) -> bool {
        matches!(self, UnitPoint::Boundary(_))
    }

    pub fn angle(&self) -> f64 {
        match *self {
            UnitPoint::Interior(z) => normalize_angle(z.arg()),
            UnitPoint::Boundary(a) => a,
        }
    }

    pub fn modulus(&self) -> f64 {
        match *self {
            UnitPoint::Interior(z) => z.norm(),
            UnitPoint::Boundary(_) => 1.0,
        }
    }

    /// Equality up to [`ANGLE_TOL`] for boundary points, exact otherwise.
    pub fn same_as(&self, other: &UnitPoint) -> bool {
        match (*self, *other) {
            (UnitPoint::Interior(a), UnitPoint::Interior(b)) => a == b,
            (UnitPoint::Boundary(a), UnitPoint::Boundary(b)) => angle_distance(a, b) <= ANGLE_TOL,
            _ => false,
        }
    }
}

/// A point mass `mass · δ_τ` of the singular measure, with `τ = e^{i·angle}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingularAtom {
    pub angle: f64,
    pub mass: f64,
}

impl SingularAtom {
    pub fn point(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InnerFunctionRepr {
    #[serde(default)]
    blaschke_zeros: Vec<Complex64>,
    #[serde(default)]
    singular_atoms: Vec<SingularAtom>,
}

/// Finite Blaschke product times an atomic singular inner factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InnerFunctionRepr", into = "InnerFunctionRepr")]
pub struct InnerFunction {
    zeros: Vec<Complex64>,
    atoms: Vec<SingularAtom>,
}

impl TryFrom<InnerFunctionRepr> for InnerFunction {
    type Error = Error;

    fn try_from(r: InnerFunctionRepr) -> Result<Self> {
        InnerFunction::new(r.blaschke_zeros, r.singular_atoms)
    }
}

impl From<InnerFunction> for InnerFunctionRepr {
    fn from(f: InnerFunction) -> Self {
        InnerFunctionRepr {
            blaschke_zeros: f.zeros,
            singular_atoms: f.atoms,
        }
    }
}

/// Squared kernel norm; `Infinite` when the boundary sum diverges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelNormSq {
    Finite(f64),
    Infinite,
}

impl KernelNormSq {
    pub fn value(self) -> f64 {
        match self {
            KernelNormSq::Finite(v) => v,
            KernelNormSq::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, KernelNormSq::Finite(_))
    }
}

fn blaschke_factor(eta: Complex64, z: Complex64) -> Complex64 {
    if eta == Complex64::new(0.0, 0.0) {
        return z;
    }
    let unimodular = eta.norm() / eta;
    unimodular * (eta - z) / (1.0 - eta.conj() * z)
}

fn blaschke_factor_derivative(eta: Complex64, z: Complex64) -> Complex64 {
    if eta == Complex64::new(0.0, 0.0) {
        return Complex64::new(1.0, 0.0);
    }
    let unimodular = eta.norm() / eta;
    let d = 1.0 - eta.conj() * z;
    unimodular * (eta.norm_sqr() - 1.0) / (d * d)
}

impl InnerFunction {
    pub fn new(zeros: Vec<Complex64>, atoms: Vec<SingularAtom>) -> Result<Self> {
        for z in &zeros {
            if !(z.re.is_finite() && z.im.is_finite()) || z.norm() >= 1.0 {
                return Err(invalid(format!("Blaschke zero {z} must lie in the open disk")));
            }
        }
        let mut normalized = Vec::with_capacity(atoms.len());
        for a in &atoms {
            if !a.angle.is_finite() || !(a.mass > 0.0 && a.mass.is_finite()) {
                return Err(invalid(format!(
                    "singular atom (angle {}, mass {}) needs a finite angle and positive mass",
                    a.angle, a.mass
                )));
            }
            let angle = normalize_angle(a.angle);
            if normalized
                .iter()
                .any(|b: &SingularAtom| angle_distance(b.angle, angle) <= ANGLE_TOL)
            {
                return Err(invalid(format!("duplicate singular atom at angle {angle}")));
            }
            normalized.push(SingularAtom { angle, mass: a.mass });
        }
        Ok(InnerFunction {
            zeros,
            atoms: normalized,
        })
    }

    pub fn blaschke(zeros: Vec<Complex64>) -> Result<Self> {
        InnerFunction::new(zeros, Vec::new())
    }

    /// `Θ(z) = z^n`.
    pub fn power(n: usize) -> Self {
        InnerFunction {
            zeros: vec![Complex64::new(0.0, 0.0); n],
            atoms: Vec::new(),
        }
    }

    /// `Θ ≡ 1`; its model space is trivial but the evaluators still work.
    pub fn constant() -> Self {
        InnerFunction {
            zeros: Vec::new(),
            atoms: Vec::new(),
        }
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn atoms(&self) -> &[SingularAtom] {
        &self.atoms
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_constant(&self) -> bool {
        self.zeros.is_empty() && self.atoms.is_empty()
    }

    /// Blaschke product with the given zeros followed by the singular factor.
    /// No spectrum checks.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for &eta in &self.zeros {
            acc *= blaschke_factor(eta, z);
        }
        if !self.atoms.is_empty() {
            acc *= self.singular_factor(z);
        }
        acc
    }

    fn singular_exponent(&self, z: Complex64) -> Complex64 {
        self.atoms
            .iter()
            .map(|a| {
                let tau = a.point();
                a.mass * (tau + z) / (tau - z)
            })
            .sum()
    }

    fn singular_factor(&self, z: Complex64) -> Complex64 {
        (-self.singular_exponent(z)).exp()
    }

    /// Complex derivative `Θ'(z)` by the product rule. No spectrum checks.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let n = self.zeros.len();
        let factors: Vec<Complex64> = self.zeros.iter().map(|&e| blaschke_factor(e, z)).collect();
        // suffix[j] = ∏_{i >= j} b_i
        let mut suffix = vec![Complex64::new(1.0, 0.0); n + 1];
        for j in (0..n).rev() {
            suffix[j] = suffix[j + 1] * factors[j];
        }
        let mut prefix = Complex64::new(1.0, 0.0);
        let mut b_prime = Complex64::new(0.0, 0.0);
        for j in 0..n {
            b_prime += prefix * blaschke_factor_derivative(self.zeros[j], z) * suffix[j + 1];
            prefix *= factors[j];
        }
        let b = suffix[0];
        if self.atoms.is_empty() {
            return b_prime;
        }
        let s = self.singular_factor(z);
        let log_s_prime: Complex64 = self
            .atoms
            .iter()
            .map(|a| {
                let tau = a.point();
                -2.0 * a.mass * tau / ((tau - z) * (tau - z))
            })
            .sum();
        b_prime * s + b * s * log_s_prime
    }

    fn atom_at(&self, angle: f64) -> Option<&SingularAtom> {
        self.atoms
            .iter()
            .find(|a| angle_distance(a.angle, angle) <= ANGLE_TOL)
    }

    fn check_off_atoms(&self, p: &UnitPoint) -> Result<()> {
        if let UnitPoint::Boundary(a) = *p {
            if self.atom_at(a).is_some() {
                return Err(Error::OnSpectrum {
                    what: format!("at angle {a}"),
                });
            }
        }
        Ok(())
    }

    /// `Θ(z)`; errors on singular atoms.
    pub fn eval_inner(&self, z: &UnitPoint) -> Result<Complex64> {
        self.check_off_atoms(z)?;
        Ok(match *z {
            UnitPoint::Boundary(a) => self.eval_boundary(a),
            UnitPoint::Interior(w) => self.eval(w),
        })
    }

    /// `Θ(e^{iθ})` away from atoms. The singular factor is evaluated as
    /// `exp(-i Σ m cot((θ - t)/2))` so that its modulus stays exactly 1.
    pub fn eval_boundary(&self, angle: f64) -> Complex64 {
        let zeta = Complex64::from_polar(1.0, angle);
        let mut acc = Complex64::new(1.0, 0.0);
        for &eta in &self.zeros {
            acc *= blaschke_factor(eta, zeta);
        }
        if !self.atoms.is_empty() {
            let phase: f64 = self
                .atoms
                .iter()
                .map(|a| a.mass / ((angle - a.angle) / 2.0).tan())
                .sum();
            acc *= Complex64::from_polar(1.0, -phase);
        }
        acc
    }

    /// Angular derivative of the argument at `e^{iθ}`: the Blaschke sum plus
    /// twice the atom sum. `+∞` at an atom.
    pub fn boundary_derivative_at(&self, angle: f64) -> f64 {
        if self.atom_at(angle).is_some() {
            return f64::INFINITY;
        }
        let zeta = Complex64::from_polar(1.0, angle);
        let blaschke: f64 = self
            .zeros
            .iter()
            .map(|&z| (1.0 - z.norm_sqr()) / (zeta - z).norm_sqr())
            .sum();
        let singular: f64 = self
            .atoms
            .iter()
            .map(|a| 2.0 * a.mass / (zeta - a.point()).norm_sqr())
            .sum();
        blaschke + singular
    }

    /// `|Θ'(ζ)|` for a boundary point.
    pub fn boundary_derivative(&self, zeta: &UnitPoint) -> Result<KernelNormSq> {
        match *zeta {
            UnitPoint::Boundary(a) => {
                let v = self.boundary_derivative_at(a);
                Ok(if v.is_finite() {
                    KernelNormSq::Finite(v)
                } else {
                    KernelNormSq::Infinite
                })
            }
            UnitPoint::Interior(z) => Err(invalid(format!(
                "boundary derivative requested at interior point {z}"
            ))),
        }
    }

    /// `‖k_λ‖²`: `(1 - |Θ(λ)|²)/(1 - |λ|²)` inside, `|Θ'(λ)|` on the circle.
    pub fn kernel_norm_sq(&self, lambda: &UnitPoint) -> Result<KernelNormSq> {
        match *lambda {
            UnitPoint::Interior(l) => {
                let t = self.eval(l);
                Ok(KernelNormSq::Finite(
                    (1.0 - t.norm_sqr()) / (1.0 - l.norm_sqr()),
                ))
            }
            UnitPoint::Boundary(_) => {
                self.check_off_atoms(lambda)?;
                self.boundary_derivative(lambda)
            }
        }
    }

    /// `k_λ(z) = (1 - conj(Θ(λ))Θ(z)) / (1 - λ̄z)`, i.e. `⟨k_λ, k_z⟩`.
    pub fn kernel(&self, lambda: &UnitPoint, z: &UnitPoint) -> Result<Complex64> {
        self.check_off_atoms(lambda)?;
        self.check_off_atoms(z)?;
        if lambda.same_as(z) {
            return Ok(Complex64::new(self.kernel_norm_sq(lambda)?.value(), 0.0));
        }
        let l = lambda.value();
        let w = z.value();
        let denom = 1.0 - l.conj() * w;
        if denom.norm() < 1e-14 {
            return Err(Error::Numerical(format!(
                "kernel denominator vanishes for λ = {l}, z = {w}"
            )));
        }
        let num = 1.0 - self.eval(l).conj() * self.eval(w);
        Ok(num / denom)
    }

    /// Euclidean distance from `w` to the zeros and atoms; `+∞` for constant Θ.
    pub fn spectrum_distance(&self, w: &UnitPoint) -> f64 {
        let p = w.value();
        let zeros = self.zeros.iter().map(|&z| (p - z).norm());
        let atoms = self.atoms.iter().map(|a| match *w {
            UnitPoint::Boundary(angle) => 2.0 * (angle_distance(angle, a.angle) / 2.0).sin(),
            UnitPoint::Interior(_) => (p - a.point()).norm(),
        });
        zeros.chain(atoms).fold(f64::INFINITY, f64::min)
    }

    /// Whether `w` is one of the zeros or atoms (up to the point tolerances).
    pub fn on_spectrum(&self, w: &UnitPoint) -> bool {
        match *w {
            UnitPoint::Boundary(a) => self.atom_at(a).is_some(),
            UnitPoint::Interior(p) => self.zeros.iter().any(|&z| (p - z).norm() <= BOUNDARY_TOL),
        }
    }

    /// `‖k_{rζ}‖² / |Θ'(ζ)|` for `ζ = e^{i·angle}` and `0 <= r < 1`.
    pub fn radial_norm_ratio(&self, angle: f64, r: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&r) {
            return Err(invalid(format!("radius {r} outside [0, 1)")));
        }
        let deriv = self.boundary_derivative_at(angle);
        if !deriv.is_finite() {
            return Err(Error::OnSpectrum {
                what: format!("at angle {angle}"),
            });
        }
        let p = UnitPoint::Interior(Complex64::from_polar(r, angle));
        Ok(self.kernel_norm_sq(&p)?.value() / deriv)
    }

    /// Upper bound for `|Θ'|` on the circle, finite only without atoms.
    pub(crate) fn boundary_derivative_bound(&self) -> f64 {
        if !self.atoms.is_empty() {
            return f64::INFINITY;
        }
        self.zeros
            .iter()
            .map(|z| {
                let r = z.norm();
                (1.0 + r) / (1.0 - r)
            })
            .sum()
    }
}

/// Principal value of `arg(b / a)` for unimodular-ish `a, b`, in `(-π, π]`.
pub(crate) fn arg_increment(a: Complex64, b: Complex64) -> f64 {
    let v = (b * a.conj()).arg();
    if v <= -PI {
        v + TAU
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ip(re: f64, im: f64) -> UnitPoint {
        UnitPoint::interior(c(re, im)).unwrap()
    }

    #[test]
    fn eval_examples() {
        let z = InnerFunction::power(1);
        assert_eq!(z.eval_inner(&ip(0.5, 0.0)).unwrap(), c(0.5, 0.0));

        let b = InnerFunction::blaschke(vec![c(0.5, 0.0)]).unwrap();
        let v = b.eval_inner(&ip(0.0, 0.0)).unwrap();
        assert!((v - c(0.5, 0.0)).norm() < 1e-15);

        let s = InnerFunction::new(vec![], vec![SingularAtom { angle: 0.0, mass: 1.0 }]).unwrap();
        let v = s.eval_inner(&ip(-0.5, 0.0)).unwrap();
        assert!((v.re - 0.716_531_310_573_789_2).abs() < 1e-12);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn eval_at_atom_is_on_spectrum() {
        let s = InnerFunction::new(vec![], vec![SingularAtom { angle: 1.0, mass: 0.3 }]).unwrap();
        let err = s.eval_inner(&UnitPoint::boundary(1.0)).unwrap_err();
        assert!(matches!(err, Error::OnSpectrum { .. }));
        assert_eq!(
            s.boundary_derivative(&UnitPoint::boundary(1.0)).unwrap(),
            KernelNormSq::Infinite
        );
        assert!(s.kernel_norm_sq(&UnitPoint::boundary(1.0)).is_err());
    }

    #[test]
    fn construction_rejects_bad_data() {
        assert!(InnerFunction::blaschke(vec![c(1.0, 0.0)]).is_err());
        assert!(InnerFunction::new(vec![], vec![SingularAtom { angle: 0.0, mass: 0.0 }]).is_err());
        let dup = vec![
            SingularAtom { angle: 0.5, mass: 1.0 },
            SingularAtom { angle: 0.5 + TAU, mass: 2.0 },
        ];
        assert!(InnerFunction::new(vec![], dup).is_err());
        assert!(UnitPoint::new(c(1.1, 0.0)).is_err());
        assert!(UnitPoint::new(c(1.0, 1e-16)).unwrap().is_boundary());
    }

    #[test]
    fn kernel_examples() {
        let t = InnerFunction::power(2);
        let half = ip(0.5, 0.0);
        let k = t.kernel(&half, &half).unwrap();
        assert!((k.re - 1.25).abs() < 1e-15);
        assert_eq!(t.kernel_norm_sq(&half).unwrap(), KernelNormSq::Finite(k.re));

        let b = InnerFunction::blaschke(vec![c(0.0, 0.0), c(0.3, 0.4)]).unwrap();
        let origin = ip(0.0, 0.0);
        assert_eq!(b.kernel(&origin, &origin).unwrap(), c(1.0, 0.0));

        let cube = InnerFunction::power(3);
        let tau = UnitPoint::boundary(0.0);
        let sigma = UnitPoint::boundary(TAU / 3.0);
        assert!(cube.kernel(&tau, &sigma).unwrap().norm() < 1e-15);
    }

    #[test]
    fn kernel_is_hermitian() {
        let b = InnerFunction::new(
            vec![c(0.2, -0.5), c(-0.7, 0.1)],
            vec![SingularAtom { angle: 2.0, mass: 0.4 }],
        )
        .unwrap();
        let pts = [ip(0.1, 0.2), ip(-0.8, 0.3), UnitPoint::boundary(0.7), ip(0.0, -0.95)];
        for p in &pts {
            for q in &pts {
                let a = b.kernel(p, q).unwrap();
                let bb = b.kernel(q, p).unwrap().conj();
                assert!((a - bb).norm() < 1e-12 * (1.0 + a.norm()));
            }
        }
    }

    #[test]
    fn kernel_norm_matches_quadrature() {
        // ‖k_λ‖² = ∫ |k_λ|² dm by the trapezoid rule on 2^14 nodes.
        let cases = [
            (InnerFunction::power(2), c(0.5, 0.0)),
            (InnerFunction::blaschke(vec![c(0.3, 0.6), c(-0.5, 0.0)]).unwrap(), c(0.1, -0.4)),
        ];
        for (t, l) in cases {
            let lambda = UnitPoint::Interior(l);
            let m = 1 << 14;
            let quad: f64 = (0..m)
                .map(|j| {
                    let w = UnitPoint::boundary(TAU * j as f64 / m as f64);
                    t.kernel(&lambda, &w).unwrap().norm_sqr()
                })
                .sum::<f64>()
                / m as f64;
            let exact = t.kernel_norm_sq(&lambda).unwrap().value();
            assert!((quad - exact).abs() < 1e-8, "{quad} vs {exact}");
        }
        assert_eq!(
            InnerFunction::power(2).kernel_norm_sq(&ip(0.5, 0.0)).unwrap(),
            KernelNormSq::Finite(1.25)
        );
    }

    #[test]
    fn boundary_derivative_examples() {
        let b = InnerFunction::blaschke(vec![c(0.5, 0.0), c(-0.5, 0.0)]).unwrap();
        let v = b.boundary_derivative(&UnitPoint::boundary(PI / 2.0)).unwrap().value();
        assert!((v - 1.2).abs() < 1e-14);

        let p = InnerFunction::power(5);
        for a in [0.0, 1.0, 4.0] {
            assert!((p.boundary_derivative_at(a) - 5.0).abs() < 1e-14);
            assert!((p.kernel_norm_sq(&UnitPoint::boundary(a)).unwrap().value() - 5.0).abs() < 1e-14);
        }

        let s = InnerFunction::new(vec![], vec![SingularAtom { angle: 0.0, mass: 1.0 }]).unwrap();
        assert!((s.boundary_derivative_at(PI) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn boundary_derivative_matches_argument_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let zeros: Vec<Complex64> = (0..rng.gen_range(1..7))
                .map(|_| Complex64::from_polar(rng.gen_range(0.0..0.9), rng.gen_range(0.0..TAU)))
                .collect();
            let t = InnerFunction::blaschke(zeros).unwrap();
            for _ in 0..20 {
                let a: f64 = rng.gen_range(0.0..TAU);
                let h = 1e-5;
                let lo = t.eval(Complex64::from_polar(1.0, a - h));
                let hi = t.eval(Complex64::from_polar(1.0, a + h));
                let fd = arg_increment(lo, hi) / (2.0 * h);
                let exact = t.boundary_derivative_at(a);
                assert!(((fd - exact) / exact).abs() < 1e-6, "{fd} vs {exact}");
            }
        }
    }

    #[test]
    fn complex_derivative_matches_finite_differences() {
        let t = InnerFunction::new(
            vec![c(0.2, -0.5), c(0.0, 0.0), c(-0.7, 0.1)],
            vec![SingularAtom { angle: 2.0, mass: 0.4 }],
        )
        .unwrap();
        for z in [c(0.1, 0.2), c(-0.5, -0.5), c(0.0, 0.9)] {
            let h = 1e-6;
            let fd = (t.eval(z + h) - t.eval(z - h)) / (2.0 * h);
            assert!((fd - t.derivative(z)).norm() < 1e-7 * (1.0 + fd.norm()));
        }
        // |Θ'| on the circle is the angular derivative of the argument.
        for a in [0.3, 1.7, 5.0] {
            let d = t.derivative(Complex64::from_polar(1.0, a)).norm();
            assert!((d - t.boundary_derivative_at(a)).abs() < 1e-10 * d);
        }
    }

    #[test]
    fn modulus_contract() {
        let t = InnerFunction::new(
            vec![c(0.2, -0.5), c(-0.7, 0.1)],
            vec![SingularAtom { angle: 2.0, mass: 0.4 }],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let z = Complex64::from_polar(rng.gen_range(0.0..0.999), rng.gen_range(0.0..TAU));
            assert!(t.eval(z).norm() < 1.0);
            let a = rng.gen_range(0.0..TAU);
            let v = t.eval_inner(&UnitPoint::boundary(a)).unwrap();
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reproducing_property_for_polynomials() {
        // K_{z^N} is the polynomials of degree < N.
        let n = 6;
        let t = InnerFunction::power(n);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = 256;
        for _ in 0..10 {
            let coeffs: Vec<Complex64> = (0..n)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let f = |z: Complex64| coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a);
            let lambda = UnitPoint::Interior(Complex64::from_polar(rng.gen_range(0.0..0.9), rng.gen_range(0.0..TAU)));
            let quad: Complex64 = (0..m)
                .map(|j| {
                    let w = UnitPoint::boundary(TAU * j as f64 / m as f64);
                    f(w.value()) * t.kernel(&lambda, &w).unwrap().conj()
                })
                .sum::<Complex64>()
                / m as f64;
            assert!((quad - f(lambda.value())).norm() < 1e-10);
        }
    }

    #[test]
    fn spectrum_distance_examples() {
        assert_eq!(InnerFunction::power(1).spectrum_distance(&ip(0.5, 0.0)), 0.5);
        let s = InnerFunction::new(vec![], vec![SingularAtom { angle: 0.0, mass: 1.0 }]).unwrap();
        assert!((s.spectrum_distance(&UnitPoint::boundary(PI)) - 2.0).abs() < 1e-15);
        let b = InnerFunction::blaschke(vec![c(0.0, 0.5), c(0.0, -0.5)]).unwrap();
        let d = b.spectrum_distance(&UnitPoint::boundary(0.0));
        assert!((d - 1.25f64.sqrt()).abs() < 1e-15);
        assert_eq!(InnerFunction::constant().spectrum_distance(&ip(0.1, 0.0)), f64::INFINITY);
    }

    #[test]
    fn aleksandrov_ratio_stays_finite() {
        // |Θ'(τ)|^{-1} / dist(τ, ρ(Θ)) over a dense boundary grid.
        let corpus = [
            InnerFunction::new(vec![c(0.9, 0.0)], vec![SingularAtom { angle: 2.0, mass: 0.5 }]).unwrap(),
            InnerFunction::blaschke(vec![c(0.99, 0.0), c(0.0, -0.95)]).unwrap(),
            InnerFunction::new(
                vec![],
                vec![SingularAtom { angle: 0.0, mass: 1.0 }, SingularAtom { angle: 3.0, mass: 0.1 }],
            )
            .unwrap(),
        ];
        for t in &corpus {
            let mut sup = 0.0f64;
            for j in 0..20_000 {
                let a = TAU * (j as f64 + 0.5) / 20_000.0;
                let p = UnitPoint::boundary(a);
                let ratio = 1.0 / t.boundary_derivative_at(a) / t.spectrum_distance(&p);
                sup = sup.max(ratio);
            }
            assert!(sup.is_finite() && sup < 1e3, "sup ratio {sup}");
        }
    }

    #[test]
    fn serde_shape() {
        let t = InnerFunction::new(vec![c(0.5, -0.25)], vec![SingularAtom { angle: 1.5, mass: 2.0 }]).unwrap();
        let js = serde_json::to_string(&t).unwrap();
        assert_eq!(
            js,
            r#"{"blaschke_zeros":[[0.5,-0.25]],"singular_atoms":[{"angle":1.5,"mass":2.0}]}"#
        );
        let back: InnerFunction = serde_json::from_str(&js).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<InnerFunction>(r#"{"blaschke_zeros":[[2.0,0.0]]}"#).is_err());
        assert!(serde_json::from_str::<InnerFunction>(r#"{"zeros":[]}"#).is_err());
    }
}
