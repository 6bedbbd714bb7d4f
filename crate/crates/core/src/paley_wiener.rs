//! Exponential systems `e_λ(t) = e^{iλt}` in `L²(-a, a)`.
//!
//! Gram matrices are exact here. The splitting step moves the
//! frequencies up by `i`, transports them to the disk by the Cayley map
//! `w = (z - i)/(z + i)` and runs the interpolation engine with
//! `γ = max_n e^{-a Im(λ_n + i)}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::carleson::PointSequence;
use crate::decompose::{interpolation_parts, threshold_for, Certificate, GlobalInfo, Part, Partition, Route, SplitOptions};
use crate::error::{invalid, Result};
use crate::gram::{extremal_eigs, FrameBounds, GramMatrix};
use crate::inner::UnitPoint;
use crate::linalg::CMatrix;

const SERIES_CUTOFF: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpSystem {
    pub a: f64,
    pub freqs: Vec<Complex64>,
}

impl ExpSystem {
    pub fn new(a: f64, freqs: Vec<Complex64>) -> Result<Self> {
        let s = ExpSystem { a, freqs };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(invalid(format!("half-length a = {} must be positive", self.a)));
        }
        for (k, f) in self.freqs.iter().enumerate() {
            if !(f.re.is_finite() && f.im.is_finite()) || f.im < 0.0 {
                return Err(invalid(format!("frequency {k} = {f} must be finite with Im >= 0")));
            }
        }
        let mut sorted: Vec<(Complex64, usize)> = self.freqs.iter().copied().zip(0..).collect();
        sorted.sort_by(|x, y| x.0.re.total_cmp(&y.0.re).then(x.0.im.total_cmp(&y.0.im)));
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(invalid(format!("frequencies {} and {} coincide", w[0].1, w[1].1)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn subsystem(&self, positions: &[usize]) -> ExpSystem {
        ExpSystem {
            a: self.a,
            freqs: positions.iter().map(|&p| self.freqs[p]).collect(),
        }
    }
}

/// `∫_{-a}^{a} e^{iλt} conj(e^{iμt}) dt = 2 sin(a w)/w` with `w = λ - μ̄`.
pub fn exp_inner(a: f64, lambda: Complex64, mu: Complex64) -> Complex64 {
    let w = lambda - mu.conj();
    let aw = a * w;
    if aw.norm() < SERIES_CUTOFF {
        let s = aw * aw;
        2.0 * a * (1.0 - s / 6.0 + s * s / 120.0)
    } else {
        2.0 * aw.sin() / w
    }
}

/// `‖e_λ‖²`.
pub fn exp_norm_sq(a: f64, lambda: Complex64) -> f64 {
    exp_inner(a, lambda, lambda).re
}

/// Normalized Gram matrix, ids `0..n`.
pub fn pw_gram(system: &ExpSystem) -> Result<GramMatrix> {
    system.validate()?;
    let a = system.a;
    let f = &system.freqs;
    let norms: Vec<f64> = f.iter().map(|&l| exp_norm_sq(a, l).sqrt()).collect();
    let n = f.len();
    let mut m = CMatrix::identity(n);
    for i in 0..n {
        for j in i + 1..n {
            let v = exp_inner(a, f[j], f[i]) / (norms[i] * norms[j]);
            m.set(i, j, v);
            m.set(j, i, v.conj());
        }
    }
    GramMatrix::from_entries(m, (0..n as u64).collect())
}

pub fn pw_frame_bounds(system: &ExpSystem) -> Result<FrameBounds> {
    extremal_eigs(&pw_gram(system)?)
}

/// `{λ_n + i}`.
pub fn shift_to_condition2(freqs: &[Complex64]) -> Result<Vec<Complex64>> {
    if let Some(f) = freqs.iter().find(|f| f.im < 0.0) {
        return Err(invalid(format!("frequency {f} has negative imaginary part")));
    }
    Ok(freqs.iter().map(|&f| f + Complex64::i()).collect())
}

/// `|Θ_a(z)| = |e^{iaz}| = e^{-a Im z}`.
pub fn theta_a(a: f64, z: Complex64) -> Complex64 {
    (Complex64::i() * a * z).exp()
}

pub fn theta_a_modulus(a: f64, z: Complex64) -> f64 {
    (-a * z.im).exp()
}

/// `w = (z - i)/(z + i)`.
pub fn cayley(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    (z - i) / (z + i)
}

/// `z = i(1 + w)/(1 - w)`.
pub fn cayley_inverse(w: Complex64) -> Complex64 {
    Complex64::i() * (1.0 + w) / (1.0 - w)
}

/// `Θ_a` transported to the disk.
pub fn transported_modulus(a: f64, w: Complex64) -> f64 {
    theta_a_modulus(a, cayley_inverse(w))
}

/// Interpolation-route split of the shifted system; each part also carries
/// the exact Gram bounds of its unshifted frequencies.
pub fn pw_split(system: &ExpSystem, opts: &SplitOptions) -> Result<Partition> {
    system.validate()?;
    if system.is_empty() {
        return Err(invalid("cannot split an empty system"));
    }
    let shifted = shift_to_condition2(&system.freqs)?;
    // λ + i ↦ λ/(λ + 2i), written this way to avoid cancellation
    let disk: Vec<UnitPoint> = system
        .freqs
        .iter()
        .map(|&l| UnitPoint::interior(l / (l + 2.0 * Complex64::i())))
        .collect::<Result<_>>()?;
    let seq = PointSequence::new(disk)?;
    let gamma = shifted
        .iter()
        .map(|&z| theta_a_modulus(system.a, z))
        .fold(0.0, f64::max);
    let parts = interpolation_parts(&seq, gamma, opts)?;
    let parts = opts.exec.try_map_range(parts.len(), |k| {
        let p = &parts[k];
        let positions: Vec<usize> = p.seq.ids().iter().map(|&id| id as usize).collect();
        let frame_bounds = pw_frame_bounds(&system.subsystem(&positions))?;
        Ok(Part {
            ids: p.seq.ids().to_vec(),
            route: Route::Interpolation,
            certificate: Certificate {
                delta: Some(p.delta),
                gamma: Some(gamma),
                earl_value: Some(p.earl_value),
                dist_bound: Some(p.dist_bound),
                frame_bounds,
                stability: None,
            },
        })
    })?;
    Ok(Partition {
        parts,
        global: GlobalInfo {
            gamma: Some(gamma),
            delta_star: Some(threshold_for(gamma)?),
            ..GlobalInfo::default()
        },
    })
}
