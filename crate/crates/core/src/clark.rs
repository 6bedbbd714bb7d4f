//! Clark level sets `{ζ ∈ T : Θ(ζ) = α}`, their weights, and the
//! perturbation diagnostics built on them.
//!
//! Roots are found by bisection on a continuous, increasing branch of
//! `θ ↦ arg Θ(e^{iθ})`, so every root inside an arc is bracketed and none
//! is missed.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::carleson::PointSequence;
use crate::error::{invalid, Error, Result};
use crate::inner::{arg_increment, normalize_angle, InnerFunction, UnitPoint, ANGLE_TOL};
use crate::quad;

/// Default cap on the number of level points found between two atoms.
pub const DEFAULT_MAX_PER_ARC: usize = 512;

const MIN_SAMPLES: usize = 16;
const MAX_SAMPLES: usize = 1 << 20;
const MIN_WIDTH: f64 = 1e-14;

/// A continuous increasing branch of `arg Θ(e^{iθ})` on an arc.
#[derive(Debug, Clone)]
pub struct ArgBranch {
    thetas: Vec<f64>,
    args: Vec<f64>,
    values: Vec<Complex64>,
}

impl ArgBranch {
    pub fn start(&self) -> f64 {
        self.thetas[0]
    }

    pub fn end(&self) -> f64 {
        *self.thetas.last().unwrap()
    }

    pub fn total_increase(&self) -> f64 {
        self.args.last().unwrap() - self.args[0]
    }

    /// Sample angles and branch values.
    pub fn samples(&self) -> (&[f64], &[f64]) {
        (&self.thetas, &self.args)
    }

    fn locate(&self, theta: f64) -> usize {
        let i = self.thetas.partition_point(|&t| t <= theta);
        i.saturating_sub(1).min(self.thetas.len() - 2)
    }

    /// Branch value at an angle inside the arc.
    pub fn arg_at(&self, theta_fn: &InnerFunction, theta: f64) -> f64 {
        let i = self.locate(theta);
        self.args[i] + arg_increment(self.values[i], theta_fn.eval(Complex64::from_polar(1.0, theta)))
    }

    /// The angle in `[thetas[i], thetas[i+1]]` where the branch equals `target`.
    fn solve(&self, theta_fn: &InnerFunction, target: f64) -> f64 {
        let i = self.args.partition_point(|&a| a <= target).saturating_sub(1);
        let i = i.min(self.thetas.len() - 2);
        let (mut lo, mut hi) = (self.thetas[i], self.thetas[i + 1]);
        let base = self.values[i];
        let offset = target - self.args[i];
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let g = arg_increment(base, theta_fn.eval(Complex64::from_polar(1.0, mid)));
            if g < offset {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn atom_inside(theta: &InnerFunction, start: f64, end: f64) -> Option<f64> {
    let len = end - start;
    theta
        .atoms()
        .iter()
        .map(|a| a.angle)
        .find(|&a| normalize_angle(a - start) <= len + ANGLE_TOL || normalize_angle(start - a) <= ANGLE_TOL)
}

struct Sampler<'a> {
    theta: &'a InnerFunction,
    thetas: Vec<f64>,
    args: Vec<f64>,
    values: Vec<Complex64>,
}

impl Sampler<'_> {
    fn at(&self, t: f64) -> Complex64 {
        self.theta.eval(Complex64::from_polar(1.0, t))
    }

    /// Appends samples in `(a, b]`, splitting until the increment is small,
    /// agrees with the midpoint route, and matches the integrated rate.
    fn push(&mut self, a: f64, b: f64, va: Complex64, vb: Complex64) -> Result<()> {
        let m = 0.5 * (a + b);
        let vm = self.at(m);
        let d = arg_increment(va, vb);
        let d1 = arg_increment(va, vm);
        let d2 = arg_increment(vm, vb);
        let rate = |t: f64| self.theta.boundary_derivative_at(t);
        let simpson = (b - a) / 6.0 * (rate(a) + 4.0 * rate(m) + rate(b));
        let ok = d > -1e-15
            && d < FRAC_PI_4
            && (d1 + d2 - d).abs() <= 1e-9
            && (simpson - d).abs() <= 0.25 * d.abs() + 1e-9;
        if ok {
            let last = *self.args.last().unwrap();
            self.thetas.push(b);
            self.args.push(last + d.max(0.0));
            self.values.push(vb);
            if self.thetas.len() > MAX_SAMPLES {
                return Err(Error::Numerical("argument branch needs too many samples".into()));
            }
            return Ok(());
        }
        if b - a < MIN_WIDTH {
            return Err(Error::Numerical(format!(
                "argument branch cannot be resolved near angle {a}"
            )));
        }
        self.push(a, m, va, vm)?;
        self.push(m, b, vm, vb)
    }
}

/// Tracks `arg Θ(e^{iθ})` continuously over `[start, end]`.
///
/// The arc must avoid the atoms of `Θ`; `end - start` may be up to `2π`.
pub fn build_arg_branch(theta: &InnerFunction, start: f64, end: f64) -> Result<ArgBranch> {
    if !(start.is_finite() && end.is_finite()) || end <= start || end - start > TAU + 1e-12 {
        return Err(invalid(format!("bad arc [{start}, {end}]")));
    }
    if let Some(a) = atom_inside(theta, start, end) {
        return Err(Error::OnSpectrum {
            what: format!("atom at angle {a} inside the arc [{start}, {end}]"),
        });
    }
    let len = end - start;
    let bound = theta.boundary_derivative_bound();
    let k = if bound.is_finite() {
        ((bound * len / (PI / 8.0)).ceil() as usize).clamp(MIN_SAMPLES, MAX_SAMPLES / 4)
    } else {
        4 * MIN_SAMPLES
    };
    let v0 = theta.eval(Complex64::from_polar(1.0, start));
    let mut s = Sampler {
        theta,
        thetas: vec![start],
        args: vec![v0.arg()],
        values: vec![v0],
    };
    let mut a = start;
    let mut va = v0;
    for j in 1..=k {
        let b = if j == k { end } else { start + len * j as f64 / k as f64 };
        let vb = s.at(b);
        s.push(a, b, va, vb)?;
        a = b;
        va = vb;
    }
    Ok(ArgBranch {
        thetas: s.thetas,
        args: s.args,
        values: s.values,
    })
}

/// The level set `{Θ = α}` with its Clark weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClarkFamily {
    pub alpha: Complex64,
    /// Angles in `[0, 2π)`, increasing.
    pub points: Vec<f64>,
    pub derivs: Vec<f64>,
    pub weights: Vec<f64>,
    /// Set when the level set is infinite and only part of it was found.
    pub truncated: bool,
}

impl ClarkFamily {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn unit_points(&self) -> Vec<UnitPoint> {
        self.points.iter().map(|&a| UnitPoint::boundary(a)).collect()
    }

    /// The level points as a sequence with ids `0..n`.
    pub fn sequence(&self) -> Result<PointSequence> {
        PointSequence::new(self.unit_points())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClarkOptions {
    pub max_per_arc: usize,
}

impl Default for ClarkOptions {
    fn default() -> Self {
        ClarkOptions {
            max_per_arc: DEFAULT_MAX_PER_ARC,
        }
    }
}

/// Level points of `branch` with `arg Θ ≡ arg α (mod 2π)`.
///
/// On a closed circle the count is the rounded number of turns; on an open
/// arc every target strictly below the final branch value is taken.
fn branch_roots(theta: &InnerFunction, branch: &ArgBranch, alpha_arg: f64, closed: bool) -> Vec<f64> {
    let a0 = branch.args[0];
    let first = a0 + normalize_angle(alpha_arg - a0);
    let last = *branch.args.last().unwrap();
    let targets: Vec<f64> = if closed {
        let turns = (branch.total_increase() / TAU).round() as usize;
        (0..turns).map(|k| first + TAU * k as f64).collect()
    } else {
        (0..)
            .map(|k| first + TAU * k as f64)
            .take_while(|&t| t < last)
            .collect()
    };
    targets.into_iter().map(|t| branch.solve(theta, t)).collect()
}

pub fn level_set(theta: &InnerFunction, alpha: Complex64) -> Result<ClarkFamily> {
    level_set_with(theta, alpha, &ClarkOptions::default())
}

/// All solutions of `Θ(ζ) = α` on the circle, capped near atoms.
pub fn level_set_with(theta: &InnerFunction, alpha: Complex64, opts: &ClarkOptions) -> Result<ClarkFamily> {
    if (alpha.norm() - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("level α = {alpha} is not unimodular")));
    }
    if theta.is_constant() {
        return Err(invalid("level sets of a constant inner function"));
    }
    if opts.max_per_arc == 0 {
        return Err(invalid("max_per_arc must be positive"));
    }
    let alpha_arg = alpha.arg();
    let mut angles = Vec::new();
    let truncated = !theta.atoms().is_empty();
    if !truncated {
        let branch = build_arg_branch(theta, 0.0, TAU)?;
        angles = branch_roots(theta, &branch, alpha_arg, true);
    } else {
        let mut atoms = theta.atoms().to_vec();
        atoms.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        for (k, left) in atoms.iter().enumerate() {
            let right = atoms[(k + 1) % atoms.len()];
            let mut gap = normalize_angle(right.angle - left.angle);
            if gap == 0.0 {
                gap = TAU;
            }
            let cap = opts.max_per_arc as f64;
            let mut eps_l = (2.0 * left.mass / (PI * cap)).min(gap / 4.0);
            let mut eps_r = (2.0 * right.mass / (PI * cap)).min(gap / 4.0);
            loop {
                let branch = build_arg_branch(theta, left.angle + eps_l, left.angle + gap - eps_r)?;
                let roots = branch_roots(theta, &branch, alpha_arg, false);
                if roots.len() <= opts.max_per_arc {
                    angles.extend(roots);
                    break;
                }
                eps_l = (2.0 * eps_l).min(gap / 4.0);
                eps_r = (2.0 * eps_r).min(gap / 4.0);
                if eps_l == gap / 4.0 && eps_r == gap / 4.0 {
                    let branch = build_arg_branch(theta, left.angle + eps_l, left.angle + gap - eps_r)?;
                    let mut roots = branch_roots(theta, &branch, alpha_arg, false);
                    roots.truncate(opts.max_per_arc);
                    angles.extend(roots);
                    break;
                }
            }
        }
    }
    let mut points: Vec<f64> = angles.into_iter().map(normalize_angle).collect();
    points.sort_by(f64::total_cmp);
    let derivs: Vec<f64> = points.iter().map(|&a| theta.boundary_derivative_at(a)).collect();
    let weights = derivs.iter().map(|d| 1.0 / d).collect();
    Ok(ClarkFamily {
        alpha,
        points,
        derivs,
        weights,
        truncated,
    })
}

/// Level set for `α = e^{2πi l / n}`.
pub fn level_alpha(l: usize, n: usize) -> Complex64 {
    Complex64::from_polar(1.0, TAU * (l % n) as f64 / n as f64)
}

/// `|Re((α+Θ(z))/(α-Θ(z))) - Σ a_n P_z(τ_n)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HerglotzResidual {
    pub residual: f64,
    /// False when the family was truncated, so the sum is incomplete.
    pub certifying: bool,
}

pub fn herglotz_residual(theta: &InnerFunction, family: &ClarkFamily, z: &UnitPoint) -> Result<HerglotzResidual> {
    let UnitPoint::Interior(z) = *z else {
        return Err(invalid("Herglotz residual needs an interior point"));
    };
    let t = theta.eval(z);
    let alpha = family.alpha;
    if (alpha - t).norm() < 1e-14 {
        return Err(Error::Numerical(format!("Θ({z}) equals the level α")));
    }
    let lhs = ((alpha + t) / (alpha - t)).re;
    let p = 1.0 - z.norm_sqr();
    let rhs: f64 = family
        .points
        .iter()
        .zip(&family.weights)
        .map(|(&a, &w)| w * p / (Complex64::from_polar(1.0, a) - z).norm_sqr())
        .sum();
    Ok(HerglotzResidual {
        residual: (lhs - rhs).abs(),
        certifying: !family.truncated,
    })
}

/// `|λ - τ|·|Θ'(τ)|` for a boundary point `τ = e^{i·tau}`.
pub fn stability_ratio(theta: &InnerFunction, tau: f64, lambda: &UnitPoint) -> Result<f64> {
    let d = theta.boundary_derivative_at(tau);
    if !d.is_finite() {
        return Err(Error::OnSpectrum {
            what: format!("at angle {tau}"),
        });
    }
    Ok((lambda.value() - Complex64::from_polar(1.0, tau)).norm() * d)
}

/// Per-index ratios `|λ_n - τ_n|·|Θ'(τ_n)|`; pairing is by position.
pub fn stability_margin(family: &ClarkFamily, seq: &PointSequence) -> Result<Vec<f64>> {
    if family.len() != seq.len() {
        return Err(invalid(format!(
            "{} points matched against a family of {}",
            seq.len(),
            family.len()
        )));
    }
    Ok(seq
        .points()
        .iter()
        .zip(family.points.iter().zip(&family.derivs))
        .map(|(l, (&a, &d))| (l.value() - Complex64::from_polar(1.0, a)).norm() * d)
        .collect())
}

fn segment_hits(p: Complex64, a: Complex64, b: Complex64) -> bool {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    let s = if len2 == 0.0 {
        0.0
    } else {
        ((p - a) * ab.conj()).re / len2
    };
    (a + ab * s.clamp(0.0, 1.0) - p).norm() <= 1e-14
}

fn check_vertex(theta: &InnerFunction, z: Complex64) -> Result<()> {
    let p = UnitPoint::new(z)?;
    if theta.on_spectrum(&p) {
        return Err(Error::OnSpectrum { what: format!("{z}") });
    }
    Ok(())
}

/// `∫ |Θ'(z)| |dz|` along a polyline in the closed disk.
pub fn variation_along_polyline(theta: &InnerFunction, vertices: &[Complex64]) -> Result<f64> {
    for &v in vertices {
        check_vertex(theta, v)?;
    }
    let mut total = 0.0;
    for w in vertices.windows(2) {
        let (a, b) = (w[0], w[1]);
        if let Some(z) = theta.zeros().iter().find(|&&z| segment_hits(z, a, b)) {
            return Err(Error::OnSpectrum {
                what: format!("zero {z} on the path"),
            });
        }
        let len = (b - a).norm();
        if len == 0.0 {
            continue;
        }
        total += len * quad::integrate(|s| theta.derivative(a + (b - a) * s).norm(), 0.0, 1.0, 1e-10);
    }
    Ok(total)
}

/// `∫ |Θ'|` along the straight segment from `τ` to `λ`.
pub fn variation_along_path(theta: &InnerFunction, tau: &UnitPoint, lambda: &UnitPoint) -> Result<f64> {
    if !tau.is_boundary() {
        return Err(invalid("path must start on the circle"));
    }
    variation_along_polyline(theta, &[tau.value(), lambda.value()])
}
