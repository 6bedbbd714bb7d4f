//! Independent checks of the Hankel lower bound.

use std::f64::consts::TAU;

use mslab_core::gram::hankel_distance_lb;
use mslab_core::{InnerFunction, PointSequence, SingularAtom};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// For one point `η` the antianalytic part of `Θ b̄_η` is
/// `c Σ_k η̄^k z̄^{k+1}` with `|c| = |Θ(η)|(1 - |η|²)`, so the `n × n`
/// section is rank one with norm `|Θ(η)|(1 - |η|^{2n})`.
#[test]
fn single_point_sections_are_rank_one() {
    let exact = hankel_distance_lb(&InnerFunction::power(2), &PointSequence::from_complex(&[c(0.5, 0.0)]).unwrap(), 40)
        .unwrap();
    assert!((exact.value - 0.25).abs() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let zeros: Vec<Complex64> = (0..rng.gen_range(1..5))
            .map(|_| Complex64::from_polar(rng.gen_range(0.0..0.8), rng.gen_range(0.0..TAU)))
            .collect();
        let atoms = if rng.gen_bool(0.5) {
            vec![SingularAtom {
                angle: rng.gen_range(0.0..TAU),
                mass: rng.gen_range(0.05..0.5),
            }]
        } else {
            vec![]
        };
        let theta = InnerFunction::new(zeros, atoms).unwrap();
        let eta = Complex64::from_polar(rng.gen_range(0.0..0.8), rng.gen_range(0.0..TAU));
        let s = PointSequence::from_complex(&[eta]).unwrap();
        for n in [1, 3, 10] {
            let b = hankel_distance_lb(&theta, &s, n).unwrap();
            let want = theta.eval(eta).norm() * (1.0 - eta.norm_sqr().powi(n as i32));
            assert!((b.value - want).abs() < 1e-9, "n = {n}: {} vs {want}", b.value);
        }
    }
}

/// `max_k |Θ(w_k) - B(w_k) h(w_k)|` on a grid, minimized over polynomials
/// `h` of low degree by subgradient descent. Any `h` bounds the distance
/// from above, up to the grid sampling error.
fn descent_upper_bound(theta: &InnerFunction, blaschke: &InnerFunction, degree: usize) -> f64 {
    let m = 512;
    let grid: Vec<Complex64> = (0..m).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / m as f64)).collect();
    let t: Vec<Complex64> = grid.iter().map(|&w| theta.eval(w)).collect();
    let b: Vec<Complex64> = grid.iter().map(|&w| blaschke.eval(w)).collect();
    let powers: Vec<Vec<Complex64>> = grid.iter().map(|&w| (0..=degree).map(|j| w.powi(j as i32)).collect()).collect();
    let mut h = vec![Complex64::new(0.0, 0.0); degree + 1];
    let mut best = f64::INFINITY;
    for it in 0..4000 {
        let mut worst = (0, 0.0f64, Complex64::new(0.0, 0.0));
        for k in 0..m {
            let hv: Complex64 = h.iter().zip(&powers[k]).map(|(a, p)| a * p).sum();
            let r = t[k] - b[k] * hv;
            if r.norm() > worst.1 {
                worst = (k, r.norm(), r);
            }
        }
        best = best.min(worst.1);
        let (k, norm, r) = worst;
        if norm == 0.0 {
            break;
        }
        // gradient of |r| with respect to conj(h_j) is -conj(B w^j) r/|r|
        let step = 0.5 / (1.0 + it as f64).sqrt();
        let dir = r / norm;
        for (j, hj) in h.iter_mut().enumerate() {
            *hj += step * (b[k] * powers[k][j]).conj() * dir / (degree + 1) as f64;
        }
    }
    best
}

#[test]
fn lower_bound_never_exceeds_a_constructed_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for case in 0..8 {
        let zeros: Vec<Complex64> = (0..rng.gen_range(1..4))
            .map(|_| Complex64::from_polar(rng.gen_range(0.0..0.7), rng.gen_range(0.0..TAU)))
            .collect();
        let atoms = if case % 2 == 1 {
            vec![SingularAtom {
                angle: rng.gen_range(0.0..TAU),
                mass: rng.gen_range(0.05..0.5),
            }]
        } else {
            vec![]
        };
        let theta = InnerFunction::new(zeros, atoms).unwrap();
        let lambda: Vec<Complex64> = (0..rng.gen_range(1..4))
            .map(|_| Complex64::from_polar(rng.gen_range(0.0..0.7), rng.gen_range(0.0..TAU)))
            .collect();
        let s = PointSequence::from_complex(&lambda).unwrap();
        let lb = hankel_distance_lb(&theta, &s, 12).unwrap().value;
        let ub = descent_upper_bound(&theta, &InnerFunction::blaschke(lambda).unwrap(), 6);
        assert!(ub >= lb - 1e-3, "case {case}: constructed {ub} below the bound {lb}");
        assert!(lb <= 1.0 + 1e-12);
    }
}
