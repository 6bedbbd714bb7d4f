//! Small dense complex matrices and extremal Hermitian eigenvalues.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;
const POWER_MAX_ITERS: usize = 20_000;
const INVERSE_MAX_ITERS: usize = 2_000;

/// Square complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(invalid(format!("{} entries for a {n}x{n} matrix", data.len())));
        }
        Ok(CMatrix { n, data })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let data = (0..n * n).map(|k| f(k / n, k % n)).collect();
        CMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Principal submatrix on the given indices.
    pub fn principal(&self, idx: &[usize]) -> CMatrix {
        CMatrix::from_fn(idx.len(), |i, j| self.get(idx[i], idx[j]))
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest entrywise `|a_ij - conj(a_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..self.n {
            for j in i..self.n {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    let tol = 1e-12 * m.frobenius().max(1.0);
    let dev = m.hermitian_deviation();
    if dev > tol {
        return Err(invalid(format!(
            "matrix is not Hermitian (deviation {dev:.3e})"
        )));
    }
    Ok(())
}

/// All eigenvalues of a Hermitian matrix by cyclic complex Jacobi
/// rotations, in ascending order.
pub fn jacobi_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let n = m.n;
    // symmetrize so rounding in the input cannot bias the rotations
    let mut a = CMatrix::from_fn(n, |i, j| 0.5 * (m.get(i, j) + m.get(j, i).conj()));
    let scale = a.frobenius();
    if n <= 1 || scale == 0.0 {
        let mut d: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
        d.sort_by(f64::total_cmp);
        return Ok(d);
    }
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j).norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::Numerical("Jacobi iteration did not converge".into()));
    }
    let mut d: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// One unitary rotation zeroing `a[p][q]`: a phase on column `q` makes the
/// pivot real, then a real Jacobi rotation annihilates it.
fn rotate(a: &mut CMatrix, p: usize, q: usize) {
    let n = a.n;
    let apq = a.get(p, q);
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    if r < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a.set(p, q, Complex64::new(0.0, 0.0));
        a.set(q, p, Complex64::new(0.0, 0.0));
        return;
    }
    let phase_conj = (apq / r).conj();
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a.data[k * n + p];
        let akq = a.data[k * n + q] * phase_conj;
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        a.data[k * n + p] = new_kp;
        a.data[p * n + k] = new_kp.conj();
        a.data[k * n + q] = new_kq;
        a.data[q * n + k] = new_kq.conj();
    }
    a.set(p, p, Complex64::new(app - t * r, 0.0));
    a.set(q, q, Complex64::new(aqq + t * r, 0.0));
    a.set(p, q, Complex64::new(0.0, 0.0));
    a.set(q, p, Complex64::new(0.0, 0.0));
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
    norm
}

fn rayleigh(m: &CMatrix, v: &[Complex64]) -> f64 {
    let mv = m.matvec(v);
    v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum()
}

fn start_vector(n: usize) -> Vec<Complex64> {
    // deterministic, with no special symmetry
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| {
            let x = i as f64 + 1.0;
            Complex64::new(1.0 + 0.37 * (1.3 * x).sin(), 0.21 * (0.7 * x).cos())
        })
        .collect();
    normalize(&mut v);
    v
}

/// Gershgorin interval containing the spectrum.
fn gershgorin(m: &CMatrix) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m.n {
        let radius: f64 = (0..m.n).filter(|&j| j != i).map(|j| m.get(i, j).norm()).sum();
        let d = m.get(i, i).re;
        lo = lo.min(d - radius);
        hi = hi.max(d + radius);
    }
    (lo, hi)
}

/// Largest eigenvalue by power iteration on `m - shift·I`, which is
/// positive semidefinite for a Gershgorin shift.
fn power_max(m: &CMatrix, shift: f64) -> f64 {
    let mut v = start_vector(m.n);
    let mut last = f64::NAN;
    let mut stable = 0;
    for _ in 0..POWER_MAX_ITERS {
        let mut w = m.matvec(&v);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi -= shift * vi;
        }
        if normalize(&mut w) == 0.0 {
            return shift;
        }
        v = w;
        let rq = rayleigh(m, &v);
        if (rq - last).abs() <= 1e-15 * rq.abs().max(1.0) {
            stable += 1;
            if stable >= 3 {
                return rq;
            }
        } else {
            stable = 0;
        }
        last = rq;
    }
    last
}

/// Lower Cholesky factor of `m - shift·I`, or `None` if it is not
/// positive definite.
fn cholesky_shifted(m: &CMatrix, shift: f64) -> Option<CMatrix> {
    let n = m.n;
    let mut l = CMatrix::zeros(n);
    for j in 0..n {
        let mut d = m.get(j, j).re - shift;
        for k in 0..j {
            d -= l.get(j, k).norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let ljj = d.sqrt();
        l.set(j, j, Complex64::new(ljj, 0.0));
        for i in j + 1..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k).conj();
            }
            l.set(i, j, s / ljj);
        }
    }
    Some(l)
}

fn cholesky_solve(l: &CMatrix, b: &[Complex64]) -> Vec<Complex64> {
    let n = l.n;
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l.get(i, k) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l.get(k, i).conj() * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    y
}

/// Smallest eigenvalue by inverse iteration on `m - σ·I`, with `σ` below
/// the spectrum certified by a successful Cholesky factorization.
fn inverse_min(m: &CMatrix, lambda_max: f64, lower: f64) -> Result<f64> {
    // rough upper estimate of λ_min from the complementary power iteration
    let n = m.n;
    let mut v = start_vector(n);
    for _ in 0..60 {
        let mv = m.matvec(&v);
        let mut w: Vec<Complex64> = v.iter().zip(&mv).map(|(a, b)| lambda_max * a - b).collect();
        if normalize(&mut w) == 0.0 {
            break;
        }
        v = w;
    }
    let estimate = rayleigh(m, &v);
    let spread = (lambda_max - lower).max(1e-12 * lambda_max.abs().max(1.0));
    let mut gap = 1e-3 * spread;
    let l = loop {
        let sigma = estimate - gap;
        if sigma <= lower {
            break cholesky_shifted(m, lower - 1e-12 * spread).ok_or_else(|| {
                Error::Numerical("Cholesky failed below the Gershgorin bound".into())
            })?;
        }
        if let Some(l) = cholesky_shifted(m, sigma) {
            break l;
        }
        gap *= 4.0;
    };
    let mut v = start_vector(n);
    let mut last = f64::NAN;
    for _ in 0..INVERSE_MAX_ITERS {
        let mut w = cholesky_solve(&l, &v);
        normalize(&mut w);
        v = w;
        let rq = rayleigh(m, &v);
        if (rq - last).abs() <= 1e-15 * spread {
            return Ok(rq);
        }
        last = rq;
    }
    Ok(last)
}

/// Extreme eigenvalues `(min, max)` by shifted power iteration and
/// Cholesky-based inverse iteration.
pub fn iterative_extremes(m: &CMatrix) -> Result<(f64, f64)> {
    check_hermitian(m)?;
    if m.n == 0 {
        return Err(invalid("empty matrix"));
    }
    let (lo, _) = gershgorin(m);
    let lambda_max = power_max(m, lo.min(0.0));
    let lambda_min = inverse_min(m, lambda_max, lo)?;
    Ok((lambda_min.min(lambda_max), lambda_max))
}

/// Largest singular value of an arbitrary square matrix.
pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    if m.n == 0 {
        return Ok(0.0);
    }
    let gram = m.adjoint().mul(m);
    let eigs = jacobi_eigenvalues(&gram)?;
    Ok(eigs.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}
