//! Adaptive Simpson quadrature with Richardson correction.

const MAX_DEPTH: u32 = 48;
const PANELS: usize = 16;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn refine<F: Fn(f64) -> f64>(f: &F, p: Panel, eps: f64, depth: u32) -> f64 {
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * eps || m <= p.a || m >= p.b {
        return left + right + delta / 15.0;
    }
    let l = Panel {
        a: p.a,
        b: m,
        fa: p.fa,
        fm: flm,
        fb: p.fm,
        whole: left,
    };
    let r = Panel {
        a: m,
        b: p.b,
        fa: p.fm,
        fm: frm,
        fb: p.fb,
        whole: right,
    };
    refine(f, l, 0.5 * eps, depth + 1) + refine(f, r, 0.5 * eps, depth + 1)
}

/// `∫_a^b f` to roughly `rel_tol` relative accuracy.
///
/// The interval is first cut into a fixed number of panels so that narrow
/// peaks are seen by the initial estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let h = (b - a) / PANELS as f64;
    let mut panels = Vec::with_capacity(PANELS);
    let mut total = 0.0;
    let mut fa = f(a);
    for k in 0..PANELS {
        let pa = a + h * k as f64;
        let pb = if k + 1 == PANELS { b } else { pa + h };
        let fm = f(0.5 * (pa + pb));
        let fb = f(pb);
        let whole = simpson(pa, pb, fa, fm, fb);
        total += whole;
        panels.push(Panel {
            a: pa,
            b: pb,
            fa,
            fm,
            fb,
            whole,
        });
        fa = fb;
    }
    let eps = rel_tol * total.abs().max(f64::MIN_POSITIVE) / PANELS as f64;
    panels.into_iter().map(|p| refine(&f, p, eps, 0)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| 3.0 * x * x - x + 2.0, -1.0, 2.0, 1e-12);
        assert!((v - (9.0 - 1.5 + 6.0)).abs() < 1e-12);
    }

    #[test]
    fn peaked_integrand() {
        // Poisson kernel with r = 0.99 integrates to 2π.
        let r: f64 = 0.99;
        let p = |t: f64| (1.0 - r * r) / (1.0 - 2.0 * r * t.cos() + r * r);
        let v = integrate(p, 0.0, 2.0 * PI, 1e-10);
        assert!((v - 2.0 * PI).abs() < 1e-8, "{v}");
    }

    #[test]
    fn reversed_and_empty() {
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-8), 0.0);
        assert!((integrate(|x| x, 1.0, 0.0, 1e-10) + 0.5).abs() < 1e-14);
    }
}
