use super::{Certificate, GlobalInfo, Part, Partition, Route};
use crate::carleson::{carleson_constant, earl_bound, interpolation_threshold, rho, PointSequence};
use crate::error::{invalid, Error, Result};
use crate::gram::{extremal_eigs, gram};
use crate::inner::{InnerFunction, UnitPoint};
use crate::par::Exec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitOptions {
    /// Upper limit for the Carleson floor of the initial cover.
    pub cover_floor_cap: f64,
    /// Maximum nesting of two-way splits below a cover part.
    pub max_depth: usize,
    pub exec: Exec,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions {
            cover_floor_cap: 0.1,
            max_depth: 20,
            exec: Exec::default(),
        }
    }
}

/// First-fit cover in order of decreasing modulus; every part has Carleson
/// constant at least `floor`.
pub fn greedy_interpolating_cover(seq: &PointSequence, floor: f64) -> Result<Vec<PointSequence>> {
    if !(0.0..=1.0).contains(&floor) {
        return Err(invalid(format!("Carleson floor {floor} outside [0, 1]")));
    }
    let values = seq.interior_values()?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].norm().total_cmp(&values[a].norm()).then(a.cmp(&b)));

    struct Bin {
        members: Vec<usize>,
        logs: Vec<f64>,
    }
    let log_floor = floor.ln();
    let mut bins: Vec<Bin> = Vec::new();
    'next: for &p in &order {
        for bin in bins.iter_mut() {
            let lr: Vec<f64> = bin.members.iter().map(|&q| rho(values[p], values[q]).ln()).collect();
            let own: f64 = lr.iter().sum();
            let others = bin.logs.iter().zip(&lr).map(|(a, b)| a + b).fold(f64::INFINITY, f64::min);
            if own.min(others) >= log_floor {
                for (l, r) in bin.logs.iter_mut().zip(&lr) {
                    *l += r;
                }
                bin.members.push(p);
                bin.logs.push(own);
                continue 'next;
            }
        }
        bins.push(Bin {
            members: vec![p],
            logs: vec![0.0],
        });
    }
    let parts: Vec<PointSequence> = bins
        .into_iter()
        .map(|mut b| {
            b.members.sort_unstable();
            seq.subset(&b.members)
        })
        .collect();
    for part in &parts {
        let d = carleson_constant(part)?.delta;
        if d < floor * (1.0 - 1e-10) {
            return Err(Error::Numerical(format!(
                "cover part has Carleson constant {d} below the floor {floor}"
            )));
        }
    }
    Ok(parts)
}

/// Result of a two-way split.
#[derive(Debug, Clone, PartialEq)]
pub struct MillsSplit {
    pub first: PointSequence,
    pub second: PointSequence,
    pub delta: f64,
    pub delta_first: f64,
    pub delta_second: f64,
    /// Whether both halves reach `delta^{1/2}`.
    pub target_met: bool,
}

fn delta_or_one(seq: &PointSequence) -> Result<f64> {
    if seq.is_empty() {
        Ok(1.0)
    } else {
        Ok(carleson_constant(seq)?.delta)
    }
}

/// Splits a sequence in two, separating the closest pair and placing every
/// other point on the side where its nearest neighbor is farther away.
pub fn mills_split(seq: &PointSequence) -> Result<MillsSplit> {
    let values = seq.interior_values()?;
    let n = values.len();
    let delta = delta_or_one(seq)?;
    if n < 2 {
        return Ok(MillsSplit {
            first: seq.clone(),
            second: PointSequence::empty(),
            delta,
            delta_first: delta,
            delta_second: 1.0,
            target_met: true,
        });
    }
    let dist = |i: usize, j: usize| rho(values[i], values[j]);
    let mut closest = (0, 1, f64::INFINITY);
    let mut nearest = vec![f64::INFINITY; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = dist(i, j);
            nearest[i] = nearest[i].min(d);
            nearest[j] = nearest[j].min(d);
            if d < closest.2 {
                closest = (i, j, d);
            }
        }
    }
    let mut halves = [vec![closest.0], vec![closest.1]];
    let mut rest: Vec<usize> = (0..n).filter(|&i| i != closest.0 && i != closest.1).collect();
    rest.sort_by(|&a, &b| nearest[a].total_cmp(&nearest[b]).then(a.cmp(&b)));
    for p in rest {
        let gap = |h: &Vec<usize>| h.iter().map(|&q| dist(p, q)).fold(f64::INFINITY, f64::min);
        let (g0, g1) = (gap(&halves[0]), gap(&halves[1]));
        let side = if g0 > g1 || (g0 == g1 && halves[0].len() <= halves[1].len()) {
            0
        } else {
            1
        };
        halves[side].push(p);
    }
    for h in halves.iter_mut() {
        h.sort_unstable();
    }
    let first = seq.subset(&halves[0]);
    let second = seq.subset(&halves[1]);
    let delta_first = delta_or_one(&first)?;
    let delta_second = delta_or_one(&second)?;
    let target = delta.sqrt();
    Ok(MillsSplit {
        first,
        second,
        delta,
        delta_first,
        delta_second,
        target_met: delta_first >= target && delta_second >= target,
    })
}

/// A part with its interpolation certificate chain.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationPart {
    pub seq: PointSequence,
    pub delta: f64,
    pub earl_value: f64,
    pub dist_bound: f64,
}

fn certify(seq: &PointSequence, gamma: f64) -> Result<Option<InterpolationPart>> {
    let delta = carleson_constant(seq)?.delta;
    if delta <= 0.0 {
        return Ok(None);
    }
    let earl_value = earl_bound(delta)?;
    let dist_bound = gamma * earl_value;
    Ok((dist_bound < 1.0).then(|| InterpolationPart {
        seq: seq.clone(),
        delta,
        earl_value,
        dist_bound,
    }))
}

fn refine(seq: PointSequence, gamma: f64, depth: usize, max_depth: usize, out: &mut Vec<InterpolationPart>) -> Result<()> {
    if let Some(part) = certify(&seq, gamma)? {
        out.push(part);
        return Ok(());
    }
    if depth >= max_depth {
        return Err(Error::Certification(format!(
            "recursion depth {max_depth} exhausted with a part of {} points (γ = {gamma})",
            seq.len()
        )));
    }
    let s = mills_split(&seq)?;
    refine(s.first, gamma, depth + 1, max_depth, out)?;
    refine(s.second, gamma, depth + 1, max_depth, out)
}

/// The `δ*` for a given `γ`, with `δ* = 0` at `γ = 0`.
pub(crate) fn threshold_for(gamma: f64) -> Result<f64> {
    if gamma == 0.0 {
        Ok(0.0)
    } else {
        interpolation_threshold(gamma)
    }
}

/// Parts with `γ·φ(δ_j) < 1` for a sequence with `max |Θ(λ_n)| <= γ`.
///
/// Parts are ordered by their first point; within a part the original
/// order is kept.
pub fn interpolation_parts(seq: &PointSequence, gamma: f64, opts: &SplitOptions) -> Result<Vec<InterpolationPart>> {
    if seq.is_empty() {
        return Err(invalid("cannot split an empty sequence"));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Certification(format!(
            "max |Θ(λ_n)| = {gamma} is not below 1"
        )));
    }
    let floor = threshold_for(gamma)?.min(opts.cover_floor_cap);
    let cover = greedy_interpolating_cover(seq, floor)?;
    let nested = opts.exec.try_map_range(cover.len(), |k| {
        let mut out = Vec::new();
        refine(cover[k].clone(), gamma, 0, opts.max_depth, &mut out).map(|_| out)
    })?;
    let mut parts: Vec<InterpolationPart> = nested.into_iter().flatten().collect();
    let first_pos = |p: &InterpolationPart| seq.position(p.seq.ids()[0]).unwrap_or(usize::MAX);
    parts.sort_by_key(first_pos);
    Ok(parts)
}

/// `max_n |Θ(λ_n)|`, counting boundary points as 1.
pub(crate) fn sup_modulus(theta: &InnerFunction, seq: &PointSequence) -> f64 {
    seq.points()
        .iter()
        .map(|p| match *p {
            UnitPoint::Interior(z) => theta.eval(z).norm(),
            UnitPoint::Boundary(_) => 1.0,
        })
        .fold(0.0, f64::max)
}

pub(crate) fn interpolation_certificates(
    theta: &InnerFunction,
    parts: &[InterpolationPart],
    gamma: f64,
    exec: Exec,
) -> Result<Vec<Part>> {
    exec.try_map_range(parts.len(), |k| {
        let p = &parts[k];
        let fb = extremal_eigs(&gram(theta, &p.seq)?)?;
        Ok(Part {
            ids: p.seq.ids().to_vec(),
            route: Route::Interpolation,
            certificate: Certificate {
                delta: Some(p.delta),
                gamma: Some(gamma),
                earl_value: Some(p.earl_value),
                dist_bound: Some(p.dist_bound),
                frame_bounds: fb,
                stability: None,
            },
        })
    })
}

/// Interpolation-constant splitting of the kernels at `seq`.
pub fn split_interpolation(theta: &InnerFunction, seq: &PointSequence, opts: &SplitOptions) -> Result<Partition> {
    if seq.is_empty() {
        return Err(invalid("cannot split an empty sequence"));
    }
    let gamma = sup_modulus(theta, seq);
    let parts = interpolation_parts(seq, gamma, opts)?;
    let parts = interpolation_certificates(theta, &parts, gamma, opts.exec)?;
    Ok(Partition {
        parts,
        global: GlobalInfo {
            gamma: Some(gamma),
            delta_star: Some(threshold_for(gamma)?),
            ..GlobalInfo::default()
        },
    })
}
