use std::collections::BTreeMap;

use super::arcs::{
    build_arc_system_with, build_squares, count_per_square, region_g_delta, ArcSystem, GRegion, SquareCounts,
    SquareSystem,
};
use super::interpolation::{interpolation_certificates, interpolation_parts, sup_modulus, threshold_for, SplitOptions};
use super::{Certificate, GlobalInfo, Part, Partition, Route, FLAG_G_UNCERTIFIED, FLAG_LEVEL_SEARCH, FLAG_TRUNCATED};
use crate::carleson::{carleson_constant, PointSequence};
use crate::clark::{stability_ratio, ClarkOptions};
use crate::error::{invalid, Error, Result};
use crate::gram::{extremal_eigs, gram};
use crate::inner::InnerFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    /// Level count; chosen by [`select_level_count`] when absent.
    pub levels: Option<usize>,
    pub max_levels: usize,
    /// Points sampled on the boundary of the region below the squares.
    pub region_samples: usize,
    /// `|Θ|` bound the automatic level count must reach on that boundary.
    pub region_target: f64,
    /// Allowed `max/min |Θ'|` within an arc for the automatic level count.
    pub spread_target: f64,
    pub clark: ClarkOptions,
    pub split: SplitOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            levels: None,
            max_levels: 1024,
            region_samples: 4096,
            region_target: 0.9,
            spread_target: 4.0,
            clark: ClarkOptions::default(),
            split: SplitOptions::default(),
        }
    }
}

/// Partition plus the geometry it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub partition: Partition,
    pub arcs: ArcSystem,
    pub squares: SquareSystem,
    pub region: GRegion,
    pub counts: SquareCounts,
}

struct Geometry {
    arcs: ArcSystem,
    squares: SquareSystem,
    region: GRegion,
}

fn geometry(theta: &InnerFunction, n: usize, opts: &PipelineOptions) -> Result<Geometry> {
    let arcs = build_arc_system_with(theta, n, &opts.clark, opts.split.exec)?;
    let squares = build_squares(&arcs);
    let region = region_g_delta(theta, &squares, opts.region_samples);
    Ok(Geometry { arcs, squares, region })
}

fn spread(theta: &InnerFunction, g: &Geometry) -> f64 {
    g.arcs.derivative_spread(theta, 32).into_iter().fold(0.0, f64::max)
}

/// Smallest power of two `N >= 8` whose squares bound `|Θ|` below the
/// region target and whose arcs keep `|Θ'|` within the spread target.
///
/// `delta_G` grows with `N`, so when the search is exhausted the smallest
/// candidate meeting the spread target is returned together with `false`.
pub fn select_level_count(theta: &InnerFunction, opts: &PipelineOptions) -> Result<(usize, bool)> {
    let mut n = 8;
    let mut fallback = None;
    loop {
        let g = geometry(theta, n, opts)?;
        let spread_ok = spread(theta, &g) <= opts.spread_target;
        if spread_ok && g.region.delta < opts.region_target {
            return Ok((n, true));
        }
        if spread_ok && fallback.is_none() {
            fallback = Some(n);
        }
        if 2 * n > opts.max_levels {
            return Ok((fallback.unwrap_or(n), false));
        }
        n *= 2;
    }
}

/// Classifies every point by the Carleson squares over an equal-mass arc
/// system and certifies each resulting part.
///
/// Points outside all squares go through interpolation splitting with
/// `γ = max(delta_G, max |Θ(λ)|)`; points inside squares of level `l` are
/// spread over parts holding at most one point per square.
pub fn decompose_clark_squares(
    theta: &InnerFunction,
    seq: &PointSequence,
    opts: &PipelineOptions,
) -> Result<PipelineResult> {
    if theta.is_constant() {
        return Err(invalid("the inner function must be nonconstant"));
    }
    if seq.is_empty() {
        return Err(invalid("cannot decompose an empty sequence"));
    }
    for (id, p) in seq.iter() {
        if theta.on_spectrum(p) {
            return Err(Error::DegeneratePoint {
                id,
                reason: "lies on the spectrum of the inner function".into(),
            });
        }
    }
    let mut flags = Vec::new();
    let n = match opts.levels {
        Some(0) => return Err(invalid("the level count must be at least 1")),
        Some(n) => n,
        None => {
            let (n, ok) = select_level_count(theta, opts)?;
            if !ok {
                flags.push(FLAG_LEVEL_SEARCH.to_string());
            }
            n
        }
    };
    let Geometry { arcs, squares, region } = geometry(theta, n, opts)?;
    if arcs.truncated {
        flags.push(FLAG_TRUNCATED.to_string());
    }
    let counts = count_per_square(&squares, seq);

    let mut g_positions = Vec::new();
    let mut by_level: BTreeMap<usize, BTreeMap<usize, Vec<usize>>> = BTreeMap::new();
    for (pos, (id, p)) in seq.iter().enumerate() {
        match counts.membership[pos] {
            Some(k) => by_level
                .entry(squares.squares[k].level)
                .or_default()
                .entry(k)
                .or_default()
                .push(pos),
            None if p.is_boundary() => {
                return Err(Error::DegeneratePoint {
                    id,
                    reason: "boundary point outside every square".into(),
                })
            }
            None => g_positions.push(pos),
        }
    }

    let mut parts = Vec::new();
    let mut global = GlobalInfo {
        n_levels: Some(n),
        m_observed: Some(counts.m_observed),
        delta_g: Some(region.delta),
        ..GlobalInfo::default()
    };

    let g_seq = seq.subset(&g_positions);
    let measured = sup_modulus(theta, &g_seq);
    let gamma = if region.delta < 1.0 {
        region.delta.max(measured)
    } else {
        flags.push(FLAG_G_UNCERTIFIED.to_string());
        measured
    };
    global.gamma = Some(gamma);
    global.delta_star = Some(threshold_for(gamma)?);
    if !g_seq.is_empty() {
        let ip = interpolation_parts(&g_seq, gamma, &opts.split)?;
        parts.extend(interpolation_certificates(theta, &ip, gamma, opts.split.exec)?);
    }

    let mut square_parts: Vec<(Route, Vec<usize>)> = Vec::new();
    for (&level, boxes) in &by_level {
        let depth = boxes.values().map(Vec::len).max().unwrap_or(0);
        for sub in 0..depth {
            let mut members: Vec<usize> = boxes.values().filter_map(|v| v.get(sub).copied()).collect();
            members.sort_unstable();
            square_parts.push((Route::Square { level, sub_index: sub }, members));
        }
    }
    let certified = opts.split.exec.try_map_range(square_parts.len(), |k| {
        let (route, members) = &square_parts[k];
        let part = seq.subset(members);
        let frame_bounds = extremal_eigs(&gram(theta, &part)?)?;
        let stability = members
            .iter()
            .map(|&pos| {
                let sq = &squares.squares[counts.membership[pos].expect("classified into a square")];
                stability_ratio(theta, sq.zeta, &seq.points()[pos])
            })
            .collect::<Result<Vec<f64>>>()?;
        let delta = if part.points().iter().all(|p| !p.is_boundary()) {
            Some(carleson_constant(&part)?.delta)
        } else {
            None
        };
        Ok(Part {
            ids: part.ids().to_vec(),
            route: *route,
            certificate: Certificate {
                delta,
                gamma: None,
                earl_value: None,
                dist_bound: None,
                frame_bounds,
                stability: Some(stability),
            },
        })
    })?;
    parts.extend(certified);
    global.flags = flags;

    Ok(PipelineResult {
        partition: Partition { parts, global },
        arcs,
        squares,
        region,
        counts,
    })
}
