//! Splitting a finite sequence of normalized kernels into parts that carry
//! Riesz certificates.
//!
//! Two engines are provided. [`split_interpolation`] bounds the distance
//! from `Θ` to `B_j H^∞` for each part through the Carleson constant and
//! Earl's estimate. [`decompose_clark_squares`] classifies points by the
//! Carleson squares over an equal-mass arc system and routes the points
//! away from the circle through the first engine.

mod arcs;
mod interpolation;
mod pipeline;

use serde::{Deserialize, Serialize};

use crate::gram::FrameBounds;

pub use arcs::{
    build_arc_system, build_arc_system_with, build_squares, count_per_square, region_g_delta, Arc, ArcSystem,
    GRegion, Square, SquareCounts, SquareSystem,
};
pub use interpolation::{
    greedy_interpolating_cover, interpolation_parts, mills_split, split_interpolation, InterpolationPart,
    MillsSplit, SplitOptions,
};
pub(crate) use interpolation::threshold_for;
pub use pipeline::{decompose_clark_squares, select_level_count, PipelineOptions, PipelineResult};

/// How the points of a part were selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Route {
    /// Interpolation-constant splitting.
    Interpolation,
    /// At most one point from each square whose tagging endpoint lies on
    /// level `level`; `sub_index` enumerates the parts of that level.
    Square { level: usize, sub_index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    /// Carleson constant of the part; absent when it has boundary points.
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    /// `φ(delta)`.
    pub earl_value: Option<f64>,
    /// `gamma · earl_value`, an upper bound for `dist(Θ, B_j H^∞)`.
    pub dist_bound: Option<f64>,
    pub frame_bounds: FrameBounds,
    /// `|λ - ζ|·|Θ'(ζ)|` against the tagging endpoint of each point's square.
    pub stability: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Part {
    pub ids: Vec<u64>,
    pub route: Route,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalInfo {
    #[serde(rename = "N")]
    pub n_levels: Option<usize>,
    #[serde(rename = "M_observed")]
    pub m_observed: Option<usize>,
    #[serde(rename = "delta_G")]
    pub delta_g: Option<f64>,
    /// The `γ` fed to the interpolation engine.
    pub gamma: Option<f64>,
    pub delta_star: Option<f64>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Partition {
    pub parts: Vec<Part>,
    pub global: GlobalInfo,
}

impl Partition {
    /// Every id exactly once, in part order.
    pub fn all_ids(&self) -> Vec<u64> {
        self.parts.iter().flat_map(|p| p.ids.iter().copied()).collect()
    }
}

/// Flag: some level set was cut off near an atom.
pub const FLAG_TRUNCATED: &str = "level_sets_truncated";
/// Flag: the sampled bound on `|Θ|` over the region below the squares is not below 1.
pub const FLAG_G_UNCERTIFIED: &str = "g_region_not_certified";
/// Flag: no level count up to the search limit met the selection rule.
pub const FLAG_LEVEL_SEARCH: &str = "level_count_search_exhausted";
