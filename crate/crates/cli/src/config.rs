//! Run configuration. Unknown keys are rejected everywhere.

use std::path::Path;

use mslab_core::clark::DEFAULT_MAX_PER_ARC;
use mslab_core::{InnerFunction, PointSequence, UnitPoint};
use num_complex::Complex64;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub inner: Option<InnerFunction>,
    pub points: Option<Vec<PointSpec>>,
    /// Optional ids for `points`; defaults to `0..n`.
    pub ids: Option<Vec<u64>>,
    pub analyze: Option<AnalyzeOptions>,
    pub split: Option<SplitConfig>,
    pub clark: Option<ClarkConfig>,
    pub pw: Option<PwConfig>,
}

/// `[re, im]`, or `{"angle": θ}` for a point of the circle.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Cartesian([f64; 2]),
    Polar(PolarPoint),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarPoint {
    pub angle: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzeOptions {
    pub floor: f64,
    pub hankel_section: Option<usize>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            floor: 0.1,
            hankel_section: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, serde::Serialize)]
pub enum Method {
    #[serde(rename = "interpolation", alias = "thm21")]
    Interpolation,
    #[serde(rename = "clark-squares", alias = "thm22")]
    ClarkSquares,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub method: Method,
    pub levels: Option<usize>,
    #[serde(default = "default_depth")]
    pub max_depth: usize,
    #[serde(default = "default_floor_cap")]
    pub cover_floor_cap: f64,
    #[serde(default = "default_region_samples")]
    pub region_samples: usize,
    #[serde(default = "default_max_per_arc")]
    pub max_per_arc: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClarkConfig {
    /// A single level `α`; ignored when `levels` is given.
    pub alpha: Option<[f64; 2]>,
    /// Compute all `N` levels `e^{2πil/N}`.
    pub levels: Option<usize>,
    #[serde(default = "default_herglotz_grid")]
    pub herglotz_grid: usize,
    #[serde(default = "default_max_per_arc")]
    pub max_per_arc: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PwConfig {
    pub a: f64,
    pub freqs: Vec<[f64; 2]>,
    #[serde(default = "default_pw_floor")]
    pub floor: f64,
    #[serde(default = "default_true")]
    pub split: bool,
    #[serde(default = "default_depth")]
    pub max_depth: usize,
    #[serde(default = "default_floor_cap")]
    pub cover_floor_cap: f64,
}

fn default_depth() -> usize {
    20
}

fn default_floor_cap() -> f64 {
    0.1
}

fn default_region_samples() -> usize {
    4096
}

fn default_max_per_arc() -> usize {
    DEFAULT_MAX_PER_ARC
}

fn default_herglotz_grid() -> usize {
    100
}

fn default_pw_floor() -> f64 {
    0.1
}

fn default_true() -> bool {
    true
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn inner(&self) -> Result<&InnerFunction, CliError> {
        self.inner
            .as_ref()
            .ok_or_else(|| CliError::Config("missing \"inner\"".into()))
    }

    pub fn sequence(&self) -> Result<PointSequence, CliError> {
        let specs = self
            .points
            .as_ref()
            .ok_or_else(|| CliError::Config("missing \"points\"".into()))?;
        let points = specs
            .iter()
            .map(|s| match *s {
                PointSpec::Cartesian([re, im]) => UnitPoint::new(Complex64::new(re, im)),
                PointSpec::Polar(p) if p.angle.is_finite() => Ok(UnitPoint::boundary(p.angle)),
                PointSpec::Polar(p) => Err(mslab_core::Error::InvalidInput(format!("bad angle {}", p.angle))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let seq = match &self.ids {
            Some(ids) => PointSequence::with_ids(ids.clone(), points)?,
            None => PointSequence::new(points)?,
        };
        Ok(seq)
    }

    pub fn section<'a, T>(&'a self, value: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        value
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("missing \"{name}\" section")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_points_and_methods() {
        let c: RunConfig = serde_json::from_str(
            r#"{"inner": {"blaschke_zeros": [[0.5, 0.0]], "singular_atoms": []},
                "points": [[0.1, 0.2], {"angle": 1.5}],
                "split": {"method": "thm22", "levels": 8}}"#,
        )
        .unwrap();
        let s = c.sequence().unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.points()[1].is_boundary());
        assert_eq!(c.split.unwrap().method, Method::ClarkSquares);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"inner": null, "extra": 1}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"split": {"method": "interpolation", "depth": 3}}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"points": [{"angle": 1.0, "r": 1.0}]}"#).is_err());
    }
}
