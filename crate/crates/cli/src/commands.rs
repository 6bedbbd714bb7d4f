use std::f64::consts::TAU;

use mslab_core::carleson::{carleson_report, CarlesonReport};
use mslab_core::clark::{herglotz_residual, level_alpha, level_set_with, ClarkFamily, ClarkOptions};
use mslab_core::decompose::{
    decompose_clark_squares, split_interpolation, GRegion, GlobalInfo, Part, PipelineOptions, Route, SplitOptions,
};
use mslab_core::gram::{frame_bounds, hankel_distance_lb, FrameReport, HankelBound};
use mslab_core::paley_wiener::{pw_frame_bounds, pw_split, shift_to_condition2, theta_a_modulus, ExpSystem};
use mslab_core::{Error, PointSequence, UnitPoint};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Method, RunConfig};
use crate::output::{OutDir, GENERATED_BY};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointNorm {
    pub id: u64,
    pub norm_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub generated_by: String,
    pub n: usize,
    /// `max |Θ(λ_n)|`; boundary points count as 1.
    pub gamma: f64,
    pub flags: Vec<String>,
    pub carleson: Option<CarlesonReport>,
    pub frame: FrameReport,
    pub kernel_norms: Vec<PointNorm>,
    pub hankel: Option<HankelBound>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcSummary {
    pub count: usize,
    pub total_mass: f64,
    pub mass_deviation: f64,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub generated_by: String,
    pub method: Method,
    pub parts: Vec<Part>,
    pub global: GlobalInfo,
    pub arcs: Option<ArcSummary>,
    pub region: Option<GRegion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HerglotzSummary {
    pub grid: usize,
    pub seed: u64,
    pub max_residual: f64,
    pub certifying: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClarkReport {
    pub generated_by: String,
    pub families: Vec<ClarkFamily>,
    pub herglotz: HerglotzSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PwReport {
    pub generated_by: String,
    pub a: f64,
    pub n: usize,
    /// `max_n e^{-a Im(λ_n + i)}`.
    pub gamma: f64,
    pub frame: FrameReport,
    pub parts: Option<Vec<Part>>,
    pub global: Option<GlobalInfo>,
}

#[derive(Serialize)]
struct NormRow {
    id: u64,
    re: f64,
    im: f64,
    norm_sq: f64,
}

#[derive(Serialize)]
pub struct PointRow {
    id: u64,
    re: f64,
    im: f64,
    part: usize,
    route: String,
}

#[derive(Serialize)]
struct PartRow {
    part: usize,
    route: String,
    size: usize,
    delta: Option<f64>,
    gamma: Option<f64>,
    earl_value: Option<f64>,
    dist_bound: Option<f64>,
    lambda_min: f64,
    lambda_max: f64,
}

#[derive(Serialize)]
pub struct ArcRow {
    index: usize,
    start: f64,
    length: f64,
    zeta: f64,
    level: usize,
    mass: f64,
    inner_radius: f64,
}

#[derive(Serialize)]
struct ClarkRow {
    family: usize,
    alpha_re: f64,
    alpha_im: f64,
    angle: f64,
    deriv: f64,
    weight: f64,
}

fn route_label(r: &Route) -> String {
    match r {
        Route::Interpolation => "interpolation".into(),
        Route::Square { level, sub_index } => format!("square:{level}:{sub_index}"),
    }
}

fn part_rows(parts: &[Part]) -> Vec<PartRow> {
    parts
        .iter()
        .enumerate()
        .map(|(k, p)| PartRow {
            part: k,
            route: route_label(&p.route),
            size: p.ids.len(),
            delta: p.certificate.delta,
            gamma: p.certificate.gamma,
            earl_value: p.certificate.earl_value,
            dist_bound: p.certificate.dist_bound,
            lambda_min: p.certificate.frame_bounds.lambda_min,
            lambda_max: p.certificate.frame_bounds.lambda_max,
        })
        .collect()
}

fn point_rows(parts: &[Part], coords: impl Fn(u64) -> Complex64) -> Vec<PointRow> {
    let mut rows: Vec<PointRow> = parts
        .iter()
        .enumerate()
        .flat_map(|(k, p)| {
            let coords = &coords;
            p.ids.iter().map(move |&id| {
                let z = coords(id);
                PointRow {
                    id,
                    re: z.re,
                    im: z.im,
                    part: k,
                    route: route_label(&p.route),
                }
            })
        })
        .collect();
    rows.sort_by_key(|r| r.id);
    rows
}

fn coordinates(seq: &PointSequence) -> impl Fn(u64) -> Complex64 + '_ {
    move |id| seq.points()[seq.position(id).expect("id from this sequence")].value()
}

pub fn analyze(cfg: &RunConfig, out: &OutDir) -> Result<(), CliError> {
    let theta = cfg.inner()?;
    let seq = cfg.sequence()?;
    let opts = cfg.analyze.clone().unwrap_or_default();
    if seq.is_empty() {
        return Err(CliError::Config("\"points\" is empty".into()));
    }
    let mut flags = Vec::new();
    let has_boundary = seq.points().iter().any(UnitPoint::is_boundary);
    let carleson = if has_boundary {
        flags.push("boundary_points".to_string());
        None
    } else {
        Some(carleson_report(&seq)?)
    };
    let gamma = seq
        .points()
        .iter()
        .map(|p| theta.eval_inner(p).map(|v| v.norm()))
        .collect::<Result<Vec<f64>, Error>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let norms = seq
        .iter()
        .map(|(id, p)| {
            theta
                .kernel_norm_sq(p)
                .map(|k| PointNorm { id, norm_sq: k.value() })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let frame = FrameReport::new(frame_bounds(theta, &seq)?, opts.floor);
    let hankel = match opts.hankel_section {
        Some(n) if !has_boundary => Some(hankel_distance_lb(theta, &seq, n)?),
        Some(_) => {
            flags.push("hankel_skipped_boundary_points".to_string());
            None
        }
        None => None,
    };
    let rows: Vec<NormRow> = seq
        .points()
        .iter()
        .zip(&norms)
        .map(|(p, n)| NormRow {
            id: n.id,
            re: p.value().re,
            im: p.value().im,
            norm_sq: n.norm_sq,
        })
        .collect();
    out.json(
        "report.json",
        &AnalyzeReport {
            generated_by: GENERATED_BY.into(),
            n: seq.len(),
            gamma,
            flags,
            carleson,
            frame,
            kernel_norms: norms,
            hankel,
        },
    )?;
    out.csv("points.csv", &rows)
}

pub type SplitOutput = (SplitReport, Vec<PointRow>, Option<Vec<ArcRow>>);

pub fn split(cfg: &RunConfig) -> Result<SplitOutput, CliError> {
    let theta = cfg.inner()?;
    let seq = cfg.sequence()?;
    let sc = cfg.section(&cfg.split, "split")?;
    let split_opts = SplitOptions {
        cover_floor_cap: sc.cover_floor_cap,
        max_depth: sc.max_depth,
        ..SplitOptions::default()
    };
    match sc.method {
        Method::Interpolation => {
            let p = split_interpolation(theta, &seq, &split_opts)?;
            let rows = point_rows(&p.parts, coordinates(&seq));
            Ok((
                SplitReport {
                    generated_by: GENERATED_BY.into(),
                    method: sc.method,
                    parts: p.parts,
                    global: p.global,
                    arcs: None,
                    region: None,
                },
                rows,
                None,
            ))
        }
        Method::ClarkSquares => {
            let opts = PipelineOptions {
                levels: sc.levels,
                region_samples: sc.region_samples,
                clark: ClarkOptions {
                    max_per_arc: sc.max_per_arc,
                },
                split: split_opts,
                ..PipelineOptions::default()
            };
            let r = decompose_clark_squares(theta, &seq, &opts)?;
            let rows = point_rows(&r.partition.parts, coordinates(&seq));
            let arcs = r
                .squares
                .squares
                .iter()
                .zip(&r.arcs.arcs)
                .enumerate()
                .map(|(k, (s, a))| ArcRow {
                    index: k,
                    start: a.start,
                    length: a.length,
                    zeta: a.zeta,
                    level: a.level,
                    mass: a.mass,
                    inner_radius: s.inner_radius,
                })
                .collect();
            Ok((
                SplitReport {
                    generated_by: GENERATED_BY.into(),
                    method: sc.method,
                    parts: r.partition.parts,
                    global: r.partition.global,
                    arcs: Some(ArcSummary {
                        count: r.arcs.len(),
                        total_mass: r.arcs.total_mass(),
                        mass_deviation: r.arcs.mass_deviation(),
                        truncated: r.arcs.truncated,
                    }),
                    region: Some(r.region),
                },
                rows,
                Some(arcs),
            ))
        }
    }
}

pub fn write_split(out: &OutDir, report: &SplitReport, rows: &[PointRow], arcs: Option<&[ArcRow]>) -> Result<(), CliError> {
    out.json("partition.json", report)?;
    out.csv("points.csv", rows)?;
    out.csv("parts.csv", &part_rows(&report.parts))?;
    if let Some(a) = arcs {
        out.csv("arcs.csv", a)?;
    }
    Ok(())
}

pub fn clark(cfg: &RunConfig, out: &OutDir, seed: u64) -> Result<(), CliError> {
    let theta = cfg.inner()?;
    let cc = cfg.section(&cfg.clark, "clark")?;
    let opts = ClarkOptions {
        max_per_arc: cc.max_per_arc,
    };
    let alphas: Vec<Complex64> = match (cc.levels, cc.alpha) {
        (Some(0), _) => return Err(CliError::Config("\"levels\" must be positive".into())),
        (Some(n), _) => (1..=n).map(|l| level_alpha(l, n)).collect(),
        (None, Some([re, im])) => vec![Complex64::new(re, im)],
        (None, None) => return Err(CliError::Config("\"clark\" needs \"alpha\" or \"levels\"".into())),
    };
    let families = alphas
        .iter()
        .map(|&a| level_set_with(theta, a, &opts))
        .collect::<Result<Vec<_>, Error>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid: Vec<UnitPoint> = (0..cc.herglotz_grid)
        .map(|_| {
            let r = 0.95 * rng.gen::<f64>().sqrt();
            UnitPoint::Interior(Complex64::from_polar(r, rng.gen_range(0.0..TAU)))
        })
        .collect();
    let mut max_residual = 0.0f64;
    for f in &families {
        for z in &grid {
            match herglotz_residual(theta, f, z) {
                Ok(h) => max_residual = max_residual.max(h.residual),
                // Θ(z) = α: the identity has a pole there
                Err(Error::Numerical(_)) => continue,
                Err(e) => return Err(e.into()),
            }
        }
    }
    let rows: Vec<ClarkRow> = families
        .iter()
        .enumerate()
        .flat_map(|(k, f)| {
            (0..f.len()).map(move |j| ClarkRow {
                family: k,
                alpha_re: f.alpha.re,
                alpha_im: f.alpha.im,
                angle: f.points[j],
                deriv: f.derivs[j],
                weight: f.weights[j],
            })
        })
        .collect();
    let certifying = families.iter().all(|f| !f.truncated);
    out.json(
        "clark.json",
        &ClarkReport {
            generated_by: GENERATED_BY.into(),
            families,
            herglotz: HerglotzSummary {
                grid: grid.len(),
                seed,
                max_residual,
                certifying,
            },
        },
    )?;
    out.csv("points.csv", &rows)
}

pub fn pw(cfg: &RunConfig, out: &OutDir) -> Result<(), CliError> {
    let pc = cfg.section(&cfg.pw, "pw")?;
    let system = ExpSystem::new(pc.a, pc.freqs.iter().map(|&[re, im]| Complex64::new(re, im)).collect())?;
    if system.is_empty() {
        return Err(CliError::Config("\"freqs\" is empty".into()));
    }
    let gamma = shift_to_condition2(&system.freqs)?
        .into_iter()
        .map(|z| theta_a_modulus(system.a, z))
        .fold(0.0, f64::max);
    let frame = FrameReport::new(pw_frame_bounds(&system)?, pc.floor);
    let (parts, global) = if pc.split {
        let opts = SplitOptions {
            cover_floor_cap: pc.cover_floor_cap,
            max_depth: pc.max_depth,
            ..SplitOptions::default()
        };
        let p = pw_split(&system, &opts)?;
        let f = &system.freqs;
        let rows = point_rows(&p.parts, |id| f[id as usize]);
        out.csv("freqs.csv", &rows)?;
        out.csv("parts.csv", &part_rows(&p.parts))?;
        (Some(p.parts), Some(p.global))
    } else {
        (None, None)
    };
    out.json(
        "pw.json",
        &PwReport {
            generated_by: GENERATED_BY.into(),
            a: system.a,
            n: system.len(),
            gamma,
            frame,
            parts,
            global,
        },
    )
}
