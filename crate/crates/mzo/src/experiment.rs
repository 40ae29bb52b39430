//! Config-driven experiment grids.
//!
//! Configs are flat key-value text with dotted section prefixes:
//!
//! ```text
//! # error-vs-(d, tau) sweep
//! problem.kind = quadratic_markov
//! problem.dim_grid = 1,2,4,8,16,32,64
//! chain.tau_grid = 1,2,4,8,16,32,64
//! chain.sigma2_grid = 0.001,0.00001
//! estimator.t = 0.00001
//! estimator.b = 1
//! estimator.feedback = two_point
//! optimizer.gamma = 0.001
//! optimizer.p = auto
//! optimizer.iterations = 1000
//! optimizer.replications = 200
//! optimizer.seed = 42
//! optimizer.initial_dist_sq = 0.01
//! output.dir = out
//! ```
//!
//! A grid run writes one CSV row per `(d, tau, sigma2)` cell and one SVG
//! heatmap per `sigma2` whose cells carry the same numbers as data
//! attributes. Cells are seeded as `seed_base` mixed with the cell
//! coordinates and replicate index, so outputs are byte-identical across
//! process runs and thread counts; `MZ_THREADS` caps the worker pool.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::chains::ChainParams;
use crate::error::{Error, Result};
use crate::estimators::Feedback;
use crate::optimizer::{derive_params, run, GradSource, PChoice, RunConfig};
use crate::problems::ProblemSpec;
use crate::util::{csv_float, mean_se, mix_seed};

/// Problem families constructible from a config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigProblemKind {
    QuadraticMarkov,
    DiagQuadratic,
    NonsmoothL1,
}

/// Parsed experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ConfigProblemKind,
    pub mu: f64,
    pub lips: f64,
    pub l1_weight: f64,
    pub dims: Vec<usize>,
    pub taus: Vec<u64>,
    pub sigma2s: Vec<f64>,
    pub t: f64,
    pub b: usize,
    pub feedback: Feedback,
    pub gamma: f64,
    pub p: PChoice,
    pub iterations: usize,
    pub replications: usize,
    pub seed: u64,
    pub initial_dist_sq: f64,
    pub out_dir: PathBuf,
    pub csv_name: String,
    pub svg_prefix: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ConfigProblemKind::QuadraticMarkov,
            mu: 1.0,
            lips: 1.0,
            l1_weight: 0.0,
            dims: vec![1, 2, 4, 8, 16, 32, 64],
            taus: vec![1, 2, 4, 8, 16, 32, 64],
            sigma2s: vec![1e-3, 1e-5],
            t: 1e-5,
            b: 1,
            feedback: Feedback::TwoPoint,
            gamma: 1e-3,
            p: PChoice::Auto,
            iterations: 1000,
            replications: 200,
            seed: 42,
            initial_dist_sq: 1e-2,
            out_dir: PathBuf::from("out"),
            csv_name: "grid.csv".into(),
            svg_prefix: "heatmap".into(),
        }
    }
}

fn parse_list<T: std::str::FromStr>(v: &str, key: &str) -> Result<Vec<T>> {
    let items: std::result::Result<Vec<T>, _> =
        v.split(',').map(|s| s.trim().parse::<T>()).collect();
    let items =
        items.map_err(|_| Error::Config(format!("cannot parse list for key `{key}`: `{v}`")))?;
    if items.is_empty() {
        return Err(Error::Config(format!("empty list for key `{key}`")));
    }
    Ok(items)
}

fn parse_scalar<T: std::str::FromStr>(v: &str, key: &str) -> Result<T> {
    v.trim()
        .parse::<T>()
        .map_err(|_| Error::Config(format!("cannot parse value for key `{key}`: `{v}`")))
}

impl ExperimentConfig {
    /// Parse the flat key-value format. Unknown keys are rejected so typos
    /// fail loudly.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if seen.insert(key.to_string(), lineno).is_some() {
                return Err(Error::Config(format!("duplicate key `{key}`")));
            }
            match key {
                "problem.kind" => {
                    cfg.kind = match value {
                        "quadratic_markov" => ConfigProblemKind::QuadraticMarkov,
                        "diag_quadratic" => ConfigProblemKind::DiagQuadratic,
                        "nonsmooth_l1" => ConfigProblemKind::NonsmoothL1,
                        other => {
                            return Err(Error::Config(format!("unknown problem kind `{other}`")))
                        }
                    }
                }
                "problem.mu" => cfg.mu = parse_scalar(value, key)?,
                "problem.lips_grad" | "problem.lips_f" => cfg.lips = parse_scalar(value, key)?,
                "problem.l1_weight" => cfg.l1_weight = parse_scalar(value, key)?,
                "problem.dim" => cfg.dims = vec![parse_scalar(value, key)?],
                "problem.dim_grid" => cfg.dims = parse_list(value, key)?,
                "chain.tau" => cfg.taus = vec![parse_scalar(value, key)?],
                "chain.tau_grid" => cfg.taus = parse_list(value, key)?,
                "chain.sigma2" => cfg.sigma2s = vec![parse_scalar(value, key)?],
                "chain.sigma2_grid" => cfg.sigma2s = parse_list(value, key)?,
                "estimator.t" => cfg.t = parse_scalar(value, key)?,
                "estimator.b" => cfg.b = parse_scalar(value, key)?,
                "estimator.feedback" => {
                    cfg.feedback = match value {
                        "two_point" => Feedback::TwoPoint,
                        "one_point" => Feedback::OnePoint,
                        other => return Err(Error::Config(format!("unknown feedback `{other}`"))),
                    }
                }
                "optimizer.gamma" => cfg.gamma = parse_scalar(value, key)?,
                "optimizer.p" => {
                    cfg.p = if value == "auto" {
                        PChoice::Auto
                    } else {
                        PChoice::Fixed(parse_scalar(value, key)?)
                    }
                }
                "optimizer.iterations" => cfg.iterations = parse_scalar(value, key)?,
                "optimizer.replications" => cfg.replications = parse_scalar(value, key)?,
                "optimizer.seed" => cfg.seed = parse_scalar(value, key)?,
                "optimizer.initial_dist_sq" => cfg.initial_dist_sq = parse_scalar(value, key)?,
                "output.dir" => cfg.out_dir = PathBuf::from(value),
                "output.csv" => cfg.csv_name = value.to_string(),
                "output.svg_prefix" => cfg.svg_prefix = value.to_string(),
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.taus.is_empty() || self.sigma2s.is_empty() {
            return Err(Error::Config("grids must be non-empty".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        let finite = self.sigma2s.iter().all(|v| v.is_finite())
            && self.t.is_finite()
            && self.gamma.is_finite()
            && self.mu.is_finite()
            && self.lips.is_finite()
            && self.initial_dist_sq.is_finite();
        if !finite {
            return Err(Error::Config("numeric fields must be finite".into()));
        }
        Ok(())
    }

    pub fn problem(&self, dim: usize) -> Result<ProblemSpec> {
        match self.kind {
            ConfigProblemKind::QuadraticMarkov => ProblemSpec::quadratic_markov(dim),
            ConfigProblemKind::DiagQuadratic => ProblemSpec::diag_quadratic(dim, self.mu, self.lips),
            ConfigProblemKind::NonsmoothL1 => {
                ProblemSpec::nonsmooth_l1(dim, self.mu, self.l1_weight)
            }
        }
    }

    fn smooth(&self) -> bool {
        self.kind != ConfigProblemKind::NonsmoothL1
    }
}

/// Result of one grid cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub d: usize,
    pub tau: u64,
    pub sigma2: f64,
    pub mean_error: f64,
    pub se_error: f64,
    pub mean_oracle_calls: f64,
    pub seed_base: u64,
    pub diverged: usize,
}

/// Run every `(sigma2, d, tau)` cell with `replications` seeded runs each.
/// Cells execute on a worker pool capped by `MZ_THREADS`; results come back
/// in deterministic order.
pub fn run_grid(cfg: &ExperimentConfig) -> Result<Vec<CellResult>> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &sigma2 in &cfg.sigma2s {
        for &d in &cfg.dims {
            for &tau in &cfg.taus {
                cells.push((sigma2, d, tau));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap())
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    let results: Result<Vec<CellResult>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(sigma2, d, tau)| run_cell(cfg, d, tau, sigma2))
            .collect()
    });
    results
}

fn thread_cap() -> usize {
    std::env::var("MZ_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn run_cell(cfg: &ExperimentConfig, d: usize, tau: u64, sigma2: f64) -> Result<CellResult> {
    let problem = cfg.problem(d)?;
    let params = derive_params(
        d,
        problem.mu,
        if cfg.smooth() {
            problem.lips_grad.unwrap_or(cfg.lips)
        } else {
            problem.lips_f.unwrap_or(cfg.lips)
        },
        cfg.gamma,
        cfg.t,
        cfg.p,
        cfg.b,
        cfg.feedback,
        cfg.smooth(),
        cfg.iterations,
    )?;
    let chain = ChainParams::lazy_gaussian(d, tau, sigma2.sqrt())?;
    let x0 = problem.start_point(cfg.initial_dist_sq);
    let mut errors = Vec::with_capacity(cfg.replications);
    let mut calls = Vec::with_capacity(cfg.replications);
    let mut diverged = 0usize;
    for rep in 0..cfg.replications {
        let seed = mix_seed(cfg.seed, &[d as u64, tau, sigma2.to_bits(), rep as u64]);
        let run_cfg = RunConfig {
            params,
            chain,
            x0: x0.clone(),
            grad_source: GradSource::Mlmc,
            adversarial: None,
            record_trajectory: false,
        };
        match run(&problem, &run_cfg, seed) {
            Ok(rec) => {
                errors.push(rec.final_err_sq);
                calls.push(rec.total_calls as f64);
            }
            Err(Error::Divergence { .. }) => {
                diverged += 1;
            }
            Err(e) => return Err(e),
        }
    }
    let (mean_error, se_error) = if diverged > 0 || errors.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        mean_se(&errors)
    };
    let mean_calls = if calls.is_empty() {
        f64::NAN
    } else {
        calls.iter().sum::<f64>() / calls.len() as f64
    };
    Ok(CellResult {
        d,
        tau,
        sigma2,
        mean_error,
        se_error,
        mean_oracle_calls: mean_calls,
        seed_base: cfg.seed,
        diverged,
    })
}

pub const CSV_HEADER: &str = "d,tau,sigma2,mean_error,se_error,mean_oracle_calls,seed_base";

/// Render grid results as CSV: fixed header, decimal floats, LF endings.
pub fn render_csv(cells: &[CellResult]) -> String {
    let mut out = String::with_capacity(64 * (cells.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.d,
            c.tau,
            csv_float(c.sigma2),
            csv_float(c.mean_error),
            csv_float(c.se_error),
            csv_float(c.mean_oracle_calls),
            c.seed_base
        );
    }
    out
}

/// Render one sigma2 slice as a standalone SVG heatmap with log-scaled color.
/// Each cell rect carries `data-d`, `data-tau`, `data-value` attributes that
/// round-trip the CSV numbers to six significant digits.
pub fn render_heatmap(cells: &[CellResult], sigma2: f64) -> String {
    let slice: Vec<&CellResult> = cells.iter().filter(|c| c.sigma2 == sigma2).collect();
    let mut dims: Vec<usize> = slice.iter().map(|c| c.d).collect();
    dims.sort_unstable();
    dims.dedup();
    let mut taus: Vec<u64> = slice.iter().map(|c| c.tau).collect();
    taus.sort_unstable();
    taus.dedup();

    let finite: Vec<f64> = slice
        .iter()
        .map(|c| c.mean_error)
        .filter(|v| v.is_finite() && *v > 0.0)
        .collect();
    let (lo, hi) = if finite.is_empty() {
        (1e-12, 1.0)
    } else {
        let lo = finite.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = finite.iter().cloned().fold(0.0f64, f64::max);
        (lo, hi.max(lo * (1.0 + 1e-12)))
    };

    let cell_px = 48.0;
    let margin_left = 70.0;
    let margin_top = 50.0;
    let legend_h = 46.0;
    let width = margin_left + cell_px * taus.len() as f64 + 130.0;
    let height = margin_top + cell_px * dims.len() as f64 + legend_h + 30.0;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="monospace" font-size="11">"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{margin_left}" y="18" font-size="13">final squared error, sigma2 = {sigma2}</text>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}">tau (right) / d (down)</text>"#,
        margin_left,
        margin_top - 14.0
    );

    for (yi, &d) in dims.iter().enumerate() {
        let y = margin_top + yi as f64 * cell_px;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">d={d}</text>"#,
            margin_left - 6.0,
            y + cell_px * 0.6
        );
        for (xi, &tau) in taus.iter().enumerate() {
            let x = margin_left + xi as f64 * cell_px;
            if yi == 0 {
                let _ = writeln!(
                    svg,
                    r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{tau}</text>"#,
                    x + cell_px / 2.0,
                    margin_top - 4.0
                );
            }
            let cell = slice.iter().find(|c| c.d == d && c.tau == tau);
            let (value, color) = match cell {
                Some(c) if c.mean_error.is_finite() => {
                    (c.mean_error, color_for(c.mean_error, lo, hi))
                }
                _ => (f64::NAN, "#888888".to_string()),
            };
            let value_attr = if value.is_nan() {
                "nan".to_string()
            } else {
                format!("{value:.5e}")
            };
            let _ = writeln!(
                svg,
                r##"<rect x="{x:.1}" y="{y:.1}" width="{cell_px}" height="{cell_px}" fill="{color}" stroke="#222" data-d="{d}" data-tau="{tau}" data-value="{value_attr}"/>"##
            );
        }
    }

    // Color legend.
    let ly = margin_top + cell_px * dims.len() as f64 + 18.0;
    let steps = 40;
    let lw = 200.0;
    for i in 0..steps {
        let frac = i as f64 / (steps - 1) as f64;
        let v = (lo.ln() + frac * (hi.ln() - lo.ln())).exp();
        let _ = writeln!(
            svg,
            r#"<rect x="{:.1}" y="{ly:.1}" width="{:.1}" height="12" fill="{}"/>"#,
            margin_left + frac * lw,
            lw / steps as f64 + 1.0,
            color_for(v, lo, hi)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{margin_left}" y="{:.1}">{lo:.2e}</text><text x="{:.1}" y="{:.1}">{hi:.2e}</text>"#,
        ly + 26.0,
        margin_left + lw - 10.0,
        ly + 26.0
    );
    svg.push_str("</svg>\n");
    svg
}

/// Log-scaled five-stop color ramp (dark blue to yellow).
fn color_for(v: f64, lo: f64, hi: f64) -> String {
    let stops: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let frac = if hi > lo && v > 0.0 {
        ((v.ln() - lo.ln()) / (hi.ln() - lo.ln())).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let scaled = frac * (stops.len() - 1) as f64;
    let i = (scaled.floor() as usize).min(stops.len() - 2);
    let u = scaled - i as f64;
    let mix = |a: f64, b: f64| (a + u * (b - a)).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(stops[i].0, stops[i + 1].0),
        mix(stops[i].1, stops[i + 1].1),
        mix(stops[i].2, stops[i + 1].2)
    )
}

/// Output paths of a grid run.
#[derive(Debug, Clone)]
pub struct GridOutput {
    pub csv_path: PathBuf,
    pub svg_paths: Vec<PathBuf>,
    pub cells: Vec<CellResult>,
}

/// Run the grid and write CSV plus one heatmap per sigma2.
pub fn run_grid_to_files(cfg: &ExperimentConfig) -> Result<GridOutput> {
    let cells = run_grid(cfg)?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let csv_path = cfg.out_dir.join(&cfg.csv_name);
    std::fs::write(&csv_path, render_csv(&cells)).map_err(|e| Error::io(&csv_path, e))?;
    let mut svg_paths = Vec::new();
    for &sigma2 in &cfg.sigma2s {
        let svg = render_heatmap(&cells, sigma2);
        let path = cfg
            .out_dir
            .join(format!("{}_sigma2_{}.svg", cfg.svg_prefix, csv_float(sigma2)));
        std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
        svg_paths.push(path);
    }
    Ok(GridOutput {
        csv_path,
        svg_paths,
        cells,
    })
}

/// Single-run trajectory CSV: `k,err_sq,lyapunov_r,oracle_calls_cum`.
pub fn render_run_csv(record: &crate::optimizer::RunRecord) -> String {
    let mut out = String::new();
    out.push_str("k,err_sq,lyapunov_r,oracle_calls_cum\n");
    for row in &record.rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.k,
            csv_float(row.err_sq),
            csv_float(row.lyapunov),
            row.calls_cum
        );
    }
    out
}

/// Execute the single-run command described by a config (first grid point).
pub fn run_single_to_file(cfg: &ExperimentConfig, path: &Path) -> Result<crate::optimizer::RunRecord> {
    let d = cfg.dims[0];
    let tau = cfg.taus[0];
    let sigma2 = cfg.sigma2s[0];
    let problem = cfg.problem(d)?;
    let params = derive_params(
        d,
        problem.mu,
        if cfg.kind == ConfigProblemKind::NonsmoothL1 {
            problem.lips_f.unwrap_or(cfg.lips)
        } else {
            problem.lips_grad.unwrap_or(cfg.lips)
        },
        cfg.gamma,
        cfg.t,
        cfg.p,
        cfg.b,
        cfg.feedback,
        cfg.kind != ConfigProblemKind::NonsmoothL1,
        cfg.iterations,
    )?;
    let chain = ChainParams::lazy_gaussian(d, tau, sigma2.sqrt())?;
    let run_cfg = RunConfig {
        params,
        chain,
        x0: problem.start_point(cfg.initial_dist_sq),
        grad_source: GradSource::Mlmc,
        adversarial: None,
        record_trajectory: true,
    };
    let seed = mix_seed(cfg.seed, &[d as u64, tau, sigma2.to_bits(), 0]);
    let record = match run(&problem, &run_cfg, seed) {
        Ok(r) => r,
        Err(Error::Divergence { partial, .. }) => *partial,
        Err(e) => return Err(e),
    };
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    std::fs::write(path, render_run_csv(&record)).map_err(|e| Error::io(path, e))?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip_and_defaults() {
        let cfg = ExperimentConfig::parse(
            "problem.kind = quadratic_markov\n\
             problem.dim_grid = 2,4\n\
             chain.tau_grid = 1,8\n\
             chain.sigma2_grid = 0.001\n\
             optimizer.replications = 3\n\
             # comment line\n\
             optimizer.seed = 9\n",
        )
        .unwrap();
        assert_eq!(cfg.dims, vec![2, 4]);
        assert_eq!(cfg.taus, vec![1, 8]);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.replications, 3);
        assert_eq!(cfg.gamma, 1e-3);
    }

    #[test]
    fn parse_rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::parse("problem.what = 3\n").is_err());
        assert!(ExperimentConfig::parse("problem.dim = abc\n").is_err());
        assert!(ExperimentConfig::parse("problem.dim = 2\nproblem.dim = 3\n").is_err());
    }

    #[test]
    fn degenerate_grid_single_cell() {
        let mut cfg = ExperimentConfig::default();
        cfg.dims = vec![2];
        cfg.taus = vec![2];
        cfg.sigma2s = vec![0.0];
        cfg.replications = 1;
        cfg.iterations = 300;
        cfg.gamma = 0.5;
        cfg.t = 1e-4;
        let cells = run_grid(&cfg).unwrap();
        assert_eq!(cells.len(), 1);
        assert!(cells[0].mean_error < 1e-2, "error {}", cells[0].mean_error);
    }

    #[test]
    fn csv_schema_stable() {
        let cells = vec![CellResult {
            d: 2,
            tau: 4,
            sigma2: 1e-3,
            mean_error: 0.5,
            se_error: 0.1,
            mean_oracle_calls: 42.0,
            seed_base: 7,
            diverged: 0,
        }];
        let csv = render_csv(&cells);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(lines.next().unwrap(), "2,4,0.001,0.5,0.1,42,7");
        assert!(csv.ends_with('\n'));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn nan_sentinel_in_csv() {
        let cells = vec![CellResult {
            d: 2,
            tau: 4,
            sigma2: 1e-3,
            mean_error: f64::NAN,
            se_error: f64::NAN,
            mean_oracle_calls: 10.0,
            seed_base: 7,
            diverged: 3,
        }];
        let csv = render_csv(&cells);
        assert!(csv.contains("nan,nan"));
    }

    #[test]
    fn heatmap_embeds_cell_values() {
        let cells = vec![
            CellResult {
                d: 2,
                tau: 1,
                sigma2: 1e-3,
                mean_error: 1.234567e-4,
                se_error: 0.0,
                mean_oracle_calls: 10.0,
                seed_base: 1,
                diverged: 0,
            },
            CellResult {
                d: 2,
                tau: 2,
                sigma2: 1e-3,
                mean_error: 5.5e-3,
                se_error: 0.0,
                mean_oracle_calls: 10.0,
                seed_base: 1,
                diverged: 0,
            },
        ];
        let svg = render_heatmap(&cells, 1e-3);
        assert!(svg.contains(r#"data-d="2" data-tau="1" data-value="1.23457e-4""#));
        assert!(svg.contains(r#"data-tau="2" data-value="5.50000e-3""#));
        assert!(svg.starts_with("<svg"));
    }
}
