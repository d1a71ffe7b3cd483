//! Subcommands of the `hyperloc` binary. Each returns an [`Outcome`] whose
//! exit status depends only on the computed report.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{ConfigError, GridSpec, RunConfig};
use crate::expr::C64;
use crate::fourier::{fourier_transform, indicator_pm1, orthant_partition};
use crate::hyperfunction::{boundary_evaluate, HyperfunctionError};
use crate::localization::{picken, LocalizationError, LocalizationProblem};
use crate::loop_su2::{
    self, classify_subtorus, euler_closed_form, fixed_loop_from_modes, solve_fixed_loop, truncated_euler_product,
    verify_fixed_loop, FixedLoopReport, FixedLoopSU2, LoopError, PickenOptions,
};
use crate::rational::int;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitCode {
    Pass = 0,
    NumericalFail = 1,
    Usage = 2,
    Internal = 3,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {message}")]
    Pipeline { context: &'static str, message: String },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::Usage,
            _ => ExitCode::Internal,
        }
    }
}

fn pipeline<E: std::fmt::Display>(context: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::Pipeline {
        context,
        message: e.to_string(),
    }
}

impl From<LocalizationError> for CliError {
    fn from(e: LocalizationError) -> Self {
        pipeline("localization")(e)
    }
}

impl From<HyperfunctionError> for CliError {
    fn from(e: HyperfunctionError) -> Self {
        pipeline("boundary evaluation")(e)
    }
}

/// Result of a subcommand: the CSV or JSON body and a one-line summary.
#[derive(Debug)]
pub struct Outcome {
    pub code: ExitCode,
    pub body: String,
    pub summary: String,
}

#[derive(Debug, Parser)]
#[command(name = "hyperloc", version, about = "Hyperfunction localization toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// S² pipeline: Picken hyperfunction, Fourier transform, boundary values on a ξ grid.
    DhS2,
    /// Truncated Euler product against its sinc closed form on a w grid.
    Su2Euler,
    /// Solve and verify a loop fixed by the circle (n, m).
    Su2Fixed,
    /// Truncated ΩSU(2) Picken hyperfunction at wedge points, with N vs 2N certificate.
    PickenEval,
    /// Two-dimensional DH integral for one (n, piece, ζ) at two contour heights.
    DhSu2Probe,
    /// Write JSON fixtures into the output directory.
    FixturesExport,
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let v: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    <[f64; 2]>::try_from(v).map_err(|_| format!("expected two comma-separated numbers, got {s:?}"))
}

fn parse_int_pair(s: &str) -> Result<[i64; 2], String> {
    let v: Vec<i64> = s.split(',').map(|p| p.trim().parse::<i64>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    <[i64; 2]>::try_from(v).map_err(|_| format!("expected two comma-separated integers, got {s:?}"))
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected min,max,steps, got {s:?}"));
    }
    let min = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let max = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let steps = parts[2].trim().parse::<usize>().map_err(|e| e.to_string())?;
    Ok(GridSpec::new(min, max, steps))
}

fn parse_zeta(s: &str) -> Result<[[f64; 2]; 2], String> {
    let v: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    match v.as_slice() {
        [a, b, c, d] => Ok([[*a, *b], [*c, *d]]),
        _ => Err(format!("expected re1,im1,re2,im2, got {s:?}")),
    }
}

/// Flags overriding the config file.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output file (directory for fixtures-export); stdout otherwise.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Real grid as min,max,steps.
    #[arg(long, global = true, value_parser = parse_grid)]
    pub grid: Option<GridSpec>,
    /// Imaginary grid as min,max,steps.
    #[arg(long, global = true, value_parser = parse_grid)]
    pub grid_im: Option<GridSpec>,
    /// Euler product order K.
    #[arg(long = "euler-order", short = 'K', global = true)]
    pub euler_order: Option<u64>,
    /// Fixed-point truncation N.
    #[arg(long, short = 'N', global = true)]
    pub truncation: Option<u64>,
    /// Initial quadrature radius R₀.
    #[arg(long, global = true)]
    pub r0: Option<f64>,
    /// Contour offset δ.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true)]
    pub quad_tol: Option<f64>,
    /// S² polarization ξ.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub polarization: Option<i64>,
    #[arg(long, short = 'n', global = true, allow_hyphen_values = true)]
    pub n: Option<i64>,
    #[arg(long, short = 'm', global = true, allow_hyphen_values = true)]
    pub m: Option<i64>,
    /// Mode pair k,k'.
    #[arg(long, global = true, value_parser = parse_int_pair, allow_hyphen_values = true)]
    pub modes: Option<[i64; 2]>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub psi: Option<f64>,
    /// A with α'(0) = iA (with --beta0, replaces --modes).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// β'(0) as re,im.
    #[arg(long, global = true, value_parser = parse_pair, allow_hyphen_values = true)]
    pub beta0: Option<[f64; 2]>,
    /// Evaluation point x₁,x₂ (repeatable).
    #[arg(long = "at", global = true, value_parser = parse_pair, allow_hyphen_values = true)]
    pub points: Vec<[f64; 2]>,
    /// Wedge height y₁,y₂.
    #[arg(long, global = true, value_parser = parse_pair)]
    pub height: Option<[f64; 2]>,
    #[arg(long, global = true)]
    pub per_n_closed_form: bool,
    /// Partition piece label such as "--" or "+-".
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub piece: Option<String>,
    /// ζ as re1,im1,re2,im2.
    #[arg(long, global = true, value_parser = parse_zeta, allow_hyphen_values = true)]
    pub zeta: Option<[[f64; 2]; 2]>,
}

impl Overrides {
    pub fn apply(&self, mut c: RunConfig) -> RunConfig {
        macro_rules! set {
            ($field:ident => $target:expr) => {
                if let Some(v) = self.$field.clone() {
                    $target = v;
                }
            };
        }
        if self.tol.is_some() {
            c.tolerance = self.tol;
        }
        if self.output.is_some() {
            c.output = self.output.clone();
        }
        if self.grid.is_some() {
            c.grid = self.grid.clone();
        }
        if self.grid_im.is_some() {
            c.grid_im = self.grid_im.clone();
        }
        set!(euler_order => c.euler_order);
        if self.truncation.is_some() {
            c.truncation = self.truncation;
        }
        set!(r0 => c.contour.r0);
        set!(delta => c.contour.delta);
        set!(quad_tol => c.contour.tol);
        set!(polarization => c.s2_polarization);
        set!(n => c.n);
        set!(m => c.m);
        set!(modes => c.modes);
        set!(phi => c.phi);
        set!(psi => c.psi);
        if self.a.is_some() {
            c.a = self.a;
        }
        if self.beta0.is_some() {
            c.beta0 = self.beta0;
        }
        if !self.points.is_empty() {
            c.points = self.points.clone();
        }
        if self.height.is_some() {
            c.height = self.height;
        }
        c.per_n_closed_form |= self.per_n_closed_form;
        set!(piece => c.piece);
        set!(zeta => c.zeta);
        c
    }

    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let c = self.apply(base);
        c.validate()?;
        Ok(c)
    }
}

fn csv_body(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Pipeline {
        context: "csv",
        message: e.to_string(),
    };
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Pipeline {
        context: "csv",
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

/// `dh-s2`: pass iff `|DH(ξ) − χ_{[−1,1]}(ξ)| < tol` on grid points at
/// distance `≥ 0.1` from `±1`.
pub fn cmd_dh_s2(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let tol = cfg.tolerance_or(1e-3);
    let grid = cfg.grid.clone().unwrap_or(GridSpec::new(-2.0, 2.0, 41));
    let problem = LocalizationProblem::builtin_s2().with_polarization(vec![int(cfg.s2_polarization)]);
    let l = picken(&problem)?;
    let ft = fourier_transform(&l, &orthant_partition(1), &cfg.contour).map_err(pipeline("fourier transform"))?;
    let opts = cfg.boundary.options();
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for xi in grid.points() {
        let target = indicator_pm1(xi);
        let included = ((xi.abs() - 1.0).abs()) >= 0.1;
        match boundary_evaluate(&ft.hyperfunction, &[xi], &opts) {
            Ok(bv) => {
                if included {
                    worst = worst.max((bv.value - target).norm());
                }
                rows.push(vec![fmt(xi), fmt(bv.value.re), fmt(bv.value.im), fmt(bv.error), fmt(target), included.to_string()]);
            }
            Err(_) if !included => {
                rows.push(vec![fmt(xi), "NaN".into(), "NaN".into(), "inf".into(), fmt(target), "false".into()]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let body = csv_body(&["xi", "re", "im", "err", "target", "included"], &rows)?;
    let pass = worst < tol;
    Ok(Outcome {
        code: if pass { ExitCode::Pass } else { ExitCode::NumericalFail },
        body,
        summary: format!("dh-s2: max |DH - indicator| = {worst:.3e} (tol {tol:.1e}): {}", verdict(pass)),
    })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Distance from `w` to the zeros of `sin(2π(n + w))/(2π(n + w))`.
fn euler_zero_distance(n: i64, w: C64) -> f64 {
    let u = w + n as f64;
    let nearest = (2.0 * u.re).round() / 2.0;
    let candidates = [nearest - 0.5, nearest, nearest + 0.5];
    candidates
        .iter()
        .filter(|c| **c != 0.0)
        .map(|c| (u - c).norm())
        .fold(f64::INFINITY, f64::min)
}

/// `su2-euler`: pass iff `|Π_K − closed form| < tol` on grid points at
/// distance `≥ 0.1` from the zeros.
pub fn cmd_su2_euler(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let tol = cfg.tolerance_or(1e-3);
    let re = cfg.grid.clone().unwrap_or(GridSpec::new(-1.85, 1.85, 10));
    let im = cfg.grid_im.clone().unwrap_or(GridSpec::new(-0.225, 0.225, 10));
    let product = truncated_euler_product(cfg.n, cfg.euler_order);
    let closed = euler_closed_form(cfg.n);
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &a in &re.points() {
        for &b in &im.points() {
            let w = C64::new(a, b);
            let z = [w, C64::new(1.0, 0.0)];
            let included = euler_zero_distance(cfg.n, w) >= 0.1;
            let p = product.evaluate(&z).map_err(pipeline("euler product"))?;
            let c = closed.evaluate(&z).map_err(pipeline("euler closed form"))?;
            let err = (p - c).norm();
            if included {
                worst = worst.max(err);
            }
            rows.push(vec![fmt(a), fmt(b), fmt(err), fmt(p.re), fmt(p.im), fmt(c.re), fmt(c.im), included.to_string()]);
        }
    }
    let body = csv_body(
        &["re_w", "im_w", "err", "product_re", "product_im", "closed_re", "closed_im", "included"],
        &rows,
    )?;
    let pass = worst < tol;
    Ok(Outcome {
        code: if pass { ExitCode::Pass } else { ExitCode::NumericalFail },
        body,
        summary: format!(
            "su2-euler n={} K={}: max |product - closed| = {worst:.3e} (tol {tol:.1e}): {}",
            cfg.n,
            cfg.euler_order,
            verdict(pass)
        ),
    })
}

pub fn fixed_loop_json(l: &FixedLoopSU2, rep: &FixedLoopReport) -> Value {
    let modes = |ms: &[loop_su2::Mode]| -> Vec<Value> {
        ms.iter().map(|md| json!({"k": md.k, "coeff": complex_json(md.coeff)})).collect()
    };
    json!({
        "n": l.n,
        "m": l.m,
        "levi": classify_subtorus(l.n, l.m).ok(),
        "modes": l.modes(),
        "a": l.a(),
        "beta0_prime": complex_json(l.beta_prime0()),
        "coefficients": {"alpha": modes(&l.alpha), "beta": modes(&l.beta)},
        "residuals": rep,
        "pass": rep.pass(),
    })
}

/// `su2-fixed`: pass iff every residual is below `1e-8`.
pub fn cmd_su2_fixed(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let solved = match (cfg.a, cfg.beta0) {
        (Some(a), Some([re, im])) => solve_fixed_loop(cfg.n, cfg.m, a, C64::new(re, im)),
        (None, None) => fixed_loop_from_modes(cfg.n, cfg.m, cfg.modes[0], cfg.modes[1], cfg.phi, cfg.psi),
        _ => {
            return Err(ConfigError::Invalid("a and beta0 must be given together".into()).into());
        }
    };
    match solved {
        Ok(l) => {
            let rep = verify_fixed_loop(&l, cfg.samples);
            let pass = rep.pass();
            let v = fixed_loop_json(&l, &rep);
            Ok(Outcome {
                code: if pass { ExitCode::Pass } else { ExitCode::NumericalFail },
                body: serde_json::to_string_pretty(&v).expect("json"),
                summary: format!(
                    "su2-fixed n={} m={}: modes {:?}, max residual {:.3e}: {}",
                    l.n,
                    l.m,
                    l.modes(),
                    rep.max_residual(),
                    verdict(pass)
                ),
            })
        }
        Err(e @ (LoopError::NoPeriodicSolution { .. } | LoopError::InconsistentModes(_) | LoopError::TrivialCase)) => {
            let v = json!({
                "n": cfg.n,
                "m": cfg.m,
                "levi": classify_subtorus(cfg.n, cfg.m).ok(),
                "error": e.to_string(),
                "pass": false,
            });
            Ok(Outcome {
                code: ExitCode::NumericalFail,
                body: serde_json::to_string_pretty(&v).expect("json"),
                summary: format!("su2-fixed n={} m={}: {e}", cfg.n, cfg.m),
            })
        }
        Err(e) => Err(pipeline("fixed loop")(e)),
    }
}

/// `picken-eval`: pass iff every point has `|val(2N) − val(N)| < tol` and
/// tail bound `< tol`.
pub fn cmd_picken_eval(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let tol = cfg.tolerance_or(1e-6);
    let y = cfg.height.unwrap_or_else(loop_su2::default_height);
    let opts = PickenOptions {
        per_n_closed_form: cfg.per_n_closed_form,
    };
    let mut rows = Vec::new();
    let mut all = true;
    for x in &cfg.points {
        let r = loop_su2::picken_eval(*x, y, tol, cfg.truncation, opts).map_err(pipeline("picken evaluation"))?;
        all &= r.certified;
        rows.push(vec![
            fmt(x[0]),
            fmt(x[1]),
            fmt(y[0]),
            fmt(y[1]),
            r.truncation.to_string(),
            fmt(r.value.re),
            fmt(r.value.im),
            fmt(r.cauchy + r.tail_bound),
            r.certified.to_string(),
        ]);
    }
    let body = csv_body(&["x1", "x2", "y1", "y2", "N", "re", "im", "err", "certified"], &rows)?;
    Ok(Outcome {
        code: if all { ExitCode::Pass } else { ExitCode::NumericalFail },
        body,
        summary: format!("picken-eval: {} point(s), tol {tol:.1e}: {}", cfg.points.len(), verdict(all)),
    })
}

/// `dh-su2-probe`: report-only; fails only when the two heights disagree.
pub fn cmd_dh_su2_probe(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let heights = cfg.heights.unwrap_or_else(|| {
        let h = loop_su2::default_height();
        [h, [2.0 * h[0], 2.0 * h[1]]]
    });
    let rep = loop_su2::dh_su2_probe(cfg.n, &cfg.piece, cfg.zeta(), heights, &cfg.probe_contour)
        .map_err(pipeline("dh probe"))?;
    let pass = rep.contour_independent;
    Ok(Outcome {
        code: if pass { ExitCode::Pass } else { ExitCode::NumericalFail },
        body: serde_json::to_string_pretty(&rep).expect("json"),
        summary: format!(
            "dh-su2-probe n={} piece {}: |I(h1) - I(h2)| = {:.3e}: {}",
            rep.n,
            rep.piece,
            rep.difference,
            verdict(pass)
        ),
    })
}

/// `fixtures-export`: writes `s2_problem.json`, `s2_picken.json` and
/// `su2_fixed_loop.json`.
pub fn cmd_fixtures_export(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let dir = cfg.output.clone().unwrap_or_else(|| PathBuf::from("fixtures"));
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let problem = LocalizationProblem::builtin_s2();
    let l = picken(&problem)?;
    let fixed = fixed_loop_from_modes(1, 2, 0, 1, 1.1, 0.4).map_err(pipeline("fixed loop"))?;
    let files = [
        ("s2_problem.json", problem.to_json()),
        ("s2_picken.json", l.to_json()?),
        ("su2_fixed_loop.json", fixed_loop_json(&fixed, &verify_fixed_loop(&fixed, cfg.samples))),
    ];
    let mut written = Vec::new();
    for (name, v) in files {
        let path = dir.join(name);
        std::fs::write(&path, serde_json::to_string_pretty(&v).expect("json") + "\n").map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path.display().to_string());
    }
    Ok(Outcome {
        code: ExitCode::Pass,
        body: String::new(),
        summary: format!("fixtures-export: wrote {}", written.join(", ")),
    })
}

pub fn run_command(command: &Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::DhS2 => cmd_dh_s2(cfg),
        Command::Su2Euler => cmd_su2_euler(cfg),
        Command::Su2Fixed => cmd_su2_fixed(cfg),
        Command::PickenEval => cmd_picken_eval(cfg),
        Command::DhSu2Probe => cmd_dh_su2_probe(cfg),
        Command::FixturesExport => cmd_fixtures_export(cfg),
    }
}

/// Resolves the config, runs the command and writes the body to the
/// output file or stdout. Returns the process exit code.
pub fn main_with(cli: &Cli) -> ExitCode {
    let cfg = match cli.overrides.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::Usage;
        }
    };
    let outcome = match run_command(&cli.command, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if !outcome.body.is_empty() {
        let target = match cli.command {
            Command::FixturesExport => None,
            _ => cfg.output.clone(),
        };
        match target {
            Some(path) => {
                if let Err(e) = std::fs::write(&path, &outcome.body) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::Internal;
                }
            }
            None => print!("{}", outcome.body),
        }
    }
    eprintln!("{}", outcome.summary);
    outcome.code
}
