//! Command-line front end: `conespec <command> [flags] [--config run.json]`.
//!
//! Flags override the config file. The resolved configuration (defaults
//! filled in, output section left out) is echoed into the JSON payload and
//! its SHA-256 is stamped on every row. Diagnostics go to stderr, results
//! to files. Exit codes: 0 success, 2 validation error, 3 solver failure.

mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::assembly::{
    assemble_cone, assemble_cross_section_robin, assemble_effective, assemble_trace_problem, build_mesh_1d, ConeMode,
    EndCondition, Mesh1D, TransverseMesh,
};
use crate::asymptotics::{default_mode, fit_leading, leading_target, sweep, truncation_rule, MeshRules, DEFAULT_EPS};
use crate::eigensolve::{solve, SolveOptions, SolveStats, Spectrum, WhichEnd};
use crate::geometry::{make_cross_section, CrossSection, CrossSectionSpec, Shape};
use crate::oracles::{
    ball_robin_radial_oracle, effective_exact, exterior_lower_bound, interval_robin_oracle, rectangle_separation,
    richardson_slope, round_cone_exact, EffectiveSpec,
};
use crate::verify::{self, EFFECTIVE_CELLS, EFFECTIVE_FIRST_CELL};
use crate::{Error, Result};
pub use output::{config_hash, csv_string, fmt_e, svg_plot, to_json_string, PlotSeries, Row, CSV_HEADER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CrossSection,
    RobinSlope,
    Effective,
    Cone,
    Sweep,
    Fit,
    Trace,
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::CrossSection => "cross-section",
            Command::RobinSlope => "robin-slope",
            Command::Effective => "effective",
            Command::Cone => "cone",
            Command::Sweep => "sweep",
            Command::Fit => "fit",
            Command::Trace => "trace",
            Command::Verify => "verify",
        }
    }

    /// Fields the command reads (`mesh.*` etc. for nested ones).
    fn allowed(self) -> &'static [&'static str] {
        const MESH: [&str; 4] = ["mesh.cells", "mesh.grading", "mesh.first_cell", "mesh.t_cells"];
        match self {
            Command::CrossSection => &["cross_section", "r", "j", "mesh.cells"],
            Command::RobinSlope => &["cross_section", "h", "mesh.cells"],
            Command::Effective => &["n", "n_omega", "lambda", "b", "s0", "j", "mesh.cells", "mesh.grading", "mesh.first_cell"],
            Command::Cone => &[
                "cross_section", "eps", "a", "j", "mode", "alpha", "check_modes",
                MESH[0], MESH[1], MESH[2], MESH[3],
            ],
            Command::Sweep => &["cross_section", "eps_list", "j_max", "mode", "alpha", MESH[0], MESH[1], MESH[2], MESH[3]],
            Command::Fit => &["cross_section", "eps_list", "j", "j_max", "mode", MESH[0], MESH[1], MESH[2], MESH[3]],
            Command::Trace => &["cross_section", "eps", "a", "delta", "mode", MESH[0], MESH[1], MESH[2], MESH[3]],
            Command::Verify => &[],
        }
    }

    fn required(self) -> &'static [&'static str] {
        match self {
            Command::CrossSection => &["cross_section", "r"],
            Command::RobinSlope | Command::Sweep | Command::Fit => &["cross_section"],
            Command::Effective => &["n", "n_omega", "lambda", "b"],
            Command::Cone => &["cross_section", "eps"],
            Command::Trace => &["cross_section", "eps", "delta"],
            Command::Verify => &[],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// A catalog name (`disk`, `ball3`, `rect:2x1`, ...) or a full spec object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CrossSectionInput {
    Name(String),
    Spec(CrossSectionSpec),
}

impl CrossSectionInput {
    fn resolve(&self) -> Result<CrossSectionSpec> {
        match self {
            CrossSectionInput::Name(name) => CrossSectionSpec::from_name(name),
            CrossSectionInput::Spec(spec) => {
                spec.validate()?;
                Ok(spec.clone())
            }
        }
    }
}

/// Mesh overrides. `cells` counts s-cells for cone-type commands and
/// effective problems, transverse cells for cross-section commands.
/// `first_cell` is in units of ε for cone-type commands and absolute for
/// effective problems; `grading` (last/first cell ratio) replaces it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grading: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_cell: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_cells: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense_threshold: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Path stem; `.csv`, `.json`, `.svg` and `.meta.json` are appended.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formats: Option<Vec<Format>>,
    /// Record wall-clock times in the payload (breaks byte-identity).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<bool>,
}

/// One run. Unknown keys are rejected, so a misspelled field is an error
/// rather than a silently ignored default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_section: Option<CrossSectionInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Robin parameter of the cross-section problem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Step of the centered difference in `robin-slope`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Number of eigenvalues (`cross-section`, `effective`, `cone`) or the
    /// fitted index (`fit`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_max: Option<usize>,
    /// `full` or `m<k>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    /// Also solve the disk sectors `m = 1..=check_modes` (cone only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_modes: Option<usize>,
    /// Robin parameter; reported values are `α²·E(α = 1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing)]
    pub output: OutputConfig,
}

#[derive(Parser, Debug)]
#[command(name = "conespec", version, about = "Robin eigenvalues of sharp cones", allow_negative_numbers = true)]
struct Cli {
    command: Command,
    /// Strict JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cross-section: interval, disk, ballN, square, rect:AxB, annulus:IN:OUT.
    #[arg(long)]
    cs: Option<String>,
    /// Aperture ε of the cone.
    #[arg(long)]
    eps: Option<f64>,
    /// Comma-separated ε values for sweep and fit.
    #[arg(long, value_delimiter = ',')]
    eps_list: Option<Vec<f64>>,
    /// Truncation length of the cone (default from the truncation rule).
    #[arg(long)]
    a: Option<f64>,
    /// Trace-inequality weight δ.
    #[arg(long)]
    delta: Option<f64>,
    /// Robin parameter of the cross-section problem.
    #[arg(long)]
    r: Option<f64>,
    /// Step of the centered difference in robin-slope.
    #[arg(long)]
    h: Option<f64>,
    /// Number of eigenvalues, or the fitted index for fit.
    #[arg(long)]
    j: Option<usize>,
    /// Number of eigenvalues per ε in a sweep.
    #[arg(long)]
    j_max: Option<usize>,
    /// Cone discretization: `full` or a Fourier sector `m<k>`.
    #[arg(long)]
    mode: Option<String>,
    /// Also solve the disk sectors m = 1..=K and compare.
    #[arg(long)]
    check_modes: Option<usize>,
    /// Robin parameter α; reported values are scaled by α².
    #[arg(long)]
    alpha: Option<f64>,
    /// Dimension n of the effective operator.
    #[arg(long)]
    n: Option<usize>,
    /// N_ω of the effective operator.
    #[arg(long = "nomega")]
    n_omega: Option<f64>,
    /// λ of the effective operator.
    #[arg(long)]
    lambda: Option<f64>,
    /// Right end of the effective interval.
    #[arg(long)]
    b: Option<f64>,
    /// Left end of the exterior effective problem (default 0).
    #[arg(long)]
    s0: Option<f64>,
    /// Cells of the main mesh (s-direction for cone problems).
    #[arg(long)]
    cells: Option<usize>,
    /// Geometric grading ratio of the s-mesh.
    #[arg(long)]
    grading: Option<f64>,
    /// First s-cell as a multiple of ε (cone) or absolute (effective).
    #[arg(long)]
    first_cell: Option<f64>,
    /// Transverse cells of cone meshes.
    #[arg(long)]
    t_cells: Option<usize>,
    /// Backward-error tolerance per eigenpair.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed of the Lanczos start vector.
    #[arg(long)]
    seed: Option<u64>,
    /// Lanczos step budget.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Largest dimension solved densely.
    #[arg(long)]
    dense_threshold: Option<usize>,
    /// Output path stem (default: the command name).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of csv, json, svg.
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<Format>>,
    /// Write wall-clock times into the payload (breaks byte-identity).
    #[arg(long)]
    timing: bool,
}

impl Cli {
    fn into_config(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str::<RunConfig>(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(c) = cfg.command.filter(|&c| c != self.command) {
            return Err(Error::Config(format!(
                "config file is for `{}`, command line asks for `{}`",
                c.name(),
                self.command.name()
            )));
        }
        cfg.command = Some(self.command);
        fn set<T>(slot: &mut Option<T>, v: Option<T>) {
            if v.is_some() {
                *slot = v;
            }
        }
        set(&mut cfg.cross_section, self.cs.map(CrossSectionInput::Name));
        set(&mut cfg.eps, self.eps);
        set(&mut cfg.eps_list, self.eps_list);
        set(&mut cfg.a, self.a);
        set(&mut cfg.delta, self.delta);
        set(&mut cfg.r, self.r);
        set(&mut cfg.h, self.h);
        set(&mut cfg.j, self.j);
        set(&mut cfg.j_max, self.j_max);
        set(&mut cfg.mode, self.mode);
        set(&mut cfg.check_modes, self.check_modes);
        set(&mut cfg.alpha, self.alpha);
        set(&mut cfg.n, self.n);
        set(&mut cfg.n_omega, self.n_omega);
        set(&mut cfg.lambda, self.lambda);
        set(&mut cfg.b, self.b);
        set(&mut cfg.s0, self.s0);
        set(&mut cfg.mesh.cells, self.cells);
        set(&mut cfg.mesh.grading, self.grading);
        set(&mut cfg.mesh.first_cell, self.first_cell);
        set(&mut cfg.mesh.t_cells, self.t_cells);
        set(&mut cfg.solver.tol, self.tol);
        set(&mut cfg.solver.seed, self.seed);
        set(&mut cfg.solver.max_iter, self.max_iter);
        set(&mut cfg.solver.dense_threshold, self.dense_threshold);
        set(&mut cfg.output.path, self.out);
        set(&mut cfg.output.formats, self.format);
        if self.timing {
            cfg.output.timing = Some(true);
        }
        Ok(cfg)
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match cli.into_config().and_then(|cfg| execute(&cfg)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("conespec: {e}");
            exit_code(&e)
        }
    }
}

/// 2 for anything wrong with the request, 3 for numerical failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidSpec { .. }
        | Error::InvalidMesh(_)
        | Error::InvalidInput(_)
        | Error::Unsupported(_)
        | Error::Config(_)
        | Error::Io(_)
        | Error::Json(_) => 2,
        Error::SingularMass { .. }
        | Error::Factorization { .. }
        | Error::NoConvergence(_)
        | Error::DimensionMismatch { .. }
        | Error::RankDeficient(_) => 3,
    }
}

/// Checks the field set of `cfg` against its command and runs it.
/// Returns the exit code (3 when some rows failed but outputs were written).
pub fn execute(cfg: &RunConfig) -> Result<i32> {
    let command = cfg.command.ok_or_else(|| Error::Config("no command given".into()))?;
    check_fields(command, cfg)?;
    let formats = cfg.output.formats.clone().unwrap_or_else(|| match command {
        Command::Sweep | Command::Fit => vec![Format::Csv, Format::Json, Format::Svg],
        Command::Verify => vec![],
        _ => vec![Format::Csv, Format::Json],
    });
    if formats.contains(&Format::Svg) && !matches!(command, Command::Sweep | Command::Fit) {
        return Err(Error::Config(format!("svg output is only produced by sweep and fit, not `{}`", command.name())));
    }
    if command == Command::Verify && formats.iter().any(|&f| f != Format::Json) {
        return Err(Error::Config("verify writes json only".into()));
    }
    let mut ctx = Ctx {
        command,
        echo: cfg.clone(),
        hash: String::new(),
        timing: cfg.output.timing.unwrap_or(false),
        stem: cfg.output.path.clone().unwrap_or_else(|| PathBuf::from(command.name())),
        formats,
        start: Instant::now(),
        opts: solve_options(&cfg.solver)?,
    };
    match command {
        Command::CrossSection => cross_section_cmd(&mut ctx),
        Command::RobinSlope => robin_slope_cmd(&mut ctx),
        Command::Effective => effective_cmd(&mut ctx),
        Command::Cone => cone_cmd(&mut ctx),
        Command::Sweep => sweep_cmd(&mut ctx),
        Command::Fit => fit_cmd(&mut ctx),
        Command::Trace => trace_cmd(&mut ctx),
        Command::Verify => verify_cmd(&mut ctx),
    }
}

fn check_fields(command: Command, cfg: &RunConfig) -> Result<()> {
    let value = serde_json::to_value(cfg)?;
    let mut present = Vec::new();
    for (k, v) in value.as_object().into_iter().flatten() {
        match (k.as_str(), v) {
            ("command", _) | ("solver", _) => {}
            ("mesh", Value::Object(inner)) => present.extend(inner.keys().map(|f| format!("mesh.{f}"))),
            (field, _) => present.push(field.to_string()),
        }
    }
    if let Some(extra) = present.iter().find(|f| !command.allowed().contains(&f.as_str())) {
        return Err(Error::Config(format!("`{extra}` is not a parameter of `{}`", command.name())));
    }
    if let Some(missing) = command.required().iter().find(|f| !present.iter().any(|p| p == *f)) {
        return Err(Error::Config(format!("`{}` requires `{missing}`", command.name())));
    }
    Ok(())
}

fn solve_options(cfg: &SolverConfig) -> Result<SolveOptions> {
    let d = SolveOptions::default();
    let opts = SolveOptions {
        tol: cfg.tol.unwrap_or(d.tol),
        seed: cfg.seed.unwrap_or(d.seed),
        max_iter: cfg.max_iter.unwrap_or(d.max_iter),
        dense_threshold: cfg.dense_threshold.unwrap_or(d.dense_threshold),
        ..d
    };
    opts.validate()?;
    Ok(opts)
}

struct Ctx {
    command: Command,
    /// Resolved configuration; defaults are filled in as commands read them.
    echo: RunConfig,
    hash: String,
    timing: bool,
    stem: PathBuf,
    formats: Vec<Format>,
    start: Instant,
    opts: SolveOptions,
}

impl Ctx {
    fn cross_section(&mut self) -> Result<CrossSection> {
        let input = self.echo.cross_section.as_ref().ok_or_else(|| Error::Config("missing cross_section".into()))?;
        let spec = input.resolve()?;
        self.echo.cross_section = Some(CrossSectionInput::Spec(spec.clone()));
        make_cross_section(&spec)
    }

    fn mode(&mut self, cs: &CrossSection) -> Result<ConeMode> {
        let mode = match &self.echo.mode {
            Some(m) => m.parse()?,
            None => default_mode(cs),
        };
        self.echo.mode = Some(mode.to_string());
        Ok(mode)
    }

    fn cone_rules(&mut self, base: MeshRules) -> Result<MeshRules> {
        let m = &mut self.echo.mesh;
        let rules = MeshRules {
            s_cells: *m.cells.get_or_insert(base.s_cells),
            first_cell: if m.grading.is_some() { base.first_cell } else { *m.first_cell.get_or_insert(base.first_cell) },
            grading: m.grading,
            t_cells: *m.t_cells.get_or_insert(base.t_cells),
        };
        if m.grading.is_some() && m.first_cell.is_some() {
            return Err(Error::Config("give either mesh.grading or mesh.first_cell, not both".into()));
        }
        if rules.s_cells < 2 {
            return Err(Error::InvalidMesh(format!("need at least 2 s-cells, got {}", rules.s_cells)));
        }
        Ok(rules)
    }

    /// Fills solver defaults into the echo and fixes the config hash.
    fn seal(&mut self) -> Result<()> {
        let s = &mut self.echo.solver;
        s.tol = Some(self.opts.tol);
        s.seed = Some(self.opts.seed);
        s.max_iter = Some(self.opts.max_iter);
        s.dense_threshold = Some(self.opts.dense_threshold);
        self.hash = config_hash(&self.echo)?;
        Ok(())
    }

    fn ms(&self, t: Instant) -> f64 {
        if self.timing {
            t.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        }
    }

    fn stats(&self, stats: &SolveStats) -> Value {
        let mut v = serde_json::to_value(stats).unwrap_or(Value::Null);
        if !self.timing {
            v["wall_ms"] = json!(0.0);
        }
        v
    }

    fn row(&self, j: usize, mode: &str, e: Option<f64>, residual: Option<f64>, dof: usize, mesh: &str) -> Row {
        Row {
            eps: None,
            a: None,
            j,
            mode: mode.to_string(),
            e,
            residual,
            dof,
            wall_ms: 0.0,
            config_hash: self.hash.clone(),
            mesh: mesh.to_string(),
            solver: Value::Null,
            error: None,
        }
    }

    fn spectrum_rows(&self, spectrum: &Spectrum, count: usize, mode: &str, mesh: &str, wall_ms: f64) -> Result<Vec<Row>> {
        (1..=count)
            .map(|j| {
                let e = spectrum.value(j)?;
                let mut row = self.row(j, mode, Some(e), Some(spectrum.residuals[j - 1]), spectrum.stats.dim, mesh);
                row.solver = self.stats(&spectrum.stats);
                row.wall_ms = wall_ms;
                Ok(row)
            })
            .collect()
    }

    fn emit(&self, rows: &[Row], result: Value, plot: Option<String>) -> Result<()> {
        let mut written = Vec::new();
        for &format in &self.formats {
            let (ext, body) = match format {
                Format::Csv => ("csv", csv_string(rows)),
                Format::Json => {
                    let payload = json!({
                        "command": self.command,
                        "config": self.echo,
                        "config_hash": self.hash,
                        "rows": rows,
                        "result": result,
                        "version": env!("CARGO_PKG_VERSION"),
                    });
                    ("json", to_json_string(&payload)? + "\n")
                }
                Format::Svg => match &plot {
                    Some(svg) => ("svg", svg.clone()),
                    None => continue,
                },
            };
            let path = output::with_ext(&self.stem, ext);
            output::write_file(&path, &body)?;
            written.push(path);
        }
        if !written.is_empty() {
            let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
            let meta = json!({
                "config_hash": self.hash,
                "created_unix_s": created,
                "wall_ms_total": self.start.elapsed().as_secs_f64() * 1e3,
                "threads": rayon::current_num_threads(),
                "threads_env": std::env::var("CONESPEC_THREADS").ok(),
                "outputs": written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
                "version": env!("CARGO_PKG_VERSION"),
            });
            output::write_file(&output::with_ext(&self.stem, "meta.json"), &(to_json_string(&meta)? + "\n"))?;
            for path in &written {
                eprintln!("wrote {}", path.display());
            }
        }
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive, got {v}")))
    }
}

fn at_least_one(name: &str, v: usize) -> Result<usize> {
    if v >= 1 {
        Ok(v)
    } else {
        Err(Error::InvalidInput(format!("{name} must be at least 1")))
    }
}

/// Default transverse cells for the stand-alone cross-section problem.
fn cross_section_cells(cs: &CrossSection) -> usize {
    match cs.shape {
        Shape::Rectangle { .. } => 64,
        _ => 2000,
    }
}

/// Reference `E₁` of the cross-section Robin problem where a closed form
/// or a semi-analytic oracle exists.
fn cross_section_oracle(cs: &CrossSection, r: f64, count: usize) -> Result<Option<Vec<f64>>> {
    Ok(match &cs.shape {
        Shape::Interval { half_length } => Some(interval_robin_oracle(r, *half_length, count)?.values),
        Shape::Rectangle { sides } => Some(rectangle_separation(r, sides, count)?),
        // the radial ground state of the unit ball, rescaled to radius R
        Shape::Ball { n, radius } => Some(vec![ball_robin_radial_oracle(*n, r * radius, 1e-15)? / (radius * radius)]),
        Shape::Annulus { .. } => None,
    })
}

fn cross_section_cmd(ctx: &mut Ctx) -> Result<i32> {
    let cs = ctx.cross_section()?;
    let r = ctx.echo.r.filter(|r| r.is_finite()).ok_or_else(|| Error::InvalidInput("r must be finite".into()))?;
    let count = at_least_one("j", *ctx.echo.j.get_or_insert(1))?;
    let cells = *ctx.echo.mesh.cells.get_or_insert(cross_section_cells(&cs));
    ctx.seal()?;
    let t = Instant::now();
    let asm = assemble_cross_section_robin(&cs, TransverseMesh { cells })?;
    let spectrum = solve(&asm, r, &SolveOptions { k: count, ..ctx.opts.clone() })?;
    let mode = if matches!(cs.shape, Shape::Ball { .. } | Shape::Annulus { .. }) { "m0" } else { "full" };
    let rows = ctx.spectrum_rows(&spectrum, count, mode, &asm.meta.mesh, ctx.ms(t))?;
    let reference = cross_section_oracle(&cs, r, count)?;
    let result = json!({
        "cross_section": cs.id(),
        "r": r,
        "n_omega": cs.n_omega,
        "values": spectrum.values,
        "reference": reference,
    });
    ctx.emit(&rows, result, None)?;
    Ok(0)
}

fn robin_slope_cmd(ctx: &mut Ctx) -> Result<i32> {
    let cs = ctx.cross_section()?;
    let h = positive("h", *ctx.echo.h.get_or_insert(1e-3))?;
    let cells = *ctx.echo.mesh.cells.get_or_insert(cross_section_cells(&cs));
    ctx.seal()?;
    let t = Instant::now();
    let asm = assemble_cross_section_robin(&cs, TransverseMesh { cells })?;
    let worst = std::cell::Cell::new(0.0f64);
    let last_stats = std::cell::RefCell::new(None);
    let discrete = richardson_slope(
        |r| {
            let s = solve(&asm, r, &SolveOptions { k: 1, ..ctx.opts.clone() })?;
            let e = s.value(1)?;
            worst.set(worst.get().max(s.residuals[0]));
            *last_stats.borrow_mut() = Some(s.stats);
            Ok(e)
        },
        h,
    );
    let discrete = discrete?;
    let oracle = match cross_section_oracle(&cs, 0.0, 1)? {
        Some(_) => Some(richardson_slope(|r| Ok(cross_section_oracle(&cs, r, 1)?.expect("oracle exists")[0]), h)?),
        None => None,
    };
    let target = -cs.n_omega;
    let mut row = ctx.row(1, "slope", Some(discrete), Some(worst.get()), asm.dim(), &asm.meta.mesh);
    row.wall_ms = ctx.ms(t);
    if let Some(stats) = last_stats.borrow().as_ref() {
        row.solver = ctx.stats(stats);
    }
    let result = json!({
        "cross_section": cs.id(),
        "h": h,
        "target": target,
        "slope_discrete": discrete,
        "rel_error_discrete": (discrete - target).abs() / target.abs(),
        "slope_oracle": oracle,
        "rel_error_oracle": oracle.map(|s| (s - target).abs() / target.abs()),
    });
    ctx.emit(&[row], result, None)?;
    Ok(0)
}

fn effective_cmd(ctx: &mut Ctx) -> Result<i32> {
    let e = &mut ctx.echo;
    let spec = EffectiveSpec {
        n: e.n.unwrap_or(0),
        n_omega: e.n_omega.unwrap_or(f64::NAN),
        lambda: e.lambda.unwrap_or(f64::NAN),
    };
    spec.validate()?;
    let b = positive("b", e.b.unwrap_or(f64::NAN))?;
    let s0 = *e.s0.get_or_insert(0.0);
    if !(s0 >= 0.0 && s0 < b) {
        return Err(Error::InvalidInput(format!("need 0 <= s0 < b, got s0 = {s0}, b = {b}")));
    }
    let count = at_least_one("j", *e.j.get_or_insert(1))?;
    let cells = *e.mesh.cells.get_or_insert(EFFECTIVE_CELLS);
    let mesh = match e.mesh.grading {
        Some(g) => {
            if e.mesh.first_cell.is_some() {
                return Err(Error::Config("give either mesh.grading or mesh.first_cell, not both".into()));
            }
            build_mesh_1d(s0, b, cells, g)?
        }
        None => {
            // the shipped first cell, scaled with the interval length
            let first = *e.mesh.first_cell.get_or_insert(EFFECTIVE_FIRST_CELL * (b - s0) / 40.0);
            Mesh1D::with_first_cell(s0, b, cells, first)?
        }
    };
    ctx.seal()?;
    let t = Instant::now();
    let asm = assemble_effective(&spec, &mesh, EndCondition::Dirichlet)?;
    let spectrum = solve(&asm, 0.0, &SolveOptions { k: count, ..ctx.opts.clone() })?;
    let rows = ctx.spectrum_rows(&spectrum, count, "effective", &asm.meta.mesh, ctx.ms(t))?;
    let result = if s0 == 0.0 && spec.n >= 2 {
        let exact: Vec<f64> = (1..=count).map(|j| effective_exact(&spec, j)).collect::<Result<_>>()?;
        let gaps: Vec<f64> = rows.iter().zip(&exact).map(|(r, x)| r.e.unwrap_or(f64::NAN) - x).collect();
        json!({ "values": spectrum.values, "exact": exact, "gap": gaps })
    } else if s0 > 0.0 {
        let bound = exterior_lower_bound(spec.n_omega, spec.lambda, s0)?;
        json!({ "values": spectrum.values, "lower_bound": bound, "above_bound": spectrum.values.iter().all(|&v| v > bound) })
    } else {
        json!({ "values": spectrum.values })
    };
    ctx.emit(&rows, result, None)?;
    Ok(0)
}

fn alpha(ctx: &mut Ctx) -> Result<f64> {
    positive("alpha", *ctx.echo.alpha.get_or_insert(1.0))
}

fn cone_cmd(ctx: &mut Ctx) -> Result<i32> {
    let cs = ctx.cross_section()?;
    let eps = positive("eps", ctx.echo.eps.unwrap_or(f64::NAN))?;
    let count = at_least_one("j", *ctx.echo.j.get_or_insert(1))?;
    let a = positive("a", *ctx.echo.a.get_or_insert(truncation_rule(eps, count, cs.n_omega, cs.n())))?;
    let mode = ctx.mode(&cs)?;
    let alpha = alpha(ctx)?;
    let rules = ctx.cone_rules(MeshRules::for_cross_section(&cs))?;
    let check_modes = ctx.echo.check_modes;
    if check_modes.is_some() && !(matches!(cs.shape, Shape::Ball { n: 2, .. }) && mode == ConeMode::Fourier { m: 0 }) {
        return Err(Error::Config("check_modes needs a disk cross-section in mode m0".into()));
    }
    ctx.seal()?;
    let scale = alpha * alpha;
    let t = Instant::now();
    let s_mesh = rules.s_mesh(eps, a)?;
    let asm = assemble_cone(&cs, eps, a, &s_mesh, rules.t_mesh(), mode)?;
    let spectrum = solve(&asm, 1.0, &SolveOptions { k: count, ..ctx.opts.clone() })?;
    let mut rows = ctx.spectrum_rows(&spectrum, count, &mode.to_string(), &asm.meta.mesh, ctx.ms(t))?;
    for row in &mut rows {
        row.eps = Some(eps);
        row.a = Some(a);
        row.e = row.e.map(|e| scale * e);
    }
    let leading: Vec<f64> = (1..=count).map(|j| -scale * leading_target(cs.n_omega, cs.n(), j) / (eps * eps)).collect();
    let mut result = json!({
        "cross_section": cs.id(),
        "eps": eps,
        "a": a,
        "alpha": alpha,
        "n_omega": cs.n_omega,
        "values": rows.iter().map(|r| r.e).collect::<Vec<_>>(),
        "leading": leading,
    });
    if cs.shape == (Shape::Ball { n: 2, radius: 1.0 }) && mode == (ConeMode::Fourier { m: 0 }) {
        let exact = scale * round_cone_exact(eps)?.value;
        result["exact_ground_state"] = json!(exact);
        result["rel_gap"] = json!((rows[0].e.unwrap_or(f64::NAN) - exact) / exact.abs());
    }
    if let Some(max_m) = check_modes {
        let top = rows.last().and_then(|r| r.e).unwrap_or(f64::NAN);
        let mut modes = Vec::new();
        for m in 1..=max_m {
            let asm = assemble_cone(&cs, eps, a, &s_mesh, rules.t_mesh(), ConeMode::Fourier { m })?;
            let s = solve(&asm, 1.0, &SolveOptions { k: 1, ..ctx.opts.clone() })?;
            let e = scale * s.value(1)?;
            modes.push(json!({ "m": m, "E1": e, "residual": s.residuals[0], "below_reported": e < top }));
        }
        result["sector_modes"] = Value::Array(modes);
    }
    ctx.emit(&rows, result, None)?;
    Ok(0)
}

fn eps_list(ctx: &mut Ctx) -> Vec<f64> {
    ctx.echo.eps_list.get_or_insert_with(|| DEFAULT_EPS.to_vec()).clone()
}

fn sweep_rows(ctx: &Ctx, table: &crate::asymptotics::SweepTable, scale: f64) -> Vec<Row> {
    table
        .rows
        .iter()
        .map(|r| {
            let mut row = ctx.row(r.j, &r.mode.to_string(), r.value.map(|v| scale * v), r.residual, r.dof, &r.mesh);
            row.eps = Some(r.eps);
            row.a = Some(r.a);
            row.wall_ms = if ctx.timing { r.wall_ms } else { 0.0 };
            row.solver = r.solver.as_ref().map(|s| ctx.stats(s)).unwrap_or(Value::Null);
            row.error = r.error.clone();
            row
        })
        .collect()
}

fn sweep_plot(cs: &CrossSection, rows: &[Row], j_max: usize) -> String {
    let series: Vec<PlotSeries> = (1..=j_max)
        .map(|j| PlotSeries {
            j,
            points: rows.iter().filter(|r| r.j == j).filter_map(|r| Some((r.eps?, r.e?))).collect(),
        })
        .collect();
    svg_plot(&format!("{}: E·ε² against ε", cs.id()), cs.n_omega, cs.n(), &series)
}

fn sweep_cmd(ctx: &mut Ctx) -> Result<i32> {
    let cs = ctx.cross_section()?;
    let eps = eps_list(ctx);
    let j_max = at_least_one("j_max", *ctx.echo.j_max.get_or_insert(2))?;
    let mode = ctx.mode(&cs)?;
    let alpha = alpha(ctx)?;
    let rules = ctx.cone_rules(MeshRules::for_cross_section(&cs))?;
    ctx.seal()?;
    let table = sweep(&cs, &eps, j_max, mode, &rules, &ctx.opts)?;
    let rows = sweep_rows(ctx, &table, alpha * alpha);
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let result = json!({
        "cross_section": cs.id(),
        "n_omega": cs.n_omega,
        "alpha": alpha,
        "targets": (1..=j_max).map(|j| -leading_target(cs.n_omega, cs.n(), j)).collect::<Vec<_>>(),
        "failed_rows": failed,
    });
    // the plot shows E·ε², whose targets are stated for α = 1
    let plot = (alpha == 1.0).then(|| sweep_plot(&cs, &rows, j_max));
    ctx.emit(&rows, result, plot)?;
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("row eps = {} j = {} failed: {}", fmt_e(r.eps.unwrap_or(f64::NAN)), r.j, r.error.as_deref().unwrap_or(""));
    }
    Ok(if failed > 0 { 3 } else { 0 })
}

fn fit_cmd(ctx: &mut Ctx) -> Result<i32> {
    let cs = ctx.cross_section()?;
    let eps = eps_list(ctx);
    let j = at_least_one("j", *ctx.echo.j.get_or_insert(1))?;
    let j_max = *ctx.echo.j_max.get_or_insert(j.max(2));
    if j_max < j {
        return Err(Error::InvalidInput(format!("j_max = {j_max} is below the fitted index j = {j}")));
    }
    let mode = ctx.mode(&cs)?;
    let rules = ctx.cone_rules(MeshRules::for_cross_section(&cs))?;
    ctx.seal()?;
    let table = sweep(&cs, &eps, j_max, mode, &rules, &ctx.opts)?;
    let rows = sweep_rows(ctx, &table, 1.0);
    let fit = fit_leading(&table, j)?;
    let result = json!({ "cross_section": cs.id(), "n_omega": cs.n_omega, "fit": fit });
    let plot = sweep_plot(&cs, &rows, j_max);
    ctx.emit(&rows, result, Some(plot))?;
    Ok(0)
}

fn trace_cmd(ctx: &mut Ctx) -> Result<i32> {
    let cs = ctx.cross_section()?;
    let eps = positive("eps", ctx.echo.eps.unwrap_or(f64::NAN))?;
    let delta = positive("delta", ctx.echo.delta.unwrap_or(f64::NAN))?;
    let a = positive("a", *ctx.echo.a.get_or_insert(1.0))?;
    let mode = ctx.mode(&cs)?;
    let rules = ctx.cone_rules(MeshRules::trace(320))?;
    ctx.seal()?;
    let t = Instant::now();
    let s_mesh = rules.s_mesh(eps, a)?;
    let asm = assemble_trace_problem(&cs, eps, a, delta, &s_mesh, rules.t_mesh(), mode)?;
    let coupling = asm.meta.coupling.unwrap_or(-1.0);
    let spectrum = solve(&asm, coupling, &SolveOptions { k: 1, which_end: WhichEnd::Largest, ..ctx.opts.clone() })?;
    let largest = spectrum.value(1)?;
    let c_delta = largest.max(0.0);
    let mut row = ctx.row(1, &mode.to_string(), Some(c_delta), Some(spectrum.residuals[0]), asm.dim(), &asm.meta.mesh);
    row.eps = Some(eps);
    row.a = Some(a);
    row.wall_ms = ctx.ms(t);
    row.solver = ctx.stats(&spectrum.stats);
    let result = json!({ "cross_section": cs.id(), "eps": eps, "a": a, "delta": delta, "c_delta": c_delta, "largest": largest });
    ctx.emit(&[row], result, None)?;
    Ok(0)
}

fn verify_cmd(ctx: &mut Ctx) -> Result<i32> {
    ctx.seal()?;
    let mut checks = Vec::new();
    let mut all = true;
    for &(id, _) in verify::CHECKS.iter() {
        let c = verify::run_check(id);
        println!("{c}");
        all &= c.pass;
        checks.push(json!({
            "id": c.id,
            "name": c.name,
            "pass": c.pass,
            "detail": c.detail,
            "wall_ms": if ctx.timing { c.wall_ms } else { 0.0 },
        }));
    }
    ctx.emit(&[], json!({ "checks": checks, "all_pass": all }), None)?;
    Ok(if all { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig> {
        Cli::try_parse_from(std::iter::once("conespec").chain(args.iter().copied()))
            .map_err(|e| Error::Config(e.to_string()))?
            .into_config()
    }

    #[test]
    fn flags_map_onto_the_config() {
        let cfg = parse(&["cone", "--cs", "ball2", "--eps", "0.2", "--mode", "m0", "--cells", "40"]).unwrap();
        assert_eq!(cfg.command, Some(Command::Cone));
        assert_eq!(cfg.cross_section, Some(CrossSectionInput::Name("ball2".into())));
        assert_eq!(cfg.eps, Some(0.2));
        assert_eq!(cfg.mesh.cells, Some(40));
        let cfg = parse(&["cross-section", "--cs", "interval", "--r", "-1.5"]).unwrap();
        assert_eq!(cfg.r, Some(-1.5));
        let cfg = parse(&["sweep", "--cs", "disk", "--eps-list", "0.2,0.1"]).unwrap();
        assert_eq!(cfg.eps_list, Some(vec![0.2, 0.1]));
    }

    #[test]
    fn config_schema_is_strict() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"command": "cone", "epsilon": 0.2}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"mesh": {"cels": 3}}"#).is_err());
        let cfg: RunConfig = serde_json::from_str(
            r#"{"command": "cone", "cross_section": {"kind": "ball", "n": 2, "params": {"radius": 1.0}}, "eps": 0.2}"#,
        )
        .unwrap();
        assert_eq!(cfg.cross_section.unwrap().resolve().unwrap(), CrossSectionSpec::ball(2, 1.0));
    }

    #[test]
    fn fields_are_checked_per_command() {
        let missing = RunConfig { command: Some(Command::Cone), ..Default::default() };
        assert!(matches!(execute(&missing), Err(Error::Config(m)) if m.contains("cross_section")));
        let cfg = parse(&["cone", "--cs", "disk", "--eps", "0.2", "--delta", "1"]).unwrap();
        assert!(matches!(execute(&cfg), Err(Error::Config(m)) if m.contains("delta")));
        let cfg = parse(&["effective", "--n", "2", "--nomega", "2", "--lambda", "1"]).unwrap();
        assert!(matches!(execute(&cfg), Err(Error::Config(m)) if m.contains("`b`")));
        let cfg = parse(&["cone", "--cs", "disk", "--eps", "0.2", "--format", "svg"]).unwrap();
        assert!(matches!(execute(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config(String::new())), 2);
        assert_eq!(exit_code(&Error::InvalidInput(String::new())), 2);
        assert_eq!(exit_code(&Error::NoConvergence(String::new())), 3);
        assert_eq!(run(["conespec", "cone", "--eps"]), 2);
        assert_eq!(run(["conespec", "frobnicate"]), 2);
        assert_eq!(run(["conespec", "cone", "--cs", "nonagon", "--eps", "0.2"]), 2);
        assert_eq!(run(["conespec", "--help"]), 0);
    }

    #[test]
    fn mismatched_config_command_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"command": "sweep", "cross_section": "disk"}"#).unwrap();
        let err = parse(&["cone", "--config", path.to_str().unwrap()]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
