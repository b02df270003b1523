//! `spider-stop`: command-line front end for the spider solvers.

pub mod config;
pub mod reproduce;
pub mod table;

use std::path::PathBuf;

use clap::{error::ErrorKind, Args, Parser, Subcommand, ValueEnum};
use spider_core::kernels::{
    green_kernel, harmonic, hitting_laplace, minimal_excessive_function, phi_function, psi_tilde_function,
};
use spider_core::osp::{default_grid, resolvent_apply, Restrict};
use spider_core::{
    is_excessive, solve_spider_example71, solve_threshold_system, verify_solution, CharacteristicsRegistry,
    ExcessiveTolerances, LegFunction, PayoffFamily, Pole, SimConfig, SpiderModel, SpiderPoint, StoppingSolution,
};

use config::{load_config, parse_list, parse_number, parse_probabilities, RunConfig};
use table::{emit_table, Cell, Format};

const DEFAULT_PRECISION: usize = 6;

#[derive(Debug, Parser)]
#[command(
    name = "spider-stop",
    version,
    about = "Green kernels, excessive functions and optimal stopping on star graphs"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Args, Default)]
pub struct GlobalArgs {
    /// key=value file (model.n, model.p, model.r, model.characteristics,
    /// command.args, output.format, output.path, output.precision)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Number of legs (uniform probabilities unless --p is given)
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Leg probabilities, fractions allowed: 1/3,1/3,1/3
    #[arg(long, global = true, value_parser = parse_probabilities)]
    pub p: Option<::std::vec::Vec<f64>>,
    /// Discount rate
    #[arg(long, global = true, value_parser = parse_number)]
    pub r: Option<f64>,
    /// Leg characteristics by registry name
    #[arg(long, global = true)]
    pub characteristics: Option<String>,
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Write results here instead of stdout
    #[arg(long, global = true)]
    pub output: Option<String>,
    /// Significant digits
    #[arg(long, global = true)]
    pub precision: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Green kernel g_r(from, to)
    Green {
        #[arg(long)]
        from: SpiderPoint,
        #[arg(long)]
        to: SpiderPoint,
    },
    /// Laplace transform of the hitting time of `to` started at `from`
    Hit {
        #[arg(long)]
        from: SpiderPoint,
        #[arg(long)]
        to: SpiderPoint,
    },
    /// Excessivity tests
    Excessive {
        #[command(subcommand)]
        action: ExcessiveCommand,
    },
    /// Optimal stopping solvers
    Solve {
        #[command(subcommand)]
        problem: SolveCommand,
    },
    /// Monte Carlo estimates from the spider random walk
    Simulate {
        #[command(subcommand)]
        target: SimulateCommand,
    },
    /// Recomputes every published number and reports pass/fail
    Reproduce,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NamedFunction {
    Phi,
    PsiTilde,
    PsiKilled,
    PsiKilledPlusOne,
    Harmonic,
    Minimal,
    Linear,
    Quadratic,
    Example71,
}

#[derive(Debug, Subcommand)]
pub enum ExcessiveCommand {
    /// Gluing, sign and monotonicity checks on a grid
    Check {
        #[arg(long, value_enum)]
        function: NamedFunction,
        /// Coefficients for harmonic, linear and quadratic functions
        #[arg(long = "A", value_parser = parse_list)]
        coefficients: Option<::std::vec::Vec<f64>>,
        /// Pole of the minimal function: x@leg, 0 or inf@leg
        #[arg(long)]
        pole: Option<String>,
        #[arg(long, default_value_t = 6.0)]
        xmax: f64,
        #[arg(long, default_value_t = 121)]
        points: usize,
    },
}

#[derive(Debug, Args)]
pub struct SolveOutput {
    /// Run the verification battery on the solution
    #[arg(long)]
    pub verify: bool,
    /// Emit V and g on a grid instead of the summary
    #[arg(long)]
    pub profile: bool,
    /// Tolerance for --verify
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum SolveCommand {
    /// Three legs with payoff 1 + x, (1 - x/2)+, (1 - 2x)+
    Example71 {
        #[command(flatten)]
        out: SolveOutput,
    },
    /// g(x, i) = A_i x
    Linear {
        #[arg(long = "A", value_parser = parse_list)]
        coefficients: ::std::vec::Vec<f64>,
        #[command(flatten)]
        out: SolveOutput,
    },
    /// g(x, i) = A_i x^2
    Quadratic {
        #[arg(long = "A", value_parser = parse_list)]
        coefficients: ::std::vec::Vec<f64>,
        #[command(flatten)]
        out: SolveOutput,
    },
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[arg(long, default_value_t = 200_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 50.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 20_240_611)]
    pub seed: u64,
    #[arg(long)]
    pub no_antithetic: bool,
}

impl SimArgs {
    fn config(&self) -> SimConfig {
        SimConfig {
            step: self.step,
            paths: self.paths,
            horizon: self.horizon,
            seed: self.seed,
            antithetic: !self.no_antithetic,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SimFamily {
    Linear,
    Quadratic,
    Example71,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SimDensity {
    One,
    Phi,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Discounted payoff at the solved stopping rule
    Stop {
        #[arg(long, value_enum)]
        family: SimFamily,
        #[arg(long = "A", value_parser = parse_list)]
        coefficients: Option<::std::vec::Vec<f64>>,
        #[arg(long, default_value = "0")]
        from: SpiderPoint,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// E exp(-r H_to)
    Hit {
        #[arg(long)]
        from: SpiderPoint,
        #[arg(long)]
        to: SpiderPoint,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Discounted occupation integral of a density
    Resolvent {
        #[arg(long, default_value = "0")]
        from: SpiderPoint,
        #[arg(long, value_enum)]
        density: SimDensity,
        #[command(flatten)]
        sim: SimArgs,
    },
}

/// How a run failed: bad input (exit 1) or a numerical failure (exit 2).
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Numerical { message: String, dump: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical { .. } => 2,
        }
    }
}

impl From<spider_core::Error> for CliError {
    fn from(e: spider_core::Error) -> Self {
        match e {
            spider_core::Error::InvalidArgument(m) => CliError::Usage(m),
            other => CliError::Numerical {
                message: other.to_string(),
                dump: format!("{other:#?}"),
            },
        }
    }
}

fn numerical(message: impl Into<String>) -> CliError {
    let message = message.into();
    CliError::Numerical {
        dump: message.clone(),
        message,
    }
}

/// Output of a successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub stdout: String,
    pub stderr: String,
    /// 0, or 2 when `reproduce` finds a failing check.
    pub code: i32,
}

struct Ctx {
    model: SpiderModel,
    format: Format,
    precision: usize,
    notes: Vec<String>,
}

impl Ctx {
    fn table(&self, schema: &[&str], rows: &[Vec<Cell>]) -> Result<String, CliError> {
        emit_table(schema, rows, self.format, self.precision).map_err(numerical)
    }
}

fn build_model(cfg: &RunConfig) -> Result<SpiderModel, CliError> {
    let (_, p) = cfg.legs().map_err(CliError::Usage)?;
    let r = cfg.r.unwrap_or(0.5);
    let name = cfg.characteristics.as_deref().unwrap_or("brownian");
    let chars = CharacteristicsRegistry::default().get(name)?;
    Ok(SpiderModel::new(p, r, chars)?)
}

fn flags_config(g: &GlobalArgs) -> RunConfig {
    RunConfig {
        n: g.n,
        p: g.p.clone(),
        r: g.r,
        characteristics: g.characteristics.clone(),
        command: None,
        format: g.format,
        path: g.output.clone(),
        precision: g.precision,
    }
}

fn parse_cli<I, S>(argv: I) -> Result<Result<Cli, String>, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => Ok(Ok(cli)),
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => Ok(Err(e.to_string())),
        Err(e) => Err(CliError::Usage(e.to_string())),
    }
}

/// Parses `argv` (program name first), runs the command and returns its
/// output without printing.
pub fn execute<I, S>(argv: I) -> Result<RunOutput, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match parse_cli(argv.clone())? {
        Ok(cli) => cli,
        Err(help) => {
            return Ok(RunOutput {
                stdout: help,
                stderr: String::new(),
                code: 0,
            })
        }
    };
    let file = match &cli.global.config {
        Some(path) => load_config(path).map_err(CliError::Usage)?,
        None => RunConfig::default(),
    };
    let cfg = file.overridden_by(flags_config(&cli.global));
    let cli = match (cli.command.is_some(), &cfg.command) {
        (true, _) => cli,
        (false, Some(extra)) => {
            let mut full = argv.clone();
            full.extend(extra.iter().map(Into::into));
            match parse_cli(full)? {
                Ok(cli) => cli,
                Err(help) => {
                    return Ok(RunOutput {
                        stdout: help,
                        stderr: String::new(),
                        code: 0,
                    })
                }
            }
        }
        (false, None) => return Err(CliError::Usage("no subcommand given (try --help)".into())),
    };
    let Some(command) = cli.command else {
        return Err(CliError::Usage("no subcommand given (try --help)".into()));
    };
    let mut ctx = Ctx {
        model: build_model(&cfg)?,
        format: cfg.format.unwrap_or_default(),
        precision: cfg.precision.unwrap_or(DEFAULT_PRECISION),
        notes: Vec::new(),
    };
    if ctx.precision == 0 {
        return Err(CliError::Usage("precision must be at least 1".into()));
    }
    let (body, code) = dispatch(&mut ctx, command)?;
    let stdout = match &cfg.path {
        Some(path) => {
            std::fs::write(path, &body).map_err(|e| numerical(format!("cannot write {path}: {e}")))?;
            String::new()
        }
        None => body,
    };
    let stderr = ctx.notes.iter().map(|n| format!("note: {n}\n")).collect();
    Ok(RunOutput { stdout, stderr, code })
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match execute(argv) {
        Ok(out) => {
            print!("{}", out.stdout);
            eprint!("{}", out.stderr);
            out.code
        }
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("{}", m.trim_end()),
                CliError::Numerical { message, dump } => {
                    eprintln!("error: {message}");
                    eprintln!("diagnostics:\n{dump}");
                }
            }
            e.exit_code()
        }
    }
}

fn dispatch(ctx: &mut Ctx, command: Command) -> Result<(String, i32), CliError> {
    let m = ctx.model.clone();
    match command {
        Command::Green { from, to } => {
            let g = green_kernel(&m, &from, &to)?;
            let rows = vec![vec![
                from.to_string().into(),
                to.to_string().into(),
                g.value.into(),
                format!("{:?}", g.branch).into(),
            ]];
            Ok((ctx.table(&["from", "to", "value", "branch"], &rows)?, 0))
        }
        Command::Hit { from, to } => {
            let h = hitting_laplace(&m, &from, &to)?;
            let rows = vec![vec![from.to_string().into(), to.to_string().into(), h.into()]];
            Ok((ctx.table(&["from", "to", "value"], &rows)?, 0))
        }
        Command::Excessive {
            action:
                ExcessiveCommand::Check {
                    function,
                    coefficients,
                    pole,
                    xmax,
                    points,
                },
        } => {
            if xmax.is_nan() || xmax <= 0.0 || points < 2 {
                return Err(CliError::Usage("need xmax > 0 and at least two grid points".into()));
            }
            let f = named_function(&m, function, coefficients, pole)?;
            let grid: Vec<f64> = (0..points).map(|k| xmax * k as f64 / (points - 1) as f64).collect();
            let rep = is_excessive(&m, &f, &grid, ExcessiveTolerances::default());
            let rows = vec![
                vec!["gluing".into(), rep.gluing.into(), rep.gluing_ok.into()],
                vec!["nonnegative".into(), Cell::Text("-".into()), rep.nonnegative_ok.into()],
                vec!["monotone".into(), Cell::Text("-".into()), rep.monotone_ok.into()],
                vec!["bounded".into(), Cell::Text("-".into()), rep.bounded_ok.into()],
                vec!["excessive".into(), Cell::Text("-".into()), rep.excessive.into()],
            ];
            Ok((ctx.table(&["check", "value", "status"], &rows)?, 0))
        }
        Command::Solve { problem } => solve(ctx, problem),
        Command::Simulate { target } => simulate(ctx, target),
        Command::Reproduce => {
            let checks = reproduce::reproduce()?;
            let rows: Vec<Vec<Cell>> = checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.clone().into(),
                        c.computed.into(),
                        c.expected.into(),
                        c.tol.into(),
                        c.passed().into(),
                    ]
                })
                .collect();
            let code = if checks.iter().all(|c| c.passed()) { 0 } else { 2 };
            Ok((
                ctx.table(&["quantity", "computed", "expected", "tolerance", "status"], &rows)?,
                code,
            ))
        }
    }
}

fn parse_pole(s: &str) -> Result<Pole, CliError> {
    if let Some(leg) = s.trim().strip_prefix("inf@") {
        let leg = leg.parse().map_err(|_| CliError::Usage(format!("bad pole '{s}'")))?;
        return Ok(Pole::Infinity { leg });
    }
    Ok(Pole::Point(s.parse()?))
}

fn coefficients_or(c: Option<Vec<f64>>, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    match c {
        Some(a) if a.len() == n => Ok(a),
        Some(a) => Err(CliError::Usage(format!(
            "{what}: {} coefficients for {n} legs",
            a.len()
        ))),
        None => Err(CliError::Usage(format!("{what} needs --A"))),
    }
}

fn named_function(
    m: &SpiderModel,
    which: NamedFunction,
    coefficients: Option<::std::vec::Vec<f64>>,
    pole: Option<String>,
) -> Result<LegFunction, CliError> {
    let n = m.n();
    Ok(match which {
        NamedFunction::Phi => phi_function(m),
        NamedFunction::PsiTilde => psi_tilde_function(m),
        NamedFunction::PsiKilled | NamedFunction::PsiKilledPlusOne => {
            let shift = if matches!(which, NamedFunction::PsiKilled) {
                0.0
            } else {
                1.0
            };
            let (m1, m2) = (m.clone(), m.clone());
            LegFunction::new(n, move |x, _| m1.psi_killed(x) + shift).with_slope(move |x, _, _| m2.psi_killed_dx(x))
        }
        NamedFunction::Harmonic => harmonic(m, &coefficients_or(coefficients, n, "harmonic")?)?,
        NamedFunction::Minimal => {
            let pole = pole.ok_or_else(|| CliError::Usage("minimal needs --pole".into()))?;
            minimal_excessive_function(m, parse_pole(&pole)?)?
        }
        NamedFunction::Linear => LegFunction::linear(coefficients_or(coefficients, n, "linear")?),
        NamedFunction::Quadratic => LegFunction::quadratic(coefficients_or(coefficients, n, "quadratic")?),
        NamedFunction::Example71 => LegFunction::example71(),
    })
}

fn solution_tables(
    ctx: &mut Ctx,
    payoff: &LegFunction,
    sol: &StoppingSolution,
    summary: String,
    out: &SolveOutput,
) -> Result<(String, i32), CliError> {
    let m = ctx.model.clone();
    ctx.notes.extend(sol.diagnostics.notes.iter().cloned());
    ctx.notes.push(format!("stopping region: {}", sol.region));
    if out.profile {
        let grid = default_grid(&sol.region);
        let mut rows = Vec::new();
        for leg in 1..=m.n() {
            for &x in &grid {
                rows.push(vec![
                    leg.into(),
                    x.into(),
                    sol.value.at(x, leg).into(),
                    payoff.at(x, leg).into(),
                ]);
            }
        }
        return Ok((ctx.table(&["leg", "x", "value", "payoff"], &rows)?, 0));
    }
    let mut body = summary;
    if out.verify {
        let grid = default_grid(&sol.region);
        let rep = verify_solution(&m, payoff, sol, &grid, out.tol)?;
        let rows: Vec<Vec<Cell>> = rep
            .checks
            .iter()
            .map(|c| vec![c.name.into(), c.value.into(), c.passed.into(), c.detail.clone().into()])
            .collect();
        if ctx.format == Format::Table {
            body.push('\n');
        }
        body.push_str(&ctx.table(&["check", "value", "status", "detail"], &rows)?);
        if !rep.all_passed() {
            return Ok((body, 2));
        }
    }
    Ok((body, 0))
}

fn solve(ctx: &mut Ctx, problem: SolveCommand) -> Result<(String, i32), CliError> {
    let m = ctx.model.clone();
    match problem {
        SolveCommand::Example71 { out } => {
            let s = solve_spider_example71(&m)?;
            let opt = |v: Option<f64>| v.map(Cell::Num).unwrap_or_else(|| Cell::Text("-".into()));
            let rows = vec![vec![
                format!("{:?}", s.case).into(),
                opt(s.x2),
                opt(s.x3),
                opt(s.z1),
                s.solution.value.eval(&SpiderPoint::VERTEX).into(),
            ]];
            let summary = ctx.table(&["case", "x2", "x3", "z1", "value_at_vertex"], &rows)?;
            solution_tables(ctx, &LegFunction::example71(), &s.solution, summary, &out)
        }
        SolveCommand::Linear { coefficients, out } | SolveCommand::Quadratic { coefficients, out }
            if coefficients.len() != m.n() =>
        {
            let _ = out;
            Err(CliError::Usage(format!(
                "{} coefficients for {} legs",
                coefficients.len(),
                m.n()
            )))
        }
        SolveCommand::Linear { coefficients, out } => threshold(ctx, PayoffFamily::Linear(coefficients), &out),
        SolveCommand::Quadratic { coefficients, out } => threshold(ctx, PayoffFamily::Quadratic(coefficients), &out),
    }
}

fn threshold(ctx: &mut Ctx, family: PayoffFamily, out: &SolveOutput) -> Result<(String, i32), CliError> {
    let m = ctx.model.clone();
    let s = solve_threshold_system(&m, &family, &Default::default())?;
    let rows: Vec<Vec<Cell>> = s
        .thresholds
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let published = s
                .reference
                .as_ref()
                .map(|r| Cell::Num(r[k]))
                .unwrap_or_else(|| Cell::Text("-".into()));
            vec![(k + 1).into(), (*z).into(), published]
        })
        .collect();
    let summary = ctx.table(&["leg", "threshold", "published"], &rows)?;
    ctx.notes.push(format!(
        "{} payoff: {} Newton iterations, value at vertex {}",
        family.name(),
        s.iterations,
        table::format_sig(s.solution.value.eval(&SpiderPoint::VERTEX), ctx.precision)
    ));
    solution_tables(ctx, &family.payoff(), &s.solution, summary, out)
}

fn simulate(ctx: &mut Ctx, target: SimulateCommand) -> Result<(String, i32), CliError> {
    let m = ctx.model.clone();
    let (est, analytic) = match target {
        SimulateCommand::Stop {
            family,
            coefficients,
            from,
            sim,
        } => {
            let (payoff, sol) = match family {
                SimFamily::Example71 => (LegFunction::example71(), solve_spider_example71(&m)?.solution),
                SimFamily::Linear | SimFamily::Quadratic => {
                    let a = coefficients_or(coefficients, m.n(), "simulate stop")?;
                    let fam = match family {
                        SimFamily::Linear => PayoffFamily::Linear(a),
                        _ => PayoffFamily::Quadratic(a),
                    };
                    (
                        fam.payoff(),
                        solve_threshold_system(&m, &fam, &Default::default())?.solution,
                    )
                }
            };
            let e = spider_core::simulate_discounted_stop(&m, &from, &sol.region, &payoff, &sim.config())?;
            (e, sol.value.eval(&from))
        }
        SimulateCommand::Hit { from, to, sim } => (
            spider_core::simulate_hitting_laplace(&m, &from, &to, &sim.config())?,
            hitting_laplace(&m, &from, &to)?,
        ),
        SimulateCommand::Resolvent { from, density, sim } => {
            let f = match density {
                SimDensity::One => LegFunction::constant(m.n(), 1.0),
                SimDensity::Phi => phi_function(&m),
            };
            let e = spider_core::simulate_resolvent(&m, &from, &f, &sim.config())?;
            (e, resolvent_apply(&m, &f, Restrict::All, &from)?)
        }
    };
    ctx.notes.extend(est.notes.iter().cloned());
    if est.censor_warning {
        ctx.notes.push(format!(
            "{:.2}% of paths reached the horizon",
            100.0 * est.censored_fraction
        ));
    }
    let rows = vec![vec![
        est.mean.into(),
        est.std_error.into(),
        est.censored_fraction.into(),
        analytic.into(),
        est.z_score(analytic).into(),
    ]];
    Ok((
        ctx.table(&["estimate", "std_error", "censor_rate", "analytic", "z_score"], &rows)?,
        0,
    ))
}
