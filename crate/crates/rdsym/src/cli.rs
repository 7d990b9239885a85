//! Subcommand dispatch and config ingestion for the `rdsym` binary.
//!
//! Exit codes: 0 = pass, 1 = validation error (bad flags, config, or
//! restriction), 2 = a verification ran and failed its tolerance,
//! 3 = runtime failure (blow-up, degenerate diffusivity, I/O).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{self, Instantiation};
use crate::detsys::{self, SampleDomain};
use crate::expr::{parse_expr, FunctionDescriptor};
use crate::kirchhoff::RDSystem;
use crate::linfam::{self, power::PowerApplication};
use crate::pdesolve::{self, Boundary, Grid};
use crate::reduction::{self, Ansatz, ReducedRhs};

const DEFAULT_SEED: u64 = 42;

/// A failed command. Checks that run to completion but miss their tolerance
/// are not errors; they surface as exit code 2 from the dispatcher.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config, or violated precondition (exit 1).
    Validation(String),
    /// Blow-up, degeneracy, or I/O failure (exit 3).
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<catalog::CatalogError> for CliError {
    fn from(e: catalog::CatalogError) -> Self {
        match e {
            catalog::CatalogError::ProfileBlowUp { .. } => CliError::Runtime(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<crate::expr::ParseError> for CliError {
    fn from(e: crate::expr::ParseError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<detsys::DetsysError> for CliError {
    fn from(e: detsys::DetsysError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<linfam::FamilyError> for CliError {
    fn from(e: linfam::FamilyError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<reduction::ReduceError> for CliError {
    fn from(e: reduction::ReduceError) -> Self {
        match e {
            reduction::ReduceError::BlowUp { .. }
            | reduction::ReduceError::MidIntegration { .. } => {
                CliError::Runtime(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<pdesolve::SimError> for CliError {
    fn from(e: pdesolve::SimError) -> Self {
        match e {
            pdesolve::SimError::BlowUp { .. }
            | pdesolve::SimError::DegenerateDiffusivity { .. }
            | pdesolve::SimError::BadKinetics { .. } => CliError::Runtime(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o failure: {e}"))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "rdsym",
    about = "Conditional-symmetry toolkit for two-component reaction-diffusion systems",
    version
)]
struct Cli {
    /// Emit machine-readable JSON reports
    #[arg(long, global = true)]
    json: bool,
    /// Sampler seed (overrides the RDSYM_SEED environment variable)
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inspect and certify the operator catalog
    Catalog {
        #[command(subcommand)]
        action: CatalogCmd,
    },
    /// Reduce a cataloged system to ODE profiles, integrate, lift, and check
    Reduce(ReduceArgs),
    /// Classify and evaluate the closed-form linear profile families
    Linfam {
        #[command(subcommand)]
        action: LinfamCmd,
    },
    /// Boundary-value reproductions of the closed-form solutions
    Bvp {
        #[command(subcommand)]
        action: BvpCmd,
    },
    /// Run the finite-difference solver on a configured system
    Simulate(SimulateArgs),
}

#[derive(Subcommand, Debug)]
enum CatalogCmd {
    /// List the 21 entries with their parameter slots and restrictions
    List,
    /// Certify entries: random admissible draws must satisfy the
    /// determining equations, and the operators must not be Lie-equivalent
    Verify {
        /// Single case to verify (1..=21)
        #[arg(long, conflicts_with = "all")]
        case: Option<u8>,
        /// Verify the whole catalog
        #[arg(long)]
        all: bool,
        /// Sample points per draw
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Random admissible parameter draws per case
        #[arg(long, default_value_t = 3)]
        draws: usize,
        /// Residual tolerance
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Args, Debug)]
struct ReduceArgs {
    /// Case id (1..=4); overrides the config value
    #[arg(long)]
    case: Option<u8>,
    /// JSON config path
    #[arg(long)]
    config: PathBuf,
    /// Write the integrated profile as CSV
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum LinfamCmd {
    /// Classify the coefficient matrix into its solution branch
    Classify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate the profile pair on an x-grid and verify it analytically
    Profile {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[arg(long, default_value_t = 201)]
        nx: usize,
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        #[arg(long, default_value_t = 2.0)]
        x1: f64,
    },
    /// Lift the family and verify the solution for each diffusivity
    Lift {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 50)]
        grid: usize,
    },
}

#[derive(Subcommand, Debug)]
enum BvpCmd {
    /// Reproduce the flagship zero-flux run: closed form, solver, comparison
    Fig1 {
        /// Grid nodes
        #[arg(long, default_value_t = 201)]
        n: usize,
        /// Time horizon
        #[arg(long = "T", default_value_t = 1.0)]
        horizon: f64,
        /// Output directory for the CSV/JSON artifacts
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Write the sampled field as CSV (defaults to stdout)
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help / --version arrive here too
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let seed = cli
        .seed
        .or_else(|| std::env::var("RDSYM_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(DEFAULT_SEED);
    match dispatch(cli.command, cli.json, seed) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn dispatch(command: Command, json: bool, seed: u64) -> Result<i32, CliError> {
    match command {
        Command::Catalog { action } => match action {
            CatalogCmd::List => catalog_list(json),
            CatalogCmd::Verify { case, all, samples, draws, tol } => {
                let cases: Vec<u8> = match (case, all) {
                    (Some(c), false) => vec![c],
                    (None, true) => (1..=21).collect(),
                    (None, false) => {
                        return Err(CliError::Validation(
                            "pass --case N or --all".to_string(),
                        ))
                    }
                    (Some(_), true) => unreachable!("clap conflicts_with"),
                };
                catalog_verify(&cases, samples, draws, tol, seed, json)
            }
        },
        Command::Reduce(args) => reduce_cmd(args, json),
        Command::Linfam { action } => match action {
            LinfamCmd::Classify { config } => linfam_classify(&config, json),
            LinfamCmd::Profile { config, out_csv, nx, x0, x1 } => {
                linfam_profile(&config, out_csv.as_deref(), nx, x0, x1, json)
            }
            LinfamCmd::Lift { config, grid } => linfam_lift(&config, grid, json),
        },
        Command::Bvp { action } => match action {
            BvpCmd::Fig1 { n, horizon, out_dir } => fig1_cmd(n, horizon, &out_dir, json),
        },
        Command::Simulate(args) => simulate_cmd(args, json),
    }
}

fn read_config<C: serde::de::DeserializeOwned>(path: &Path) -> Result<C, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("bad config {}: {e}", path.display())))
}

fn parse_function(name: &str, src: &str) -> Result<FunctionDescriptor, CliError> {
    let vars: &[&str] = match name {
        "d1" => &["u"],
        "d2" => &["v"],
        "f" | "g" => &["w"],
        other => {
            return Err(CliError::Validation(format!(
                "unknown function slot `{other}` (expected d1, d2, f, or g)"
            )))
        }
    };
    parse_expr(src, vars)
        .map_err(|e| CliError::Validation(format!("function `{name}` = `{src}`: {e}")))
}

// ---------------------------------------------------------------- catalog

fn catalog_list(json: bool) -> Result<i32, CliError> {
    let infos = catalog::list_cases();
    if json {
        println!("{}", serde_json::to_string_pretty(&infos).unwrap());
        return Ok(0);
    }
    println!(
        "{:<6} {:<42} {:<26} {:<24} profile",
        "case", "parameters", "user functions", "restrictions"
    );
    for info in infos {
        println!(
            "{:<6} {:<42} {:<26} {:<24} {}",
            info.case_id,
            info.params.join(", "),
            info.functions.join(", "),
            info.restrictions,
            info.profile_ode.unwrap_or("-")
        );
    }
    Ok(0)
}

#[derive(Debug, Serialize)]
struct VerifyRow {
    case: u8,
    draws: usize,
    max_residual: f64,
    conditional: bool,
    pass: bool,
}

fn catalog_verify(
    cases: &[u8],
    samples: usize,
    draws: usize,
    tol: f64,
    seed: u64,
    json: bool,
) -> Result<i32, CliError> {
    let domain = SampleDomain::default();
    let mut rows = Vec::new();
    let mut all_pass = true;
    for &case in cases {
        let mut worst = 0.0_f64;
        let mut conditional = true;
        let mut pass = true;
        for draw in 0..draws {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed ^ (case as u64) << 32 ^ draw as u64,
            );
            let inst = catalog::random_instantiation(case, &mut rng)?;
            let (sys, op) = catalog::instantiate(&inst)?;
            let points = domain.sample(samples, seed ^ (draw as u64) << 16 ^ case as u64);
            let report = detsys::residuals_first_type(&sys, &op, &points, tol)?;
            worst = worst.max(report.max_abs());
            pass &= report.pass;
            let lie = detsys::lie_equivalence_test(&sys, &op, &points)?;
            conditional &= !lie.equivalent;
        }
        pass &= conditional;
        all_pass &= pass;
        rows.push(VerifyRow { case, draws, max_residual: worst, conditional, pass });
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&rows).unwrap());
    } else {
        println!("{:<6} {:<7} {:<14} {:<13} status", "case", "draws", "max residual", "conditional");
        for r in &rows {
            println!(
                "{:<6} {:<7} {:<14.3e} {:<13} {}",
                r.case,
                r.draws,
                r.max_residual,
                if r.conditional { "yes" } else { "NO" },
                if r.pass { "pass" } else { "FAIL" }
            );
        }
    }
    Ok(if all_pass { 0 } else { 2 })
}

// ----------------------------------------------------------------- reduce

fn default_x_range() -> (f64, f64) {
    (0.0, 1.0)
}
fn default_step() -> f64 {
    1e-3
}
fn default_t_range() -> (f64, f64) {
    (0.0, 1.0)
}
fn default_nt() -> usize {
    50
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReduceConfig {
    #[serde(default)]
    case: Option<u8>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    functions: BTreeMap<String, String>,
    /// [phi0, dphi0, psi0, dpsi0] at x_range.0
    ic: [f64; 4],
    #[serde(default = "default_x_range")]
    x_range: (f64, f64),
    #[serde(default = "default_step")]
    step: f64,
    #[serde(default = "default_t_range")]
    t_range: (f64, f64),
    #[serde(default = "default_nt")]
    nt: usize,
}

fn reduce_cmd(args: ReduceArgs, json: bool) -> Result<i32, CliError> {
    let cfg: ReduceConfig = read_config(&args.config)?;
    let case = args
        .case
        .or(cfg.case)
        .ok_or_else(|| CliError::Validation("no case given (flag or config)".into()))?;
    if !(1..=4).contains(&case) {
        return Err(CliError::Validation(format!(
            "built-in reductions cover cases 1..=4, got {case}; \
             use the library's custom AnsatzMap hook for the others"
        )));
    }
    let alpha = cfg.params.get("alpha").copied().unwrap_or(0.0);
    let beta = cfg.params.get("beta").copied().unwrap_or(0.0);

    let mut inst = Instantiation::new(case);
    for (k, v) in &cfg.params {
        inst.params.insert(k.clone(), *v);
    }
    for (name, src) in &cfg.functions {
        inst.functions.insert(name.clone(), parse_function(name, src)?);
    }
    for warning in catalog::exclusion_warnings(&inst) {
        eprintln!("warning: {warning}");
    }
    let (sys, _op) = catalog::instantiate(&inst)?;

    let ansatz = Ansatz::builtin(case, alpha, beta)?;
    let f = inst
        .functions
        .get("f")
        .ok_or_else(|| CliError::Validation("missing function `f`".into()))?;
    let g = inst
        .functions
        .get("g")
        .ok_or_else(|| CliError::Validation("missing function `g`".into()))?;
    let rhs = ReducedRhs::new(&ansatz, f.clone(), g.clone())?;
    let profile = reduction::integrate_reduced(&rhs, cfg.ic, cfg.x_range, cfg.step)?
        .with_omega(&ansatz)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    if let Some(path) = &args.out_csv {
        let mut file = fs::File::create(path)?;
        profile.write_csv(&mut file)?;
    }
    let report =
        reduction::lift_and_check(&ansatz, &profile, &sys, cfg.t_range, cfg.nt, cfg.x_range)?;
    let invariance_ok = ["invariance-u", "invariance-v"]
        .iter()
        .all(|l| report.equation(l).unwrap().max_abs <= 1e-9);
    if json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        print!("{}", report.table());
    }
    Ok(if report.pass && invariance_ok { 0 } else { 2 })
}

// ----------------------------------------------------------------- linfam

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyConfig {
    lambda: [[f64; 2]; 2],
    #[serde(rename = "C")]
    constants: [f64; 4],
    #[serde(default)]
    alpha: Option<f64>,
    /// Diffusivity expressions (in u) for the lift verification.
    #[serde(default)]
    d1: Option<Vec<String>>,
}

#[derive(Debug, Serialize)]
struct ClassifyOutput {
    case: u8,
    branch: linfam::Branch,
    s: f64,
    det: f64,
    disc: f64,
}

fn linfam_classify(config: &Path, json: bool) -> Result<i32, CliError> {
    let cfg: FamilyConfig = read_config(config)?;
    let branch = linfam::classify(&cfg.lambda, linfam::default_tol(&cfg.lambda))?;
    let (s, det, disc) = linfam::invariants(&cfg.lambda);
    let out = ClassifyOutput { case: branch.case_id(), branch, s, det, disc };
    if json {
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!(
            "case {} ({:?}) with s = {}, det = {}, disc = {}",
            out.case, out.branch, out.s, out.det, out.disc
        );
    }
    Ok(0)
}

fn linfam_profile(
    config: &Path,
    out_csv: Option<&Path>,
    nx: usize,
    x0: f64,
    x1: f64,
    json: bool,
) -> Result<i32, CliError> {
    let cfg: FamilyConfig = read_config(config)?;
    let family = linfam::LinearFamily::new(cfg.lambda, cfg.constants)?;
    let nx = nx.max(2);
    let mut worst = 0.0_f64;
    let mut csv = String::from("x,phi,psi,dphi,dpsi\n");
    for i in 0..nx {
        let x = x0 + (x1 - x0) * i as f64 / (nx - 1) as f64;
        let p = family.eval_full(x);
        let (r1, r2) = family.system_residual(x);
        worst = worst.max(r1.abs()).max(r2.abs());
        csv.push_str(&format!("{},{},{},{},{}\n", x, p.phi, p.psi, p.dphi, p.dpsi));
    }
    if let Some(path) = out_csv {
        fs::write(path, &csv)?;
    } else if !json {
        print!("{csv}");
    }
    if json {
        println!(
            "{}",
            serde_json::json!({
                "case": family.case_id(),
                "branch": family.branch(),
                "max_residual": worst,
                "pass": worst <= 1e-9,
            })
        );
    } else {
        eprintln!("case {} max residual {worst:.3e}", family.case_id());
    }
    Ok(if worst <= 1e-9 { 0 } else { 2 })
}

fn linfam_lift(config: &Path, grid: usize, json: bool) -> Result<i32, CliError> {
    let cfg: FamilyConfig = read_config(config)?;
    let alpha = cfg
        .alpha
        .ok_or_else(|| CliError::Validation("lift needs `alpha` in the config".into()))?;
    let family = linfam::LinearFamily::new(cfg.lambda, cfg.constants)?;
    let lift = linfam::LiftedFamily::new(family, alpha)?;
    let d1_sources = cfg
        .d1
        .unwrap_or_else(|| vec!["exp(u)".into(), "1+u^2".into(), "u^2".into()]);
    let mut rows = Vec::new();
    let mut all_pass = true;
    for src in &d1_sources {
        let d1 = parse_function("d1", src)?;
        let sys = lift.system_with_diffusivity(&d1)?;
        let report = detsys::closed_form_residuals(
            &sys,
            |t, x| Ok(lift.eval(t, x).0),
            |t, x| Ok(lift.eval(t, x).1),
            (0.0, 1.0),
            (0.0, 1.0),
            grid,
            grid,
            1e-6,
        )?;
        all_pass &= report.pass;
        rows.push(serde_json::json!({
            "d1": src,
            "max_residual": report.max_abs(),
            "pass": report.pass,
        }));
        if !json {
            println!(
                "d1 = {:<12} max residual {:.3e}  {}",
                src,
                report.max_abs(),
                if report.pass { "pass" } else { "FAIL" }
            );
        }
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&rows).unwrap());
    }
    Ok(if all_pass { 0 } else { 2 })
}

// -------------------------------------------------------------------- bvp

fn fig1_cmd(n: usize, horizon: f64, out_dir: &Path, json: bool) -> Result<i32, CliError> {
    let app = linfam::power::flagship();
    let report = run_flagship_bvp(&app, n, horizon, Some(out_dir))?;
    let pass = report.linf <= 2e-3 && report.bvp.positive;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!(
            "grid n = {}, horizon T = {}: solver vs closed form L_inf = {:.3e} (gate 2e-3)",
            n, horizon, report.linf
        );
        println!(
            "zero-flux: max end derivative {:.3e}; positive: {}; sup-norm decay: {}",
            report.max_end_flux,
            report.bvp.positive,
            report
                .bvp
                .decay
                .as_ref()
                .map(|d| d.sup_u_monotone && d.sup_v_monotone)
                .unwrap_or(false)
        );
        println!("status: {}", if pass { "pass" } else { "FAIL" });
    }
    Ok(if pass { 0 } else { 2 })
}

#[derive(Debug, Serialize)]
pub struct FlagshipReport {
    pub n: usize,
    pub horizon: f64,
    pub interval: (f64, f64),
    pub linf: f64,
    pub l2: f64,
    pub max_end_flux: f64,
    pub bvp: linfam::power::BvpReport,
    pub compare: pdesolve::CompareReport,
}

/// Runs the flagship zero-flux problem: exact solution as the initial
/// profile, method-of-lines integration, and comparison at the horizon.
/// Shared by the CLI and the acceptance suite.
pub fn run_flagship_bvp(
    app: &PowerApplication,
    n: usize,
    horizon: f64,
    out_dir: Option<&Path>,
) -> Result<FlagshipReport, CliError> {
    let length = std::f64::consts::PI / app.h();
    let grid = Grid { n, x0: 0.0, x1: length };
    let xs = grid.nodes();
    let mut u0 = Vec::with_capacity(n);
    let mut v0 = Vec::with_capacity(n);
    for &x in &xs {
        let (u, v) = app.solution(0.0, x)?;
        u0.push(u);
        v0.push(v);
    }
    let k = app.k;
    let l = app.l;
    let field = pdesolve::simulate_with(
        |u| linfam::power::pow_fast(u, k),
        |v| linfam::power::pow_fast(v, l),
        |u, v| app.kinetic_rates(u, v),
        (u0, v0),
        Boundary::ZeroFlux,
        grid,
        horizon,
        0.4,
        Some(&[0.0, 0.5 * horizon, horizon]),
    )?;
    let compare = pdesolve::compare(&field, |t, x| {
        app.solution(t, x).unwrap_or((f64::NAN, f64::NAN))
    });
    let bvp = app.check_bvp(1, horizon, 2000)?;
    let max_end_flux = bvp
        .flux
        .as_ref()
        .map(|f| f.u_left.max(f.v_left).max(f.u_right).max(f.v_right))
        .unwrap_or(f64::NAN);

    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        let mut numeric = fs::File::create(dir.join("fig1_numeric.csv"))?;
        field.write_csv(&mut numeric)?;
        let mut exact = fs::File::create(dir.join("fig1_exact.csv"))?;
        writeln!(exact, "t,x,U,V")?;
        for &t in &field.stamps {
            for &x in &xs {
                let (u, v) = app.solution(t, x)?;
                writeln!(exact, "{},{},{},{}", t, x, u, v)?;
            }
        }
        let report_for_file = serde_json::json!({
            "parameters": app,
            "linf": compare.linf,
            "l2": compare.l2,
            "per_stamp": compare.per_stamp,
            "bvp": bvp,
        });
        fs::write(
            dir.join("fig1_compare.json"),
            serde_json::to_string_pretty(&report_for_file).unwrap(),
        )?;
    }

    Ok(FlagshipReport {
        n,
        horizon,
        interval: (0.0, length),
        linf: compare.linf,
        l2: compare.l2,
        max_end_flux,
        bvp,
        compare,
    })
}

// --------------------------------------------------------------- simulate

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemConfig {
    /// Diffusivity of the first component, expression in `U`.
    d1: String,
    d2: String,
    /// Kinetics, expressions in `U`, `V`.
    f: String,
    g: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IcConfig {
    u: String,
    v: String,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum BcConfig {
    ZeroFlux,
    Dirichlet { u: (f64, f64), v: (f64, f64) },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridConfig {
    n: usize,
    x0: f64,
    x1: f64,
}

fn default_sigma() -> f64 {
    0.4
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    system: SystemConfig,
    ic: IcConfig,
    bc: BcConfig,
    grid: GridConfig,
    t_end: f64,
    #[serde(default = "default_sigma")]
    sigma: f64,
    #[serde(default)]
    stamps: Option<Vec<f64>>,
}

fn simulate_cmd(args: SimulateArgs, json: bool) -> Result<i32, CliError> {
    let cfg: SimulateConfig = read_config(&args.config)?;
    let parse2 = |name: &str, src: &str| {
        parse_expr(src, &["U", "V"])
            .map_err(|e| CliError::Validation(format!("{name} = `{src}`: {e}")))
    };
    let d1 = parse_expr(&cfg.system.d1, &["U"])
        .map_err(|e| CliError::Validation(format!("d1: {e}")))?;
    let d2 = parse_expr(&cfg.system.d2, &["V"])
        .map_err(|e| CliError::Validation(format!("d2: {e}")))?;
    let sys = RDSystem::divergence(
        d1,
        d2,
        parse2("f", &cfg.system.f)?,
        parse2("g", &cfg.system.g)?,
    )
    .map_err(|e| CliError::Validation(e.to_string()))?;
    let ic_u = parse_expr(&cfg.ic.u, &["x"]).map_err(|e| CliError::Validation(e.to_string()))?;
    let ic_v = parse_expr(&cfg.ic.v, &["x"]).map_err(|e| CliError::Validation(e.to_string()))?;
    let bc = match cfg.bc {
        BcConfig::ZeroFlux => Boundary::ZeroFlux,
        BcConfig::Dirichlet { u, v } => Boundary::Dirichlet { u, v },
    };
    let grid = Grid { n: cfg.grid.n, x0: cfg.grid.x0, x1: cfg.grid.x1 };
    let field = pdesolve::simulate(
        &sys,
        &ic_u,
        &ic_v,
        bc,
        grid,
        cfg.t_end,
        cfg.sigma,
        cfg.stamps.as_deref(),
    )?;
    if let Some(path) = &args.out_csv {
        let mut file = fs::File::create(path)?;
        field.write_csv(&mut file)?;
    } else {
        let mut out = Vec::new();
        field.write_csv(&mut out)?;
        print!("{}", String::from_utf8_lossy(&out));
    }
    if json {
        eprintln!(
            "{}",
            serde_json::json!({
                "grid": field.grid,
                "bc": field.bc,
                "sigma": field.sigma,
                "stamps": field.stamps,
                "dt": field.dt,
            })
        );
    }
    Ok(0)
}
