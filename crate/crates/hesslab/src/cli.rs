//! Command-line front end: every module's checks and experiments behind one
//! binary, with deterministic JSON reports, CSV projections, and replayable
//! witness files.
//!
//! Exit codes: 0 = all checks passed; 1 = a mathematical check failed (a
//! witness file is archived); 2 = invalid input or config; 3 = internal
//! numerical failure (eigensolver or linear solve).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::concavity::{
    andrews_gap, sweep, trace_bounds, verify_pointwise, ConcavityError, QuadFormSpec,
    QuadFormVariant, SweepConfig,
};
use crate::cone::{check_condition, in_gamma_k, in_lifted_cone, Condition};
use crate::linalg::{symmetric_eigen, LinalgError, Matrix};
use crate::operator::{coefficient_roots, OperatorError, OperatorSpec};
use crate::report::{Emitter, Report};
use crate::solver::{
    newton_solve, rigidity_experiment, write_solution_binary, write_solution_csv,
    DirichletProblem, Perturbation, SolveOptions, SolverError,
};
use crate::symfun::{identity_suite, rel_discrepancy, sigma, sigma_enumerated, Spectrum};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HESSLAB_OUT";

#[derive(Parser)]
#[command(
    name = "hesslab",
    version,
    about = "Numerical laboratory for sum-type Hessian operator calculus"
)]
struct Cli {
    /// Directory for JSON/CSV reports (default: $HESSLAB_OUT, else ".").
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON config file; its keys override the subcommand's flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the symmetric-function kernel against subset enumeration and
    /// the exact identity battery on random inputs.
    Symcheck(SymcheckArgs),
    /// Check cone membership (and optionally an admissibility condition)
    /// for one spectrum.
    Cone(ConeArgs),
    /// Find the real roots of the auxiliary coefficient polynomial.
    Rr(RrArgs),
    /// Cross-check operator values and derivatives against their
    /// independent routes on random inputs.
    OperatorCheck(OperatorCheckArgs),
    /// Concavity quadratic-form checks.
    #[command(subcommand)]
    Concavity(ConcavityCmd),
    /// Compare the operator's second derivative against its eigenvalue
    /// divided-difference form on random matrix pairs.
    Andrews(AndrewsArgs),
    /// Check the weighted-trace identities and lower bounds on random
    /// admissible spectra.
    TraceBounds(TraceBoundsArgs),
    /// Solve a Dirichlet problem from a JSON problem file.
    Solve(SolveArgs),
    /// Expanding-disk rigidity experiment with perturbed quadratic
    /// boundary data.
    Rigidity(RigidityArgs),
}

#[derive(Subcommand)]
enum ConcavityCmd {
    /// Assemble and eigen-check the concavity form at one spectrum.
    Verify(ConcavityVerifyArgs),
    /// Sweep sampled regimes and report the pass/fail frontier.
    Sweep(ConcavitySweepArgs),
}

#[derive(Args, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct SymcheckArgs {
    /// Largest vector length drawn.
    #[arg(long, default_value_t = 8)]
    nmax: usize,
    #[arg(long, default_value_t = 10000)]
    samples: usize,
    /// Entries are drawn uniformly from [-max-abs, max-abs].
    #[arg(long, default_value_t = 5.0)]
    max_abs: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Relative tolerance against the enumeration oracle.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Relative tolerance for the identity battery.
    #[arg(long, default_value_t = 1e-11)]
    tol_identity: f64,
}

#[derive(Args, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct ConeArgs {
    /// Spectrum, comma-separated.
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// Cone degree.
    #[arg(long)]
    k: Option<usize>,
    /// Appended roots: also check membership of (lambda, y) at degree k.
    #[arg(long, value_delimiter = ',')]
    y: Option<Vec<f64>>,
    /// Coefficients (used by the condition check).
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<f64>>,
    /// Admissibility condition to check: 1 or 2.
    #[arg(long)]
    condition: Option<u8>,
}

#[derive(Args, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct RrArgs {
    /// Coefficients a_1,...,a_m of the auxiliary polynomial.
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<f64>>,
}

#[derive(Args, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct OperatorCheckArgs {
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Coefficients (mutually exclusive with --y; default: none).
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<f64>>,
    /// Appended roots.
    #[arg(long, value_delimiter = ',')]
    y: Option<Vec<f64>>,
    /// Random spectra for the value/gradient checks.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Random symmetric matrices for the matrix-derivative check.
    #[arg(long, default_value_t = 200)]
    matrices: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Spectrum entries are drawn from [-range, range].
    #[arg(long, default_value_t = 3.0)]
    range: f64,
    /// Tolerance for exact dual-route identities.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Tolerance for finite-difference gradient checks (h = 1e-5).
    #[arg(long, default_value_t = 1e-5)]
    fd_tol: f64,
    /// Tolerance for matrix directional-derivative checks (h = 1e-4).
    #[arg(long, default_value_t = 1e-4)]
    matrix_fd_tol: f64,
}

#[derive(Args, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct ConcavityVerifyArgs {
    /// sigma-k | sum-f | n-minus-one.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    y: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Penalty weight (default: the variant's canonical value).
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    lambda1_slack: f64,
    /// top-entry | max-entry.
    #[arg(long, default_value = "top-entry")]
    rhs_weight: String,
    /// Spectrum (descending), comma-separated.
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-8)]
    tol_psd: f64,
}

#[derive(Args, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct ConcavitySweepArgs {
    /// sigma-k | sum-f | n-minus-one.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Number of appended roots drawn per sample (sum-f / n-minus-one).
    #[arg(long, default_value_t = 0)]
    m: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.005])]
    delta: Vec<f64>,
    /// Operator-value ceilings in normalized coordinates.
    #[arg(long, value_delimiter = ',', default_values_t = [1e-4])]
    level: Vec<f64>,
    /// Raw top-entry values (n-minus-one cells).
    #[arg(long, value_delimiter = ',', default_values_t = [1e2, 1e3])]
    lambda1: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Penalty weight (default: the variant's canonical value).
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    tol_psd: f64,
    /// Also bisect the per-cell supremum of the admissible penalty weight.
    #[arg(long)]
    track_gamma_sup: bool,
    /// Range appended roots are drawn from.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 2.0])]
    root_range: Vec<f64>,
    /// Range of the middle entries (n-minus-one sampling).
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 2.5])]
    mid_range: Vec<f64>,
    /// Window the raw operator value is steered into (n-minus-one).
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 1.0])]
    raw_value_range: Vec<f64>,
}

#[derive(Args, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct AndrewsArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    y: Option<Vec<f64>>,
    /// Admissible samples to evaluate.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Smallest allowed eigenvalue gap of the base matrix.
    #[arg(long, default_value_t = 1e-3)]
    min_gap: f64,
    /// The gap must stay above -tol x scale.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Base-matrix eigenvalues are drawn from this range.
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 3.0])]
    eig_range: Vec<f64>,
}

#[derive(Args, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct TraceBoundsArgs {
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    y: Option<Vec<f64>>,
    /// Admissibility condition: 1 or 2.
    #[arg(long, default_value_t = 1)]
    condition: u8,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Identity tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Spectrum entries are drawn from this range.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 4.0])]
    entry_range: Vec<f64>,
}

#[derive(Args, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct SolveArgs {
    /// JSON problem file: {operator, domain, h, psi, boundary, condition}.
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol_res: f64,
    #[arg(long, default_value_t = 30)]
    max_halvings: usize,
    /// Exponents for the reported (-u)^alpha Lap_h u map.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0, 4.0])]
    alphas: Vec<f64>,
    /// Normalized cone margin every Newton iterate must keep.
    #[arg(long, default_value_t = 1e-10)]
    eps_cone: f64,
}

#[derive(Args, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct RigidityArgs {
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Operator coefficients (planar operator; dimension is fixed at 2).
    #[arg(long, value_delimiter = ',', default_values_t = [1.0])]
    a: Vec<f64>,
    /// Appended roots; overrides --a when given.
    #[arg(long, value_delimiter = ',')]
    y: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1)]
    condition: u8,
    #[arg(long, value_delimiter = ',', default_values_t = [2.0, 4.0, 8.0])]
    radii: Vec<f64>,
    /// Boundary perturbation amplitude (0 = unperturbed).
    #[arg(long, default_value_t = 0.0)]
    amplitude: f64,
    /// Angular harmonic of the perturbation.
    #[arg(long, default_value_t = 3)]
    harmonic: u32,
    #[arg(long, default_value_t = 32)]
    nodes_per_radius: usize,
    /// Unperturbed runs must fit a quadratic to within this gate.
    #[arg(long, default_value_t = 1e-6)]
    dev_gate: f64,
}

/// What a command run produced: the verdict and its one-line summary.
struct Outcome {
    passed: bool,
    summary: String,
}

enum CmdError {
    Input(String),
    Numerical(String),
}

impl From<OperatorError> for CmdError {
    fn from(e: OperatorError) -> Self {
        match e {
            OperatorError::Eigen(inner) => CmdError::Numerical(inner.to_string()),
            other => CmdError::Input(other.to_string()),
        }
    }
}

impl From<LinalgError> for CmdError {
    fn from(e: LinalgError) -> Self {
        CmdError::Numerical(e.to_string())
    }
}

impl From<ConcavityError> for CmdError {
    fn from(e: ConcavityError) -> Self {
        match e {
            ConcavityError::Eigen(inner) => CmdError::Numerical(inner.to_string()),
            ConcavityError::Operator(OperatorError::Eigen(inner)) => {
                CmdError::Numerical(inner.to_string())
            }
            other => CmdError::Input(other.to_string()),
        }
    }
}

impl From<SolverError> for CmdError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::StalledLineSearch { .. }
            | SolverError::LinearSolveFailure(_)
            | SolverError::NoAdmissibleStart(_) => CmdError::Numerical(e.to_string()),
            SolverError::Eigen(inner) => CmdError::Numerical(inner.to_string()),
            SolverError::Operator(OperatorError::Eigen(inner)) => {
                CmdError::Numerical(inner.to_string())
            }
            other => CmdError::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Input(format!("i/o: {e}"))
    }
}

/// Entry point returning the process exit code; `argv[0]` is the binary
/// name, as in `std::env::args`.
pub fn run(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv.iter()) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let config_path = cli.config.as_deref();

    let (name, result) = dispatch(cli.command, &out_dir, config_path);
    match result {
        Ok(outcome) => {
            println!("{name}: {}", outcome.summary);
            if outcome.passed {
                0
            } else {
                1
            }
        }
        Err(CmdError::Input(msg)) => {
            eprintln!("{name}: invalid input: {msg}");
            2
        }
        Err(CmdError::Numerical(msg)) => {
            eprintln!("{name}: numerical failure: {msg}");
            3
        }
    }
}

fn dispatch(
    command: Command,
    out_dir: &Path,
    config: Option<&Path>,
) -> (&'static str, Result<Outcome, CmdError>) {
    match command {
        Command::Symcheck(a) => ("symcheck", with_config(a, config, out_dir, "symcheck", run_symcheck)),
        Command::Cone(a) => ("cone", with_config(a, config, out_dir, "cone", run_cone)),
        Command::Rr(a) => ("rr", with_config(a, config, out_dir, "rr", run_rr)),
        Command::OperatorCheck(a) => (
            "operator-check",
            with_config(a, config, out_dir, "operator-check", run_operator_check),
        ),
        Command::Concavity(ConcavityCmd::Verify(a)) => (
            "concavity verify",
            with_config(a, config, out_dir, "concavity-verify", run_concavity_verify),
        ),
        Command::Concavity(ConcavityCmd::Sweep(a)) => (
            "concavity sweep",
            with_config(a, config, out_dir, "concavity-sweep", run_concavity_sweep),
        ),
        Command::Andrews(a) => ("andrews", with_config(a, config, out_dir, "andrews", run_andrews)),
        Command::TraceBounds(a) => (
            "trace-bounds",
            with_config(a, config, out_dir, "trace-bounds", run_trace_bounds),
        ),
        Command::Solve(a) => ("solve", with_config(a, config, out_dir, "solve", run_solve)),
        Command::Rigidity(a) => {
            ("rigidity", with_config(a, config, out_dir, "rigidity", run_rigidity))
        }
    }
}

/// Merges the config file over the flag values, sets up the emitter, runs
/// the command, and guarantees a JSON report and timing sidecar even on
/// errors.
fn with_config<A, F>(
    args: A,
    config: Option<&Path>,
    out_dir: &Path,
    name: &'static str,
    body: F,
) -> Result<Outcome, CmdError>
where
    A: Serialize + serde::de::DeserializeOwned,
    F: FnOnce(A, Value, &Emitter) -> Result<Outcome, CmdError>,
{
    let merged = apply_config(args, config)?;
    let echo = serde_json::to_value(&merged).expect("args serialize");
    let emitter = Emitter::new(out_dir, name)?;
    let result = body(merged, echo.clone(), &emitter);
    if let Err(e) = &result {
        let (kind, msg) = match e {
            CmdError::Input(m) => ("invalid-input", m),
            CmdError::Numerical(m) => ("numerical-failure", m),
        };
        let report = Report::new(
            check_slug(name),
            None,
            false,
            echo,
            json!({ "error": kind, "detail": msg }),
        );
        let _ = emitter.write_json(&report);
    }
    let _ = emitter.write_sidecar();
    result
}

fn check_slug(name: &'static str) -> &'static str {
    match name {
        "symcheck" => "sigma-oracle-suite",
        "cone" => "cone-membership",
        "rr" => "coefficient-real-rootedness",
        "operator-check" => "operator-consistency",
        "concavity-verify" => "concavity-pointwise",
        "concavity-sweep" => "concavity-sweep",
        "andrews" => "second-derivative-comparison",
        "trace-bounds" => "weighted-trace-bounds",
        "solve" => "dirichlet-solve",
        "rigidity" => "rigidity-decay",
        other => other,
    }
}

fn apply_config<A>(args: A, config: Option<&Path>) -> Result<A, CmdError>
where
    A: Serialize + serde::de::DeserializeOwned,
{
    let Some(path) = config else { return Ok(args) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::Input(format!("cannot read config {}: {e}", path.display())))?;
    let mut overlay: Value = serde_json::from_str(&text)
        .map_err(|e| CmdError::Input(format!("config {} is not JSON: {e}", path.display())))?;
    match overlay.as_object_mut() {
        Some(map) => {
            // Witness files carry a human-readable "replay" hint; every other
            // unknown key is an error.
            map.remove("replay");
        }
        None => {
            return Err(CmdError::Input(format!(
                "config {} must be a JSON object",
                path.display()
            )))
        }
    }
    let mut base = serde_json::to_value(&args).expect("args serialize");
    merge_value(&mut base, overlay);
    serde_json::from_value(base)
        .map_err(|e| CmdError::Input(format!("config {}: {e}", path.display())))
}

fn merge_value(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge_value(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Archives a witness that is itself a valid config for `command`: the
/// failing run's exact post-merge configuration plus a "replay" hint the
/// config loader ignores.
fn replay_witness(emitter: &Emitter, command: &str, echo: &Value) -> Result<(), CmdError> {
    let mut w = serde_json::Map::new();
    w.insert(
        "replay".to_string(),
        Value::String(format!("hesslab {command} --config <this file>")),
    );
    if let Value::Object(fields) = echo {
        for (k, v) in fields {
            w.insert(k.clone(), v.clone());
        }
    }
    emitter.write_witness(&Value::Object(w))?;
    Ok(())
}

fn require<T>(v: Option<T>, flag: &str) -> Result<T, CmdError> {
    v.ok_or_else(|| CmdError::Input(format!("{flag} is required (flag or config)")))
}

fn parse_condition(v: u8) -> Result<Condition, CmdError> {
    match v {
        1 => Ok(Condition::One),
        2 => Ok(Condition::Two),
        other => Err(CmdError::Input(format!("condition must be 1 or 2, got {other}"))),
    }
}

fn parse_variant(s: &str) -> Result<QuadFormVariant, CmdError> {
    serde_json::from_value(Value::String(s.to_string()))
        .map_err(|_| CmdError::Input(format!("unknown variant {s:?} (sigma-k | sum-f | n-minus-one)")))
}

fn build_operator(
    n: usize,
    k: usize,
    a: &Option<Vec<f64>>,
    y: &Option<Vec<f64>>,
) -> Result<OperatorSpec, CmdError> {
    Ok(match (a, y) {
        (_, Some(y)) => OperatorSpec::from_roots(n, k, y.clone())?,
        (Some(a), None) => OperatorSpec::from_coeffs(n, k, a.clone())?,
        (None, None) => OperatorSpec::from_roots(n, k, Vec::new())?,
    })
}

fn pair(range: &[f64], flag: &str) -> Result<(f64, f64), CmdError> {
    if range.len() != 2 || !(range[0] < range[1]) {
        return Err(CmdError::Input(format!(
            "{flag} must be lo,hi with lo < hi; got {range:?}"
        )));
    }
    Ok((range[0], range[1]))
}

fn random_symmetric(n: usize, half_width: f64, rng: &mut ChaCha8Rng) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-half_width..=half_width);
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    m
}

fn fmt_float_list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

// ---------------------------------------------------------------------------
// symcheck

fn run_symcheck(args: SymcheckArgs, echo: Value, emitter: &Emitter) -> Result<Outcome, CmdError> {
    if args.nmax == 0 || args.nmax > 12 {
        return Err(CmdError::Input(format!(
            "nmax must be between 1 and 12 (enumeration oracle is exponential); got {}",
            args.nmax
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut sigma_max = 0.0_f64;
    let mut sigma_worst = Value::Null;
    let mut identity_max = 0.0_f64;
    let mut identity_worst = Value::Null;
    for _ in 0..args.samples {
        let n = rng.gen_range(1..=args.nmax);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-args.max_abs..=args.max_abs)).collect();
        for k in -1..=(n as i64 + 1) {
            let fast = sigma(k, &x);
            let slow = sigma_enumerated(k, &x);
            let err = rel_discrepancy(fast, slow);
            if err > sigma_max {
                sigma_max = err;
                sigma_worst = json!({
                    "k": k, "x": x, "recurrence": fast, "enumeration": slow, "rel_err": err,
                });
            }
        }
        let k = rng.gen_range(1..=n as i64);
        let rep = identity_suite(&x, k);
        if rep.max_rel_err > identity_max {
            identity_max = rep.max_rel_err;
            let worst = rep
                .checks
                .iter()
                .max_by(|a, b| a.rel_err.partial_cmp(&b.rel_err).unwrap())
                .map(|c| c.name.clone())
                .unwrap_or_default();
            identity_worst = json!({ "k": k, "x": x, "name": worst, "rel_err": rep.max_rel_err });
        }
    }
    let passed = sigma_max <= args.tol && identity_max <= args.tol_identity;
    let data = json!({
        "samples": args.samples,
        "sigma_max_rel_err": sigma_max,
        "sigma_worst": sigma_worst,
        "identity_max_rel_err": identity_max,
        "identity_worst": identity_worst,
    });
    let report = Report::new(check_slug("symcheck"), Some(args.seed), passed, echo.clone(), data);
    emitter.write_json(&report)?;
    if !passed {
        replay_witness(emitter, "symcheck", &echo)?;
    }
    Ok(Outcome {
        passed,
        summary: format!(
            "{} samples, enumeration max rel err {:.3e} (tol {:.1e}), identities max {:.3e} (tol {:.1e}) -- {}",
            args.samples,
            sigma_max,
            args.tol,
            identity_max,
            args.tol_identity,
            verdict(passed)
        ),
    })
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

// ---------------------------------------------------------------------------
// cone

fn run_cone(args: ConeArgs, echo: Value, emitter: &Emitter) -> Result<Outcome, CmdError> {
    let lambda = require(args.lambda.clone(), "--lambda")?;
    let k = require(args.k, "--k")?;
    if lambda.is_empty() || lambda.iter().any(|v| !v.is_finite()) {
        return Err(CmdError::Input("lambda must be a nonempty finite list".to_string()));
    }
    if k == 0 {
        return Err(CmdError::Input("k must be at least 1".to_string()));
    }
    let gamma_verdict = in_gamma_k(&lambda, k);
    let mut passed = gamma_verdict.member;
    let mut data = serde_json::Map::new();
    data.insert("gamma_verdict".to_string(), serde_json::to_value(&gamma_verdict).unwrap());
    if let Some(y) = &args.y {
        let lifted = in_lifted_cone(&lambda, y, k);
        passed = lifted.member;
        data.insert("lifted_verdict".to_string(), serde_json::to_value(&lifted).unwrap());
    }
    if let Some(c) = args.condition {
        let which = parse_condition(c)?;
        let y = args.y.clone().unwrap_or_default();
        let a = args.a.clone().unwrap_or_default();
        let rep = check_condition(&lambda, &y, &a, k, which);
        passed = rep.holds;
        data.insert("condition_report".to_string(), serde_json::to_value(&rep).unwrap());
    }
    let report = Report::new(check_slug("cone"), None, passed, echo.clone(), Value::Object(data));
    emitter.write_json(&report)?;
    if !passed {
        replay_witness(emitter, "cone", &echo)?;
    }
    let min_margin = gamma_verdict.margins.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(Outcome {
        passed,
        summary: format!(
            "degree {k}, member = {}, min sigma margin {:.3e} -- {}",
            passed,
            min_margin,
            verdict(passed)
        ),
    })
}

// ---------------------------------------------------------------------------
// rr

fn run_rr(args: RrArgs, echo: Value, emitter: &Emitter) -> Result<Outcome, CmdError> {
    let a = require(args.a.clone(), "--a")?;
    if a.is_empty() {
        return Err(CmdError::Input("--a needs at least one coefficient".to_string()));
    }
    match coefficient_roots(&a) {
        Ok(roots) => {
            let data = json!({ "a": a, "roots": roots });
            let report = Report::new(check_slug("rr"), None, true, echo, data);
            emitter.write_json(&report)?;
            Ok(Outcome { passed: true, summary: format!("roots: {}", fmt_float_list(&roots)) })
        }
        Err(OperatorError::NoRealRoots(detail)) => {
            let data = json!({ "a": a, "error": "NoRealRoots", "detail": detail });
            let report = Report::new(check_slug("rr"), None, false, echo.clone(), data);
            emitter.write_json(&report)?;
            replay_witness(emitter, "rr", &echo)?;
            Ok(Outcome {
                passed: false,
                summary: "NoRealRoots: the coefficient polynomial has a complex pair".to_string(),
            })
        }
        Err(e) => Err(e.into()),
    }
}

// ---------------------------------------------------------------------------
// operator-check

fn run_operator_check(
    args: OperatorCheckArgs,
    echo: Value,
    emitter: &Emitter,
) -> Result<Outcome, CmdError> {
    let op = build_operator(args.n, args.k, &args.a, &args.y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let n = op.n();
    let h = 1e-5;

    let mut dual_max = 0.0_f64;
    let mut dual_worst = Value::Null;
    let mut grad_max = 0.0_f64;
    let mut grad_worst = Value::Null;
    for _ in 0..args.samples {
        let lam: Vec<f64> = (0..n).map(|_| rng.gen_range(-args.range..=args.range)).collect();
        let err = rel_discrepancy(op.value(&lam), op.value_sum_route(&lam));
        if err > dual_max {
            dual_max = err;
            dual_worst = json!({ "lambda": lam, "rel_err": err });
        }
        let g = op.grad(&lam);
        for i in 0..n {
            let mut plus = lam.clone();
            plus[i] += h;
            let mut minus = lam.clone();
            minus[i] -= h;
            let fd = (op.value(&plus) - op.value(&minus)) / (2.0 * h);
            let err = rel_discrepancy(g[i], fd);
            if err > grad_max {
                grad_max = err;
                grad_worst = json!({ "lambda": lam, "i": i, "analytic": g[i], "fd": fd });
            }
        }
    }

    let hm = 1e-4;
    let mut mat_max = 0.0_f64;
    let mut mat_worst = Value::Null;
    let f_of = |s: &Matrix| -> Result<f64, CmdError> {
        let eig = symmetric_eigen(s)?;
        Ok(op.value(&eig.values))
    };
    for _ in 0..args.matrices {
        let s = random_symmetric(n, args.range, &mut rng);
        let t = random_symmetric(n, 1.0, &mut rng);
        let md = op.matrix_derivatives(&s)?;
        let mut directional = 0.0;
        for p in 0..n {
            for q in 0..n {
                directional += md.gradient.get(p, q) * t.get(p, q);
            }
        }
        let mut sp = s.clone();
        let mut sm = s.clone();
        for p in 0..n {
            for q in 0..n {
                sp.set(p, q, s.get(p, q) + hm * t.get(p, q));
                sm.set(p, q, s.get(p, q) - hm * t.get(p, q));
            }
        }
        let fd = (f_of(&sp)? - f_of(&sm)?) / (2.0 * hm);
        let err = rel_discrepancy(directional, fd);
        if err > mat_max {
            mat_max = err;
            mat_worst = json!({ "analytic": directional, "fd": fd, "rel_err": err });
        }
    }

    let passed = dual_max <= args.tol && grad_max <= args.fd_tol && mat_max <= args.matrix_fd_tol;
    let data = json!({
        "operator": op,
        "dual_route_max_rel_err": dual_max,
        "dual_route_worst": dual_worst,
        "gradient_fd_max_rel_err": grad_max,
        "gradient_fd_worst": grad_worst,
        "matrix_fd_max_rel_err": mat_max,
        "matrix_fd_worst": mat_worst,
    });
    let report = Report::new(check_slug("operator-check"), Some(args.seed), passed, echo.clone(), data);
    emitter.write_json(&report)?;
    if !passed {
        replay_witness(emitter, "operator-check", &echo)?;
    }
    Ok(Outcome {
        passed,
        summary: format!(
            "dual route {:.3e} (tol {:.1e}), gradient FD {:.3e} (tol {:.1e}), matrix FD {:.3e} (tol {:.1e}) -- {}",
            dual_max, args.tol, grad_max, args.fd_tol, mat_max, args.matrix_fd_tol, verdict(passed)
        ),
    })
}

// ---------------------------------------------------------------------------
// concavity verify

fn quad_form_spec_from(
    variant: &str,
    n: usize,
    k: usize,
    a: &Option<Vec<f64>>,
    y: &Option<Vec<f64>>,
    delta: f64,
    gamma: Option<f64>,
    lambda1_slack: f64,
    rhs_weight: &str,
) -> Result<QuadFormSpec, CmdError> {
    let mut operator = serde_json::Map::new();
    operator.insert("n".to_string(), json!(n));
    operator.insert("k".to_string(), json!(k));
    if let Some(y) = y {
        operator.insert("y".to_string(), json!(y));
    } else if let Some(a) = a {
        operator.insert("a".to_string(), json!(a));
    }
    let spec = json!({
        "variant": variant,
        "operator": Value::Object(operator),
        "delta": delta,
        "gamma": gamma,
        "lambda1_slack": lambda1_slack,
        "rhs_weight": rhs_weight,
    });
    serde_json::from_value(spec).map_err(|e| CmdError::Input(e.to_string()))
}

fn run_concavity_verify(
    args: ConcavityVerifyArgs,
    echo: Value,
    emitter: &Emitter,
) -> Result<Outcome, CmdError> {
    let variant = require(args.variant.clone(), "--variant")?;
    let n = require(args.n, "--n")?;
    let k = require(args.k, "--k")?;
    let lambda = require(args.lambda.clone(), "--lambda")?;
    let spec = quad_form_spec_from(
        &variant,
        n,
        k,
        &args.a,
        &args.y,
        args.delta,
        args.gamma,
        args.lambda1_slack,
        &args.rhs_weight,
    )?;
    let rep = verify_pointwise(&spec, &Spectrum::new(lambda), args.tol_psd)?;
    let passed = rep.passed;
    let data = json!({ "spec": spec, "report": rep });
    let report = Report::new(check_slug("concavity-verify"), None, passed, echo.clone(), data);
    emitter.write_json(&report)?;
    if !passed {
        replay_witness(emitter, "concavity verify", &echo)?;
    }
    let (min_eig, margin) = match &report.data["report"] {
        Value::Object(o) => (
            o["min_eigenvalue"].as_f64().unwrap_or(f64::NAN),
            o["margin"].as_f64().unwrap_or(f64::NAN),
        ),
        _ => (f64::NAN, f64::NAN),
    };
    Ok(Outcome {
        passed,
        summary: format!(
            "min eigenvalue {:.6e}, normalized margin {:.3e} (tol {:.1e}) -- {}",
            min_eig,
            margin,
            args.tol_psd,
            verdict(passed)
        ),
    })
}

// ---------------------------------------------------------------------------
// concavity sweep

fn run_concavity_sweep(
    args: ConcavitySweepArgs,
    echo: Value,
    emitter: &Emitter,
) -> Result<Outcome, CmdError> {
    let variant = parse_variant(&require(args.variant.clone(), "--variant")?)?;
    let n = require(args.n, "--n")?;
    let k = require(args.k, "--k")?;
    let mut cfg = SweepConfig::new(n, k, args.m);
    cfg.deltas = args.delta.clone();
    cfg.levels = args.level.clone();
    cfg.lambda1_values = args.lambda1.clone();
    cfg.samples = args.samples;
    cfg.seed = args.seed;
    cfg.tol_psd = args.tol_psd;
    cfg.gamma = args.gamma;
    cfg.track_gamma_sup = args.track_gamma_sup;
    cfg.root_range = pair(&args.root_range, "--root-range")?;
    cfg.mid_range = pair(&args.mid_range, "--mid-range")?;
    cfg.raw_value_range = pair(&args.raw_value_range, "--raw-value-range")?;

    let frontier = sweep(variant, &cfg)?;
    let passed = frontier.all_passed();
    emitter.write_csv(&frontier.to_csv(), Some(args.seed))?;
    let data = serde_json::to_value(&frontier).expect("frontier serializes");
    let report = Report::new(check_slug("concavity-sweep"), Some(args.seed), passed, echo, data);
    emitter.write_json(&report)?;

    let mut min_fraction = 1.0_f64;
    let mut min_margin = f64::INFINITY;
    for cell in &frontier.cells {
        min_fraction = min_fraction.min(cell.pass_fraction);
        min_margin = min_margin.min(cell.min_margin);
    }
    if !passed {
        if let Some(cell) = frontier.cells.iter().find(|c| c.witness.is_some()) {
            let w = cell.witness.as_ref().unwrap();
            let gamma = cfg
                .gamma
                .unwrap_or_else(|| crate::concavity::default_gamma(variant, n, k));
            emitter.write_witness(&json!({
                "replay": "hesslab concavity verify --config <this file>",
                "variant": variant_name(variant),
                "n": n,
                "k": k,
                "y": w.y,
                "delta": cell.delta,
                "gamma": gamma,
                "lambda": w.lambda,
                "tol-psd": cfg.tol_psd,
            }))?;
        }
    }
    Ok(Outcome {
        passed,
        summary: format!(
            "{} cells, min pass fraction {:.4}, min margin {:.3e} -- {}",
            frontier.cells.len(),
            min_fraction,
            min_margin,
            verdict(passed)
        ),
    })
}

fn variant_name(v: QuadFormVariant) -> &'static str {
    v.as_str()
}

// ---------------------------------------------------------------------------
// andrews

fn run_andrews(args: AndrewsArgs, echo: Value, emitter: &Emitter) -> Result<Outcome, CmdError> {
    let op = build_operator(args.n, args.k, &args.a, &args.y)?;
    let (lo, hi) = pair(&args.eig_range, "--eig-range")?;
    if !(lo > 0.0) {
        return Err(CmdError::Input(
            "--eig-range must be positive so the base matrix is admissible".to_string(),
        ));
    }
    let n = op.n();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut csv = String::from("index,lhs,rhs,gap,scale,normalized_gap\n");
    let mut admitted = 0usize;
    let mut skipped = 0usize;
    let mut min_norm_gap = f64::INFINITY;
    let mut worst = Value::Null;
    let max_tries = args.samples.saturating_mul(50).max(1000);
    let mut tries = 0usize;
    while admitted < args.samples {
        tries += 1;
        if tries > max_tries {
            return Err(CmdError::Input(format!(
                "could not draw {} admissible samples in {} tries; widen --eig-range or lower --min-gap",
                args.samples, max_tries
            )));
        }
        let mut lam: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
        lam.sort_by(|p, q| q.partial_cmp(p).unwrap());
        let gap_ok = lam.windows(2).all(|w| w[0] - w[1] >= args.min_gap);
        if !gap_ok {
            skipped += 1;
            continue;
        }
        let basis = symmetric_eigen(&random_symmetric(n, 1.0, &mut rng))?;
        let s = Matrix::from_diagonal(&lam).conjugate(&basis.vectors.transpose());
        let t = random_symmetric(n, 1.0, &mut rng);
        let rep = match andrews_gap(&op, &s, &t) {
            Ok(rep) => rep,
            Err(ConcavityError::DegenerateSpectrum(_)) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        if !rep.admissible {
            skipped += 1;
            continue;
        }
        let norm_gap = rep.gap / rep.scale;
        csv.push_str(&format!(
            "{admitted},{},{},{},{},{}\n",
            rep.lhs, rep.rhs, rep.gap, rep.scale, norm_gap
        ));
        if norm_gap < min_norm_gap {
            min_norm_gap = norm_gap;
            worst = json!({
                "index": admitted,
                "lambda": lam,
                "lhs": rep.lhs,
                "rhs": rep.rhs,
                "gap": rep.gap,
                "scale": rep.scale,
            });
        }
        admitted += 1;
    }
    let passed = min_norm_gap >= -args.tol;
    emitter.write_csv(&csv, Some(args.seed))?;
    let data = json!({
        "operator": op,
        "admitted": admitted,
        "skipped": skipped,
        "min_normalized_gap": min_norm_gap,
        "worst": worst,
    });
    let report = Report::new(check_slug("andrews"), Some(args.seed), passed, echo.clone(), data);
    emitter.write_json(&report)?;
    if !passed {
        replay_witness(emitter, "andrews", &echo)?;
    }
    Ok(Outcome {
        passed,
        summary: format!(
            "{} admissible samples, min normalized gap {:.3e} (floor -{:.1e}) -- {}",
            admitted,
            min_norm_gap,
            args.tol,
            verdict(passed)
        ),
    })
}

// ---------------------------------------------------------------------------
// trace-bounds

fn run_trace_bounds(
    args: TraceBoundsArgs,
    echo: Value,
    emitter: &Emitter,
) -> Result<Outcome, CmdError> {
    let op = build_operator(args.n, args.k, &args.a, &args.y)?;
    let which = parse_condition(args.condition)?;
    let (lo, hi) = pair(&args.entry_range, "--entry-range")?;
    if !(lo > 0.0) {
        return Err(CmdError::Input(
            "--entry-range must be positive so sampled spectra are admissible".to_string(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut csv = String::from(
        "index,sum_f_lambda,k_times_f,slack,sum_f,lambda1_ratio,maclaurin_lhs,maclaurin_rhs\n",
    );
    let mut ident_max = 0.0_f64;
    let mut slack_min = f64::INFINITY;
    let mut maclaurin_min = f64::INFINITY;
    let mut ratio_min = f64::INFINITY;
    let mut worst = Value::Null;
    for index in 0..args.samples {
        let mut lam: Vec<f64> = (0..op.n()).map(|_| rng.gen_range(lo..=hi)).collect();
        lam.sort_by(|p, q| q.partial_cmp(p).unwrap());
        let rep = trace_bounds(&op, &Spectrum::new(lam.clone()), which)?;
        let scale = rep.k_times_f.abs().max(1.0);
        let e1 = rel_discrepancy(rep.slack + rep.sum_f_lambda, rep.slack_identity + rep.sum_f_lambda);
        let e2 = rel_discrepancy(rep.sum_f, rep.sum_f_identity);
        let ident = e1.max(e2);
        if ident > ident_max {
            ident_max = ident;
            worst = json!({ "index": index, "lambda": lam, "rel_err": ident });
        }
        slack_min = slack_min.min(rep.slack / scale);
        maclaurin_min = maclaurin_min.min(rep.maclaurin_lhs - rep.maclaurin_rhs);
        ratio_min = ratio_min.min(rep.lambda1_ratio);
        csv.push_str(&format!(
            "{index},{},{},{},{},{},{},{}\n",
            rep.sum_f_lambda,
            rep.k_times_f,
            rep.slack,
            rep.sum_f,
            rep.lambda1_ratio,
            rep.maclaurin_lhs,
            rep.maclaurin_rhs
        ));
    }
    let slack_ok = match which {
        Condition::One => slack_min >= -1e-12,
        Condition::Two => true,
    };
    let maclaurin_ok = match which {
        Condition::One => maclaurin_min >= -1e-12,
        Condition::Two => true,
    };
    let passed = ident_max <= args.tol && slack_ok && maclaurin_ok;
    emitter.write_csv(&csv, Some(args.seed))?;
    let data = json!({
        "operator": op,
        "samples": args.samples,
        "identity_max_rel_err": ident_max,
        "identity_worst": worst,
        "normalized_slack_min": slack_min,
        "maclaurin_gap_min": maclaurin_min,
        "lambda1_ratio_min": ratio_min,
    });
    let report = Report::new(check_slug("trace-bounds"), Some(args.seed), passed, echo.clone(), data);
    emitter.write_json(&report)?;
    if !passed {
        replay_witness(emitter, "trace-bounds", &echo)?;
    }
    Ok(Outcome {
        passed,
        summary: format!(
            "{} samples, identity max {:.3e} (tol {:.1e}), normalized slack min {:.3e} -- {}",
            args.samples,
            ident_max,
            args.tol,
            slack_min,
            verdict(passed)
        ),
    })
}

// ---------------------------------------------------------------------------
// solve

fn run_solve(args: SolveArgs, echo: Value, emitter: &Emitter) -> Result<Outcome, CmdError> {
    let path = require(args.problem.clone(), "--problem")?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CmdError::Input(format!("cannot read problem {}: {e}", path.display())))?;
    let problem: DirichletProblem = serde_json::from_str(&text)
        .map_err(|e| CmdError::Input(format!("problem {}: {e}", path.display())))?;
    let opts = SolveOptions {
        max_iters: args.max_iters,
        tol_res: args.tol_res,
        max_halvings: args.max_halvings,
        alphas: args.alphas.clone(),
        eps_cone: args.eps_cone,
    };
    let sol = newton_solve(&problem, &opts)?;
    let converged = sol.report.residual_inf <= args.tol_res;
    let passed = converged && sol.report.admissible_everywhere;

    let mut csv = Vec::new();
    write_solution_csv(&sol, &mut csv).map_err(CmdError::from_solver_io)?;
    emitter.write_csv(std::str::from_utf8(&csv).expect("csv is utf-8"), None)?;
    emitter
        .write_binary(|p| {
            write_solution_binary(&sol, p).map_err(|e| std::io::Error::other(e.to_string()))
        })
        .map_err(|e| CmdError::Numerical(e.to_string()))?;

    let data = json!({
        "problem": problem,
        "grid": { "shape": sol.grid.shape, "h": sol.grid.h, "unknowns": sol.u.len() },
        "report": sol.report,
    });
    let report = Report::new(check_slug("solve"), None, passed, echo.clone(), data);
    emitter.write_json(&report)?;
    if !passed {
        replay_witness(emitter, "solve", &echo)?;
    }
    let summary = format!(
        "{} unknowns, {} Newton iterations, residual {:.3e}, min cone margin {:.3e} -- {}",
        sol.u.len(),
        sol.report.newton_iters,
        sol.report.residual_inf,
        sol.report.min_cone_margin,
        verdict(passed)
    );
    if !converged {
        return Err(CmdError::Numerical(format!(
            "did not reach residual {:.1e} in {} iterations (final {:.3e})",
            args.tol_res, args.max_iters, sol.report.residual_inf
        )));
    }
    Ok(Outcome { passed, summary })
}

impl CmdError {
    fn from_solver_io(e: SolverError) -> CmdError {
        CmdError::Numerical(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// rigidity

fn run_rigidity(args: RigidityArgs, echo: Value, emitter: &Emitter) -> Result<Outcome, CmdError> {
    let op = match &args.y {
        Some(y) => OperatorSpec::from_roots(2, args.k, y.clone())?,
        None => OperatorSpec::from_coeffs(2, args.k, args.a.clone())?,
    };
    let condition = parse_condition(args.condition)?;
    let perturbation = if args.amplitude == 0.0 {
        Perturbation::None
    } else {
        Perturbation::Sin { amplitude: args.amplitude, harmonic: args.harmonic }
    };
    let opts = SolveOptions { alphas: Vec::new(), ..SolveOptions::default() };
    let rep = rigidity_experiment(
        &op,
        condition,
        &args.radii,
        &perturbation,
        args.nodes_per_radius,
        &opts,
    )?;

    let mut csv = String::from(
        "radius,h,unknowns,newton_iters,residual_inf,fit_nodes,deviation_max,deviation_rms\n",
    );
    for row in &rep.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.radius,
            row.h,
            row.unknowns,
            row.newton_iters,
            row.residual_inf,
            row.fit_nodes,
            row.deviation_max,
            row.deviation_rms
        ));
    }
    emitter.write_csv(&csv, None)?;

    let devs: Vec<f64> = rep.rows.iter().map(|r| r.deviation_max).collect();
    let passed = if args.amplitude == 0.0 {
        devs.iter().all(|&d| d <= args.dev_gate)
    } else {
        devs.windows(2).all(|w| w[1] <= w[0])
    };
    let data = serde_json::to_value(&rep).expect("report serializes");
    let report = Report::new(check_slug("rigidity"), None, passed, echo.clone(), data);
    emitter.write_json(&report)?;
    if !passed {
        replay_witness(emitter, "rigidity", &echo)?;
    }
    let dev_text = devs.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(", ");
    Ok(Outcome {
        passed,
        summary: format!(
            "c* = {:.6}, unit-disk deviations [{}] {} -- {}",
            rep.c_star,
            dev_text,
            if args.amplitude == 0.0 { "within gate" } else { "expected non-increasing" },
            verdict(passed)
        ),
    })
}
