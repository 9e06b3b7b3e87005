//! Command-line front end.
//!
//! Exit status is 0 on success, 1 for invalid input or failed checks, and 2
//! when the fixed-point iteration does not converge.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::experiments::{
    appendix_nested_generator, appendix_problem, regularity_check, run_appendix_example,
    run_table1, write_table1_csv, MonteCarloConfig, RegularityReport, Table1Report,
};
use crate::generator::{check_generator, Generator};
use crate::primitives::{validate_simplex, FiniteChoiceProblem, ValuationVector};
use crate::ri::{check_dominance_exclusion, solve_fixed_point, GeriSolution, SolverConfig};

#[derive(Debug, Parser)]
#[command(
    name = "geri",
    version,
    about = "Generalized entropy rational inattention solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Fixed-point tolerance (sup norm).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Fixed-point iteration cap.
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,

    /// Output file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker thread cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the model in a JSON file and write the solution as JSON.
    Solve { model: PathBuf },
    /// Monte Carlo comparison of logit and nested logit on five uniform options.
    Table1 {
        /// Nest parameter for nests {1,2,3} and {4,5}; 1 is multinomial logit.
        /// Repeat to print panels side by side.
        #[arg(long, required = true, num_args = 1..)]
        zeta: Vec<f64>,
        #[arg(long = "n-states", default_value_t = 10_000)]
        n_states: usize,
        #[arg(long, default_value_t = 10)]
        replications: usize,
        /// Solve the sampled prior as drawn, without closing it under symmetries.
        #[arg(long)]
        no_symmetrize: bool,
    },
    /// Four-option example with a regularity violation.
    Appendix {
        /// shannon, nested or both.
        #[arg(long, default_value = "both")]
        generator: String,
    },
    /// Check generator identities and consideration-set exclusion.
    Verify {
        /// "shannon", a JSON generator spec, or a path to one.
        #[arg(long)]
        generator: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::NoConvergence { .. }) {
            2
        } else {
            1
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

pub fn run() -> ExitCode {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    match cli.threads {
        Some(0) => Err(Failure::input("--threads must be positive")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::input(format!("thread pool: {e}")))?;
            pool.install(|| execute(cli))
        }
        None => execute(cli),
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Solve { model } => cmd_solve(cli, model),
        Command::Table1 {
            zeta,
            n_states,
            replications,
            no_symmetrize,
        } => cmd_table1(cli, zeta, *n_states, *replications, !no_symmetrize),
        Command::Appendix { generator } => cmd_appendix(cli, generator),
        Command::Verify { generator, trials } => cmd_verify(cli, generator, *trials),
    }
}

fn solver_config(cli: &Cli, base: SolverConfig) -> CliResult<SolverConfig> {
    let mut cfg = base;
    if let Some(t) = cli.tol {
        cfg.tolerance = t;
    }
    if let Some(m) = cli.max_iter {
        cfg.max_iterations = m;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

/// JSON model description accepted by `geri solve`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub generator: Generator,
    pub states: Vec<ValuationVector>,
    /// Equal weights when absent.
    #[serde(default)]
    pub prior: Option<Vec<f64>>,
    #[serde(default)]
    pub solver: Option<SolverConfig>,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            format!("{path}: {}", e.into_inner())
        })
    }

    /// Validated problem, with errors naming the offending field.
    pub fn problem(&self) -> Result<FiniteChoiceProblem, String> {
        let m = self.states.len();
        if m == 0 {
            return Err("states: at least one state is required".into());
        }
        let n = self.states[0].len();
        if let Some(k) = self.states.iter().position(|s| s.len() != n) {
            return Err(format!(
                "states[{k}]: has {} entries, states[0] has {n}",
                self.states[k].len()
            ));
        }
        let prior = match &self.prior {
            Some(p) if p.len() != m => {
                return Err(format!("prior: has {} entries for {m} states", p.len()));
            }
            Some(p) => validate_simplex(p).map_err(|e| format!("prior: {e}"))?,
            None => crate::primitives::ProbabilityVector::uniform(m),
        };
        self.generator
            .check_dimension(n)
            .map_err(|e| format!("generator: {e}"))?;
        FiniteChoiceProblem::new(self.states.clone(), prior.as_slice())
            .map_err(|e| format!("states: {e}"))
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    converged: bool,
    #[serde(flatten)]
    solution: &'a GeriSolution,
}

fn cmd_solve(cli: &Cli, model: &Path) -> CliResult<()> {
    let text = fs::read_to_string(model)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", model.display())))?;
    let file = ModelFile::parse(&text).map_err(Failure::input)?;
    let problem = file.problem().map_err(Failure::input)?;
    let cfg = solver_config(cli, file.solver.clone().unwrap_or_default())?;
    match solve_fixed_point(&file.generator, &problem, &cfg) {
        Ok(solution) => emit(
            cli.out.as_deref(),
            &to_json(&SolveOutput {
                converged: true,
                solution: &solution,
            }),
        ),
        Err(Error::NoConvergence {
            iterations,
            residual,
            partial,
        }) => {
            emit(
                cli.out.as_deref(),
                &to_json(&SolveOutput {
                    converged: false,
                    solution: &partial,
                }),
            )?;
            Err(Failure {
                code: 2,
                message: format!(
                    "no convergence after {iterations} iterations (residual {residual:e})"
                ),
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_table1(
    cli: &Cli,
    zetas: &[f64],
    n_states: usize,
    replications: usize,
    symmetrize: bool,
) -> CliResult<()> {
    if let Some(z) = zetas.iter().find(|z| !(**z > 0.0 && **z <= 1.0)) {
        return Err(Failure::input(format!("--zeta {z} outside (0, 1]")));
    }
    if n_states == 0 {
        return Err(Failure::input("--n-states must be positive"));
    }
    if replications == 0 {
        return Err(Failure::input("--replications must be positive"));
    }
    let seed = cli.seed.unwrap_or(42);
    let solver = solver_config(cli, SolverConfig::default())?;
    let mut reports = Vec::with_capacity(zetas.len());
    for &zeta in zetas {
        let mut config = MonteCarloConfig::table1(zeta, seed)?;
        config.n_states = n_states;
        config.n_replications = replications;
        config.solver = solver.clone();
        config.symmetrize = symmetrize;
        reports.push(run_table1(&config)?);
    }
    if let Some(out) = &cli.out {
        for (zeta, report) in zetas.iter().zip(&reports) {
            let path = if zetas.len() == 1 {
                out.clone()
            } else {
                suffixed(out, *zeta)
            };
            let file = fs::File::create(&path)
                .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
            write_table1_csv(report, file)?;
        }
    }
    print!("{}", table1_panels(zetas, &reports));
    Ok(())
}

/// `out.csv` with ζ = 0.5 becomes `out_zeta0.5.csv`.
fn suffixed(path: &Path, zeta: f64) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_zeta{zeta}.{}", ext.to_string_lossy()),
        None => format!("{stem}_zeta{zeta}"),
    };
    path.with_file_name(name)
}

fn table1_panels(zetas: &[f64], reports: &[Table1Report]) -> String {
    let mut s = String::new();
    let r0 = &reports[0];
    let _ = writeln!(
        s,
        "n_states = {}, replications = {}, seed = {}",
        r0.n_states,
        r0.replications.len(),
        r0.seed
    );
    let _ = write!(s, "{:<10}", "");
    for z in zetas {
        let _ = write!(s, "  {:^26}", format!("zeta = {z}"));
    }
    let _ = write!(s, "\n{:<10}", "option");
    for _ in zetas {
        let _ = write!(s, "  {:>8}{:>9}{:>9}", "avg", "median", "std");
    }
    s.push('\n');
    for i in 0..r0.summary.avg.len() {
        let _ = write!(s, "{:<10}", i + 1);
        for r in reports {
            let m = &r.summary;
            let _ = write!(
                s,
                "  {:>8.3}{:>9.3}{:>9.3}",
                m.avg[i], m.median[i], m.std[i]
            );
        }
        s.push('\n');
    }
    let _ = write!(s, "{:<10}", "efficiency");
    for r in reports {
        let _ = write!(
            s,
            "  {:>8.3}{:>18}",
            r.summary.efficiency,
            format!("(se {:.4})", r.standard_errors.efficiency)
        );
    }
    s.push('\n');
    s
}

#[derive(Serialize)]
struct AppendixRun {
    generator: String,
    small: GeriSolution,
    full: GeriSolution,
    regularity: RegularityReport,
}

fn cmd_appendix(cli: &Cli, which: &str) -> CliResult<()> {
    let generators: Vec<(&str, Generator)> = match which {
        "shannon" => vec![("shannon", Generator::Shannon)],
        "nested" => vec![("nested", appendix_nested_generator())],
        "both" => vec![
            ("shannon", Generator::Shannon),
            ("nested", appendix_nested_generator()),
        ],
        other => {
            return Err(Failure::input(format!(
                "--generator {other}: expected shannon, nested or both"
            )))
        }
    };
    let solver = solver_config(cli, SolverConfig::default())?;
    let problem = appendix_problem();
    let mut text = String::from("state  ");
    for i in 1..=4 {
        let _ = write!(text, "{:>6}", format!("v{i}"));
    }
    text.push('\n');
    for (m, v) in problem.states().iter().enumerate() {
        let _ = write!(text, "v^{:<5}", m + 1);
        for &x in v.as_slice() {
            let _ = write!(text, "{x:>6}");
        }
        text.push('\n');
    }

    let mut runs = Vec::new();
    for (name, gen) in generators {
        let small = run_appendix_example(&gen, &[0, 1, 2], &solver)?;
        let full = run_appendix_example(&gen, &[0, 1, 2, 3], &solver)?;
        let regularity = regularity_check(&small, &full)?;
        let _ = writeln!(text, "\n{name}");
        for (label, sol) in [("{1,2,3}", &small), ("{1,2,3,4}", &full)] {
            let p0: Vec<String> = sol
                .p0
                .as_slice()
                .iter()
                .map(|x| format!("{x:.4}"))
                .collect();
            let cs: Vec<String> = sol
                .consideration_set
                .iter()
                .map(|i| (i + 1).to_string())
                .collect();
            let _ = writeln!(
                text,
                "  {label:<10} p0 = ({})  considered = {{{}}}  objective = {:.4}  info cost = {:.4}",
                p0.join(", "),
                cs.join(","),
                sol.objective,
                sol.info_cost
            );
        }
        for inc in &regularity.increases {
            let _ = writeln!(
                text,
                "  regularity fails: option {} rises {:.4} -> {:.4} (+{:.4})",
                inc.option + 1,
                inc.before,
                inc.after,
                inc.increase
            );
        }
        runs.push(AppendixRun {
            generator: name.to_string(),
            small,
            full,
            regularity,
        });
    }
    if let Some(out) = &cli.out {
        emit(Some(out), &to_json(&runs))?;
    }
    print!("{text}");
    Ok(())
}

fn parse_generator(arg: &str) -> CliResult<Generator> {
    let text = match arg.trim() {
        "shannon" => return Ok(Generator::Shannon),
        t if t.starts_with('{') => t.to_string(),
        path => fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("cannot read {path}: {e}")))?,
    };
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| Failure::input(format!("generator: {}", e.into_inner())))
}

/// Random problem in which option `planted` is weakly worst everywhere or,
/// under Shannon, dominated by a single other option.
fn planted_problem(rng: &mut ChaCha8Rng, n: usize, shannon: bool) -> (FiniteChoiceProblem, usize) {
    let m = rng.random_range(2..=6);
    let planted = rng.random_range(0..n);
    let pairwise = shannon && n > 2 && rng.random_bool(0.5);
    let by = (planted + rng.random_range(1..n)) % n;
    let states = (0..m)
        .map(|_| {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let gap = rng.random_range(0.05..0.5);
            v[planted] = if pairwise {
                v[by] - gap
            } else {
                (0..n)
                    .filter(|&i| i != planted)
                    .map(|i| v[i])
                    .fold(f64::INFINITY, f64::min)
                    - gap
            };
            ValuationVector::new(v).expect("finite payoffs")
        })
        .collect();
    let weights: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let prior: Vec<f64> = weights.iter().map(|w| w / total).collect();
    (
        FiniteChoiceProblem::new(states, &prior).expect("valid problem"),
        planted,
    )
}

fn cmd_verify(cli: &Cli, arg: &str, trials: usize) -> CliResult<()> {
    if trials == 0 {
        return Err(Failure::input("--trials must be positive"));
    }
    let gen = parse_generator(arg)?;
    let seed = cli.seed.unwrap_or(0);
    let solver = solver_config(cli, SolverConfig::default())?;
    let report = check_generator(&gen, trials, seed);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let shannon = matches!(gen, Generator::Shannon);
    let (mut residual, mut kappa, mut excluded_mass, mut other) = (0.0f64, 0.0f64, 0.0f64, 0usize);
    let mut notes = Vec::new();
    for t in 0..trials {
        let n = gen.n_options().unwrap_or_else(|| rng.random_range(2..=6));
        let (problem, planted) = planted_problem(&mut rng, n, shannon);
        let sol = match solve_fixed_point(&gen, &problem, &solver) {
            Ok(s) => s,
            Err(e) => {
                other += 1;
                notes.push(format!("trial {t}: {e}"));
                continue;
            }
        };
        residual = residual.max(sol.residual);
        kappa = kappa.max(-sol.info_cost);
        let dom = check_dominance_exclusion(&sol, &problem, &gen);
        if !dom.excluded.contains(&planted) {
            other += 1;
            notes.push(format!(
                "trial {t}: planted option {planted} not recognised as excluded"
            ));
        }
        for &i in &dom.excluded {
            excluded_mass = excluded_mass.max(sol.p0[i]);
        }
        let bad = sol.invariant_violations(&problem, solver.tolerance);
        other += bad.len();
        notes.extend(bad.into_iter().map(|b| format!("trial {t}: {b}")));
    }

    let mut rows: Vec<(String, f64, f64)> = report
        .checks
        .iter()
        .map(|c| (c.name.to_string(), c.max_violation, c.tolerance))
        .collect();
    rows.push(("fixed_point_residual".into(), residual, solver.tolerance));
    rows.push(("information_cost_nonnegative".into(), kappa, 1e-12));
    rows.push(("dominated_option_excluded".into(), excluded_mass, 0.0));
    rows.push(("solution_invariants".into(), other as f64, 0.0));

    let mut text = format!("{} trials, seed {seed}\n", trials);
    let mut all = true;
    for (name, violation, tolerance) in &rows {
        let ok = *violation <= *tolerance;
        all &= ok;
        let _ = writeln!(
            text,
            "{name:<30} max_violation = {violation:<12.3e} tolerance = {tolerance:<8.1e} {}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
    for note in notes.iter().take(20) {
        let _ = writeln!(text, "  {note}");
    }
    emit(cli.out.as_deref(), &text)?;
    if all {
        Ok(())
    } else {
        Err(Failure::input("verification failed"))
    }
}
