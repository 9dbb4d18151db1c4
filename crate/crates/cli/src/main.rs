//! `codedmv`: design, bound, verify, simulate and decode task assignments.

mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use codedmv::bounds::{bound_report, is_reference_construction};
use codedmv::oracle::{verify, DEFAULT_BUDGET};
use codedmv::schemes::{cyclic_coded_with, CodedSupport};
use codedmv::sim::experiment::{write_records_csv, write_summaries_csv, ExperimentConfig};
use codedmv::sim::matrix_io::{load_matrix, read_vector, write_vector};
use codedmv::sim::numeric::{numeric_decode, worker_products, BlockLayout};
use codedmv::{
    cyclic_uncoded, mds_plan, AssignmentPlan, BoundReport, Error, Placement, StateVector,
    SystemParams,
};

const EXIT_INPUT: u8 = 1;
const EXIT_MISMATCH: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(
    name = "codedmv",
    version,
    about = "Straggler-tolerant task assignment for distributed matrix-vector products"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the machine-readable result here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Machine-readable format; printed to stdout when no --out is given.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Random seed (simulate).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Largest state lattice the brute-force oracle may search.
    #[arg(long, global = true, env = "CODEDMV_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Build a plan and print its task grid.
    Design(DesignArgs),
    /// Closed-form thresholds and resilience for a plan or parameter set.
    Bounds(BoundsArgs),
    /// Brute-force threshold and resilience, checked against the formulas.
    Verify(VerifyArgs),
    /// Run a simulated experiment from a JSON config.
    Simulate(SimulateArgs),
    /// Reconstruct A x from the products a state delivers.
    Decode(DecodeArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scheme {
    CyclicUncoded,
    CyclicCodedBottom,
    CyclicCodedTop,
    Mds,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Support {
    Full,
    Masked,
}

#[derive(Args)]
struct DesignArgs {
    #[arg(value_enum)]
    scheme: Scheme,
    #[arg(long)]
    n: usize,
    /// Replication factor (cyclic-uncoded).
    #[arg(long)]
    r: Option<usize>,
    /// Uncoded replication factor (cyclic-coded-*).
    #[arg(long = "r-u", alias = "r_u")]
    r_u: Option<usize>,
    /// Coded rows per worker (cyclic-coded-*).
    #[arg(long = "ell-c", alias = "ell_c")]
    ell_c: Option<usize>,
    /// Rows per worker (mds).
    #[arg(long)]
    ell: Option<usize>,
    /// Number of blocks (mds).
    #[arg(long)]
    delta: Option<usize>,
    /// Coded row support; top placement defaults to full, bottom to masked.
    #[arg(long, value_enum)]
    support: Option<Support>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlacementArg {
    Uncoded,
    CodedBottom,
    CodedTop,
    FullyCoded,
}

impl From<PlacementArg> for Placement {
    fn from(p: PlacementArg) -> Self {
        match p {
            PlacementArg::Uncoded => Placement::UncodedOnly,
            PlacementArg::CodedBottom => Placement::CodedBottom,
            PlacementArg::CodedTop => Placement::CodedTop,
            PlacementArg::FullyCoded => Placement::FullyCoded,
        }
    }
}

#[derive(Args)]
struct BoundsArgs {
    /// Plan JSON; otherwise the parameters below are used.
    #[arg(long, conflicts_with_all = ["n", "delta", "ell_u", "ell_c", "r_u", "placement"])]
    plan: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    delta: Option<usize>,
    #[arg(long = "ell-u", alias = "ell_u")]
    ell_u: Option<usize>,
    #[arg(long = "ell-c", alias = "ell_c", default_value_t = 0)]
    ell_c: usize,
    #[arg(long = "r-u", alias = "r_u")]
    r_u: Option<usize>,
    #[arg(long, value_enum, default_value = "uncoded")]
    placement: PlacementArg,
}

#[derive(Args)]
struct VerifyArgs {
    /// Plan JSON.
    plan: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment config JSON.
    config: PathBuf,
    /// Overrides the config's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Also write per-plan summaries as CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    plan: PathBuf,
    /// Matrix Market (.mtx) or headerless CSV.
    #[arg(long)]
    matrix: PathBuf,
    /// Whitespace- or comma-separated entries of x.
    #[arg(long)]
    vector: PathBuf,
    /// Blocks finished per worker, e.g. 2,2,0,1,3.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    state: Vec<usize>,
}

enum Failure {
    Input(String),
    Mismatch(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Design(a) => design(&cli, a),
        Command::Bounds(a) => bounds(&cli, a),
        Command::Verify(a) => verify_cmd(&cli, a),
        Command::Simulate(a) => simulate(&cli, a),
        Command::Decode(a) => decode(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Mismatch(m)) => {
            eprintln!("verification mismatch: {m}");
            ExitCode::from(EXIT_MISMATCH)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_BUDGET)
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Machine output to `--out` (human text to stdout), or to stdout when only
/// `--format` was given.
fn emit(
    cli: &Cli,
    human: &str,
    machine: impl FnOnce(Format) -> Result<Vec<u8>, Failure>,
    default: Format,
) -> Outcome {
    match (&cli.out, cli.format) {
        (Some(path), f) => {
            let bytes = machine(f.unwrap_or(default))?;
            write_file(path, &bytes)?;
            print!("{human}");
        }
        (None, Some(f)) => {
            let bytes = machine(f)?;
            print!("{}", String::from_utf8_lossy(&bytes));
        }
        (None, None) => print!("{human}"),
    }
    Ok(())
}

fn need(v: Option<usize>, flag: &str, scheme: &str) -> Result<usize, Failure> {
    v.ok_or_else(|| Failure::Input(format!("{scheme} requires --{flag}")))
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json value serialises");
    s.push('\n');
    s.into_bytes()
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s.into_bytes()
}

fn read_plan(path: &Path) -> Result<AssignmentPlan, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(AssignmentPlan::from_json(&text)?)
}

fn design(cli: &Cli, a: &DesignArgs) -> Outcome {
    let plan = match a.scheme {
        Scheme::CyclicUncoded => cyclic_uncoded(a.n, need(a.r, "r", "cyclic-uncoded")?)?,
        Scheme::CyclicCodedBottom | Scheme::CyclicCodedTop => {
            let name = if a.scheme == Scheme::CyclicCodedTop {
                "cyclic-coded-top"
            } else {
                "cyclic-coded-bottom"
            };
            let (placement, default) = if a.scheme == Scheme::CyclicCodedTop {
                (Placement::CodedTop, CodedSupport::Full)
            } else {
                (Placement::CodedBottom, CodedSupport::Masked)
            };
            let support = match a.support {
                Some(Support::Full) => CodedSupport::Full,
                Some(Support::Masked) => CodedSupport::Masked,
                None => default,
            };
            cyclic_coded_with(
                a.n,
                need(a.r_u, "r-u", name)?,
                need(a.ell_c, "ell-c", name)?,
                placement,
                support,
            )?
        }
        Scheme::Mds => mds_plan(
            a.n,
            need(a.ell, "ell", "mds")?,
            need(a.delta, "delta", "mds")?,
        )?,
    };
    let human = render::grid(&plan);
    emit(
        cli,
        &human,
        |f| match f {
            Format::Json => {
                let mut s = plan.to_json();
                s.push('\n');
                Ok(s.into_bytes())
            }
            Format::Csv => Err(Failure::Input("design writes plans as json only".into())),
        },
        Format::Json,
    )
}

fn bound_json(p: &SystemParams, b: &BoundReport) -> Value {
    json!({
        "params": p,
        "q_lower": b.q_lower,
        "q_exact": b.q_exact,
        "resilience": b.resilience,
        "witness": b.witness,
    })
}

const BOUND_COLUMNS: [&str; 11] = [
    "placement",
    "n",
    "delta",
    "ell_u",
    "ell_c",
    "r_u",
    "q_lower",
    "q_exact",
    "resilience",
    "witness_x",
    "witness_beta",
];

fn bound_row(p: &SystemParams, b: &BoundReport) -> Vec<String> {
    let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    vec![
        p.placement.to_string(),
        p.n.to_string(),
        p.delta.to_string(),
        p.ell_u.to_string(),
        p.ell_c.to_string(),
        p.r_u.to_string(),
        b.q_lower.to_string(),
        opt(b.q_exact),
        b.resilience.to_string(),
        opt(b.witness.map(|w| w.x)),
        opt(b.witness.map(|w| w.beta)),
    ]
}

fn bounds(cli: &Cli, a: &BoundsArgs) -> Outcome {
    let (params, reference) = match &a.plan {
        Some(path) => {
            let plan = read_plan(path)?;
            (plan.params, Some(is_reference_construction(&plan)))
        }
        None => {
            let n = need(a.n, "n", "bounds")?;
            let placement = Placement::from(a.placement);
            let (ell_u, r_u) = match placement {
                Placement::FullyCoded => (a.ell_u.unwrap_or(0), a.r_u.unwrap_or(0)),
                _ => (
                    need(a.ell_u, "ell-u", "bounds")?,
                    need(a.r_u, "r-u", "bounds")?,
                ),
            };
            let delta = a.delta.unwrap_or(n);
            (
                SystemParams::new(n, delta, ell_u, a.ell_c, r_u, placement)?,
                None,
            )
        }
    };
    let report = bound_report(&params)?;
    emit(
        cli,
        &render::bounds_text(&params, &report, reference),
        |f| {
            Ok(match f {
                Format::Json => json_bytes(&bound_json(&params, &report)),
                Format::Csv => csv_bytes(&BOUND_COLUMNS, &[bound_row(&params, &report)]),
            })
        },
        Format::Json,
    )
}

struct Check {
    name: &'static str,
    claimed: usize,
    observed: usize,
    ok: bool,
}

/// Formula claims that apply to a plan, against the oracle's values.
fn formula_checks(
    placement: Placement,
    reference: bool,
    formula: Option<&BoundReport>,
    q_true: usize,
    resilience_true: usize,
) -> Vec<Check> {
    let Some(b) = formula else {
        return Vec::new();
    };
    let mut checks = Vec::new();
    // The coded-bottom value is only a claim about the cyclic construction.
    if reference || placement != Placement::CodedBottom {
        checks.push(Check {
            name: "q_lower <= q_true",
            claimed: b.q_lower,
            observed: q_true,
            ok: b.q_lower <= q_true,
        });
    }
    if reference {
        if let Some(q) = b.q_exact {
            checks.push(Check {
                name: "q_exact == q_true",
                claimed: q,
                observed: q_true,
                ok: q == q_true,
            });
        }
        checks.push(Check {
            name: "resilience == resilience_true",
            claimed: b.resilience,
            observed: resilience_true,
            ok: b.resilience == resilience_true,
        });
    }
    checks
}

fn verify_cmd(cli: &Cli, a: &VerifyArgs) -> Outcome {
    let plan = read_plan(&a.plan)?;
    let report = verify(&plan, cli.budget)?;
    let reference = is_reference_construction(&plan);
    // Closed forms that do not apply to these parameters are skipped.
    let formula = bound_report(&plan.params).ok();
    let checks = formula_checks(
        plan.params.placement,
        reference,
        formula.as_ref(),
        report.q_true,
        report.resilience_true,
    );
    let consistent = checks.iter().all(|c| c.ok);

    let mut human = render::system_line(&plan.params);
    human.push('\n');
    human.push_str(&format!(
        "Q = {} (worst non-decodable state {}, total {})\n",
        report.q_true,
        report.worst_state,
        report.worst_state.total()
    ));
    human.push_str(&format!(
        "straggler resilience = {} (smallest failing straggler set {})\n",
        report.resilience_true,
        render::one_based(&report.worst_straggler_set)
    ));
    for c in &checks {
        human.push_str(&format!(
            "{:<30} formula {:>4}  oracle {:>4}  {}\n",
            c.name,
            c.claimed,
            c.observed,
            if c.ok { "ok" } else { "MISMATCH" }
        ));
    }
    if checks.is_empty() {
        human.push_str("no closed form applies to this plan\n");
    }

    emit(
        cli,
        &human,
        |f| {
            Ok(match f {
                Format::Json => json_bytes(&json!({
                    "params": plan.params,
                    "reference_construction": reference,
                    "q_true": report.q_true,
                    "worst_state": report.worst_state,
                    "resilience_true": report.resilience_true,
                    "worst_straggler_set": report.worst_straggler_set,
                    "formula": formula.as_ref().map(|b| bound_json(&plan.params, b)),
                    "checks": checks.iter().map(|c| json!({
                        "name": c.name,
                        "claimed": c.claimed,
                        "observed": c.observed,
                        "ok": c.ok,
                    })).collect::<Vec<_>>(),
                    "consistent": consistent,
                })),
                Format::Csv => csv_bytes(
                    &[
                        "placement",
                        "n",
                        "delta",
                        "ell_u",
                        "ell_c",
                        "r_u",
                        "q_true",
                        "resilience_true",
                        "consistent",
                    ],
                    &[vec![
                        plan.params.placement.to_string(),
                        plan.params.n.to_string(),
                        plan.params.delta.to_string(),
                        plan.params.ell_u.to_string(),
                        plan.params.ell_c.to_string(),
                        plan.params.r_u.to_string(),
                        report.q_true.to_string(),
                        report.resilience_true.to_string(),
                        consistent.to_string(),
                    ]],
                ),
            })
        },
        Format::Json,
    )?;
    if consistent {
        Ok(())
    } else {
        let bad: Vec<&str> = checks.iter().filter(|c| !c.ok).map(|c| c.name).collect();
        Err(Failure::Mismatch(bad.join("; ")))
    }
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Outcome {
    let mut exp = ExperimentConfig::load(&a.config)?;
    if let Some(t) = a.trials {
        exp.trials = t;
    }
    if let Some(s) = cli.seed {
        exp.seed = s;
    }
    let res = exp.run()?;
    let mut human = format!(
        "{:<16} {:>7} {:>10} {:>10} {:>10} {:>8}\n",
        "plan", "trials", "mean", "median", "p95", "failed"
    );
    for s in &res.summaries {
        human.push_str(&format!(
            "{:<16} {:>7} {:>10.4} {:>10.4} {:>10.4} {:>8.4}\n",
            s.plan_id, s.trials, s.mean, s.median, s.p95, s.failure_rate
        ));
    }
    if let Some(path) = &a.summary {
        let mut buf = Vec::new();
        write_summaries_csv(&res.summaries, &mut buf)?;
        write_file(path, &buf)?;
    }
    emit(
        cli,
        &human,
        |f| {
            Ok(match f {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_records_csv(&res.records, &mut buf)?;
                    buf
                }
                Format::Json => json_bytes(&json!({
                    "summaries": res.summaries,
                    "records": res.records,
                })),
            })
        },
        Format::Csv,
    )
}

fn decode(cli: &Cli, a: &DecodeArgs) -> Outcome {
    let plan = read_plan(&a.plan)?;
    let matrix = load_matrix(&a.matrix)?.to_dense();
    let file = fs::File::open(&a.vector)
        .map_err(|e| Failure::Input(format!("{}: {e}", a.vector.display())))?;
    let x = read_vector(file)?;
    let state = StateVector::new(a.state.clone());
    let products = worker_products(&plan, &matrix, &x, &state)?;
    let layout = BlockLayout::new(matrix.nrows(), plan.delta())?;
    let y = numeric_decode(&plan, &layout, &products)?;
    let direct = &matrix * &x;
    let err = (&y - &direct).norm() / direct.norm().max(f64::MIN_POSITIVE);
    let human = format!(
        "decoded {} entries from state {} ({} block products); relative error vs direct product {err:.3e}\n",
        y.len(),
        state,
        products.len()
    );
    emit(
        cli,
        &human,
        |f| {
            Ok(match f {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_vector(&y, &mut buf)?;
                    buf
                }
                Format::Json => json_bytes(&json!(y.iter().copied().collect::<Vec<f64>>())),
            })
        },
        Format::Csv,
    )
}
