//! Command-line front end.

mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, ValueEnum};

pub use report::{report_table, ReportColumn, RunReport, SizeTuple};

use crate::criteria::{measure_all, ClusterRestriction, CriterionKind};
use crate::criteria_spec::{parse_criteria, CriterionSpec};
use crate::cudf::{
    build_cluster_index, parse_cudf, reduced_sources, serialize_solution, write_cudf, Request,
    Universe,
};
use crate::formats::{emit_lp, emit_opb, ObjectiveSelection};
use crate::gen::{random_instance, GenParams};
use crate::milp::{assemble, EncodeError, LinearProgram};
use crate::sat::{build_formula, emit_wcnf};
use crate::solver::{solve_lex, verify, SolveBudget, SolveStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Solve and print the solution.
    Solve,
    /// Write problem files to the output directory.
    Emit,
    /// Print the instance itself as CUDF (useful with --seed).
    Cudf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Lp,
    Opb,
    Wcnf,
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "srcalign",
    version,
    about = "Optimize CUDF upgrades for source alignment"
)]
pub struct Args {
    /// CUDF document to read.
    #[arg(long, required_unless_present = "seed", conflicts_with = "seed")]
    pub input: Option<PathBuf>,
    /// Comma-separated criteria, e.g. "-removed,-unaligned(packages)".
    #[arg(long, default_value = "-removed", allow_hyphen_values = true)]
    pub criteria: String,
    #[arg(long, value_enum, default_value_t = Mode::Solve)]
    pub mode: Mode,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Lp, Format::Opb, Format::Wcnf])]
    pub emit: Vec<Format>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 10_000_000)]
    pub budget_nodes: u64,
    #[arg(long, default_value_t = 60.0)]
    pub budget_seconds: f64,
    /// Print a timing and alignment table after the solution.
    #[arg(long)]
    pub report: bool,
    /// Use a generated instance instead of --input.
    #[arg(long)]
    pub seed: Option<u64>,
}

struct Failure(i32, String);

impl From<EncodeError> for Failure {
    fn from(e: EncodeError) -> Self {
        match e {
            EncodeError::EmptyExpansion { .. } => Failure(EXIT_INFEASIBLE, e.to_string()),
            _ => Failure(EXIT_INPUT, e.to_string()),
        }
    }
}

fn load(args: &Args) -> Result<(String, Universe, Request), Failure> {
    match (&args.input, args.seed) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))?;
            let (u, req) = parse_cudf(&text)
                .map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))?;
            let id = path
                .file_stem()
                .map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned());
            Ok((id, u, req))
        }
        (None, Some(seed)) => {
            let (u, req) = random_instance(seed, &GenParams::default());
            Ok((format!("seed{seed}"), u, req))
        }
        (None, None) => Err(Failure(EXIT_INPUT, "no input given".into())),
    }
}

fn budget(args: &Args) -> Result<SolveBudget, Failure> {
    let secs = Duration::try_from_secs_f64(args.budget_seconds).ok();
    secs.and_then(|t| SolveBudget::new(args.budget_nodes, t))
        .ok_or_else(|| Failure(EXIT_INPUT, "budget must be positive".into()))
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn emit(
    args: &Args,
    u: &Universe,
    req: &Request,
    spec: &CriterionSpec,
    lp: &LinearProgram,
) -> Result<(), Failure> {
    let dir = &args.out_dir;
    fs::create_dir_all(dir).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", dir.display())))?;
    let wants = |f| args.emit.contains(&f);
    if wants(Format::Lp) {
        write_file(
            dir,
            "problem.lp",
            &emit_lp(lp, ObjectiveSelection::LexMerge)?,
        )?;
    }
    if wants(Format::Opb) {
        write_file(
            dir,
            "problem.opb",
            &emit_opb(lp, ObjectiveSelection::LexMerge)?,
        )?;
    }
    if wants(Format::Lp) || wants(Format::Opb) {
        write_file(dir, "problem.map", &lp.name_map())?;
    }
    if wants(Format::Wcnf) {
        let idx = build_cluster_index(u);
        let reduced = reduced_sources(&idx);
        let mut written = false;
        for (k, c) in spec.items().iter().enumerate() {
            if !matches!(
                c.kind,
                CriterionKind::UnalignedPackages | CriterionKind::UnalignedPairs
            ) {
                continue;
            }
            let sources = reduced
                .iter()
                .filter(|s| c.restriction.admits(s))
                .cloned()
                .collect();
            let f = build_formula(u, req, &idx, Some(c.kind), &sources, lp)?;
            write_file(dir, &format!("problem.{}.wcnf", k + 1), &emit_wcnf(&f))?;
            written = true;
        }
        if !written {
            let f = build_formula(u, req, &idx, None, &Default::default(), lp)?;
            write_file(dir, "problem.wcnf", &emit_wcnf(&f))?;
        }
    }
    Ok(())
}

fn solve(
    args: &Args,
    id: String,
    u: &Universe,
    req: &Request,
    spec: &CriterionSpec,
    lp: &LinearProgram,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let result = solve_lex(lp, budget(args)?).map_err(|e| Failure(EXIT_INPUT, e.to_string()))?;
    match result.status {
        SolveStatus::Infeasible => {
            let _ = out.write_all(serialize_solution(u, None).as_bytes());
            return Ok(EXIT_INFEASIBLE);
        }
        SolveStatus::BudgetExceeded => {
            return Err(Failure(
                EXIT_BUDGET,
                format!("budget exceeded after {} nodes", result.nodes),
            ));
        }
        SolveStatus::Optimal => {}
    }
    let s = result
        .installation
        .expect("optimal result has an installation");
    let (ok, violations) = verify(u, req, &s);
    if !ok {
        let text: Vec<String> = violations.iter().map(|v| v.describe(u)).collect();
        return Err(Failure(
            EXIT_INPUT,
            format!("solution failed verification: {}", text.join("; ")),
        ));
    }
    let _ = out.write_all(serialize_solution(u, Some(&s)).as_bytes());
    if args.report {
        let idx = build_cluster_index(u);
        let measures = measure_all(
            u,
            &u.initial_installation(),
            &s,
            &idx,
            &ClusterRestriction::all(),
        )
        .alignment();
        let report = RunReport {
            id,
            size: SizeTuple::of(&idx),
            columns: vec![ReportColumn {
                label: spec.to_string(),
                elapsed: result.elapsed,
                measures,
            }],
        };
        let _ = writeln!(out);
        let _ = out.write_all(report_table(&[report]).as_bytes());
    }
    Ok(EXIT_OK)
}

fn execute(args: &Args, out: &mut dyn Write) -> Result<i32, Failure> {
    let (id, u, req) = load(args)?;
    if args.mode == Mode::Cudf {
        let _ = out.write_all(write_cudf(&u, &req).as_bytes());
        return Ok(EXIT_OK);
    }
    let spec = parse_criteria(&args.criteria)
        .map_err(|e| Failure(EXIT_INPUT, format!("criteria: {e}")))?;
    let lp = match assemble(&u, &req, &spec) {
        Ok(lp) => lp,
        Err(e @ EncodeError::EmptyExpansion { .. }) if args.mode == Mode::Solve => {
            let _ = out.write_all(serialize_solution(&u, None).as_bytes());
            return Err(Failure(EXIT_INFEASIBLE, e.to_string()));
        }
        Err(e) => return Err(e.into()),
    };
    match args.mode {
        Mode::Solve => solve(args, id, &u, &req, &spec, &lp, out),
        Mode::Emit => emit(args, &u, &req, &spec, &lp).map(|()| EXIT_OK),
        Mode::Cudf => unreachable!(),
    }
}

/// Runs one invocation. Results go to `out`, diagnostics to `err`.
pub fn run(args: &Args, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(args, out) {
        Ok(code) => code,
        Err(Failure(code, message)) => {
            let _ = writeln!(err, "srcalign: {message}");
            code
        }
    }
}

/// Entry point for the binary: parses the process arguments and runs.
pub fn main_exit() -> u8 {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INPUT as u8
            } else {
                EXIT_OK as u8
            };
        }
    };
    let code = run(
        &args,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    code as u8
}
