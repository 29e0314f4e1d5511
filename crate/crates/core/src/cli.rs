//! Command-line front end.

use std::io::{Read, Write};
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::classify::{
    self, classify, ClassifyError, GoodMatrixGroup, Method, MAX_BRUTE_DIMENSION,
};
use crate::cube::{build_cube, export_graph, CubeGraph, CubeKind, ExportFormat, MAX_DIMENSION};
use crate::gf2::BinMatrix;
use crate::route::{self, route_linear, validate_plan_file, PlanFile, ValidationReport};

/// Environment variable overriding the dimension ceiling.
pub const MAX_N_ENV: &str = "FIBROCUBE_MAX_N";
pub const DEFAULT_MAX_N: usize = 24;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "fibrocube",
    version,
    about = "Fibonacci and Lucas cubes: good matrices and permutation routing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format
    #[arg(long, value_enum, default_value_t = OutputFormat::Json, global = true)]
    pub output: OutputFormat,

    /// Write output to a file instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct CubeArgs {
    /// Cube family
    #[arg(long, value_enum)]
    pub kind: KindArg,

    /// Dimension
    #[arg(short = 'n')]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Fibonacci,
    Lucas,
}

impl From<KindArg> for CubeKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Fibonacci => CubeKind::Fibonacci,
            KindArg::Lucas => CubeKind::Lucas,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct EnumArgs {
    #[command(flatten)]
    pub cube: CubeArgs,

    /// Enumerate by scanning every matrix (n <= 5)
    #[arg(long)]
    pub brute: bool,

    /// Worker threads for the scan (0 = all cores)
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the cube graph (JSON, or DOT with --output text)
    Cube(CubeArgs),
    /// Enumerate the good matrices and identify their group
    Classify(EnumArgs),
    /// Build a routing plan for a good matrix
    Route {
        #[command(flatten)]
        cube: CubeArgs,

        /// I, C, shift(k), products with '*', offsets '+E(i,j)'; or @FILE
        #[arg(long)]
        matrix: String,
    },
    /// Check a plan file ('-' for stdin)
    Validate { plan: String },
    /// Print the Cayley table of the good-matrix group
    GroupTable(EnumArgs),
}

/// Result of a command: the text to emit and whether it reports success.
pub struct Outcome {
    pub output: String,
    pub ok: bool,
}

fn max_n() -> Result<usize> {
    match std::env::var(MAX_N_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .with_context(|| format!("{MAX_N_ENV}={v:?} is not an integer"))?;
            Ok(n.min(MAX_DIMENSION))
        }
        Err(_) => Ok(DEFAULT_MAX_N),
    }
}

fn cube_from(args: &CubeArgs) -> Result<CubeGraph> {
    let limit = max_n()?;
    if args.n == 0 || args.n > limit {
        bail!(
            "n = {} outside 1..={limit} (raise with {MAX_N_ENV})",
            args.n
        );
    }
    Ok(build_cube(args.kind.into(), args.n)?)
}

fn group_for(args: &EnumArgs) -> Result<GoodMatrixGroup> {
    let (kind, n) = (args.cube.kind.into(), args.cube.n);
    cube_from(&args.cube)?;
    if args.brute && n > MAX_BRUTE_DIMENSION {
        bail!("--brute supports n <= {MAX_BRUTE_DIMENSION}");
    }
    let brute = Method::Brute { jobs: args.jobs };
    let method = if args.brute { brute } else { Method::Analytic };
    match classify(kind, n, method) {
        Err(ClassifyError::UnsupportedDimension { .. }) if n <= MAX_BRUTE_DIMENSION => {
            Ok(classify(kind, n, brute)?)
        }
        other => Ok(other?),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("output serializes");
    s.push('\n');
    s
}

/// Parses a matrix shorthand for dimension `n`.
///
/// Grammar: `term ('*' term)*` with `term = base ('+' 'E(' i ',' j ')')*`
/// and `base = I | C | shift(k)`; `shift(k)` is `I` with rows cyclically
/// shifted by `k`. A leading `@` reads a file holding either rows of `0`/`1`
/// or matrix JSON.
pub fn parse_matrix_spec(spec: &str, n: usize) -> Result<BinMatrix> {
    if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let m = if text.trim_start().starts_with('{') {
            serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?
        } else {
            BinMatrix::from_text(&text)?
        };
        if m.dimension() != n {
            bail!(
                "matrix in {path} is {0}x{0}, expected {n}x{n}",
                m.dimension()
            );
        }
        return Ok(m);
    }
    let compact: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        bail!("empty matrix spec");
    }
    let mut product = BinMatrix::identity(n);
    for factor in compact.split('*') {
        product = product.mul(&parse_term(factor, n)?)?;
    }
    Ok(product)
}

fn parse_term(term: &str, n: usize) -> Result<BinMatrix> {
    let mut parts = term.split('+');
    let base = parts.next().unwrap_or_default();
    let mut m = match base {
        "I" => BinMatrix::identity(n),
        "C" => BinMatrix::reversal(n),
        _ => {
            let k = call_args(base, "shift")
                .and_then(|a| match a.as_slice() {
                    [k] => Some(*k),
                    _ => None,
                })
                .ok_or_else(|| anyhow!("unknown matrix {base:?}; expected I, C or shift(k)"))?;
            BinMatrix::identity(n).cyclic_row_shift(k % n)
        }
    };
    for offset in parts {
        let (i, j) = call_args(offset, "E")
            .and_then(|a| match a.as_slice() {
                [i, j] => Some((*i, *j)),
                _ => None,
            })
            .ok_or_else(|| anyhow!("bad offset {offset:?}; expected E(i,j)"))?;
        m = m.plus_unit(i, j)?;
    }
    Ok(m)
}

/// `name(a,b,...)` with unsigned integer arguments.
fn call_args(s: &str, name: &str) -> Option<Vec<usize>> {
    let inner = s.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')?;
    inner.split(',').map(|a| a.parse().ok()).collect()
}

fn group_text(g: &GoodMatrixGroup) -> String {
    let mut out = format!(
        "{} n={}: order {}, structure {}\n",
        g.kind, g.n, g.order, g.structure
    );
    for (i, m) in g.elements.iter().enumerate() {
        out.push_str(&format!("\n[{i}]\n{m}\n"));
    }
    out
}

#[derive(Serialize)]
struct TableJson<'a> {
    kind: CubeKind,
    n: usize,
    order: usize,
    structure: classify::GroupStructure,
    cayley: &'a [Vec<usize>],
}

fn table_text(g: &GoodMatrixGroup) -> String {
    let width = g.order.saturating_sub(1).to_string().len();
    let mut out = format!(
        "{} n={}: order {}, structure {}\n",
        g.kind, g.n, g.order, g.structure
    );
    for row in &g.cayley {
        let cells: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

fn plan_text(plan: &PlanFile) -> String {
    let bound = plan
        .declared_bound
        .map_or("none".to_string(), |b| b.to_string());
    let mut out = format!(
        "{} n={}: {} steps (bound {bound})\n",
        plan.kind,
        plan.n,
        plan.steps.len()
    );
    for note in &plan.notes {
        out.push_str(&format!("note: {note}\n"));
    }
    for (k, step) in plan.steps.iter().enumerate() {
        let moves: Vec<String> = step.iter().map(|(s, d)| format!("{s}->{d}")).collect();
        out.push_str(&format!("step {}: {}\n", k + 1, moves.join(" ")));
    }
    out
}

fn report_text(r: &ValidationReport) -> String {
    let mut out = format!(
        "{}: {} steps, bound {}\n",
        if r.valid { "valid" } else { "INVALID" },
        r.steps,
        if r.bound_ok { "ok" } else { "exceeded" }
    );
    for f in &r.failures {
        out.push_str(&format!(
            "step {} vertex {}: {}\n",
            f.step, f.vertex, f.reason
        ));
    }
    out
}

fn read_plan(source: &str) -> Result<PlanFile> {
    let mut text = String::new();
    if source == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .context("reading stdin")?;
    } else {
        text = std::fs::read_to_string(source).with_context(|| format!("reading {source}"))?;
    }
    serde_json::from_str(&text).with_context(|| format!("parsing plan {source}"))
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let text = cli.output == OutputFormat::Text;
    let ok = |output| Ok(Outcome { output, ok: true });
    match &cli.command {
        Command::Cube(args) => {
            let g = cube_from(args)?;
            let format = if text {
                ExportFormat::Dot
            } else {
                ExportFormat::Json
            };
            let mut s = export_graph(&g, format);
            if !s.ends_with('\n') {
                s.push('\n');
            }
            ok(s)
        }
        Command::Classify(args) => {
            let g = group_for(args)?;
            ok(if text { group_text(&g) } else { json(&g) })
        }
        Command::GroupTable(args) => {
            let g = group_for(args)?;
            if text {
                return ok(table_text(&g));
            }
            ok(json(&TableJson {
                kind: g.kind,
                n: g.n,
                order: g.order,
                structure: g.structure,
                cayley: &g.cayley,
            }))
        }
        Command::Route { cube, matrix } => {
            let g = cube_from(cube)?;
            let a = parse_matrix_spec(matrix, cube.n)?;
            let plan = route_linear(&g, &a).map_err(|e| match e {
                route::RouteError::NotGood { witness } => anyhow!(
                    "matrix is not good for the {} cube: {witness} maps to {}",
                    g.kind(),
                    crate::cube::bitstring(a.matvec(witness.bits()), cube.n)
                ),
                other => other.into(),
            })?;
            let file = plan.to_file(&g);
            ok(if text { plan_text(&file) } else { json(&file) })
        }
        Command::Validate { plan } => {
            let file = read_plan(plan)?;
            let report = validate_plan_file(&file);
            let output = if text {
                report_text(&report)
            } else {
                json(&report)
            };
            Ok(Outcome {
                output,
                ok: report.valid,
            })
        }
    }
}

/// Parses `std::env::args`, runs, writes output, and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli).and_then(|outcome| emit(&cli, &outcome).map(|()| outcome.ok)) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_INVALID,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn emit(cli: &Cli, outcome: &Outcome) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, &outcome.output)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(outcome.output.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}
