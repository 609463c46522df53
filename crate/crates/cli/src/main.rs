//! `logvoa`: axiom checks, coordinate tables, log-differential presentations
//! and coinvariant runs.
//!
//! Exit status: 0 success, 1 usage, 2 truncation-window failure,
//! 3 invariant violation.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use logvoa::blocks::{coinvariant_dims, functoriality_check, propagation_check, BlocksError};
use logvoa::config::{parse_coords_input, parse_config_text, OutputFormat, RunConfig};
use logvoa::coordact::{expand_exponential, solve_exp_coords, CoordError, ExpCoords};
use logvoa::curves::{global_form_basis, restrict_to_disc, CurveError};
use logvoa::exactalg::{format_scalar, parse_scalar};
use logvoa::vacore::{bracket_check, check_axioms, VaError, VaKind};

#[derive(Parser)]
#[command(name = "logvoa", version, about = "Truncated vertex algebras over log curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Run configuration flags; each overrides the same key from `--config`.
#[derive(Args, Clone, Debug, Default)]
struct RunArgs {
    /// TOML configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// nodal | p1
    #[arg(long)]
    curve: Option<String>,
    /// heisenberg | virasoro
    #[arg(long)]
    va: Option<String>,
    /// Central charge as "p/q"
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    /// Comma-separated modules, one per puncture
    #[arg(long)]
    modules: Option<String>,
    /// Number of punctures on p1
    #[arg(long)]
    points: Option<String>,
    /// Truncation order N
    #[arg(long)]
    truncate: Option<String>,
    #[arg(long)]
    max_pole: Option<String>,
    #[arg(long)]
    max_deg: Option<String>,
    /// csv | text
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Budget for sampled checks
    #[arg(long)]
    samples: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the vertex algebra axioms on the truncated window
    Axioms(RunArgs),
    /// Solve a₁,a₂,… for exponential coordinates v₀,v₁,… (or expand back)
    Coords {
        /// Comma-separated coefficients
        #[arg(long, allow_hyphen_values = true)]
        input: String,
        /// Treat the input as v₀,v₁,… and expand to a₁,a₂,…
        #[arg(long)]
        expand: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print the log-differential presentation and restriction tables
    Diff(RunArgs),
    /// Compute coinvariant dimensions degree by degree
    Coinv(RunArgs),
    /// Compare coinvariants before and after adding vacuum insertions
    Propagate {
        /// Number of vacuum insertions to add
        #[arg(long, default_value_t = 1)]
        extra: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compare the symbolic bracket with matrix commutators
    BracketCheck {
        #[arg(long, default_value_t = 30)]
        pairs: usize,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compare coinvariants over the Virasoro(c=1) subalgebra with Heisenberg
    Functoriality(RunArgs),
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Window(String),
    /// Output already written; the run found a violated invariant.
    Invariant(String, String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Window(_) => 2,
            Failure::Invariant(..) => 3,
        }
    }
}

impl From<BlocksError> for Failure {
    fn from(e: BlocksError) -> Self {
        match e {
            BlocksError::Va(VaError::Window { .. }) | BlocksError::Curve(CurveError::TruncationTooSmall { .. }) => {
                Failure::Window(e.to_string())
            }
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn load(run: &RunArgs) -> Result<RunConfig, Failure> {
    let mut pairs = match &run.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            parse_config_text(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => Default::default(),
    };
    let flags = [
        ("curve", &run.curve),
        ("va", &run.va),
        ("c", &run.c),
        ("modules", &run.modules),
        ("points", &run.points),
        ("truncate", &run.truncate),
        ("max_pole", &run.max_pole),
        ("max_deg", &run.max_deg),
        ("format", &run.format),
        ("seed", &run.seed),
        ("samples", &run.samples),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            pairs.insert(k.to_string(), v.clone());
        }
    }
    if pairs.contains_key("c") && !pairs.contains_key("va") {
        pairs.insert("va".into(), "virasoro".into());
    }
    RunConfig::from_pairs(&pairs).map_err(|e| Failure::Usage(e.to_string()))
}

fn header(cfg: &RunConfig, extra: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in cfg.to_pairs() {
        let _ = writeln!(s, "# {k} = {v}");
    }
    for (k, v) in extra {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s
}

/// A table in the configured format with the configuration embedded:
/// leading `#` lines for text, trailing ones for CSV so the header is first.
fn table(cfg: &RunConfig, extra: &[(&str, String)], head: &[&str], rows: &[Vec<String>]) -> String {
    let meta = header(cfg, extra);
    match cfg.format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(head).expect("in-memory write");
            for r in rows {
                w.write_record(r).expect("in-memory write");
            }
            let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
            body + &meta
        }
        OutputFormat::Text => {
            let widths: Vec<usize> = (0..head.len())
                .map(|i| rows.iter().map(|r| r[i].len()).chain([head[i].len()]).max().unwrap_or(0))
                .collect();
            let line = |cells: Vec<&str>| {
                cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string() + "\n"
            };
            let mut s = meta + &line(head.to_vec());
            for r in rows {
                s += &line(r.iter().map(String::as_str).collect());
            }
            s
        }
    }
}

fn axioms(run: &RunArgs) -> Result<String, Failure> {
    let cfg = load(run)?;
    let report = check_axioms(&cfg.vertex_algebra(), cfg.samples, cfg.seed);
    let out = match cfg.format {
        OutputFormat::Text => header(&cfg, &[]) + &report.render(),
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> =
                report.checks.iter().map(|c| vec![c.axiom.to_string(), c.identity.clone(), c.passed.to_string()]).collect();
            table(&cfg, &[], &["axiom", "identity", "passed"], &rows)
        }
    };
    if report.all_passed() {
        Ok(out)
    } else {
        Err(Failure::Invariant(out, format!("{} axiom identities fail", report.failures().count())))
    }
}

fn coords(input: &str, expand: bool, run: &RunArgs) -> Result<String, Failure> {
    let cfg = load(run)?;
    let (a, v) = if expand {
        let values = input
            .split(',')
            .map(parse_scalar)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::Usage(format!("--input: {e}")))?;
        let c = ExpCoords::new(values).map_err(|e: CoordError| Failure::Usage(e.to_string()))?;
        (expand_exponential(&c), c)
    } else {
        let f = parse_coords_input(input).map_err(|e| Failure::Usage(format!("--input: {e}")))?;
        let c = solve_exp_coords(&f);
        (f, c)
    };
    let rows: Vec<Vec<String>> = a
        .coefficients()
        .iter()
        .enumerate()
        .map(|(i, ai)| vec![(i + 1).to_string(), format_scalar(ai), format_scalar(&v.v(i))])
        .collect();
    let extra = [("input", input.to_string()), ("direction", if expand { "expand" } else { "solve" }.to_string())];
    let out = table(&cfg, &extra, &["k", "a_k", "v_(k-1)"], &rows);
    if expand_exponential(&v) != a || solve_exp_coords(&a) != v {
        return Err(Failure::Invariant(out, "solve and expand do not round-trip".into()));
    }
    Ok(out)
}

fn diff(run: &RunArgs) -> Result<String, Failure> {
    let cfg = load(run)?;
    let (curve, _) = cfg.insertions().map_err(|e| Failure::Usage(e.to_string()))?;
    let n = cfg.truncation as i64;
    let b = cfg.bounds();
    let mut rows = Vec::new();
    for form in global_form_basis(&curve, b.max_pole, b.max_deg) {
        for p in &curve.punctures {
            let r = restrict_to_disc(&form, p, n).map_err(|e| Failure::from(BlocksError::from(e)))?;
            rows.push(vec![form.to_string(), p.name.clone(), r.series.to_string()]);
        }
    }
    let restrictions = table(&cfg, &[], &["form", "puncture", "restriction (dt basis)"], &rows);
    Ok(match (&curve.presentation, cfg.format) {
        (Some(p), OutputFormat::Text) => format!("{restrictions}\n{p}"),
        (None, OutputFormat::Text) => format!("{restrictions}\ntrivial log structure: classical differentials du\n"),
        (_, OutputFormat::Csv) => restrictions,
    })
}

fn coinv(run: &RunArgs) -> Result<String, Failure> {
    let cfg = load(run)?;
    let (curve, modules) = cfg.insertions().map_err(|e| Failure::Usage(e.to_string()))?;
    let va = cfg.vertex_algebra();
    let mut report = coinvariant_dims(&curve, &va, &modules, cfg.truncation, cfg.bounds())?;
    report.config = cfg.to_pairs();
    Ok(match cfg.format {
        OutputFormat::Csv => report.to_csv(),
        OutputFormat::Text => report.to_text(),
    })
}

fn propagate(extra: usize, run: &RunArgs) -> Result<String, Failure> {
    let cfg = load(run)?;
    let (curve, _) = cfg.insertions().map_err(|e| Failure::Usage(e.to_string()))?;
    let base = curve.punctures.len();
    let r = propagation_check(curve.kind, base, extra, &cfg.vertex_algebra(), cfg.truncation, cfg.bounds())?;
    let rows: Vec<Vec<String>> = r
        .base
        .rows
        .iter()
        .zip(&r.extended.rows)
        .zip(&r.equal)
        .map(|((a, b), e)| vec![a.degree.to_string(), a.quotient_dim.to_string(), b.quotient_dim.to_string(), e.to_string()])
        .collect();
    let meta = [
        ("base_insertions", base.to_string()),
        ("extended_insertions", (base + extra).to_string()),
        ("hypothesis_applies", r.hypothesis_applies.to_string()),
    ];
    let out = table(&cfg, &meta, &["degree", "base_dim", "extended_dim", "equal"], &rows);
    if r.hypothesis_applies && !r.all_equal() {
        return Err(Failure::Invariant(out, "propagation of vacua fails".into()));
    }
    Ok(out)
}

fn brackets(pairs: usize, max_degree: usize, run: &RunArgs) -> Result<String, Failure> {
    let cfg = load(run)?;
    if max_degree > cfg.truncation {
        return Err(Failure::Window(format!(
            "bracket-check on degree {max_degree} needs truncation at least {max_degree}, have {}",
            cfg.truncation
        )));
    }
    let r = bracket_check(&cfg.vertex_algebra(), pairs, max_degree, cfg.seed);
    let meta = [("pairs", pairs.to_string()), ("max_degree", max_degree.to_string())];
    let rows = vec![vec![r.pairs.to_string(), r.comparisons.to_string(), r.mismatches.len().to_string()]];
    let mut out = table(&cfg, &meta, &["pairs", "comparisons", "mismatches"], &rows);
    if cfg.format == OutputFormat::Text {
        for m in &r.mismatches {
            let _ = writeln!(out, "mismatch: {m}");
        }
    }
    if r.mismatches.is_empty() {
        Ok(out)
    } else {
        Err(Failure::Invariant(out, format!("{} bracket mismatches", r.mismatches.len())))
    }
}

fn functoriality(run: &RunArgs) -> Result<String, Failure> {
    let cfg = load(run)?;
    if cfg.algebra != VaKind::Heisenberg {
        return Err(Failure::Usage("functoriality compares heisenberg with its Virasoro(c=1) subalgebra; use --va heisenberg".into()));
    }
    let (curve, _) = cfg.insertions().map_err(|e| Failure::Usage(e.to_string()))?;
    let r = functoriality_check(&curve, cfg.truncation, cfg.bounds())?;
    let rows: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|x| vec![x.degree.to_string(), x.dim_sub.to_string(), x.dim_big.to_string(), x.holds.to_string()])
        .collect();
    let meta = [("sub_algebra", "virasoro(c=1) generated by omega".to_string())];
    let out = table(&cfg, &meta, &["degree", "dim_sub", "dim_big", "holds"], &rows);
    if r.holds() {
        Ok(out)
    } else {
        Err(Failure::Invariant(out, "dim over the subalgebra is smaller than over heisenberg".into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Axioms(run) => axioms(run),
        Command::Coords { input, expand, run } => coords(input, *expand, run),
        Command::Diff(run) => diff(run),
        Command::Coinv(run) => coinv(run),
        Command::Propagate { extra, run } => propagate(*extra, run),
        Command::BracketCheck { pairs, max_degree, run } => brackets(*pairs, *max_degree, run),
        Command::Functoriality(run) => functoriality(run),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            match &f {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Window(msg) => eprintln!("truncation window exceeded: {msg}"),
                Failure::Invariant(out, msg) => {
                    print!("{out}");
                    eprintln!("invariant violated: {msg}");
                }
            }
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;
    use logvoa::curves::CurveKind;

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "curve = \"p1\"\ntruncate = 5\nseed = 4\n").unwrap();
        let run = RunArgs {
            config: Some(path),
            truncate: Some("3".into()),
            ..Default::default()
        };
        let cfg = load(&run).unwrap();
        assert_eq!(cfg.curve, CurveKind::ProjectiveLine);
        assert_eq!(cfg.truncation, 3);
        assert_eq!(cfg.seed, 4);
    }

    #[test]
    fn c_implies_virasoro() {
        let run = RunArgs {
            c: Some("1/2".into()),
            ..Default::default()
        };
        assert!(matches!(load(&run).unwrap().algebra, VaKind::Virasoro(_)));
    }
}
