//! The `mono2ddd` command line. Every stage reads and writes files so the
//! stages can be chained by scripts:
//!
//! ```text
//! mono2ddd decompose --accesses a.json --weights 1,0,0,0 --n 2 -o dec.json
//! mono2ddd sagas     --accesses a.json --decomposition dec.json -o sagas.json
//! mono2ddd to-cml    --accesses a.json --structure s.txt --decomposition dec.json --sagas sagas.json -o model.cml
//! ```
//!
//! Exit status is 0 on success, 1 on bad usage or bad input, and 2 when a
//! produced artifact fails its own consistency check.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cml::{self, CmlDocument};
use crate::dddmap::{generate, NamingHeuristic};
use crate::decompose::{cluster, search_decompositions_with_threads, Decomposition, SimilarityWeights};
use crate::diagrams;
use crate::error::{Error, Result};
use crate::ingest::{parse_accesses, parse_structure, validate_model, ModelWarning, MonolithModel};
use crate::measures::{assess, rank_decompositions, DEFAULT_TOP_K};
use crate::saga::{check_sagas, refactor_all, sagas_from_json, sagas_to_json, stats_tsv, OrchestratorPolicy, Saga};

/// Environment variable capping the worker threads of `search`.
pub const THREADS_ENV: &str = "MONO2DDD_THREADS";

#[derive(Debug, Parser)]
#[command(name = "mono2ddd", version, about = "Monolith access traces to decompositions, sagas and CML")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster entities into a decomposition file.
    Decompose(DecomposeArgs),
    /// Try a grid of weights and cluster counts and keep the best decomposition.
    Search(SearchArgs),
    /// Print cohesion, coupling and complexity per cluster as TSV.
    Assess(AssessArgs),
    /// Refactor functionalities into sagas.
    Sagas(SagasArgs),
    /// Generate the CML model of a decomposition.
    ToCml(ToCmlArgs),
    /// Render a DOT graph or a coordination lane listing.
    Diagram(DiagramArgs),
    /// Check or refactor a CML document.
    #[command(subcommand)]
    Cml(CmlCommand),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Accesses file (JSON).
    #[arg(long)]
    accesses: PathBuf,
    /// Structure file (JSON or structure DSL).
    #[arg(long)]
    structure: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Similarity weights `access,write,read,sequence`, summing to 1.
    #[arg(long, default_value = "1,0,0,0")]
    weights: String,
    /// Number of clusters.
    #[arg(long)]
    n: usize,
    #[arg(short, long, default_value = "-")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Cluster counts: `K`, `LO..HI` (inclusive) or a comma list.
    #[arg(long)]
    n: String,
    /// Weight grid step; must divide 1.
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    /// Size of the lowest-coupling shortlist the complexity pick draws from.
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    top: usize,
    /// Also write every candidate's measures as TSV here.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(short, long, default_value = "-")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct AssessArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    decomposition: PathBuf,
    #[arg(short, long, default_value = "-")]
    output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Orchestrator {
    First,
    MaxAccesses,
}

impl From<Orchestrator> for OrchestratorPolicy {
    fn from(o: Orchestrator) -> Self {
        match o {
            Orchestrator::First => OrchestratorPolicy::FirstStep,
            Orchestrator::MaxAccesses => OrchestratorPolicy::MostAccesses,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Naming {
    Generic,
    FullTrace,
    IgnoreTypes,
    IgnoreOrder,
}

impl From<Naming> for NamingHeuristic {
    fn from(n: Naming) -> Self {
        match n {
            Naming::Generic => NamingHeuristic::Generic,
            Naming::FullTrace => NamingHeuristic::FullTrace,
            Naming::IgnoreTypes => NamingHeuristic::IgnoreTypes,
            Naming::IgnoreOrder => NamingHeuristic::IgnoreOrder,
        }
    }
}

#[derive(Debug, Args)]
struct SagasArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    decomposition: PathBuf,
    #[arg(long, value_enum, default_value = "first")]
    orchestrator: Orchestrator,
    /// Sagas file.
    #[arg(short, long, default_value = "-")]
    output: PathBuf,
    /// Reduction table (TSV). Defaults to stdout when the sagas go to a file.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ToCmlArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    decomposition: PathBuf,
    /// Sagas file; computed with `--orchestrator` when absent.
    #[arg(long)]
    sagas: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "full-trace")]
    naming: Naming,
    #[arg(long, value_enum, default_value = "first")]
    orchestrator: Orchestrator,
    /// Put a generation timestamp comment on the context map.
    #[arg(long)]
    stamp: bool,
    #[arg(short, long, default_value = "-")]
    output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Bpmn,
}

#[derive(Debug, Args)]
struct DiagramArgs {
    #[arg(long, value_enum)]
    format: Format,
    /// CML document (context map graph, coordinations).
    #[arg(long, conflicts_with = "decomposition")]
    cml: Option<PathBuf>,
    /// Decomposition file (cluster graph); needs `--accesses`.
    #[arg(long, requires = "accesses")]
    decomposition: Option<PathBuf>,
    #[arg(long)]
    accesses: Option<PathBuf>,
    #[arg(long)]
    structure: Option<PathBuf>,
    /// Coordination to list (bpmn only).
    #[arg(long)]
    coordination: Option<String>,
    /// Output path, `-` for stdout. Defaults to the input name with a
    /// `.dot` or `.bpmn.txt` extension.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum CmlCommand {
    /// Report semantic problems; exit 1 when there are any.
    Validate {
        input: PathBuf,
    },
    /// Merge two bounded contexts into `<a>_<b>`.
    Merge {
        input: PathBuf,
        a: String,
        b: String,
        #[arg(short, long, default_value = "-")]
        output: PathBuf,
    },
    /// Split the aggregate(s) of a context; one `--part` per new aggregate.
    Split {
        input: PathBuf,
        context: String,
        /// Comma-separated entity names.
        #[arg(long = "part", required = true)]
        parts: Vec<String>,
        #[arg(short, long, default_value = "-")]
        output: PathBuf,
    },
}

struct Io<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Io<'_> {
    fn write(&mut self, path: &Path, text: &str) -> Result<()> {
        if path == Path::new("-") {
            self.stdout.write_all(text.as_bytes())?;
        } else {
            fs::write(path, text)?;
        }
        Ok(())
    }

    fn warn(&mut self, msg: impl std::fmt::Display) {
        let _ = writeln!(self.stderr, "warning: {msg}");
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(_) | Error::Invariant(_) => e,
        other => Error::InvalidArgument(format!("{}: {other}", path.display())),
    })
}

fn load_model(io: &mut Io, accesses: &Path, structure: Option<&Path>) -> Result<MonolithModel> {
    let functionalities = in_file(accesses, parse_accesses(&read(accesses)?))?;
    let structures = match structure {
        Some(p) => in_file(p, parse_structure(&read(p)?))?,
        None => Vec::new(),
    };
    let model = validate_model(functionalities, structures);
    for w in model.warnings() {
        if structure.is_none() && matches!(w, ModelWarning::UndeclaredEntity { .. }) {
            continue;
        }
        io.warn(w);
    }
    Ok(model)
}

fn load_decomposition(path: &Path, model: &MonolithModel) -> Result<Decomposition> {
    let d = in_file(path, Decomposition::from_json(&read(path)?))?;
    in_file(path, d.check_against(model))?;
    Ok(d)
}

fn parse_weights(s: &str) -> Result<SimilarityWeights> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::InvalidWeights(format!("`{p}` is not a number"))))
        .collect::<Result<_>>()?;
    let arr: [f64; 4] =
        parts.try_into().map_err(|_| Error::InvalidWeights("expected four comma-separated weights".into()))?;
    SimilarityWeights::from_array(arr)
}

fn parse_counts(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("bad cluster-count range `{s}` (use K, LO..HI or K1,K2,...)"));
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

fn default_output(input: &Path, ext: &str) -> PathBuf {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    input.with_file_name(format!("{stem}.{ext}"))
}

/// Runs the command line `args` (program name first) and returns the exit
/// status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                1
            } else {
                let _ = stdout.write_all(text.as_bytes());
                0
            };
        }
    };
    let mut io = Io { stdout, stderr };
    match dispatch(cli.command, &mut io) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e}");
            match e {
                Error::Invariant(_) => 2,
                _ => 1,
            }
        }
    }
}

fn dispatch(command: Command, io: &mut Io) -> Result<i32> {
    match command {
        Command::Decompose(a) => {
            let model = load_model(io, &a.model.accesses, a.model.structure.as_deref())?;
            let weights = parse_weights(&a.weights)?;
            let d = cluster(&crate::decompose::build_similarity(&model, weights)?, a.n, weights)?;
            io.write(&a.output, &d.to_json())?;
        }
        Command::Search(a) => {
            let model = load_model(io, &a.model.accesses, a.model.structure.as_deref())?;
            let counts = parse_counts(&a.n)?;
            if a.top == 0 {
                return Err(Error::InvalidArgument("--top must be at least 1".into()));
            }
            let candidates = search_decompositions_with_threads(&model, &counts, a.step, thread_cap()?)?;
            if let Some(path) = &a.table {
                let mut tsv = String::from("access\twrite\tread\tsequence\tn\tcohesion\tcoupling\tcomplexity\n");
                for c in &candidates {
                    let [w0, w1, w2, w3] = c.decomposition.params().weights.to_array();
                    let r = &c.report;
                    tsv.push_str(&format!(
                        "{w0:.3}\t{w1:.3}\t{w2:.3}\t{w3:.3}\t{}\t{:.3}\t{:.3}\t{:.3}\n",
                        c.decomposition.params().n,
                        r.cohesion,
                        r.coupling,
                        r.complexity
                    ));
                }
                io.write(path, &tsv)?;
            }
            let best = rank_decompositions(&candidates, a.top)
                .ok_or_else(|| Error::Invariant("search produced no candidates".into()))?;
            io.write(&a.output, &best.decomposition.to_json())?;
        }
        Command::Assess(a) => {
            let model = load_model(io, &a.model.accesses, a.model.structure.as_deref())?;
            let d = load_decomposition(&a.decomposition, &model)?;
            io.write(&a.output, &assess(&model, &d)?.to_tsv())?;
        }
        Command::Sagas(a) => {
            let model = load_model(io, &a.model.accesses, a.model.structure.as_deref())?;
            let d = load_decomposition(&a.decomposition, &model)?;
            let (sagas, stats): (Vec<Saga>, Vec<_>) = refactor_all(&model, &d, a.orchestrator.into())?.into_iter().unzip();
            if check_sagas(&sagas, &d).is_err() {
                return Err(Error::Invariant("generated sagas do not match the decomposition".into()));
            }
            io.write(&a.output, &sagas_to_json(&sagas))?;
            let tsv = stats_tsv(&stats);
            match &a.stats {
                Some(p) => io.write(p, &tsv)?,
                None if a.output != Path::new("-") => io.write(Path::new("-"), &tsv)?,
                None => {}
            }
        }
        Command::ToCml(a) => {
            let model = load_model(io, &a.model.accesses, a.model.structure.as_deref())?;
            let d = load_decomposition(&a.decomposition, &model)?;
            let sagas = match &a.sagas {
                Some(p) => {
                    let s = in_file(p, sagas_from_json(&read(p)?))?;
                    in_file(p, check_sagas(&s, &d))?;
                    s
                }
                None => refactor_all(&model, &d, a.orchestrator.into())?.into_iter().map(|(s, _)| s).collect(),
            };
            let ddd = generate(&model, &d, &sagas, a.naming.into())?;
            let mut doc = CmlDocument::from_model(&ddd);
            if a.stamp {
                let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|t| t.as_secs()).unwrap_or(0);
                doc.context_map.comments.push(format!("generated at unix time {secs}"));
            }
            let text = cml::emit(&doc)?;
            match cml::parse(&text) {
                Ok(back) if back == doc => {}
                _ => return Err(Error::Invariant("emitted CML does not parse back to the same document".into())),
            }
            let problems = cml::validate(&doc);
            if !problems.is_empty() {
                return Err(Error::Invariant(format!("generated CML is inconsistent: {}", problems[0])));
            }
            io.write(&a.output, &text)?;
        }
        Command::Diagram(a) => diagram(a, io)?,
        Command::Cml(c) => return cml_command(c, io),
    }
    Ok(0)
}

fn diagram(a: DiagramArgs, io: &mut Io) -> Result<()> {
    match (a.format, &a.cml, &a.decomposition) {
        (Format::Dot, Some(path), _) => {
            let doc = in_file(path, cml::parse(&read(path)?))?;
            let out = a.output.clone().unwrap_or_else(|| default_output(path, "dot"));
            io.write(&out, &diagrams::context_map_dot(&doc))
        }
        (Format::Dot, None, Some(dec)) => {
            let accesses = a.accesses.as_deref().expect("clap enforces --accesses");
            let model = load_model(io, accesses, a.structure.as_deref())?;
            let d = load_decomposition(dec, &model)?;
            let out = a.output.clone().unwrap_or_else(|| default_output(dec, "dot"));
            io.write(&out, &diagrams::decomposition_dot(&model, &d)?)
        }
        (Format::Bpmn, Some(path), _) => {
            let name = a
                .coordination
                .as_deref()
                .ok_or_else(|| Error::InvalidArgument("--format bpmn needs --coordination".into()))?;
            let doc = in_file(path, cml::parse(&read(path)?))?;
            let text = diagrams::coordination_bpmn(&doc, name)?;
            let out = a.output.clone().unwrap_or_else(|| path.with_file_name(format!("{name}.bpmn.txt")));
            io.write(&out, &text)
        }
        (Format::Bpmn, None, _) => Err(Error::InvalidArgument("--format bpmn needs --cml".into())),
        (Format::Dot, None, None) => Err(Error::InvalidArgument("diagram needs --cml or --decomposition".into())),
    }
}

fn cml_command(c: CmlCommand, io: &mut Io) -> Result<i32> {
    let load = |p: &Path| -> Result<CmlDocument> { in_file(p, cml::parse(&read(p)?)) };
    let (doc, out, output) = match c {
        CmlCommand::Validate { input } => {
            let problems = cml::validate(&load(&input)?);
            for p in &problems {
                let _ = writeln!(io.stderr, "{}: {p}", input.display());
            }
            return Ok(if problems.is_empty() { 0 } else { 1 });
        }
        CmlCommand::Merge { input, a, b, output } => {
            let doc = load(&input)?;
            let out = cml::merge_bounded_contexts(&doc, &a, &b)?;
            (doc, out, output)
        }
        CmlCommand::Split { input, context, parts, output } => {
            let doc = load(&input)?;
            let parts: Vec<Vec<String>> = parts
                .iter()
                .map(|p| p.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
                .collect();
            let out = cml::split_aggregate(&doc, &context, &parts)?;
            (doc, out, output)
        }
    };
    // a refactoring must not break a document that was consistent before
    if cml::validate(&doc).is_empty() {
        if let Some(p) = cml::validate(&out).first() {
            return Err(Error::Invariant(format!("refactoring produced an inconsistent document: {p}")));
        }
    }
    io.write(&output, &cml::emit(&out)?)?;
    Ok(0)
}
