mod report;
mod verify;

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use anyhow::{bail, Context};
use apnlab_core::catalog::{known_apn_functions, theorem1_valid_us};
use apnlab_core::function::{parse_hex, parse_lut, parse_polynomial};
use apnlab_core::invariants::{
    build_af, build_graph_element, ideal_dimension_oracle, translate_closure, ClosureOptions, ClosureProgress,
    EchelonBasis,
};
use apnlab_core::search::{search_binomials_with, PairSelection, SearchHit, SearchSpace};
use apnlab_core::spectra::{differential_spectrum, is_crooked, walsh_spectrum};
use apnlab_core::{FieldSpec, VectorialFunction};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use report::{emit, Format, Report};

#[derive(Parser)]
#[command(name = "apnlab", version, about = "Analysis of APN functions over GF(2^m)")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "APNLAB_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Differential and Walsh spectra, APN/AB/crooked flags and degree.
    Analyze {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        function: FunctionSource,
        /// Emit flat key,value rows instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Dimension of the ideal generated by A_F or by the graph of F.
    Rank {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        function: FunctionSource,
        #[arg(long, value_enum, default_value_t = Target::Af)]
        target: Target,
        /// Abort once the dimension exceeds this cap.
        #[arg(long)]
        max_dim: Option<usize>,
        /// Write the basis here (also used for periodic checkpoints).
        #[arg(long)]
        save_basis: Option<PathBuf>,
        /// Continue from a basis file written by --save-basis.
        #[arg(long)]
        resume_basis: Option<PathBuf>,
        /// Seconds between checkpoints when --save-basis is given.
        #[arg(long, default_value_t = 300)]
        checkpoint_secs: u64,
        /// Use the dense-matrix rank instead of translate closure (2m <= 14).
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        csv: bool,
    },
    /// Exhaustive APN binomial search x^d1 + u x^d2.
    Search {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, requires = "d2")]
        d1: Option<u64>,
        #[arg(long, requires = "d1")]
        d2: Option<u64>,
        #[arg(long, value_parser = hex_arg, requires = "u_to")]
        u_from: Option<u32>,
        #[arg(long, value_parser = hex_arg, requires = "u_from")]
        u_to: Option<u32>,
        /// JSON-lines output, one object per hit.
        #[arg(long)]
        out: PathBuf,
        /// Skip slices already recorded in <out>.progress.
        #[arg(long)]
        resume: bool,
    },
    /// Known APN power maps for GF(2^m).
    Catalog {
        #[command(flatten)]
        field: FieldArgs,
        /// List the valid coefficients u of x^3 + u x^36 (m = 10).
        #[arg(long)]
        theorem1_us: bool,
        #[arg(long)]
        csv: bool,
    },
    /// Run a reproduction suite; exit status 1 when a check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: verify::Suite,
        /// Degree for the table1 suite.
        #[arg(long, default_value_t = 5)]
        m: u32,
        /// Seed for randomized sampling.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Args)]
struct FieldArgs {
    /// Extension degree, 2..=16.
    #[arg(long)]
    m: u32,
    /// Reduction polynomial as a hex bitmask (default: built-in primitive polynomial).
    #[arg(long, value_parser = hex_arg)]
    field_poly: Option<u32>,
}

impl FieldArgs {
    fn build(&self) -> anyhow::Result<Arc<FieldSpec>> {
        Ok(Arc::new(FieldSpec::new(self.m, self.field_poly)?))
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct FunctionSource {
    /// Polynomial as exponent:hex-coefficient pairs, e.g. "3:1,36:0x2f4".
    #[arg(long)]
    poly: Option<String>,
    /// Lookup table file: one hex value per line, 2^m lines.
    #[arg(long)]
    lut_file: Option<PathBuf>,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum SourceDesc {
    Polynomial { terms: Vec<(u64, String)> },
    Lut { path: String },
}

impl FunctionSource {
    fn load(&self, field: &Arc<FieldSpec>) -> anyhow::Result<(VectorialFunction, SourceDesc)> {
        if let Some(p) = &self.poly {
            let terms = parse_polynomial(p).with_context(|| format!("--poly {p:?}"))?;
            let f = VectorialFunction::from_polynomial(field, &terms).with_context(|| format!("--poly {p:?}"))?;
            let desc = terms.iter().map(|&(e, c)| (e, format!("{c:#x}"))).collect();
            return Ok((f, SourceDesc::Polynomial { terms: desc }));
        }
        let path = self.lut_file.as_ref().expect("clap enforces one source");
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let lut = parse_lut(&text).with_context(|| format!("parsing {}", path.display()))?;
        let f = VectorialFunction::from_lut(field, lut).with_context(|| format!("loading {}", path.display()))?;
        Ok((f, SourceDesc::Lut { path: path.display().to_string() }))
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Target {
    Af,
    Graph,
}

fn hex_arg(s: &str) -> Result<u32, String> {
    parse_hex(s).map_err(|e| e.to_string())
}

fn format_of(csv: bool) -> Format {
    if csv {
        Format::Csv
    } else {
        Format::Json
    }
}

#[derive(Serialize)]
struct Flags {
    apn: bool,
    ab: bool,
    crooked: bool,
    degree: u32,
}

#[derive(Serialize)]
struct AnalyzeResults {
    function: SourceDesc,
    uniformity: u32,
    histogram: BTreeMap<u32, u64>,
    linearity: u64,
    walsh_abs: BTreeMap<u64, u64>,
    walsh_signed: BTreeMap<i64, u64>,
    flags: Flags,
}

fn analyze(field: &FieldArgs, source: &FunctionSource, csv: bool) -> anyhow::Result<bool> {
    let k = field.build()?;
    let (f, desc) = source.load(&k)?;
    let diff = differential_spectrum(&f);
    let walsh = walsh_spectrum(&f);
    let m = k.m();
    let flags = Flags {
        apn: diff.uniformity == 2,
        ab: m % 2 == 1 && walsh.linearity == 1 << m.div_ceil(2),
        crooked: is_crooked(&f),
        degree: f.algebraic_degree(),
    };
    let results = AnalyzeResults {
        function: desc,
        uniformity: diff.uniformity,
        histogram: diff.histogram,
        linearity: walsh.linearity,
        walsh_abs: walsh.abs_values,
        walsh_signed: walsh.values,
        flags,
    };
    emit(&Report::new("analyze", m, k.poly(), results), format_of(csv), io::stdout().lock())?;
    Ok(true)
}

#[derive(Serialize)]
struct RankResults {
    target: Target,
    engine: &'static str,
    dimension: usize,
    rows: usize,
    candidates: u64,
    seconds: f64,
}

fn save_basis_atomic(path: &Path, basis: &EchelonBasis, processed: usize) -> anyhow::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let file = File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        let mut w = io::BufWriter::new(file);
        basis.save(&mut w, processed).with_context(|| format!("writing {}", tmp.display()))?;
        w.flush()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn rank(
    field: &FieldArgs,
    source: &FunctionSource,
    target: Target,
    max_dim: Option<usize>,
    save_basis: Option<&Path>,
    resume_basis: Option<&Path>,
    checkpoint_secs: u64,
    oracle: bool,
    csv: bool,
) -> anyhow::Result<bool> {
    let k = field.build()?;
    let (f, _) = source.load(&k)?;
    let element = match target {
        Target::Af => build_af(&f)?,
        Target::Graph => build_graph_element(&f),
    };
    let results = if oracle {
        let t = Instant::now();
        let dim = ideal_dimension_oracle(&element)?;
        RankResults {
            target,
            engine: "dense",
            dimension: dim,
            rows: 1 << element.rank(),
            candidates: 0,
            seconds: t.elapsed().as_secs_f64(),
        }
    } else {
        let resume = match resume_basis {
            Some(p) => {
                let file = File::open(p).with_context(|| format!("opening {}", p.display()))?;
                let (b, processed) =
                    EchelonBasis::load(BufReader::new(file)).with_context(|| format!("reading {}", p.display()))?;
                if b.group_rank() != element.rank() {
                    bail!("{}: basis is for a different group rank", p.display());
                }
                Some((b, processed))
            }
            None => None,
        };
        let mut last_beat = 0.0;
        let mut last_save = 0.0;
        let mut save_err: Option<anyhow::Error> = None;
        let mut progress = |p: ClosureProgress, basis: &EchelonBasis| {
            if p.seconds - last_beat >= 10.0 {
                last_beat = p.seconds;
                eprintln!(
                    "[rank] dim={} processed={} candidates={} elapsed={:.0}s",
                    p.dimension, p.processed, p.candidates, p.seconds
                );
            }
            if let Some(path) = save_basis {
                if p.seconds - last_save >= checkpoint_secs as f64 {
                    last_save = p.seconds;
                    if let Err(e) = save_basis_atomic(path, basis, p.processed) {
                        save_err.get_or_insert(e);
                    }
                }
            }
        };
        let closure = translate_closure(
            &element,
            ClosureOptions { max_dim, progress: Some(&mut progress), resume, ..Default::default() },
        )?;
        if let Some(e) = save_err {
            return Err(e);
        }
        if let Some(path) = save_basis {
            save_basis_atomic(path, &closure.basis, closure.basis.dimension())?;
        }
        RankResults {
            target,
            engine: "translate-closure",
            dimension: closure.basis.dimension(),
            rows: closure.basis.dimension(),
            candidates: closure.candidates,
            seconds: closure.seconds,
        }
    };
    emit(&Report::new("rank", k.m(), k.poly(), results), format_of(csv), io::stdout().lock())?;
    Ok(true)
}

fn progress_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".progress");
    PathBuf::from(s)
}

fn read_hits(path: &Path) -> anyhow::Result<Vec<SearchHit>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    BufReader::new(file)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| {
            let l = l?;
            serde_json::from_str(&l).with_context(|| format!("{}: bad line {l:?}", path.display()))
        })
        .collect()
}

fn read_done_slices(path: &Path) -> anyhow::Result<HashSet<(u64, u64)>> {
    if !path.exists() {
        return Ok(HashSet::new());
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut it = l.split_whitespace().map(str::parse::<u64>);
            match (it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b))) => Ok((a, b)),
                _ => bail!("{}: bad progress line {l:?}", path.display()),
            }
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn search(
    field: &FieldArgs,
    d1: Option<u64>,
    d2: Option<u64>,
    u_from: Option<u32>,
    u_to: Option<u32>,
    out: &Path,
    resume: bool,
) -> anyhow::Result<bool> {
    let k = field.build()?;
    let pairs = match (d1, d2) {
        (Some(a), Some(b)) => PairSelection::Fixed(a, b),
        _ => PairSelection::All,
    };
    let space = SearchSpace { m: k.m(), pairs, u_range: u_from.zip(u_to) };
    let progress = progress_path(out);
    let (mut hits, done) =
        if resume { (read_hits(out)?, read_done_slices(&progress)?) } else { (Vec::new(), HashSet::new()) };
    if !resume {
        File::create(out).with_context(|| format!("creating {}", out.display()))?;
        File::create(&progress).with_context(|| format!("creating {}", progress.display()))?;
    }
    let open_append = |p: &Path| {
        OpenOptions::new().append(true).create(true).open(p).with_context(|| format!("opening {}", p.display()))
    };
    let sinks = Mutex::new((open_append(out)?, open_append(&progress)?, 0usize, Instant::now()));
    let on_slice = |slice: (u64, u64), found: &[SearchHit]| {
        let mut guard = sinks.lock().expect("sink lock");
        let (hits_file, progress_file, count, started) = &mut *guard;
        for h in found {
            let _ = writeln!(hits_file, "{}", serde_json::to_string(h).expect("serializable"));
        }
        let _ = hits_file.flush();
        let _ = writeln!(progress_file, "{} {}", slice.0, slice.1);
        let _ = progress_file.flush();
        *count += 1;
        if *count % 1000 == 0 {
            eprintln!("[search] {} slices done, {:.0}s", count, started.elapsed().as_secs_f64());
        }
    };
    let new_hits = search_binomials_with(&k, &space, &done, &on_slice)?;
    hits.extend(new_hits);
    hits.sort_by_key(|h| (h.d1, h.d2, h.u, h.slice));
    hits.dedup_by_key(|h| (h.d1, h.d2, h.u));
    // rewrite sorted so the file does not depend on worker scheduling
    let mut text = String::new();
    for h in &hits {
        text.push_str(&serde_json::to_string(h)?);
        text.push('\n');
    }
    drop(sinks);
    fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
    eprintln!("[search] {} hits written to {}", hits.len(), out.display());
    Ok(true)
}

#[derive(Serialize)]
struct CatalogRow {
    family: String,
    parameter: String,
    exponent: u64,
    condition: String,
}

#[derive(Serialize)]
#[serde(untagged)]
enum CatalogResults {
    Entries(Vec<CatalogRow>),
    Theorem1 { theorem1_us: Vec<String> },
}

fn catalog(field: &FieldArgs, theorem1_us: bool, csv: bool) -> anyhow::Result<bool> {
    let k = field.build()?;
    let results = if theorem1_us {
        let us = theorem1_valid_us(&k)?;
        CatalogResults::Theorem1 { theorem1_us: us.iter().map(|u| format!("{u:#x}")).collect() }
    } else {
        CatalogResults::Entries(
            known_apn_functions(k.m())?
                .into_iter()
                .map(|e| CatalogRow {
                    family: e.family.to_string(),
                    parameter: format!("{}={}", e.parameter, e.value),
                    exponent: e.exponent,
                    condition: e.condition,
                })
                .collect(),
        )
    };
    emit(&Report::new("catalog", k.m(), k.poly(), results), format_of(csv), io::stdout().lock())?;
    Ok(true)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Analyze { field, function, csv } => analyze(&field, &function, csv),
        Command::Rank { field, function, target, max_dim, save_basis, resume_basis, checkpoint_secs, oracle, csv } => {
            rank(
                &field,
                &function,
                target,
                max_dim,
                save_basis.as_deref(),
                resume_basis.as_deref(),
                checkpoint_secs,
                oracle,
                csv,
            )
        }
        Command::Search { field, d1, d2, u_from, u_to, out, resume } => {
            search(&field, d1, d2, u_from, u_to, &out, resume)
        }
        Command::Catalog { field, theorem1_us, csv } => catalog(&field, theorem1_us, csv),
        Command::Verify { suite, m, seed, csv } => {
            let outcome = verify::run_suite(suite, m, seed)?;
            let passed = outcome.passed;
            let field = FieldSpec::new(outcome.m, None)?;
            emit(&Report::new("verify", outcome.m, field.poly(), outcome), format_of(csv), io::stdout().lock())?;
            Ok(passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
