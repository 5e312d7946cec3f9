//! `lzbwt`: measure repetitiveness, generate lower-bound texts, convert
//! LZ77 parses to run-length BWT and query the compressed index.

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lzbwt::compressed_index::CompressedIndex;
use lzbwt::grammar_queries::Fragment;
use lzbwt::lbgen::{de_bruijn_text, gen_large_delta, gen_small_delta, LbParams};
use lzbwt::lz2rlbwt::{ConvertError, Converter};
use lzbwt::measures::{verify_bounds, write_csv, BoundReport};
use lzbwt::rlslp::{recompress, Rlslp};
use lzbwt::syncset::SyncError;
use lzbwt::text::{
    build_bwt_runs, build_suffix_array, encode_symbol, lz77_decode, lz77_parse, substring_complexity_enumerated,
    BwtRuns, Lz77Parse, Text,
};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_VERIFY: u8 = 2;
const EXIT_USAGE: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "lzbwt", version, about = "Repetitiveness measures and LZ77 to run-length BWT conversion")]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone)]
struct Config {
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "LZBWT_SEED", default_value_t = 0x5eed)]
    seed: u64,
    /// Constant C in the asymptotic inequalities.
    #[arg(long, global = true, env = "LZBWT_BOUND_CONSTANT", default_value_t = 64.0)]
    bound_constant: f64,
    /// Largest n for which δ is also checked by literal enumeration.
    #[arg(long, global = true, env = "LZBWT_DELTA_LIMIT", default_value_t = 4096)]
    delta_enumeration_limit: usize,
    /// Conversions retried with fresh seeds when sampling keeps failing.
    #[arg(long, global = true, env = "LZBWT_RETRY_LIMIT", default_value_t = 4)]
    retry_limit: u32,
    #[arg(long, global = true, env = "LZBWT_FORMAT", value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    Small,
    Debruijn,
    Large,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Op {
    Report,
    Leftmost,
    Rightmost,
    Count,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report n, r, z, δ and the inequalities between them for text files.
    Measure {
        /// Text files or directories of text files.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Generate a lower-bound family text.
    Gen {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        delta: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        sigma: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the LZ77 parse of a text file.
    Parse {
        #[arg(long)]
        text: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert an LZ77 parse to the run-length BWT.
    Convert {
        #[arg(long)]
        parse: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Compare with the BWT computed from the decoded text.
        #[arg(long)]
        verify: bool,
        /// Corrupt one run before verifying (for testing the check itself).
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    #[command(subcommand)]
    Index(IndexCmd),
}

#[derive(Subcommand, Debug)]
enum IndexCmd {
    /// Build the grammar behind the index from a text or an LZ77 parse.
    Build {
        input: PathBuf,
        /// Treat the input as an LZ77 parse instead of a text.
        #[arg(long)]
        parse: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Query occurrences of T[pat-start..pat-start+pat-len) (1-based start).
    Query {
        index: PathBuf,
        #[arg(long, value_enum)]
        op: Op,
        #[arg(long)]
        pat_start: usize,
        #[arg(long)]
        pat_len: usize,
    },
}

enum Failure {
    Verify(String),
    Usage(String),
    Io(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Failure {
        Failure::Io(e)
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn read_text(path: &Path) -> Result<Text, Failure> {
    let raw = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Text::parse(&raw).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_parse(path: &Path) -> Result<Lz77Parse, Failure> {
    let raw = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Lz77Parse::from_text_format(&raw).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, data: &[u8]) -> Outcome {
    fs::write(path, data).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn collect_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut inner: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            inner.sort();
            files.extend(inner);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn measure(cfg: &Config, paths: &[PathBuf]) -> Outcome {
    let mut reports: Vec<(String, BoundReport)> = Vec::new();
    for f in collect_files(paths)? {
        let text = read_text(&f)?;
        let rep = verify_bounds(&text, cfg.bound_constant);
        if let Ok((delta, _)) = substring_complexity_enumerated(&text, cfg.delta_enumeration_limit) {
            if delta != rep.delta() {
                return Err(Failure::Verify(format!("{}: δ routes disagree", f.display())));
            }
        }
        reports.push((f.display().to_string(), rep));
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cfg.format {
        Format::Json => {
            let rows: Vec<serde_json::Value> = reports
                .iter()
                .map(|(name, rep)| serde_json::json!({ "text": name, "report": rep }))
                .collect();
            serde_json::to_writer_pretty(&mut out, &rows).context("writing JSON")?;
            writeln!(out).context("writing output")?;
        }
        Format::Csv => write_csv(&reports, &mut out).context("writing CSV")?,
        Format::Text => {
            for (name, rep) in &reports {
                writeln!(
                    out,
                    "{name}\tn={} r={} z={} delta={} irreducible_sum={} violations={}",
                    rep.n,
                    rep.r,
                    rep.z,
                    rep.delta(),
                    rep.irreducible_sum,
                    rep.violations().len()
                )
                .context("writing output")?;
            }
        }
    }
    let bad: Vec<String> = reports
        .iter()
        .flat_map(|(name, rep)| rep.violations().into_iter().map(move |v| format!("{name}: {}", v.bound)))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(format!("bound violations: {}", bad.join(", "))))
    }
}

fn gen(family: Family, delta: Option<usize>, n: Option<usize>, sigma: Option<usize>, k: Option<usize>, out: &Path) -> Outcome {
    let params = || -> Result<LbParams, Failure> {
        let (d, n) = delta.zip(n).ok_or_else(|| usage("--delta and --n are required for this family"))?;
        LbParams::new(d, n).map_err(|e| usage(e.to_string()))
    };
    let text = match family {
        Family::Small => gen_small_delta(&params()?).map_err(|e| usage(e.to_string()))?,
        Family::Large => gen_large_delta(&params()?).map_err(|e| usage(e.to_string()))?.text,
        Family::Debruijn => {
            let (s, k) = sigma.zip(k).ok_or_else(|| usage("--sigma and --k are required for de Bruijn texts"))?;
            de_bruijn_text(s, k).map_err(|e| usage(e.to_string()))?
        }
    };
    write_file(out, &text.to_raw())
}

fn rlbwt_format(b: &BwtRuns) -> String {
    b.runs.iter().map(|r| format!("{} {}\n", r.len, encode_symbol(r.sym))).collect()
}

fn convert(cfg: &Config, parse_path: &Path, out: &Path, verify: bool, inject_fault: bool) -> Outcome {
    let parse = read_parse(parse_path)?;
    let conv = Converter::new(&parse).map_err(|e| usage(format!("{}: {e}", parse_path.display())))?;
    let mut result = None;
    for attempt in 0..cfg.retry_limit.max(1) {
        let seed = cfg.seed.wrapping_add(u64::from(attempt) << 32);
        match conv.run(seed, |_, _| {}) {
            Ok(b) => {
                result = Some(b);
                break;
            }
            Err(ConvertError::Sync(SyncError::Exhausted(n))) => log::warn!("sampling failed {n} times; retrying"),
            Err(e) => return Err(Failure::Io(anyhow!("conversion failed: {e}"))),
        }
    }
    let mut bwt = result.ok_or_else(|| Failure::Io(anyhow!("sampling failed after {} retries", cfg.retry_limit)))?;
    if inject_fault {
        if let Some(first) = bwt.runs.first_mut() {
            first.sym = first.sym.wrapping_add(1);
        }
    }
    write_file(out, rlbwt_format(&bwt).as_bytes())?;
    if verify {
        let text = conv.text();
        let want = build_bwt_runs(text, &build_suffix_array(text));
        if want != bwt {
            let at = want.runs.iter().zip(&bwt.runs).position(|(a, b)| a != b).unwrap_or(want.r().min(bwt.r()));
            return Err(Failure::Verify(format!("run {at} differs from the reference BWT")));
        }
        log::info!("verified {} runs", bwt.r());
    }
    Ok(())
}

fn load_index(path: &Path) -> Result<CompressedIndex, Failure> {
    let raw = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let g = Rlslp::from_text_format(&raw).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(CompressedIndex::build(g))
}

fn index(cmd: &IndexCmd) -> Outcome {
    match cmd {
        IndexCmd::Build { input, parse, out } => {
            let text = if *parse {
                lz77_decode(&read_parse(input)?).map_err(|e| usage(e.to_string()))?
            } else {
                read_text(input)?
            };
            write_file(out, recompress(&text).to_text_format().as_bytes())
        }
        IndexCmd::Query { index, op, pat_start, pat_len } => {
            let idx = load_index(index)?;
            if *pat_start == 0 || *pat_len == 0 || pat_start - 1 + pat_len > idx.n() {
                return Err(usage(format!("pattern [{pat_start}, +{pat_len}) is not a nonempty fragment of the text")));
            }
            let f = Fragment::new(pat_start - 1, pat_start - 1 + pat_len);
            let value = match op {
                Op::Report => {
                    let mut occ: Vec<usize> = idx.report(f).into_iter().map(|p| p + 1).collect();
                    occ.sort_unstable();
                    serde_json::json!({ "op": "report", "occurrences": occ })
                }
                Op::Leftmost => serde_json::json!({ "op": "leftmost", "position": idx.leftmost(f) + 1 }),
                Op::Rightmost => serde_json::json!({ "op": "rightmost", "position": idx.rightmost(f) + 1 }),
                Op::Count => serde_json::json!({ "op": "count", "count": idx.count(f) }),
            };
            println!("{value}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let cfg = &cli.config;
    if cfg.retry_limit == 0 || cfg.delta_enumeration_limit == 0 || !cfg.bound_constant.is_finite() || cfg.bound_constant <= 0.0 {
        return Err(usage("limits and the bound constant must be positive"));
    }
    match &cli.cmd {
        Command::Measure { paths } => measure(cfg, paths),
        Command::Gen { family, delta, n, sigma, k, out } => gen(*family, *delta, *n, *sigma, *k, out),
        Command::Parse { text, out } => {
            let t = read_text(text)?;
            write_file(out, lz77_parse(&t).to_text_format().as_bytes())
        }
        Command::Convert { parse, out, verify, inject_fault } => convert(cfg, parse, out, *verify, *inject_fault),
        Command::Index(cmd) => index(cmd),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_IO)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn rlbwt_records() {
        let t = Text::from_body(b"ab").unwrap();
        let b = build_bwt_runs(&t, &build_suffix_array(&t));
        assert_eq!(rlbwt_format(&b), "1 b\n1 $\n1 a\n");
    }
}
