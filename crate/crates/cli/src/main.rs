//! `rdfalign`: align, evaluate, generate and inspect RDF graph versions.

mod methods;
mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rdfalign_core::eval::{best_theta, evaluate, threshold_sweep, GroundTruth};
use rdfalign_core::generate::{generate_versions, GeneratorSpec};
use rdfalign_core::model::validate;
use rdfalign_core::ntriples::{parse_file, ParseError};
use rdfalign_core::{disjoint_union, node_keys, Origin, TripleGraph};

use methods::{Method, Prefix, RunConfig, Tokens};

/// Error paired with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn parse(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
    pub fn config(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
    pub fn budget(message: impl Into<String>) -> Self {
        Failure { code: 4, message: message.into() }
    }
    pub fn other(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::other(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "rdfalign", version, about = "Align two versions of an RDF graph")]
struct Cli {
    /// Worker threads; 0 uses every core, 1 runs sequentially.
    #[arg(long, global = true, env = "RDFALIGN_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Align two N-Triples files and print the aligned pairs.
    Align {
        source: PathBuf,
        target: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Format::Tsv)]
        format: Format,
        /// Write pairs here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the statistics block here instead of stderr.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Score an alignment against a ground-truth file.
    Eval {
        source: PathBuf,
        target: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Run the overlap method for every threshold in `start:end:step`.
        #[arg(long, value_name = "START:END:STEP")]
        theta_sweep: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write two generated versions and their ground truth.
    Generate {
        /// TOML generator spec; missing keys take their defaults.
        spec: Option<PathBuf>,
        /// Output prefix: writes PREFIX.v1.nt, PREFIX.v2.nt and PREFIX.truth.tsv.
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse files and check the graph invariants.
    Validate { files: Vec<PathBuf> },
    /// Print node and edge counts of one or two files.
    Stats {
        source: PathBuf,
        target: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, value_enum, default_value_t = Method::Hybrid)]
    method: Method,
    #[arg(long, default_value_t = 0.65)]
    theta: f64,
    #[arg(long, default_value_t = 0.001)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = Prefix::Paper)]
    prefix_mode: Prefix,
    #[arg(long, default_value_t = 100)]
    max_rounds: usize,
    #[arg(long, value_enum, default_value_t = Tokens::Words)]
    literal_tokens: Tokens,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, Failure> {
        let cfg = RunConfig {
            method: self.method,
            theta: self.theta,
            epsilon: self.epsilon,
            prefix: self.prefix_mode,
            max_rounds: self.max_rounds,
            tokens: self.literal_tokens,
        };
        cfg.check()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path, origin: Origin) -> Result<TripleGraph, Failure> {
    parse_file(path, origin).map_err(|e| match e {
        ParseError::Io(io) => Failure::parse(format!("{}: {io}", path.display())),
        syntax => Failure::parse(format!("{}: {syntax}", path.display())),
    })
}

fn load_pair(source: &Path, target: &Path) -> Result<TripleGraph, Failure> {
    let g1 = load(source, Origin::Source)?;
    let g2 = load(target, Origin::Target)?;
    Ok(disjoint_union(&g1, &g2))
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Align { source, target, run, format, out, stats } => {
            let cfg = run.config()?;
            let g = load_pair(&source, &target)?;
            let start = Instant::now();
            let result = methods::run(&g, &cfg)?;
            let elapsed = start.elapsed();
            let keys = node_keys(&g);
            let text = match format {
                Format::Tsv => output::pairs_tsv(&keys, &result.pairs),
                Format::Json => output::pairs_json(&g, &keys, &result.pairs),
            };
            emit(out.as_deref(), &text)?;
            let block = output::stats_block(&g, &cfg, &result, elapsed);
            match stats {
                Some(p) => write_atomic(&p, block.as_bytes())?,
                None => eprint!("{block}"),
            }
            Ok(())
        }
        Command::Eval { source, target, truth, run, theta_sweep, out } => {
            let cfg = run.config()?;
            let g = load_pair(&source, &target)?;
            let file = fs::File::open(&truth).map_err(|e| Failure::parse(format!("{}: {e}", truth.display())))?;
            let truth = GroundTruth::read(std::io::BufReader::new(file)).map_err(|e| Failure::parse(e.to_string()))?;
            let truth = truth.resolve(&g).map_err(|e| Failure::config(e.to_string()))?;
            let keys = node_keys(&g);
            let text = match theta_sweep {
                Some(spec) => {
                    if cfg.method != Method::Overlap {
                        return Err(Failure::config("--theta-sweep needs --method overlap"));
                    }
                    let thetas = parse_sweep(&spec)?;
                    let points = threshold_sweep(&g, &truth, &thetas, &cfg.overlap())
                        .map_err(|e| Failure::config(e.to_string()))?;
                    output::sweep_json(&keys, &points, best_theta(&points))
                }
                None => {
                    let result = methods::run(&g, &cfg)?;
                    let pairs: Vec<_> = result.pairs.iter().map(|&(a, b, _)| (a, b)).collect();
                    output::report_json(&keys, &evaluate(&g, &pairs, &truth), Some(cfg.theta), result.rounds)
                }
            };
            emit(out.as_deref(), &text)
        }
        Command::Generate { spec, out, seed } => {
            let mut spec: GeneratorSpec = match spec {
                Some(p) => {
                    let text = fs::read_to_string(&p).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?;
                    toml::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?
                }
                None => GeneratorSpec::default(),
            };
            if let Some(s) = seed {
                spec.seed = s;
            }
            let v = generate_versions(&spec).map_err(|e| Failure::config(e.to_string()))?;
            let path = |suffix: &str| {
                let mut name = out.as_os_str().to_owned();
                name.push(suffix);
                PathBuf::from(name)
            };
            write_atomic(&path(".v1.nt"), v.v1_text.as_bytes())?;
            write_atomic(&path(".v2.nt"), v.v2_text.as_bytes())?;
            write_atomic(&path(".truth.tsv"), v.truth.to_tsv().as_bytes())?;
            Ok(())
        }
        Command::Validate { files } => {
            if files.is_empty() {
                return Err(Failure::config("no files given"));
            }
            let mut bad = false;
            for f in &files {
                let g = load(f, Origin::Source)?;
                let violations = validate(&g);
                for v in &violations {
                    println!("{}: {v}", f.display());
                }
                if violations.is_empty() {
                    println!("{}: ok ({} nodes, {} triples)", f.display(), g.node_count(), g.triple_count());
                }
                bad |= !violations.is_empty();
            }
            if bad {
                Err(Failure::parse("validation failed"))
            } else {
                Ok(())
            }
        }
        Command::Stats { source, target } => {
            let g = match &target {
                Some(t) => load_pair(&source, t)?,
                None => load(&source, Origin::Source)?,
            };
            print!("{}", output::graph_stats(&g));
            Ok(())
        }
    }
}

/// Expands `start:end:step` into the thresholds it covers, end included.
fn parse_sweep(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::config(format!("bad --theta-sweep '{spec}', expected START:END:STEP"));
    let parts: Vec<f64> = spec.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [start, end, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || start > end || !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&end) {
        return Err(bad());
    }
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let t = ((start + k as f64 * step) * 1e9).round() / 1e9;
        if t > end + 1e-9 {
            break;
        }
        out.push(t);
        k += 1;
    }
    Ok(out)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Writes through a temporary file in the destination directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Failure::other(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}
