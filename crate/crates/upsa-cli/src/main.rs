//! `upsa`: command-line front end for the paraphrasing service.
//!
//! Every subcommand except `serve` talks to the HTTP service. By default a
//! private instance is started in-process on an ephemeral port; point
//! `--server` at a running instance to share one across invocations.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use upsa_api::{
    EvaluateRequest, ModelBundle, ParaphraseRequest, RunConfig, SweepRequest, TrainRequest,
};
use upsa_client::Client;

#[derive(Parser)]
#[command(name = "upsa", version, about = "Simulated-annealing sentence paraphraser")]
struct Cli {
    /// Base URL of a running service; when absent one is started in-process.
    #[arg(long, global = true)]
    server: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service in the foreground.
    Serve {
        /// Address to listen on.
        #[arg(long, default_value = "127.0.0.1:8646")]
        addr: SocketAddr,
    },
    /// Train forward and backward n-gram models from a corpus.
    TrainLm {
        /// Training corpus, one sentence per line.
        #[arg(long)]
        corpus: PathBuf,
        /// Directory receiving vocab.txt, forward.lm, backward.lm.
        #[arg(long)]
        lm_dir: PathBuf,
        /// Model order (n)
        #[arg(long, default_value_t = 3)]
        order: usize,
        /// Minimum surface frequency to enter the vocabulary
        #[arg(long, default_value_t = 1)]
        min_count: u64,
    },
    /// Paraphrase a file of sentences, one per line.
    Paraphrase {
        #[command(flatten)]
        models: ModelArgs,
        /// Input sentences, one per line.
        #[arg(long)]
        input: PathBuf,
        /// Output file; one paraphrase per input line.
        #[arg(long)]
        output: PathBuf,
        /// Optional JSONL search-trace file (one record per step, all lines).
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        hyper: HyperArgs,
    },
    /// Score candidates against references from a TSV file.
    Evaluate {
        /// TSV lines: source<TAB>candidate<TAB>reference[<TAB>reference...].
        #[arg(long)]
        input: PathBuf,
        /// iBLEU interpolation weight. [paper default: 0.9]
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Paraphrase + evaluate across a grid of initial temperatures.
    TempSweep {
        #[command(flatten)]
        models: ModelArgs,
        /// TSV lines: source<TAB>reference[<TAB>reference...].
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated initial temperatures; defaults to the validated
        /// grid 0,0.005,0.01,0.03,0.05,0.07,0.09,0.11,0.15,0.21.
        #[arg(long, value_delimiter = ',')]
        t_inits: Vec<f64>,
        /// Optional file receiving the table in addition to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        hyper: HyperArgs,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Directory holding vocab.txt, forward.lm, backward.lm.
    #[arg(long)]
    lm_dir: PathBuf,
    /// Word embedding table in text format.
    #[arg(long)]
    embeddings: PathBuf,
    /// Stopword list, one per line; bundled English list when omitted.
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

/// Hyperparameters and ablation switches. Unset flags fall back to the
/// config file, then to the validated defaults (P=8, Q=1, S=1,
/// T_init=0.03, C=3e-4, N=100, K=50).
#[derive(Args)]
struct HyperArgs {
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Keyword-similarity exponent P. [paper default: 8]
    #[arg(long)]
    p: Option<f64>,
    /// Sentence-similarity exponent Q. [paper default: 1]
    #[arg(long)]
    q: Option<f64>,
    /// Expression-diversity exponent S. [paper default: 1]
    #[arg(long)]
    s: Option<f64>,
    /// Initial temperature. [paper default: 0.03]
    #[arg(long)]
    t_init: Option<f64>,
    /// Linear cooling rate C. [paper default: 3e-4]
    #[arg(long)]
    c_rate: Option<f64>,
    /// Number of annealing steps N. [paper default: 100]
    #[arg(long)]
    iters: Option<usize>,
    /// Candidate-vocabulary size K. [paper default: 50]
    #[arg(long)]
    topk: Option<usize>,
    /// Minimum sentence length for Delete. [default: 3]
    #[arg(long)]
    min_length: Option<usize>,
    /// Maximum extracted keywords. [default: 5]
    #[arg(long)]
    max_keywords: Option<usize>,
    /// iBLEU interpolation weight (temp-sweep scoring). [paper default: 0.9]
    #[arg(long)]
    alpha: Option<f64>,
    /// Master random seed. [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Hold the temperature at --t-init instead of cooling.
    #[arg(long)]
    fixed_temp: bool,
    /// Disable the copy mechanism (ablation).
    #[arg(long)]
    no_copy: bool,
    /// Drop the keyword-similarity factor (ablation).
    #[arg(long)]
    no_sem_key: bool,
    /// Drop the sentence-similarity factor (ablation).
    #[arg(long)]
    no_sem_sen: bool,
    /// Drop the expression-diversity factor (ablation).
    #[arg(long)]
    no_exp: bool,
    /// Use the raw fluency product instead of the per-word geometric mean.
    #[arg(long)]
    raw_fluency: bool,
}

impl HyperArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", path.display()))?
            }
            None => RunConfig::default(),
        };
        macro_rules! take {
            ($($field:ident <- $flag:ident),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$field = v; })*
            };
        }
        take! {
            p <- p, q <- q, s <- s, t_init <- t_init, c_rate <- c_rate,
            iters <- iters, top_k <- topk, min_length <- min_length,
            max_keywords <- max_keywords, alpha <- alpha, seed <- seed,
        }
        cfg.fixed_temp |= self.fixed_temp;
        cfg.no_copy |= self.no_copy;
        cfg.no_sem_key |= self.no_sem_key;
        cfg.no_sem_sen |= self.no_sem_sen;
        cfg.no_exp |= self.no_exp;
        cfg.raw_fluency |= self.raw_fluency;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Command::Serve { addr } = cli.command {
        return serve_foreground(addr);
    }
    let connection = ServiceHandle::connect(cli.server.clone())?;
    let client = connection.client();
    match cli.command {
        Command::Serve { .. } => unreachable!("handled above"),
        Command::TrainLm { corpus, lm_dir, order, min_count } => {
            cmd_train_lm(&client, &corpus, &lm_dir, order, min_count)
        }
        Command::Paraphrase { models, input, output, trace, hyper } => {
            cmd_paraphrase(&client, &models, &input, &output, trace.as_deref(), &hyper)
        }
        Command::Evaluate { input, alpha } => cmd_evaluate(&client, &input, alpha),
        Command::TempSweep { models, input, t_inits, output, hyper } => {
            cmd_temp_sweep(&client, &models, &input, &t_inits, output.as_deref(), &hyper)
        }
    }
}

fn serve_foreground(addr: SocketAddr) -> Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let (local, listener) = upsa_server::bind(addr).await?;
        eprintln!("listening on http://{local}");
        upsa_server::serve(listener).await
    })?;
    Ok(())
}

/// A connection to the service: either a caller-supplied URL or a private
/// in-process instance that lives for the duration of the command.
enum ServiceHandle {
    External(String),
    InProcess {
        url: String,
        // dropped (and with it the server task) when the handle goes away
        _rt: tokio::runtime::Runtime,
    },
}

impl ServiceHandle {
    fn connect(server: Option<String>) -> Result<Self> {
        match server {
            Some(url) => {
                let handle = ServiceHandle::External(url);
                handle.client().health().context("connecting to --server")?;
                Ok(handle)
            }
            None => {
                let rt = tokio::runtime::Builder::new_multi_thread()
                    .worker_threads(2)
                    .enable_all()
                    .build()?;
                let (local, listener) =
                    rt.block_on(upsa_server::bind("127.0.0.1:0".parse().unwrap()))?;
                rt.spawn(upsa_server::serve(listener));
                Ok(ServiceHandle::InProcess { url: format!("http://{local}"), _rt: rt })
            }
        }
    }

    fn client(&self) -> Client {
        match self {
            ServiceHandle::External(url) => Client::new(url.clone()),
            ServiceHandle::InProcess { url, .. } => Client::new(url.clone()),
        }
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::to_string).collect())
}

/// Writes via a temp file + rename so failures never leave partial files.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn load_models(args: &ModelArgs) -> Result<(ModelBundle, String, Option<String>)> {
    use base64_read::read_b64;
    let dir = &args.lm_dir;
    let bundle = ModelBundle {
        vocab: fs::read_to_string(dir.join("vocab.txt"))
            .with_context(|| format!("reading {}", dir.join("vocab.txt").display()))?,
        forward: read_b64(&dir.join("forward.lm"))?,
        backward: read_b64(&dir.join("backward.lm"))?,
    };
    let embeddings = fs::read_to_string(&args.embeddings)
        .with_context(|| format!("reading {}", args.embeddings.display()))?;
    let stopwords = match &args.stopwords {
        Some(p) => Some(
            fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        ),
        None => None,
    };
    Ok((bundle, embeddings, stopwords))
}

/// The CLI stores models as raw binary on disk while the wire format is
/// base64 inside JSON.
mod base64_read {
    use super::*;
    use base64::engine::general_purpose::STANDARD;
    use base64::Engine;

    pub fn decode(text: &str) -> Result<Vec<u8>> {
        STANDARD.decode(text).context("invalid base64 payload")
    }

    pub fn read_b64(path: &Path) -> Result<String> {
        let bytes =
            fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(STANDARD.encode(&bytes))
    }
}

fn cmd_train_lm(
    client: &Client,
    corpus: &Path,
    lm_dir: &Path,
    order: usize,
    min_count: u64,
) -> Result<()> {
    let lines = read_lines(corpus)?;
    let resp = client.train(&TrainRequest { corpus: lines, order, min_count })?;
    fs::create_dir_all(lm_dir)
        .with_context(|| format!("creating {}", lm_dir.display()))?;
    write_atomic(&lm_dir.join("vocab.txt"), resp.vocab.as_bytes())?;
    write_atomic(&lm_dir.join("forward.lm"), &base64_read::decode(&resp.forward)?)?;
    write_atomic(&lm_dir.join("backward.lm"), &base64_read::decode(&resp.backward)?)?;
    println!(
        "trained order-{order} models: {} sentences, {} vocabulary entries",
        resp.sentences, resp.vocab_size
    );
    Ok(())
}

fn cmd_paraphrase(
    client: &Client,
    models: &ModelArgs,
    input: &Path,
    output: &Path,
    trace: Option<&Path>,
    hyper: &HyperArgs,
) -> Result<()> {
    let config = hyper.resolve()?;
    let (bundle, embeddings, stopwords) = load_models(models)?;
    let inputs = read_lines(input)?;
    let resp = client.paraphrase(&ParaphraseRequest {
        models: bundle,
        embeddings,
        stopwords,
        inputs,
        config,
        with_trace: trace.is_some(),
    })?;
    let mut text = resp.outputs.join("\n");
    text.push('\n');
    write_atomic(output, text.as_bytes())?;
    if let Some(trace_path) = trace {
        let traces = resp.traces.unwrap_or_default();
        write_atomic(trace_path, render_trace(&traces)?.as_bytes())?;
    }
    Ok(())
}

/// Merges per-line JSONL traces into one file, tagging each record with the
/// input line it belongs to.
fn render_trace(traces: &[String]) -> Result<String> {
    let mut out = String::new();
    for (line, trace) in traces.iter().enumerate() {
        for record in trace.lines() {
            let mut value: serde_json::Value =
                serde_json::from_str(record).context("parsing trace record")?;
            value
                .as_object_mut()
                .context("trace record is not an object")?
                .insert("line".to_string(), serde_json::json!(line));
            out.push_str(&serde_json::to_string(&value)?);
            out.push('\n');
        }
    }
    Ok(out)
}

fn render_report(report: &upsa_api::Report) -> String {
    format!(
        "cases  {}\nBLEU   {:.4}\niBLEU  {:.4}\nROUGE1 {:.4}\nROUGE2 {:.4}\n",
        report.cases, report.bleu, report.ibleu, report.rouge1, report.rouge2
    )
}

fn cmd_evaluate(client: &Client, input: &Path, alpha: Option<f64>) -> Result<()> {
    let tsv = fs::read_to_string(input)
        .with_context(|| format!("reading {}", input.display()))?;
    let resp = client.evaluate(&EvaluateRequest { tsv, alpha: alpha.unwrap_or(0.9) })?;
    print!("{}", render_report(&resp.report));
    Ok(())
}

fn cmd_temp_sweep(
    client: &Client,
    models: &ModelArgs,
    input: &Path,
    t_inits: &[f64],
    output: Option<&Path>,
    hyper: &HyperArgs,
) -> Result<()> {
    let config = hyper.resolve()?;
    let (bundle, embeddings, stopwords) = load_models(models)?;
    let tsv = fs::read_to_string(input)
        .with_context(|| format!("reading {}", input.display()))?;
    let resp = client.temp_sweep(&SweepRequest {
        models: bundle,
        embeddings,
        stopwords,
        tsv,
        config,
        t_inits: t_inits.to_vec(),
    })?;
    let mut table = String::from("t_init\tmean_ibleu\tmean_bleu\n");
    for row in &resp.rows {
        table.push_str(&format!(
            "{}\t{:.4}\t{:.4}\n",
            row.t_init, row.mean_ibleu, row.mean_bleu
        ));
    }
    print!("{table}");
    if let Some(path) = output {
        write_atomic(path, table.as_bytes())?;
    }
    Ok(())
}
