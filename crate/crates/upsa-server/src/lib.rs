//! HTTP service exposing the paraphrasing pipeline.
//!
//! The service is stateless: every request carries its model artifacts
//! (base64-encoded binary containers plus text vocabularies and embedding
//! tables), so identical requests always produce identical responses and
//! any number of clients can share one instance.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, Json};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::Router;
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;

use upsa_api::{
    ErrorResponse, EvaluateRequest, EvaluateResponse, ModelBundle, ParaphraseRequest,
    ParaphraseResponse, Report, RunConfig, SweepRequest, SweepResponse, SweepRow, TrainRequest,
    TrainResponse,
};
use upsa_core::anneal::AnnealingSchedule;
use upsa_core::embed::EmbeddingTable;
use upsa_core::generate::GeneratorConfig;
use upsa_core::keywords::StopwordList;
use upsa_core::metrics::{corpus_report, IbleuConfig};
use upsa_core::ngram::LanguageModel;
use upsa_core::objective::ObjectiveWeights;
use upsa_core::pipeline::{
    parse_eval_tsv, parse_sweep_tsv, temp_sweep, train_artifacts, Artifacts, Paraphraser,
    RunOptions, DEFAULT_SWEEP_GRID,
};
use upsa_core::text::vocabulary_from_text;

type ApiError = (StatusCode, Json<ErrorResponse>);

fn data_error(message: impl Into<String>) -> ApiError {
    (StatusCode::UNPROCESSABLE_ENTITY, Json(ErrorResponse { error: message.into() }))
}

fn map_core(err: upsa_core::Error) -> ApiError {
    data_error(err.to_string())
}

/// Translates the wire config into the pipeline's option structs.
pub fn run_options(cfg: &RunConfig) -> RunOptions {
    RunOptions {
        weights: ObjectiveWeights {
            p: cfg.p,
            q: cfg.q,
            s: cfg.s,
            use_sem_key: !cfg.no_sem_key,
            use_sem_sen: !cfg.no_sem_sen,
            use_exp: !cfg.no_exp,
            raw_fluency: cfg.raw_fluency,
        },
        generator: GeneratorConfig {
            top_k: cfg.top_k,
            min_length: cfg.min_length,
            max_length: None,
            copy: !cfg.no_copy,
        },
        schedule: AnnealingSchedule {
            t_init: cfg.t_init,
            decay: cfg.c_rate,
            iterations: cfg.iters,
            fixed: cfg.fixed_temp,
        },
        max_keywords: cfg.max_keywords,
        seed: cfg.seed,
    }
}

fn load_bundle(bundle: &ModelBundle) -> Result<Artifacts, ApiError> {
    let vocab = Arc::new(vocabulary_from_text(&bundle.vocab).map_err(map_core)?);
    let decode = |field: &str, b64: &str| -> Result<LanguageModel, ApiError> {
        let bytes = BASE64
            .decode(b64)
            .map_err(|_| data_error(format!("{field}: invalid base64 payload")))?;
        LanguageModel::load(&bytes).map_err(map_core)
    };
    let forward = Arc::new(decode("forward", &bundle.forward)?);
    let backward = Arc::new(decode("backward", &bundle.backward)?);
    if forward.vocab().as_ref() != vocab.as_ref() || backward.vocab().as_ref() != vocab.as_ref() {
        return Err(data_error("model vocabularies do not match the vocabulary file"));
    }
    Ok(Artifacts { vocab, forward, backward })
}

fn build_engine(
    models: &ModelBundle,
    embeddings: &str,
    stopwords: Option<&str>,
) -> Result<Paraphraser, ApiError> {
    let artifacts = load_bundle(models)?;
    let embeddings = Arc::new(EmbeddingTable::parse(embeddings.as_bytes()).map_err(map_core)?);
    let stopwords = Arc::new(match stopwords {
        Some(text) => StopwordList::from_lines(text).map_err(map_core)?,
        None => StopwordList::default(),
    });
    Ok(Paraphraser { artifacts, embeddings, stopwords })
}

async fn health() -> &'static str {
    "ok"
}

async fn train(Json(req): Json<TrainRequest>) -> Result<Json<TrainResponse>, ApiError> {
    let result = tokio::task::spawn_blocking(move || {
        let artifacts = train_artifacts(&req.corpus, req.order, req.min_count)?;
        Ok::<_, upsa_core::Error>((artifacts, req.corpus.len()))
    })
    .await
    .map_err(|e| data_error(e.to_string()))?;
    let (artifacts, sentences) = result.map_err(map_core)?;
    Ok(Json(TrainResponse {
        vocab: upsa_core::text::vocabulary_to_text(&artifacts.vocab),
        forward: BASE64.encode(artifacts.forward.save()),
        backward: BASE64.encode(artifacts.backward.save()),
        vocab_size: artifacts.vocab.len(),
        sentences,
    }))
}

async fn paraphrase(
    Json(req): Json<ParaphraseRequest>,
) -> Result<Json<ParaphraseResponse>, ApiError> {
    tokio::task::spawn_blocking(move || {
        let engine = build_engine(&req.models, &req.embeddings, req.stopwords.as_deref())?;
        let opts = run_options(&req.config);
        let results = engine.paraphrase_batch(&req.inputs, &opts).map_err(map_core)?;
        let (outputs, traces): (Vec<String>, Vec<String>) =
            results.into_iter().map(|(out, trace)| (out, trace.to_jsonl())).unzip();
        Ok(Json(ParaphraseResponse {
            outputs,
            traces: req.with_trace.then_some(traces),
        }))
    })
    .await
    .map_err(|e| data_error(e.to_string()))?
}

async fn evaluate(Json(req): Json<EvaluateRequest>) -> Result<Json<EvaluateResponse>, ApiError> {
    if !(0.0..=1.0).contains(&req.alpha) {
        return Err(data_error(format!("alpha {} outside [0, 1]", req.alpha)));
    }
    let cases = parse_eval_tsv(&req.tsv).map_err(map_core)?;
    let report = corpus_report(&cases, IbleuConfig { alpha: req.alpha, ..Default::default() })
        .map_err(map_core)?;
    Ok(Json(EvaluateResponse {
        report: Report {
            bleu: report.bleu,
            ibleu: report.ibleu,
            rouge1: report.rouge1,
            rouge2: report.rouge2,
            cases: report.cases,
        },
    }))
}

async fn sweep(Json(req): Json<SweepRequest>) -> Result<Json<SweepResponse>, ApiError> {
    tokio::task::spawn_blocking(move || {
        let engine = build_engine(&req.models, &req.embeddings, req.stopwords.as_deref())?;
        let rows = parse_sweep_tsv(&req.tsv).map_err(map_core)?;
        let opts = run_options(&req.config);
        let grid: Vec<f64> = if req.t_inits.is_empty() {
            DEFAULT_SWEEP_GRID.to_vec()
        } else {
            req.t_inits.clone()
        };
        let result =
            temp_sweep(&engine, &rows, &opts, &grid, req.config.alpha).map_err(map_core)?;
        Ok(Json(SweepResponse {
            rows: result
                .into_iter()
                .map(|r| SweepRow {
                    t_init: r.t_init,
                    mean_ibleu: r.mean_ibleu,
                    mean_bleu: r.mean_bleu,
                })
                .collect(),
        }))
    })
    .await
    .map_err(|e| data_error(e.to_string()))?
}

pub fn router() -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/train", post(train))
        .route("/v1/paraphrase", post(paraphrase))
        .route("/v1/evaluate", post(evaluate))
        .route("/v1/temp-sweep", post(sweep))
        // corpora and model payloads are large for JSON bodies
        .layer(DefaultBodyLimit::max(256 * 1024 * 1024))
}

/// Binds the service and returns the local address together with the serve
/// future. The caller decides how to drive it (dedicated runtime, spawned
/// task, ...).
pub async fn bind(addr: SocketAddr) -> std::io::Result<(SocketAddr, tokio::net::TcpListener)> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    Ok((local, listener))
}

pub async fn serve(listener: tokio::net::TcpListener) -> std::io::Result<()> {
    tracing::info!("serving on {}", listener.local_addr()?);
    axum::serve(listener, router()).await
}
