//! Thin blocking client for the paraphrasing service.

use upsa_api::{
    ErrorResponse, EvaluateRequest, EvaluateResponse, ParaphraseRequest, ParaphraseResponse,
    SweepRequest, SweepResponse, TrainRequest, TrainResponse,
};

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("transport error: {0}")]
    Transport(#[from] reqwest::Error),
    /// The service rejected the request; the message is the service's own.
    #[error("{0}")]
    Rejected(String),
}

pub type Result<T> = std::result::Result<T, ClientError>;

pub struct Client {
    base: String,
    http: reqwest::blocking::Client,
}

impl Client {
    pub fn new(base_url: impl Into<String>) -> Self {
        let base = base_url.into();
        let http = reqwest::blocking::Client::builder()
            .timeout(None) // long annealing runs are expected
            .build()
            .expect("default TLS backend available");
        Client { base: base.trim_end_matches('/').to_string(), http }
    }

    fn post<Req: serde::Serialize, Resp: serde::de::DeserializeOwned>(
        &self,
        path: &str,
        req: &Req,
    ) -> Result<Resp> {
        let resp = self.http.post(format!("{}{path}", self.base)).json(req).send()?;
        if resp.status().is_success() {
            Ok(resp.json()?)
        } else {
            let status = resp.status();
            let message = resp
                .json::<ErrorResponse>()
                .map(|e| e.error)
                .unwrap_or_else(|_| format!("service returned {status}"));
            Err(ClientError::Rejected(message))
        }
    }

    pub fn health(&self) -> Result<()> {
        let resp = self.http.get(format!("{}/v1/health", self.base)).send()?;
        if resp.status().is_success() {
            Ok(())
        } else {
            Err(ClientError::Rejected(format!("health check returned {}", resp.status())))
        }
    }

    pub fn train(&self, req: &TrainRequest) -> Result<TrainResponse> {
        self.post("/v1/train", req)
    }

    pub fn paraphrase(&self, req: &ParaphraseRequest) -> Result<ParaphraseResponse> {
        self.post("/v1/paraphrase", req)
    }

    pub fn evaluate(&self, req: &EvaluateRequest) -> Result<EvaluateResponse> {
        self.post("/v1/evaluate", req)
    }

    pub fn temp_sweep(&self, req: &SweepRequest) -> Result<SweepResponse> {
        self.post("/v1/temp-sweep", req)
    }
}
