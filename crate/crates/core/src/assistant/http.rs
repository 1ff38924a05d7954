//! Chat-completions adapter for OpenAI-style HTTP endpoints.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{BackendError, BackendIdentity, ChatTurn, GenerationParams, HttpConfig, ModelBackend};

pub struct HttpBackend {
    config: HttpConfig,
    client: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct Request<'a> {
    model: &'a str,
    messages: &'a [ChatTurn],
    temperature: f32,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct Response {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        Ok(HttpBackend { config, client })
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.config.endpoint.trim_end_matches('/'))
    }
}

impl ModelBackend for HttpBackend {
    fn identity(&self) -> BackendIdentity {
        BackendIdentity {
            backend: "http".into(),
            model: self.config.model.clone(),
        }
    }

    fn complete(&self, turns: &[ChatTurn], params: &GenerationParams) -> Result<String, BackendError> {
        let body = Request {
            model: &self.config.model,
            messages: turns,
            temperature: params.temperature,
            max_tokens: params.max_tokens,
        };
        let mut req = self.client.post(self.url()).json(&body);
        if let Some(var) = &self.config.api_key_env {
            let key = std::env::var(var)
                .map_err(|_| BackendError::Config(format!("environment variable {var} is not set")))?;
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Err(BackendError::Transport(format!("HTTP {status}: {text}")));
        }
        let parsed: Response = resp.json().map_err(|e| BackendError::BadResponse(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .filter(|c| !c.trim().is_empty())
            .ok_or_else(|| BackendError::BadResponse("no message content".into()))
    }
}
