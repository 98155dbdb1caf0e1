//! Chat-completion agent over HTTP.
//!
//! Wire format: OpenAI-style `{model, messages, temperature, top_p}` POSTed
//! to the configured endpoint; the first choice's message content is the
//! agent output. Requests are stateless: every call carries the full
//! prompt, and nothing from prior responses alters later requests.

use std::time::Duration;

use serde::Deserialize;

use super::{
    build_assess_prompt, build_debate_prompt, parse_verdict, AgentBackend, AgentError,
    AgentRequest, InferenceSettings, Verdict, VerdictLabel,
};

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    /// Full URL of the chat-completions endpoint.
    pub endpoint: String,
    pub model: String,
    /// Bearer token; callers load it from the environment, never from
    /// flags or config files.
    pub api_key: Option<String>,
    pub settings: InferenceSettings,
    /// Transient-failure retries per call (connect errors and 5xx).
    pub max_retries: u32,
    pub backoff_ms: u64,
    pub timeout_ms: u64,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        RemoteConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key: None,
            settings: InferenceSettings::default(),
            max_retries: 2,
            backoff_ms: 200,
            timeout_ms: 30_000,
        }
    }
}

pub struct RemoteAgent {
    config: RemoteConfig,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: String,
}

const FORMAT_REMINDER: &str = "\n\nREMINDER: Line 1 must start with exactly one of \
\"Yes\", \"No\", \"Maybe Yes\", \"Maybe No\". Line 2 is one sentence of rationale.";

impl RemoteAgent {
    pub fn new(config: RemoteConfig) -> Result<Self, AgentError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| AgentError::Backend(e.to_string()))?;
        Ok(RemoteAgent { config, client })
    }

    fn call(&self, system: &str, user: &str) -> Result<String, AgentError> {
        let body = serde_json::json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "temperature": self.config.settings.temperature,
            "top_p": self.config.settings.top_p,
        });
        let attempts = self.config.max_retries + 1;
        let mut last_error = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(self.config.backoff_ms * attempt as u64));
            }
            let mut request = self.client.post(&self.config.endpoint).json(&body);
            if let Some(key) = &self.config.api_key {
                request = request.header("Authorization", format!("Bearer {key}"));
            }
            match request.send() {
                Ok(response) => {
                    let status = response.status();
                    if status.is_success() {
                        let parsed: ChatResponse = response
                            .json()
                            .map_err(|e| AgentError::Remote {
                                attempts: attempt + 1,
                                message: format!("malformed completion response: {e}"),
                            })?;
                        return parsed
                            .choices
                            .into_iter()
                            .next()
                            .map(|c| c.message.content)
                            .ok_or_else(|| AgentError::Remote {
                                attempts: attempt + 1,
                                message: "completion response has no choices".into(),
                            });
                    }
                    if status.is_server_error() {
                        last_error = format!("HTTP {status}");
                        continue;
                    }
                    return Err(AgentError::Remote {
                        attempts: attempt + 1,
                        message: format!("HTTP {status}"),
                    });
                }
                Err(e) => {
                    last_error = e.to_string();
                    continue;
                }
            }
        }
        Err(AgentError::Remote { attempts, message: last_error })
    }

    /// One call plus one format-reminder re-ask; a second unparseable
    /// answer coerces to `Maybe No` so the debate path engages.
    fn ask(&self, system: &str, user: &str) -> Result<Verdict, AgentError> {
        let first = self.call(system, user)?;
        match parse_verdict(&first) {
            Ok(verdict) => Ok(verdict),
            Err(_) => {
                let reminded = format!("{user}{FORMAT_REMINDER}");
                let second = self.call(system, &reminded)?;
                Ok(parse_verdict(&second).unwrap_or_else(|_| {
                    Verdict::new(
                        VerdictLabel::MaybeNo,
                        "Output did not follow the label protocol; treated as uncertain.",
                    )
                }))
            }
        }
    }
}

impl AgentBackend for RemoteAgent {
    fn assess(&self, req: &AgentRequest) -> Result<Verdict, AgentError> {
        let (system, user) = build_assess_prompt(req)?;
        self.ask(&system, &user)
    }

    fn debate(&self, req: &AgentRequest) -> Result<Verdict, AgentError> {
        let (system, user) = build_debate_prompt(req)?;
        self.ask(&system, &user)
    }

    fn name(&self) -> String {
        format!("remote({})", self.config.model)
    }
}
