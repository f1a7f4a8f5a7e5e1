//! Data expert backed by an HTTP chat-completion endpoint.

use std::time::Duration;

use serde_json::{json, Value};

use super::{data_prompt, DataExpert, ExpertRole, ItemRequest, Produced, RemoteConfig, TransportError};
use crate::model::GeneratorKind;

pub struct RemoteExpert {
    config: RemoteConfig,
    agent: ureq::Agent,
    token: Option<String>,
}

impl RemoteExpert {
    pub fn new(config: RemoteConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        let token = std::env::var(&config.token_env).ok().filter(|t| !t.is_empty());
        RemoteExpert { config, agent, token }
    }

    fn call(&self, body: &Value) -> Result<Value, Attempt> {
        let mut request = self.agent.post(&self.config.endpoint);
        if let Some(token) = &self.token {
            request = request.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = request
            .send_json(body)
            .map_err(|e| Attempt::Retry(e.to_string()))?;
        let status = response.status().as_u16();
        if status == 429 || status >= 500 {
            return Err(Attempt::Retry(format!("HTTP {status}")));
        }
        if status >= 400 {
            return Err(Attempt::Fatal(format!("HTTP {status}")));
        }
        response
            .body_mut()
            .read_json::<Value>()
            .map_err(|e| Attempt::Fatal(format!("unreadable response: {e}")))
    }
}

enum Attempt {
    Retry(String),
    Fatal(String),
}

/// Pulls the first JSON object out of a model reply, tolerating code fences
/// and surrounding prose.
pub fn extract_json(reply: &str) -> Option<Value> {
    let start = reply.find('{')?;
    let end = reply.rfind('}')?;
    serde_json::from_str(reply.get(start..=end)?).ok()
}

impl DataExpert for RemoteExpert {
    fn kind(&self) -> GeneratorKind {
        GeneratorKind::Remote
    }

    fn max_in_flight(&self) -> usize {
        self.config.max_in_flight.max(1)
    }

    fn produce(&self, request: &ItemRequest<'_>) -> Result<Produced, TransportError> {
        let prompt = data_prompt(request.template, request.topic, request.index);
        let body = json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": ExpertRole::DataExpert.system_message()},
                {"role": "user", "content": prompt},
            ],
            "seed": request.seed,
        });
        let mut last = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(200 << attempt.min(5)));
            }
            match self.call(&body) {
                Ok(reply) => {
                    let text = reply
                        .pointer("/choices/0/message/content")
                        .and_then(Value::as_str)
                        .unwrap_or_default();
                    // An unparseable reply is a generation fault, not a transport
                    // one: hand back a null document so the filter drops it.
                    let content = extract_json(text).unwrap_or(Value::Null);
                    return Ok(Produced { content, prompt: Some(prompt) });
                }
                Err(Attempt::Fatal(message)) => return Err(TransportError(message)),
                Err(Attempt::Retry(message)) => last = message,
            }
        }
        Err(TransportError(format!(
            "{} after {} attempts: {last}",
            self.config.endpoint,
            self.config.max_retries + 1
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_is_found_inside_fences() {
        let v = extract_json("Here you go:\n```json\n{\"title\": \"x\"}\n```").unwrap();
        assert_eq!(v["title"], "x");
        assert!(extract_json("no json here").is_none());
    }
}
