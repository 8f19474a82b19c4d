//! Model querying over a pluggable HTTP transport, with an on-disk response
//! cache and exponential backoff.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::prompt::PromptRecord;
use super::score::{parse_answer, score, Ratio, Status};
use crate::haystack::Mode;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestStyle {
    /// `{"model", "messages": [{"role": "user", "content": prompt}]}`
    #[default]
    Chat,
    /// `{"model", "prompt": prompt}`
    Completion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EndpointConfig {
    pub name: String,
    pub base_url: String,
    pub path: String,
    pub model: String,
    pub style: RequestStyle,
    /// JSON pointer to the generated text in the response body.
    pub response_pointer: String,
    /// Environment variable holding the API token; no auth header if unset.
    pub token_env: Option<String>,
    pub auth_header: String,
    pub auth_scheme: String,
    pub timeout_secs: u64,
    pub max_retries: u32,
    pub backoff_ms: u64,
    pub max_backoff_ms: u64,
    pub concurrency: usize,
    pub temperature: Option<f64>,
    pub max_tokens: Option<u32>,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            name: "default".into(),
            base_url: "http://127.0.0.1:8000".into(),
            path: "/v1/chat/completions".into(),
            model: "model".into(),
            style: RequestStyle::Chat,
            response_pointer: "/choices/0/message/content".into(),
            token_env: None,
            auth_header: "Authorization".into(),
            auth_scheme: "Bearer".into(),
            timeout_secs: 120,
            max_retries: 5,
            backoff_ms: 500,
            max_backoff_ms: 30_000,
            concurrency: 4,
            temperature: Some(0.0),
            max_tokens: Some(64),
        }
    }
}

impl EndpointConfig {
    pub fn url(&self) -> String {
        format!("{}{}", self.base_url.trim_end_matches('/'), self.path)
    }

    pub fn request_body(&self, prompt: &str) -> String {
        let mut body = serde_json::Map::new();
        body.insert("model".into(), self.model.clone().into());
        match self.style {
            RequestStyle::Chat => {
                body.insert(
                    "messages".into(),
                    serde_json::json!([{ "role": "user", "content": prompt }]),
                );
            }
            RequestStyle::Completion => {
                body.insert("prompt".into(), prompt.into());
            }
        }
        if let Some(t) = self.temperature {
            body.insert("temperature".into(), t.into());
        }
        if let Some(m) = self.max_tokens {
            body.insert("max_tokens".into(), m.into());
        }
        serde_json::Value::Object(body).to_string()
    }

    pub fn extract_text(&self, body: &str) -> Result<String> {
        let v: serde_json::Value = serde_json::from_str(body)?;
        v.pointer(&self.response_pointer)
            .and_then(|t| t.as_str())
            .map(str::to_string)
            .ok_or_else(|| Error::Config(format!("no text at `{}` in the response", self.response_pointer)))
    }

    fn headers(&self) -> Vec<(String, String)> {
        let mut h = vec![("Content-Type".to_string(), "application/json".to_string())];
        if let Some(token) = self.token_env.as_deref().and_then(|var| std::env::var(var).ok()) {
            let value = if self.auth_scheme.is_empty() {
                token
            } else {
                format!("{} {token}", self.auth_scheme)
            };
            h.push((self.auth_header.clone(), value));
        }
        h
    }

    /// Delay before retry number `attempt` (0-based).
    pub fn backoff(&self, attempt: u32) -> Duration {
        let ms = self.backoff_ms.saturating_mul(1u64 << attempt.min(20));
        Duration::from_millis(ms.min(self.max_backoff_ms))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// Sends one POST. `Err` means the request never got an HTTP answer.
pub trait Transport: Sync {
    fn post(
        &self,
        url: &str,
        headers: &[(String, String)],
        body: &str,
        timeout: Duration,
    ) -> std::result::Result<HttpResponse, String>;
}

/// One file per prompt, named by sha256(model, prompt).
#[derive(Clone, Debug)]
pub struct ResponseCache {
    dir: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    model: String,
    response: String,
}

static CACHE_WRITES: AtomicUsize = AtomicUsize::new(0);

impl ResponseCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(ResponseCache { dir })
    }

    pub fn key(model: &str, prompt: &str) -> String {
        let mut h = Sha256::new();
        h.update(model.as_bytes());
        h.update([0]);
        h.update(prompt.as_bytes());
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, model: &str, prompt: &str) -> Option<String> {
        let text = std::fs::read_to_string(self.path(&Self::key(model, prompt))).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        (entry.model == model).then_some(entry.response)
    }

    pub fn put(&self, model: &str, prompt: &str, response: &str) -> Result<()> {
        let key = Self::key(model, prompt);
        let entry = CacheEntry {
            model: model.to_string(),
            response: response.to_string(),
        };
        let n = CACHE_WRITES.fetch_add(1, Ordering::Relaxed);
        let tmp = self.dir.join(format!(".{key}.{}.{n}", std::process::id()));
        std::fs::write(&tmp, serde_json::to_vec(&entry)?)?;
        std::fs::rename(&tmp, self.path(&key))?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    pub model: String,
    pub mode: Mode,
    pub n: usize,
    pub k: usize,
    pub evidence_count: usize,
    pub raw: Option<String>,
    pub prediction: Vec<String>,
    pub gold: Vec<String>,
    pub status: Status,
    pub jaccard: Option<Ratio>,
    pub score: Option<f64>,
    pub retries: u32,
    pub cached: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Scores a raw model output against a prompt's gold ids.
pub fn evaluate_output(prompt: &PromptRecord, model: &str, raw: &str) -> Result<EvalRecord> {
    let (pred, status) = parse_answer(raw);
    let gold = prompt.gold.iter().cloned().collect();
    let j = score(&pred, &gold)?;
    Ok(EvalRecord {
        id: prompt.id.clone(),
        model: model.to_string(),
        mode: prompt.mode,
        n: prompt.n,
        k: prompt.k,
        evidence_count: prompt.evidence_count,
        raw: Some(raw.to_string()),
        prediction: pred.into_iter().collect::<Vec<_>>(),
        gold: prompt.gold.clone(),
        status,
        jaccard: Some(j),
        score: Some(j.to_f64()),
        retries: 0,
        cached: false,
        error: None,
    })
}

struct Reply {
    text: std::result::Result<String, String>,
    retries: u32,
    cached: bool,
}

fn transient(status: u16) -> bool {
    status == 408 || status == 429 || status >= 500
}

fn ask(
    cfg: &EndpointConfig,
    prompt: &str,
    transport: &dyn Transport,
    sleep: &(dyn Fn(Duration) + Sync),
) -> Reply {
    let url = cfg.url();
    let headers = cfg.headers();
    let body = cfg.request_body(prompt);
    let timeout = Duration::from_secs(cfg.timeout_secs);
    let mut retries = 0;
    loop {
        let failure = match transport.post(&url, &headers, &body, timeout) {
            Ok(r) if (200..300).contains(&r.status) => {
                let text = cfg.extract_text(&r.body).map_err(|e| e.to_string());
                return Reply { text, retries, cached: false };
            }
            Ok(r) if !transient(r.status) => {
                return Reply {
                    text: Err(format!("HTTP {}: {}", r.status, r.body.chars().take(200).collect::<String>())),
                    retries,
                    cached: false,
                }
            }
            Ok(r) => format!("HTTP {}", r.status),
            Err(e) => e,
        };
        if retries >= cfg.max_retries {
            return Reply {
                text: Err(format!("gave up after {retries} retries: {failure}")),
                retries,
                cached: false,
            };
        }
        sleep(cfg.backoff(retries));
        retries += 1;
    }
}

/// Queries every distinct prompt once (cache first), with at most
/// `cfg.concurrency` requests in flight. Records come back sorted by id.
pub fn query_model(
    cfg: &EndpointConfig,
    prompts: &[PromptRecord],
    transport: &dyn Transport,
    cache: Option<&ResponseCache>,
    sleep: &(dyn Fn(Duration) + Sync),
) -> Result<Vec<EvalRecord>> {
    let mut unique: Vec<&str> = prompts.iter().map(|p| p.prompt.as_str()).collect();
    unique.sort_unstable();
    unique.dedup();
    let replies: Mutex<BTreeMap<&str, Reply>> = Mutex::new(BTreeMap::new());
    let next = AtomicUsize::new(0);
    let cache_error: Mutex<Option<Error>> = Mutex::new(None);
    std::thread::scope(|s| {
        for _ in 0..cfg.concurrency.max(1).min(unique.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&prompt) = unique.get(i) else { break };
                let reply = match cache.and_then(|c| c.get(&cfg.model, prompt)) {
                    Some(text) => Reply {
                        text: Ok(text),
                        retries: 0,
                        cached: true,
                    },
                    None => {
                        let r = ask(cfg, prompt, transport, sleep);
                        if let (Some(c), Ok(text)) = (cache, &r.text) {
                            if let Err(e) = c.put(&cfg.model, prompt, text) {
                                cache_error.lock().unwrap().get_or_insert(e);
                            }
                        }
                        r
                    }
                };
                replies.lock().unwrap().insert(prompt, reply);
            });
        }
    });
    if let Some(e) = cache_error.into_inner().unwrap() {
        return Err(e);
    }
    let replies = replies.into_inner().unwrap();
    let mut records = Vec::with_capacity(prompts.len());
    for p in prompts {
        let reply = &replies[p.prompt.as_str()];
        let record = match &reply.text {
            Ok(text) => EvalRecord {
                retries: reply.retries,
                cached: reply.cached,
                ..evaluate_output(p, &cfg.model, text)?
            },
            Err(e) => EvalRecord {
                id: p.id.clone(),
                model: cfg.model.clone(),
                mode: p.mode,
                n: p.n,
                k: p.k,
                evidence_count: p.evidence_count,
                raw: None,
                prediction: Vec::new(),
                gold: p.gold.clone(),
                status: Status::TransportError,
                jaccard: None,
                score: None,
                retries: reply.retries,
                cached: false,
                error: Some(e.clone()),
            },
        };
        records.push(record);
    }
    records.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(records)
}
