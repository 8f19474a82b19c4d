//! A scripted HTTP endpoint and a small run configuration.
#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use haystack_core::eval::EndpointConfig;
use haystacks_cli::config::{MiningSection, StagesSection};
use haystacks_cli::RunConfig;

type Script = dyn Fn(usize, &str) -> (u16, String) + Send + Sync;

pub struct MockServer {
    pub url: String,
    requests: Arc<AtomicUsize>,
}

impl MockServer {
    /// `script(request_index, prompt)` gives the status and the reply text.
    pub fn start(script: impl Fn(usize, &str) -> (u16, String) + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let requests = Arc::new(AtomicUsize::new(0));
        let counter = requests.clone();
        let script: Arc<Script> = Arc::new(script);
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let Some(body) = read_request(&mut stream) else { continue };
                let i = counter.fetch_add(1, Ordering::SeqCst);
                let prompt = serde_json::from_str::<serde_json::Value>(&body)
                    .ok()
                    .and_then(|v| v.pointer("/messages/0/content").and_then(|c| c.as_str()).map(String::from))
                    .unwrap_or_default();
                let (status, text) = script(i, &prompt);
                let payload = if status == 200 {
                    serde_json::json!({"choices": [{"message": {"role": "assistant", "content": text}}]}).to_string()
                } else {
                    serde_json::json!({"error": text}).to_string()
                };
                let reply = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                    payload.len()
                );
                let _ = stream.write_all(reply.as_bytes());
            }
        });
        MockServer { url, requests }
    }

    pub fn requests(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    pub fn endpoint(&self, name: &str) -> EndpointConfig {
        EndpointConfig {
            name: name.into(),
            base_url: self.url.clone(),
            model: "mock-model".into(),
            timeout_secs: 10,
            backoff_ms: 0,
            max_backoff_ms: 0,
            max_retries: 3,
            concurrency: 2,
            ..EndpointConfig::default()
        }
    }
}

fn read_request(stream: &mut std::net::TcpStream) -> Option<String> {
    let mut reader = BufReader::new(stream);
    let mut length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).ok()? == 0 {
            return None;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                length = v.trim().parse().ok()?;
            }
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body).ok()?;
    String::from_utf8(body).ok()
}

/// A run small enough for debug-build tests.
pub fn tiny_config(workdir: &Path) -> RunConfig {
    let mut cfg = RunConfig {
        seed: 17,
        workdir: workdir.to_path_buf(),
        sizes: vec![8, 16],
        quota: 3,
        stages: StagesSection {
            k: 6,
            base_size: 12,
            max_stage: 2,
            ..StagesSection::default()
        },
        mining: MiningSection {
            hypotheses_per_premise: 16,
            ..MiningSection::default()
        },
        ..RunConfig::default()
    };
    cfg.grammar.room_size = 6;
    cfg
}

pub fn write_config(cfg: &RunConfig, path: &Path) {
    std::fs::write(path, toml::to_string(cfg).unwrap()).unwrap();
}
