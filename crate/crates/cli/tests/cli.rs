mod support;

use std::collections::BTreeMap;
use std::path::Path;

use haystack_core::eval::{EvalRecord, PromptRecord, Status};
use haystack_core::haystack::{read_dataset, read_jsonl, Mode};
use haystacks_cli::pipeline::Context;
use haystacks_cli::transport::UreqTransport;
use support::{tiny_config, write_config, MockServer};

fn no_sleep(_: std::time::Duration) {}

fn haystacks(config: &Path, args: &[&str]) -> i32 {
    let mut argv = vec!["haystacks".to_string(), "--config".into(), config.display().to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    haystacks_cli::run(argv)
}

fn build_through_prompts(ctx: &Context) {
    ctx.gen_base().unwrap();
    ctx.merge().unwrap();
    ctx.mine().unwrap();
    ctx.assemble().unwrap();
    ctx.prompt(Mode::Standard).unwrap();
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    write_config(&tiny_config(&dir.path().join("work")), &cfg_path);
    // Missing upstream output names the prior subcommand.
    assert_eq!(haystacks(&cfg_path, &["merge"]), 3);
    assert_eq!(haystacks(&cfg_path, &["report"]), 3);
    assert_eq!(haystacks(&cfg_path, &["--sizes", "8,12", "gen-base"]), 1);
    assert_eq!(haystacks(&cfg_path, &["--mode", "sideways", "prompt"]), 1);
    assert_eq!(haystacks(&cfg_path, &["no-such-command"]), 1);
    std::fs::write(dir.path().join("bad.toml"), "quota = 0\n").unwrap();
    assert_eq!(haystacks(&dir.path().join("bad.toml"), &["gen-base"]), 1);
    std::fs::write(dir.path().join("unknown.toml"), "colour = 1\n").unwrap();
    assert_eq!(haystacks(&dir.path().join("unknown.toml"), &["gen-base"]), 1);
    assert_eq!(haystacks(&cfg_path, &["gen-base"]), 0);
    assert_eq!(haystacks(&cfg_path, &["mine"]), 3);
}

#[test]
fn rerun_is_a_no_op_and_audit_catches_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    let work = dir.path().join("work");
    write_config(&tiny_config(&work), &cfg_path);
    for step in ["gen-base", "merge", "mine", "assemble"] {
        assert_eq!(haystacks(&cfg_path, &[step]), 0, "{step}");
    }
    let stage = work.join("stages/stage-2.jsonl");
    let before = std::fs::metadata(&stage).unwrap().modified().unwrap();
    let bytes = std::fs::read(&stage).unwrap();
    assert_eq!(haystacks(&cfg_path, &["merge"]), 0);
    assert_eq!(std::fs::metadata(&stage).unwrap().modified().unwrap(), before);
    assert_eq!(std::fs::read(&stage).unwrap(), bytes);
    assert_eq!(haystacks(&cfg_path, &["audit"]), 0);

    // Move one gold id onto a distractor line.
    let path = work.join("dataset-standard.jsonl");
    let original = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<serde_json::Value> = original.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!lines.is_empty());
    let target = &mut lines[0];
    let id = target["id"].as_str().unwrap().to_string();
    let n = target["n"].as_u64().unwrap();
    let gold: Vec<String> = serde_json::from_value(target["gold"].clone()).unwrap();
    let free = (0..n).map(|i| format!("L{i}")).find(|l| !gold.contains(l)).unwrap();
    target["gold"][0] = serde_json::Value::String(free);
    let corrupted: String = lines.iter().map(|v| format!("{v}\n")).collect();
    std::fs::write(&path, corrupted).unwrap();
    let ctx = Context::new(haystacks_cli::resolve_config(&parse(&cfg_path, "audit")).unwrap());
    let err = ctx.audit(Some(Mode::Standard)).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains(&id), "{err}");
    assert_eq!(haystacks(&cfg_path, &["audit"]), 2);
    std::fs::write(&path, original).unwrap();
    assert_eq!(haystacks(&cfg_path, &["audit", "--mode", "standard"]), 0);
}

fn parse(cfg: &Path, command: &str) -> haystacks_cli::Cli {
    use clap::Parser;
    haystacks_cli::Cli::parse_from(["haystacks", "--config", cfg.to_str().unwrap(), command])
}

#[test]
fn padding_scoring_and_reporting() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny_config(&dir.path().join("work"));
    let corpus = dir.path().join("essays.txt");
    let text: String = (0..200)
        .map(|i| format!("Essay sentence number {i} talks about gardens and rivers. "))
        .collect();
    std::fs::write(&corpus, text).unwrap();
    cfg.corpus = Some(corpus);
    let ctx = Context::new(cfg);
    build_through_prompts(&ctx);
    ctx.pad().unwrap();
    let standard = read_dataset(&ctx.dataset_path(Mode::Standard)).unwrap();
    let padded = read_dataset(&ctx.dataset_path(Mode::Padded)).unwrap();
    assert_eq!(standard.len(), padded.len());
    for (s, p) in standard.iter().zip(&padded) {
        assert_eq!(s.gold, p.gold);
        for (a, b) in s.lines.iter().zip(&p.lines) {
            if p.gold.contains(&b.id) {
                assert_eq!(a.text, b.text);
            } else {
                assert!(b.text.starts_with("Essay sentence"), "{}", b.text);
            }
        }
    }
    ctx.audit(None).unwrap();

    let prompts: Vec<PromptRecord> = read_jsonl(&ctx.prompts_path(Mode::Standard)).unwrap();
    let answers = dir.path().join("answers.jsonl");
    let mut body = String::new();
    for p in &prompts {
        // Perfect answers for the smallest size, nothing for the rest.
        if p.n == 8 {
            let ans = format!("<answer>{}</answer>", p.gold.join(","));
            body.push_str(&serde_json::json!({"id": p.id, "answer": ans}).to_string());
            body.push('\n');
        }
    }
    std::fs::write(&answers, body).unwrap();
    ctx.score(Mode::Standard, &answers, "oracle").unwrap();
    let tsv = ctx.report().unwrap();
    let rows: Vec<Vec<&str>> = tsv.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    assert!(!rows.is_empty());
    for r in rows {
        let expected = if r[2] == "8" { "1.0000" } else { "0.0000" };
        assert_eq!(r[5], expected, "{r:?}");
    }
}

#[test]
fn query_retries_and_caches() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = Context::new(tiny_config(&dir.path().join("work")));
    build_through_prompts(&ctx);
    let prompts: Vec<PromptRecord> = read_jsonl(&ctx.prompts_path(Mode::Standard)).unwrap();
    let unique = prompts.iter().map(|p| &p.prompt).collect::<std::collections::BTreeSet<_>>().len();

    // The first two requests fail with a retryable status.
    let server = MockServer::start(|i, _| {
        if i < 2 {
            (503, "busy".into())
        } else {
            (200, "<answer>L0, L1</answer>".into())
        }
    });
    let endpoint = server.endpoint("mock");
    ctx.query(Mode::Standard, &endpoint, &UreqTransport::new(), &no_sleep).unwrap();
    assert_eq!(server.requests(), unique + 2);
    let records: Vec<EvalRecord> = read_jsonl(&ctx.eval_path("mock", Mode::Standard)).unwrap();
    assert_eq!(records.len(), prompts.len());
    assert_eq!(records.iter().map(|r| r.retries).sum::<u32>(), 2);
    assert!(records.iter().all(|r| r.status == Status::Ok && !r.cached));

    ctx.query(Mode::Standard, &endpoint, &UreqTransport::new(), &no_sleep).unwrap();
    assert_eq!(server.requests(), unique + 2);
    let again: Vec<EvalRecord> = read_jsonl(&ctx.eval_path("mock", Mode::Standard)).unwrap();
    assert!(again.iter().all(|r| r.cached));
    let scores = |rs: &[EvalRecord]| rs.iter().map(|r| (r.id.clone(), r.score)).collect::<BTreeMap<_, _>>();
    assert_eq!(scores(&records), scores(&again));
}

#[test]
fn client_errors_are_not_retried() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = Context::new(tiny_config(&dir.path().join("work")));
    build_through_prompts(&ctx);
    let server = MockServer::start(|_, _| (401, "no".into()));
    ctx.query(Mode::Standard, &server.endpoint("deny"), &UreqTransport::new(), &no_sleep)
        .unwrap();
    let records: Vec<EvalRecord> = read_jsonl(&ctx.eval_path("deny", Mode::Standard)).unwrap();
    assert!(!records.is_empty());
    assert!(records.iter().all(|r| r.status == Status::TransportError && r.retries == 0));
    let prompts: Vec<PromptRecord> = read_jsonl(&ctx.prompts_path(Mode::Standard)).unwrap();
    let distinct = prompts.iter().map(|p| &p.prompt).collect::<std::collections::BTreeSet<_>>().len();
    assert_eq!(server.requests(), distinct);
    let tsv = ctx.report().unwrap();
    assert!(tsv.lines().skip(1).all(|l| l.split('\t').nth(4) == Some("0")));
}
