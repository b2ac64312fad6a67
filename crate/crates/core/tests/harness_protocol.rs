use std::collections::{BTreeSet, VecDeque};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use async_trait::async_trait;
use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use topicirt::benchmark::{BenchmarkSet, QuestionRecord, Source};
use topicirt::harness::*;
use topicirt::Topic;

enum Step {
    Reply(&'static str),
    Fail(u16),
    Hang,
}

/// Plays a fixed script of outcomes, then keeps replying "A".
struct Scripted {
    steps: Mutex<VecDeque<Step>>,
    calls: AtomicUsize,
}

impl Scripted {
    fn new(steps: Vec<Step>) -> Self {
        Scripted { steps: Mutex::new(steps.into()), calls: AtomicUsize::new(0) }
    }
}

#[async_trait]
impl ChatProvider for Scripted {
    async fn complete(&self, _: &ChatRequest) -> Result<ChatReply, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let step = self.steps.lock().unwrap().pop_front().unwrap_or(Step::Reply("A"));
        tokio::time::sleep(Duration::from_millis(250)).await;
        match step {
            Step::Reply(t) => Ok(ChatReply { text: t.into(), prompt_tokens: 100, completion_tokens: 1 }),
            Step::Fail(status) => Err(ProviderError::Status { status, body: "no".into() }),
            Step::Hang => {
                tokio::time::sleep(Duration::from_secs(3600)).await;
                Err(ProviderError::EmptyBody)
            }
        }
    }
}

fn model() -> ModelSpec {
    ModelSpec::new("vendor/model", "vendor", 0.05, 0.40)
}

#[tokio::test(start_paused = true)]
async fn first_try_success() {
    let p = Scripted::new(vec![Step::Reply("B")]);
    let out = query_model(&p, &model(), "prompt".into(), &InferenceConfig::default()).await;
    assert_eq!(out.attempts, 1);
    assert_eq!(out.status, FinalStatus::Answered);
    assert_eq!(out.reply.unwrap().text, "B");
    assert_eq!(out.latency_secs, 0.25);
}

#[tokio::test(start_paused = true)]
async fn two_failures_then_success() {
    let p = Scripted::new(vec![Step::Fail(503), Step::Fail(429), Step::Reply("C")]);
    let start = tokio::time::Instant::now();
    let out = query_model(&p, &model(), "prompt".into(), &InferenceConfig::default()).await;
    assert_eq!(out.attempts, 3);
    assert_eq!(out.status, FinalStatus::Answered);
    assert_eq!(out.latency_secs, 0.25, "latency covers the final attempt only");
    let elapsed = start.elapsed().as_secs_f64();
    assert!((0.75..=0.75 + 1.0 + 2.0).contains(&elapsed), "{elapsed}");
}

#[tokio::test(start_paused = true)]
async fn three_failures_is_provider_error() {
    let p = Scripted::new(vec![Step::Fail(500), Step::Fail(502), Step::Fail(503), Step::Reply("A")]);
    let out = query_model(&p, &model(), "prompt".into(), &InferenceConfig::default()).await;
    assert_eq!(out.attempts, 3);
    assert_eq!(out.status, FinalStatus::ProviderError);
    assert!(out.reply.is_none());
    assert_eq!(p.calls.load(Ordering::SeqCst), 3);
}

#[tokio::test(start_paused = true)]
async fn client_errors_are_not_retried() {
    let p = Scripted::new(vec![Step::Fail(400)]);
    let out = query_model(&p, &model(), "prompt".into(), &InferenceConfig::default()).await;
    assert_eq!(out.attempts, 1);
    assert_eq!(out.status, FinalStatus::ProviderError);
}

#[tokio::test(start_paused = true)]
async fn hung_attempts_time_out() {
    let p = Scripted::new(vec![Step::Hang, Step::Hang, Step::Hang]);
    let start = tokio::time::Instant::now();
    let out = query_model(&p, &model(), "prompt".into(), &InferenceConfig::default()).await;
    assert_eq!(out.attempts, 3);
    assert_eq!(out.status, FinalStatus::Timeout);
    assert_eq!(out.latency_secs, 120.0);
    assert!(start.elapsed() >= Duration::from_secs(360));

    let p = Scripted::new(vec![Step::Hang, Step::Reply("D")]);
    let out = query_model(&p, &model(), "prompt".into(), &InferenceConfig::default()).await;
    assert_eq!((out.attempts, out.status), (2, FinalStatus::Answered));
}

#[derive(Clone, Default)]
struct Mock {
    calls: Arc<AtomicUsize>,
    seen: Arc<Mutex<Vec<(Option<String>, serde_json::Value)>>>,
}

async fn completions(
    State(mock): State<Mock>,
    headers: HeaderMap,
    Json(body): Json<serde_json::Value>,
) -> (StatusCode, String) {
    let n = mock.calls.fetch_add(1, Ordering::SeqCst);
    let auth = headers.get("authorization").map(|v| v.to_str().unwrap().to_string());
    mock.seen.lock().unwrap().push((auth, body));
    match n {
        0 => (StatusCode::SERVICE_UNAVAILABLE, "busy".into()),
        1 => (StatusCode::OK, String::new()),
        _ => (
            StatusCode::OK,
            r#"{"choices":[{"message":{"role":"assistant","content":" d\n"}}],"usage":{"prompt_tokens":1000,"completion_tokens":100}}"#
                .into(),
        ),
    }
}

#[tokio::test]
async fn http_provider_against_mock_server() {
    let mock = Mock::default();
    let app = Router::new().route("/v1/chat/completions", post(completions)).with_state(mock.clone());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });

    let provider = HttpProvider::new(&format!("http://{addr}/v1/"), Some("sekrit".into()));
    let config = InferenceConfig { backoff_base_secs: 0.001, ..Default::default() };
    let out = query_model(&provider, &model(), "the prompt".into(), &config).await;
    assert_eq!(out.attempts, 3, "503 and empty body are both retried");
    assert_eq!(out.status, FinalStatus::Answered);
    let reply = out.reply.unwrap();
    assert_eq!(parse_answer(&reply.text, &['A', 'B', 'C', 'D']), ParsedAnswer::Letter('D'));
    assert_eq!((reply.prompt_tokens, reply.completion_tokens), (1000, 100));

    let seen = mock.seen.lock().unwrap();
    assert_eq!(seen[0].0.as_deref(), Some("Bearer sekrit"));
    assert_eq!(
        seen[0].1,
        serde_json::json!({
            "model": "vendor/model",
            "messages": [{"role": "user", "content": "the prompt"}],
            "temperature": 0.0,
            "max_tokens": 3000,
            "reasoning": {"effort": "low"}
        })
    );
}

#[tokio::test]
async fn http_provider_reports_connection_failure() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let provider = HttpProvider::new(&format!("http://{addr}"), None);
    let config = InferenceConfig { backoff_base_secs: 0.001, ..Default::default() };
    let out = query_model(&provider, &model(), "p".into(), &config).await;
    assert_eq!(out.attempts, 3);
    assert_eq!(out.status, FinalStatus::ProviderError);
    assert!(out.error.unwrap().starts_with("transport"));
}

fn benchmark(n: usize) -> BenchmarkSet {
    let qs = (0..n)
        .map(|i| QuestionRecord {
            id: format!("q{i}"),
            source: Source::MedQa,
            topic: Some(Topic::ALL[i % 11]),
            stem: format!("Question number {i}?"),
            options: vec!["w".into(), "x".into(), "y".into(), "z".into()],
            answer_key: i % 4,
        })
        .collect();
    BenchmarkSet::from_questions(qs, 1, 0)
}

fn sim_model(id: &str, ability: f64, latency: f64) -> ModelSpec {
    let mut m = ModelSpec::new(id, "sim", 0.15, 0.60);
    m.simulation = Some(SimulationProfile {
        ability,
        topic_offsets: Default::default(),
        latency_secs: latency,
        error_rate: 0.0,
        deviation_rate: 0.0,
    });
    m
}

fn final_set(j: &RunJournal) -> BTreeSet<String> {
    j.records().iter().map(|r| serde_json::to_string(r).unwrap()).collect()
}

fn header(set: &BenchmarkSet) -> JournalHeader {
    JournalHeader::new(set.hash(), InferenceConfig::default(), "2025-06-01T00:00:00Z".parse().unwrap())
}

#[tokio::test(start_paused = true)]
async fn fresh_run_then_idempotent_rerun() {
    let set = benchmark(3);
    let roster = vec![sim_model("m/a", 1.0, 0.5), sim_model("m/b", -1.0, 0.5)];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("journal.jsonl");
    let config = InferenceConfig::default();

    let provider = SimulatedProvider::new(&set.questions, &roster, 11);
    let mut journal = RunJournal::create(&path, header(&set)).unwrap();
    let mut seen = 0;
    let s = run_collection(&set, &roster, &provider, &mut journal, &config, 4, |_| seen += 1).await.unwrap();
    assert_eq!((s.executed, s.skipped, seen), (6, 0, 6));
    assert_eq!(journal.len(), 6);
    drop(journal);

    let provider = SimulatedProvider::new(&set.questions, &roster, 11);
    let mut journal = RunJournal::open(&path).unwrap();
    let s = run_collection(&set, &roster, &provider, &mut journal, &config, 4, |_| {}).await.unwrap();
    assert_eq!((s.executed, s.skipped), (0, 6));
    assert_eq!(provider.calls(), 0);
}

#[tokio::test(start_paused = true)]
async fn every_journal_prefix_resumes_to_the_fresh_result() {
    let set = benchmark(4);
    let roster = vec![sim_model("m/a", 0.5, 0.1), sim_model("m/b", -0.5, 0.2)];
    let dir = tempfile::tempdir().unwrap();
    let config = InferenceConfig::default();

    let fresh_path = dir.path().join("fresh.jsonl");
    let provider = SimulatedProvider::new(&set.questions, &roster, 3);
    let mut fresh = RunJournal::create(&fresh_path, header(&set)).unwrap();
    run_collection(&set, &roster, &provider, &mut fresh, &config, 3, |_| {}).await.unwrap();
    let expected = final_set(&fresh);
    let text = std::fs::read_to_string(&fresh_path).unwrap();

    let cut_points: Vec<usize> = (0..text.len()).filter(|&i| i > text.find('\n').unwrap()).step_by(37).collect();
    for cut in cut_points {
        let path = dir.path().join(format!("cut{cut}.jsonl"));
        std::fs::write(&path, &text[..cut]).unwrap();
        let provider = SimulatedProvider::new(&set.questions, &roster, 3);
        let mut j = RunJournal::open(&path).unwrap();
        let before = j.len();
        let s = run_collection(&set, &roster, &provider, &mut j, &config, 2, |_| {}).await.unwrap();
        assert_eq!(s.executed, 8 - before);
        assert_eq!(provider.calls(), 8 - before);
        assert_eq!(final_set(&j), expected, "cut at byte {cut}");
        assert_eq!(final_set(&RunJournal::open(&path).unwrap()), expected);
    }
}

#[tokio::test(start_paused = true)]
async fn manifest_or_config_mismatch_refuses() {
    let set = benchmark(2);
    let other = benchmark(3);
    let roster = vec![sim_model("m/a", 0.0, 0.0)];
    let dir = tempfile::tempdir().unwrap();
    let provider = SimulatedProvider::new(&set.questions, &roster, 1);
    let mut j = RunJournal::create(&dir.path().join("j.jsonl"), header(&other)).unwrap();
    let err = run_collection(&set, &roster, &provider, &mut j, &InferenceConfig::default(), 1, |_| {}).await;
    assert!(matches!(err, Err(HarnessError::ManifestMismatch { .. })));
    assert_eq!(provider.calls(), 0);

    let mut j = RunJournal::create(&dir.path().join("k.jsonl"), header(&set)).unwrap();
    let changed = InferenceConfig { max_tokens: 10, ..Default::default() };
    let err = run_collection(&set, &roster, &provider, &mut j, &changed, 1, |_| {}).await;
    assert!(matches!(err, Err(HarnessError::ConfigMismatch)));
}

struct Gauge {
    inner: SimulatedProvider,
    in_flight: AtomicUsize,
    peak: AtomicUsize,
}

#[async_trait]
impl ChatProvider for Gauge {
    async fn complete(&self, request: &ChatRequest) -> Result<ChatReply, ProviderError> {
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak.fetch_max(now, Ordering::SeqCst);
        let out = self.inner.complete(request).await;
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        out
    }
}

#[tokio::test(start_paused = true)]
async fn in_flight_requests_respect_the_bound() {
    let set = benchmark(22);
    let roster = vec![sim_model("m/a", 0.0, 1.0), sim_model("m/b", 0.0, 2.0)];
    let dir = tempfile::tempdir().unwrap();
    let gauge = Gauge {
        inner: SimulatedProvider::new(&set.questions, &roster, 9),
        in_flight: AtomicUsize::new(0),
        peak: AtomicUsize::new(0),
    };
    let mut j = RunJournal::create(&dir.path().join("j.jsonl"), header(&set)).unwrap();
    run_collection(&set, &roster, &gauge, &mut j, &InferenceConfig::default(), 5, |_| {}).await.unwrap();
    assert_eq!(j.len(), 44);
    assert_eq!(gauge.peak.load(Ordering::SeqCst), 5);
}

#[tokio::test(start_paused = true)]
async fn flaky_models_record_errors_and_costs_add_up() {
    let set = benchmark(40);
    let mut flaky = sim_model("m/flaky", 0.0, 0.3);
    flaky.simulation.as_mut().unwrap().error_rate = 0.6;
    flaky.simulation.as_mut().unwrap().deviation_rate = 0.3;
    let roster = vec![flaky];
    let dir = tempfile::tempdir().unwrap();
    let provider = SimulatedProvider::new(&set.questions, &roster, 2);
    let mut j = RunJournal::create(&dir.path().join("j.jsonl"), header(&set)).unwrap();
    run_collection(&set, &roster, &provider, &mut j, &InferenceConfig::default(), 8, |_| {}).await.unwrap();

    let statuses: BTreeSet<_> = j.records().iter().map(|r| format!("{:?}", r.final_status)).collect();
    assert!(statuses.contains("ProviderError") && statuses.contains("ParseFailure"), "{statuses:?}");
    for r in j.records() {
        assert!(r.attempts <= 3);
        assert_eq!(r.correct, r.parsed.letter().is_some_and(|c| set.question(&r.question_id).unwrap().answer_letter() == c));
    }
    let total: NanoUsd = j.records().iter().map(|r| r.cost_nano_usd).sum();
    assert_eq!(telemetry(&j)["m/flaky"].total_cost, total);
    let e = eligibility_check(&j, &set, "m/flaky");
    assert_eq!(e.status, EligibilityStatus::Exclude);
}
