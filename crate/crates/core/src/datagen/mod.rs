//! Raw-data generation: a pluggable data expert produces content documents
//! for a chart type and topic; anything that fails the template or the data
//! invariants is dropped and counted.

pub mod procedural;
#[cfg(feature = "remote")]
pub mod remote;
pub mod series;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use series::{procedural_series, SeriesShape};

use crate::error::{Error, Result};
use crate::model::{
    get_template, validate_document, ChartContent, ChartData, ChartTemplate, ChartType,
    GeneratorKind, Provenance, TopicSet, Violation,
};
use crate::rng::{derive_seed, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpertRole {
    JsonExpert,
    DataExpert,
    StyleExpert,
}

impl ExpertRole {
    pub const ALL: [ExpertRole; 3] = [ExpertRole::JsonExpert, ExpertRole::DataExpert, ExpertRole::StyleExpert];

    pub fn system_message(self) -> &'static str {
        match self {
            ExpertRole::JsonExpert => include_str!("../../prompts/json_expert.txt"),
            ExpertRole::DataExpert => include_str!("../../prompts/data_expert.txt"),
            ExpertRole::StyleExpert => include_str!("../../prompts/style_expert.txt"),
        }
    }
}

/// User prompt for the data expert: template, README and topic.
pub fn data_prompt(template: &ChartTemplate, topic: &str, index: usize) -> String {
    let template_json =
        serde_json::to_string_pretty(&template.skeleton.to_json()).expect("skeleton serializes");
    format!(
        "Chart type: {}\nTopic: {topic}\nVariant: {index}\n\nTemplate:\n{template_json}\n\nREADME:\n{}\n",
        template.chart_type.id(),
        template.readme.trim_end(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    /// Chat-completion endpoint URL.
    pub endpoint: String,
    pub model: String,
    #[serde(default = "RemoteConfig::default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "RemoteConfig::default_retries")]
    pub max_retries: u32,
    #[serde(default = "RemoteConfig::default_in_flight")]
    pub max_in_flight: usize,
    /// Environment variable holding the bearer token.
    #[serde(default = "RemoteConfig::default_token_env")]
    pub token_env: String,
}

impl RemoteConfig {
    fn default_timeout() -> u64 {
        60
    }
    fn default_retries() -> u32 {
        3
    }
    fn default_in_flight() -> usize {
        4
    }
    fn default_token_env() -> String {
        "CHARTSYNTH_API_KEY".into()
    }

    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        RemoteConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            timeout_secs: Self::default_timeout(),
            max_retries: Self::default_retries(),
            max_in_flight: Self::default_in_flight(),
            token_env: Self::default_token_env(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remote: Option<RemoteConfig>,
    /// Items per chart type (M).
    pub batch_size: usize,
}

impl GeneratorConfig {
    pub fn procedural(seed: u64, batch_size: usize) -> Self {
        GeneratorConfig {
            kind: GeneratorKind::Procedural,
            seed,
            remote: None,
            batch_size,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        match (self.kind, &self.remote) {
            (GeneratorKind::Remote, None) => Err(Error::InvalidArgument(
                "remote generation needs endpoint settings".into(),
            )),
            (GeneratorKind::Procedural, Some(_)) => Err(Error::InvalidArgument(
                "remote settings given for the procedural generator".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// One generation request.
#[derive(Debug, Clone)]
pub struct ItemRequest<'a> {
    pub chart_type: ChartType,
    pub template: &'a ChartTemplate,
    pub topic: &'a str,
    pub index: usize,
    pub seed: u64,
}

/// What a data expert returns for one item.
#[derive(Debug, Clone)]
pub struct Produced {
    /// Content document, to be checked against the template.
    pub content: Value,
    /// Prompt sent to a remote model, kept for auditing.
    pub prompt: Option<String>,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("{0}")]
pub struct TransportError(pub String);

pub trait DataExpert: Sync {
    fn kind(&self) -> GeneratorKind;

    fn produce(&self, request: &ItemRequest<'_>) -> Result<Produced, TransportError>;

    /// Upper bound on concurrent `produce` calls.
    fn max_in_flight(&self) -> usize {
        usize::MAX
    }
}

pub struct ProceduralExpert;

impl DataExpert for ProceduralExpert {
    fn kind(&self) -> GeneratorKind {
        GeneratorKind::Procedural
    }

    fn produce(&self, request: &ItemRequest<'_>) -> Result<Produced, TransportError> {
        let mut rng = stream(request.seed);
        let content = procedural::build_content(request.chart_type, request.topic, &mut rng);
        Ok(Produced {
            content: content.to_document(request.chart_type),
            prompt: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub index: usize,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RejectionReport {
    pub attempted: usize,
    pub rejected: usize,
    pub items: Vec<Rejection>,
}

#[derive(Debug, Clone, Default)]
pub struct Batch {
    pub data: Vec<ChartData>,
    pub rejections: RejectionReport,
    /// `(data_id, prompt)` for remotely generated items.
    pub prompts: Vec<(String, String)>,
}

#[derive(Debug, thiserror::Error)]
pub enum BatchError {
    #[error(transparent)]
    Invalid(#[from] Error),
    #[error("generator unreachable: {message} ({} items kept before failure)", partial.data.len())]
    Transport { message: String, partial: Box<Batch> },
}

pub fn item_seed(global_seed: u64, chart_type: ChartType, topic: &str, index: usize) -> u64 {
    derive_seed(global_seed, &[chart_type.id(), topic, &index.to_string()])
}

pub fn data_id(chart_type: ChartType, seed: u64) -> String {
    format!("{}-{:016x}", chart_type.id(), seed)
}

/// One procedurally generated chart, bypassing batch bookkeeping.
pub fn procedural_data(chart_type: ChartType, topic: &str, seed: u64) -> ChartData {
    let mut rng = stream(seed);
    ChartData {
        data_id: data_id(chart_type, seed),
        chart_type,
        topic: topic.to_string(),
        seed,
        provenance: Provenance {
            generator: GeneratorKind::Procedural,
            prompt_digest: None,
        },
        content: procedural::build_content(chart_type, topic, &mut rng),
    }
}

enum Outcome {
    Kept(ChartData, Option<String>),
    Rejected(Vec<String>),
    Failed(String),
}

fn check_item(request: &ItemRequest<'_>, kind: GeneratorKind, produced: Produced) -> Outcome {
    let violations = validate_document(&produced.content, request.template);
    if !violations.is_empty() {
        return Outcome::Rejected(violations.iter().map(Violation::to_string).collect());
    }
    let content = match ChartContent::from_document(request.chart_type, produced.content) {
        Ok(c) => c,
        Err(e) => return Outcome::Rejected(vec![e.to_string()]),
    };
    let data = ChartData {
        data_id: data_id(request.chart_type, request.seed),
        chart_type: request.chart_type,
        topic: request.topic.to_string(),
        seed: request.seed,
        provenance: Provenance {
            generator: kind,
            prompt_digest: produced
                .prompt
                .as_deref()
                .map(|p| crate::rng::hex_digest(p.as_bytes())[..16].to_string()),
        },
        content,
    };
    let broken = data.invariant_violations();
    if !broken.is_empty() {
        return Outcome::Rejected(broken.iter().map(Violation::to_string).collect());
    }
    Outcome::Kept(data, produced.prompt)
}

fn run_items<F>(m: usize, in_flight: usize, work: F) -> Vec<Outcome>
where
    F: Fn(usize) -> Outcome + Sync,
{
    if in_flight <= 1 || m <= 1 {
        return (0..m).map(&work).collect();
    }
    #[cfg(feature = "parallel")]
    if in_flight == usize::MAX {
        use rayon::prelude::*;
        return (0..m).into_par_iter().map(&work).collect();
    }
    // Bounded fan-out: workers pull indices; results land in their slot.
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Option<Outcome>>> = (0..m).map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..in_flight.min(m) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= m {
                    break;
                }
                let outcome = work(i);
                *slots[i].lock().expect("slot lock") = Some(outcome);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().expect("slot lock").expect("every index ran"))
        .collect()
}

/// Generates up to `m` charts of one type and topic with the given expert.
pub fn generate_with(
    expert: &dyn DataExpert,
    chart_type: ChartType,
    topic: &str,
    m: usize,
    global_seed: u64,
    topics: &TopicSet,
) -> Result<Batch, BatchError> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be positive".into()).into());
    }
    if !topics.contains(topic) {
        return Err(Error::InvalidArgument(format!("topic `{topic}` is not in the topic set")).into());
    }
    let template = get_template(chart_type);
    let kind = expert.kind();
    let outcomes = run_items(m, expert.max_in_flight(), |index| {
        let request = ItemRequest {
            chart_type,
            template,
            topic,
            index,
            seed: item_seed(global_seed, chart_type, topic, index),
        };
        match expert.produce(&request) {
            Ok(produced) => check_item(&request, kind, produced),
            Err(TransportError(message)) => Outcome::Failed(message),
        }
    });

    let mut batch = Batch::default();
    batch.rejections.attempted = m;
    let mut seen = HashSet::new();
    let mut failure = None;
    for (index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Outcome::Kept(data, prompt) => {
                if !seen.insert(data.data_id.clone()) {
                    batch.rejections.items.push(Rejection {
                        index,
                        reasons: vec![format!("duplicate data id {}", data.data_id)],
                    });
                    continue;
                }
                if let Some(p) = prompt {
                    batch.prompts.push((data.data_id.clone(), p));
                }
                batch.data.push(data);
            }
            Outcome::Rejected(reasons) => batch.rejections.items.push(Rejection { index, reasons }),
            Outcome::Failed(message) => {
                failure.get_or_insert(message);
            }
        }
    }
    batch.rejections.rejected = batch.rejections.items.len();
    match failure {
        Some(message) => Err(BatchError::Transport {
            message,
            partial: Box::new(batch),
        }),
        None => Ok(batch),
    }
}

/// Generates up to `m` charts using the generator selected by `cfg`.
pub fn generate_data_batch(
    chart_type: ChartType,
    topic: &str,
    m: usize,
    cfg: &GeneratorConfig,
    topics: &TopicSet,
) -> Result<Batch, BatchError> {
    cfg.check()?;
    match cfg.kind {
        GeneratorKind::Procedural => generate_with(&ProceduralExpert, chart_type, topic, m, cfg.seed, topics),
        #[cfg(feature = "remote")]
        GeneratorKind::Remote => {
            let remote_cfg = cfg.remote.clone().expect("checked above");
            let expert = remote::RemoteExpert::new(remote_cfg);
            generate_with(&expert, chart_type, topic, m, cfg.seed, topics)
        }
        #[cfg(not(feature = "remote"))]
        GeneratorKind::Remote => Err(Error::InvalidArgument(
            "this build has no remote generator".into(),
        )
        .into()),
    }
}

/// Splits `m` items for one chart type across topics round-robin and
/// generates each share.
pub fn generate_for_type(
    chart_type: ChartType,
    cfg: &GeneratorConfig,
    topics: &TopicSet,
) -> Result<Batch, BatchError> {
    let list = topics.as_slice();
    let mut total = Batch::default();
    for (t, topic) in list.iter().enumerate() {
        let share = cfg.batch_size / list.len() + usize::from(t < cfg.batch_size % list.len());
        if share == 0 {
            continue;
        }
        let batch = generate_data_batch(chart_type, topic, share, cfg, topics)?;
        merge(&mut total, batch);
    }
    Ok(total)
}

fn merge(total: &mut Batch, batch: Batch) {
    total.rejections.attempted += batch.rejections.attempted;
    total.rejections.rejected += batch.rejections.rejected;
    total.rejections.items.extend(batch.rejections.items);
    total.data.extend(batch.data);
    total.prompts.extend(batch.prompts);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::data::Payload;
    use crate::model::validate_structure;

    struct Scripted(Vec<Value>);

    impl DataExpert for Scripted {
        fn kind(&self) -> GeneratorKind {
            GeneratorKind::Remote
        }
        fn produce(&self, request: &ItemRequest<'_>) -> Result<Produced, TransportError> {
            match self.0.get(request.index) {
                Some(v) => Ok(Produced { content: v.clone(), prompt: Some(format!("item {}", request.index)) }),
                None => Err(TransportError("connection refused".into())),
            }
        }
        fn max_in_flight(&self) -> usize {
            1
        }
    }

    fn procedural_doc(chart_type: ChartType, seed: u64) -> Value {
        procedural::build_content(chart_type, "market share", &mut stream(seed)).to_document(chart_type)
    }

    #[test]
    fn procedural_batch_is_conforming_and_reproducible() {
        let topics = TopicSet::builtin();
        let cfg = GeneratorConfig::procedural(7, 3);
        let a = generate_data_batch(ChartType::Line, "energy production", 3, &cfg, &topics).unwrap();
        let b = generate_data_batch(ChartType::Line, "energy production", 3, &cfg, &topics).unwrap();
        assert_eq!(a.data.len(), 3);
        assert_eq!(a.rejections.rejected, 0);
        for d in &a.data {
            assert!(validate_structure(d, get_template(ChartType::Line)).unwrap().is_ok());
        }
        let ja: Vec<String> = a.data.iter().map(ChartData::canonical_json).collect();
        let jb: Vec<String> = b.data.iter().map(ChartData::canonical_json).collect();
        assert_eq!(ja, jb);
        let ids: HashSet<_> = a.data.iter().map(|d| &d.data_id).collect();
        assert_eq!(ids.len(), 3);
    }

    #[test]
    fn candles_are_ordered() {
        let topics = TopicSet::builtin();
        let cfg = GeneratorConfig::procedural(1, 2);
        let batch = generate_data_batch(ChartType::Candlestick, "market share", 2, &cfg, &topics).unwrap();
        assert_eq!(batch.data.len(), 2);
        for d in &batch.data {
            let Payload::Candles(candles) = &d.content.payload else { panic!() };
            for c in candles {
                assert!(c.low <= c.open.min(c.close));
                assert!(c.open.min(c.close) <= c.open.max(c.close));
                assert!(c.open.max(c.close) <= c.high);
            }
        }
    }

    #[test]
    fn malformed_items_are_dropped_and_counted() {
        let good = procedural_doc(ChartType::Line, 1);
        let mut bad = procedural_doc(ChartType::Line, 2);
        bad.as_object_mut().unwrap().remove("title");
        let topics = TopicSet::builtin();
        let batch = generate_with(&Scripted(vec![good, bad]), ChartType::Line, "market share", 2, 0, &topics).unwrap();
        assert_eq!(batch.data.len(), 1);
        assert_eq!(batch.rejections.rejected, 1);
        assert_eq!(batch.rejections.items[0].index, 1);
        assert!(batch.rejections.items[0].reasons[0].starts_with("title"));
        assert_eq!(batch.data[0].provenance.generator, GeneratorKind::Remote);
        assert!(batch.data[0].provenance.prompt_digest.is_some());
        assert_eq!(batch.prompts.len(), 1);
    }

    #[test]
    fn transport_failure_carries_partial_results() {
        let topics = TopicSet::builtin();
        let expert = Scripted(vec![procedural_doc(ChartType::Pie, 4)]);
        match generate_with(&expert, ChartType::Pie, "market share", 3, 0, &topics) {
            Err(BatchError::Transport { partial, .. }) => assert_eq!(partial.data.len(), 1),
            other => panic!("expected transport error, got {:?}", other.map(|b| b.data.len())),
        }
    }

    #[test]
    fn unknown_topic_is_invalid() {
        let topics = TopicSet::builtin();
        let cfg = GeneratorConfig::procedural(0, 1);
        let err = generate_data_batch(ChartType::Line, "astrology", 1, &cfg, &topics).unwrap_err();
        assert!(matches!(err, BatchError::Invalid(Error::InvalidArgument(_))));
    }

    #[test]
    fn config_requires_remote_settings_iff_remote() {
        let mut cfg = GeneratorConfig::procedural(0, 1);
        assert!(cfg.check().is_ok());
        cfg.kind = GeneratorKind::Remote;
        assert!(cfg.check().is_err());
        cfg.remote = Some(RemoteConfig::new("http://localhost:1/v1/chat/completions", "m"));
        assert!(cfg.check().is_ok());
        cfg.kind = GeneratorKind::Procedural;
        assert!(cfg.check().is_err());
    }

    #[test]
    fn roles_have_distinct_messages() {
        let msgs: HashSet<_> = ExpertRole::ALL.iter().map(|r| r.system_message()).collect();
        assert_eq!(msgs.len(), 3);
        let prompt = data_prompt(get_template(ChartType::Candlestick), "market share", 0);
        assert!(prompt.contains("\"high\"") && prompt.contains("market share"));
    }

    #[test]
    fn topic_split_covers_batch_size() {
        let topics = TopicSet::parse("a\nb\nc").unwrap();
        let cfg = GeneratorConfig::procedural(3, 7);
        let batch = generate_for_type(ChartType::Histogram, &cfg, &topics).unwrap();
        assert_eq!(batch.rejections.attempted, 7);
        assert_eq!(batch.data.len(), 7);
    }
}
