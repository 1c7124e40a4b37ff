//! The end-to-end desk pipeline and the run manifest shared by all reports.
//!
//! Stages run in order: translations, monoid checks, germ groupoid, cocycle
//! conditions, envelope, envelope equivalence, saturation split. The first
//! stage that does not pass halts the run and its report carries the
//! witness.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::envelope::{build_envelope, ks_verify, saturation_split, EnvelopeError};
use crate::graph::Graph;
pub use crate::group::GroupChoice;
use crate::group::{GroupContext, GroupElement, GroupError};
use crate::groupoid::{cocycle_from_labels, equivalence_check, germ_groupoid, pair_groupoid, GroupoidError};
use crate::invmon::{Limits, MonoidError};
use crate::translations::{
    coarse_embedding_report, translation_family, verify_lemma_pts, verify_partition, PointSet, TranslationError,
};
use crate::verdict::Outcome;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("config must give either `points` or `graph` with `embedding`")]
    MissingPoints,
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error("unknown unit `{0}` in `saturated`")]
    UnknownUnit(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitsConfig {
    pub max_elements: usize,
    pub max_word_length: usize,
}

impl Default for LimitsConfig {
    fn default() -> Self {
        Limits::default().into()
    }
}

impl From<Limits> for LimitsConfig {
    fn from(l: Limits) -> Self {
        LimitsConfig {
            max_elements: l.max_elements,
            max_word_length: l.max_word_length,
        }
    }
}

impl From<LimitsConfig> for Limits {
    fn from(l: LimitsConfig) -> Self {
        Limits {
            max_elements: l.max_elements,
            max_word_length: l.max_word_length,
        }
    }
}

fn default_steps() -> u32 {
    1
}

/// Pipeline input. Either `points` lists the subset directly, or `graph`
/// and `embedding` give a vertex map whose image is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub group: GroupChoice,
    #[serde(default)]
    pub points: Option<Vec<Value>>,
    #[serde(default)]
    pub graph: Option<Value>,
    #[serde(default)]
    pub embedding: Option<Vec<Value>>,
    pub radius: u32,
    pub margin: u32,
    #[serde(default = "default_steps")]
    pub stability_steps: u32,
    #[serde(default)]
    pub limits: Option<LimitsConfig>,
    /// Units of the germ groupoid (by point name) forming `F`; defaults to
    /// the orbit of the first unit.
    #[serde(default)]
    pub saturated: Option<Vec<String>>,
}

impl PipelineConfig {
    pub fn from_json_str(text: &str) -> Result<PipelineConfig, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn limits(&self) -> Limits {
        self.limits.map(Limits::from).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Input name → SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub limits: Option<LimitsConfig>,
    pub tool_version: String,
    pub schema_version: u32,
    pub outcome: Outcome,
}

impl RunManifest {
    pub fn new(command: &str, tool_version: &str) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            seed: None,
            limits: None,
            tool_version: tool_version.to_string(),
            schema_version: SCHEMA_VERSION,
            outcome: Outcome::Pass,
        }
    }

    pub fn input(mut self, name: &str, bytes: &[u8]) -> RunManifest {
        self.inputs.insert(name.to_string(), sha256_hex(bytes));
        self
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("reports serialize");
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: String,
    pub outcome: Outcome,
    pub report: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bundle {
    pub manifest: RunManifest,
    pub stages: Vec<StageRecord>,
    pub halted_at: Option<String>,
    pub outcome: Outcome,
}

impl Bundle {
    pub fn to_json_string(&self) -> String {
        canonical_json(self)
    }

    /// File name → contents: the full bundle plus one file per stage.
    pub fn files(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        out.insert("bundle.json".to_string(), self.to_json_string());
        for (i, s) in self.stages.iter().enumerate() {
            let doc = json!({ "manifest": &self.manifest, "stage": s });
            out.insert(format!("{:02}-{}.json", i + 1, s.stage), canonical_json(&doc));
        }
        out
    }
}

fn monoid_error_outcome(e: &MonoidError) -> Outcome {
    match e {
        MonoidError::Truncated(_) => Outcome::Unknown,
        _ => Outcome::Fail,
    }
}

fn error_outcome(e: &EnvelopeError) -> Outcome {
    match e {
        EnvelopeError::Groupoid(GroupoidError::Monoid(m)) => monoid_error_outcome(m),
        _ => Outcome::Fail,
    }
}

fn error_report(msg: impl ToString) -> Value {
    json!({ "error": msg.to_string() })
}

struct Run {
    stages: Vec<StageRecord>,
}

impl Run {
    /// Record a stage; returns whether the run may continue.
    fn push(&mut self, stage: &str, outcome: Outcome, report: Value) -> bool {
        self.stages.push(StageRecord {
            stage: stage.to_string(),
            outcome,
            report,
        });
        outcome == Outcome::Pass
    }
}

fn resolve_points(cfg: &PipelineConfig, ctx: &GroupContext) -> Result<(Vec<GroupElement>, Option<Graph>), ConfigError> {
    match (&cfg.points, &cfg.graph, &cfg.embedding) {
        (Some(pts), _, _) => {
            let pts = pts.iter().map(|v| ctx.element_from_json(v)).collect::<Result<_, _>>()?;
            Ok((pts, None))
        }
        (None, Some(g), Some(emb)) => {
            let graph = Graph::from_json(g).map_err(|e| ConfigError::Graph(e.to_string()))?;
            let pts = emb.iter().map(|v| ctx.element_from_json(v)).collect::<Result<_, _>>()?;
            Ok((pts, Some(graph)))
        }
        _ => Err(ConfigError::MissingPoints),
    }
}

/// Run every stage; configuration errors are returned, stage failures are
/// recorded in the bundle.
pub fn pipeline_monster_desk(cfg: &PipelineConfig, mut manifest: RunManifest) -> Result<Bundle, ConfigError> {
    let ctx = cfg.group.build()?;
    let limits = cfg.limits();
    manifest.limits = Some(limits.into());
    let (images, graph) = resolve_points(cfg, &ctx)?;
    let mut run = Run { stages: Vec::new() };
    let ok = stages(cfg, &ctx, limits, images, graph, &mut run)?;
    let outcome = Outcome::all(run.stages.iter().map(|s| s.outcome));
    manifest.outcome = outcome;
    let halted_at = if ok { None } else { run.stages.last().map(|s| s.stage.clone()) };
    Ok(Bundle {
        manifest,
        stages: run.stages,
        halted_at,
        outcome,
    })
}

fn stages(
    cfg: &PipelineConfig,
    ctx: &GroupContext,
    limits: Limits,
    images: Vec<GroupElement>,
    graph: Option<Graph>,
    run: &mut Run,
) -> Result<bool, ConfigError> {
    // translations
    let mut report = serde_json::Map::new();
    if let Some(g) = &graph {
        match coarse_embedding_report(g, &images, ctx) {
            Ok(emb) => {
                let injective = emb.injective;
                report.insert("embedding".into(), serde_json::to_value(&emb).expect("serializable"));
                if !injective {
                    let (u, v) = emb.collisions[0];
                    report.insert(
                        "witness".into(),
                        json!({ "vertices": [u, v], "image": ctx.format(&images[u]) }),
                    );
                    return Ok(run.push("translations", Outcome::Fail, Value::Object(report)));
                }
            }
            Err(e) => return Ok(run.push("translations", Outcome::Fail, error_report(e))),
        }
    }
    let x = match PointSet::new(ctx, images) {
        Ok(x) => x,
        Err(e) => return Ok(run.push("translations", Outcome::Fail, error_report(e))),
    };
    let fam = translation_family(&x);
    let partition = verify_partition(&fam);
    report.insert("points".into(), json!(x.format()));
    report.insert(
        "family".into(),
        json!(fam.members().iter().map(|(g, t)| json!({ "g": ctx.format(g), "t": t.to_string() })).collect::<Vec<_>>()),
    );
    report.insert("partition".into(), serde_json::to_value(&partition).expect("serializable"));
    if !run.push("translations", Outcome::from_bool(partition.holds()), Value::Object(report)) {
        return Ok(false);
    }

    // monoid checks
    let lemma = match verify_lemma_pts(&fam, limits) {
        Ok(r) => r,
        Err(TranslationError::Monoid(e)) => {
            return Ok(run.push("invmon", monoid_error_outcome(&e), error_report(e)));
        }
        Err(e) => return Ok(run.push("invmon", Outcome::Fail, error_report(e))),
    };
    if !run.push("invmon", lemma.outcome, serde_json::to_value(&lemma).expect("serializable")) {
        return Ok(false);
    }
    let s = fam.monoid(limits).expect("the closure already succeeded");

    // germ groupoid
    let germs = match germ_groupoid(&s) {
        Ok(g) => g,
        Err(e) => return Ok(run.push("germ", Outcome::Fail, error_report(e))),
    };
    let gpd = germs.groupoid();
    let pair = pair_groupoid(&x.format()).expect("distinct point names");
    let eq = equivalence_check(gpd, &pair);
    let arrows_ok = gpd.arrow_count() == x.len() * x.len();
    let germ_report = json!({
        "units": gpd.units(),
        "arrow_count": gpd.arrow_count(),
        "expected_arrow_count": x.len() * x.len(),
        "composition_hash": gpd.composition_hash(),
        "equivalent_to_pair_groupoid": &eq,
    });
    if !run.push("germ", Outcome::from_bool(eq.equivalent && arrows_ok), germ_report) {
        return Ok(false);
    }

    // cocycle conditions
    let rho = match cocycle_from_labels(&germs, &s) {
        Ok(r) => r,
        Err(e) => return Ok(run.push("tcf", Outcome::Fail, error_report(e))),
    };
    let tcf = rho.tcf_report();
    let labels: BTreeMap<String, String> = gpd
        .arrows()
        .iter()
        .enumerate()
        .map(|(a, arr)| (arr.name.clone(), ctx.format(rho.label(a))))
        .collect();
    if !run.push("tcf", tcf.outcome, json!({ "report": &tcf, "labels": labels })) {
        return Ok(false);
    }

    // envelope
    let omega = match build_envelope(&rho, cfg.radius) {
        Ok(o) => o,
        Err(e) => return Ok(run.push("envelope", error_outcome(&e), error_report(e))),
    };
    let embedded = omega.embedded_copy_injective();
    let mut env_report = omega.to_json();
    env_report["embedded_copy_injective"] = serde_json::to_value(&embedded).expect("serializable");
    if !run.push("envelope", embedded.outcome(), env_report) {
        return Ok(false);
    }

    // envelope equivalence
    match ks_verify(&rho, cfg.radius, cfg.margin, cfg.stability_steps) {
        Ok(r) => {
            let outcome = Outcome::from_bool(r.equivalent && r.stable);
            if !run.push("ks_verify", outcome, serde_json::to_value(&r).expect("serializable")) {
                return Ok(false);
            }
        }
        Err(e) => return Ok(run.push("ks_verify", error_outcome(&e), error_report(e))),
    }

    // saturation split
    let f: BTreeSet<usize> = match &cfg.saturated {
        Some(names) => names
            .iter()
            .map(|n| {
                gpd.units()
                    .iter()
                    .position(|u| u == n)
                    .ok_or_else(|| ConfigError::UnknownUnit(n.clone()))
            })
            .collect::<Result<_, _>>()?,
        None => gpd.orbits()[0].iter().copied().collect(),
    };
    match saturation_split(&omega, &f) {
        Ok(split) => {
            let mut v = serde_json::to_value(&split).expect("serializable");
            v["f"] = json!(f.iter().map(|&u| gpd.units()[u].clone()).collect::<Vec<_>>());
            Ok(run.push("saturation_split", Outcome::from_bool(split.holds()), v))
        }
        Err(e) => Ok(run.push("saturation_split", error_outcome(&e), error_report(e))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> PipelineConfig {
        PipelineConfig::from_json_str(text).unwrap()
    }

    fn run(text: &str) -> Bundle {
        pipeline_monster_desk(&config(text), RunManifest::new("pipeline", "test").input("config", text.as_bytes()))
            .unwrap()
    }

    #[test]
    fn desk_config_passes_every_stage() {
        let b = run(r#"{"group": "Z", "points": [0, 1, 2, 4], "radius": 8, "margin": 3}"#);
        assert_eq!(b.outcome, Outcome::Pass, "{}", b.to_json_string());
        let names: Vec<&str> = b.stages.iter().map(|s| s.stage.as_str()).collect();
        assert_eq!(
            names,
            ["translations", "invmon", "germ", "tcf", "envelope", "ks_verify", "saturation_split"]
        );
        assert_eq!(b.halted_at, None);
    }

    #[test]
    fn single_point_is_degenerate_pass() {
        let b = run(r#"{"group": "Z^2", "points": [[3, 1]], "radius": 3, "margin": 1}"#);
        assert_eq!(b.outcome, Outcome::Pass, "{}", b.to_json_string());
    }

    #[test]
    fn non_injective_embedding_halts_at_translations() {
        let b = run(
            r#"{"group": "Z", "graph": {"n": 3, "edges": [[0, 1], [1, 2]]},
                "embedding": [0, 1, 0], "radius": 4, "margin": 1}"#,
        );
        assert_eq!(b.outcome, Outcome::Fail);
        assert_eq!(b.halted_at.as_deref(), Some("translations"));
        assert_eq!(b.stages[0].report["witness"]["vertices"], json!([0, 2]));
    }

    #[test]
    fn injective_embedding_runs_through() {
        let b = run(
            r#"{"group": "Z", "graph": {"n": 3, "edges": [[0, 1], [1, 2]]},
                "embedding": [0, 1, 2], "radius": 5, "margin": 2}"#,
        );
        assert_eq!(b.outcome, Outcome::Pass, "{}", b.to_json_string());
        assert!(b.stages[0].report["embedding"]["injective"].as_bool().unwrap());
    }

    #[test]
    fn truncation_is_unknown() {
        let b = run(
            r#"{"group": "Z", "points": [0, 1, 2, 4], "radius": 8, "margin": 3,
                "limits": {"max_elements": 5, "max_word_length": 16}}"#,
        );
        assert_eq!(b.outcome, Outcome::Unknown);
        assert_eq!(b.halted_at.as_deref(), Some("invmon"));
    }

    #[test]
    fn margin_too_large_fails_at_ks() {
        let b = run(r#"{"group": "Z", "points": [0, 1], "radius": 3, "margin": 3}"#);
        assert_eq!(b.halted_at.as_deref(), Some("ks_verify"));
        assert_eq!(b.outcome, Outcome::Fail);
    }

    #[test]
    fn bundles_are_reproducible() {
        let text = r#"{"group": "free2", "points": ["e", "a", "ab"], "radius": 4, "margin": 1, "stability_steps": 2}"#;
        let a = run(text);
        let b = run(text);
        assert_eq!(a.files(), b.files());
        assert!(a.files().contains_key("07-saturation_split.json"));
    }

    #[test]
    fn config_errors() {
        assert!(matches!(
            PipelineConfig::from_json_str(r#"{"group": "Z", "radius": 1}"#),
            Err(ConfigError::Json(_))
        ));
        let c = config(r#"{"group": "Q", "points": [0], "radius": 1, "margin": 0}"#);
        assert!(matches!(pipeline_monster_desk(&c, RunManifest::new("p", "t")), Err(ConfigError::Group(_))));
        let c = config(r#"{"group": "Z", "radius": 1, "margin": 0}"#);
        assert!(matches!(pipeline_monster_desk(&c, RunManifest::new("p", "t")), Err(ConfigError::MissingPoints)));
    }

    #[test]
    fn keys_are_sorted() {
        let s = canonical_json(&json!({"b": 1, "a": {"d": 2, "c": 3}}));
        assert_eq!(s, "{\n  \"a\": {\n    \"c\": 3,\n    \"d\": 2\n  },\n  \"b\": 1\n}\n");
    }
}
