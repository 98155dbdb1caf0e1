//! Oracle-grounded, seeded-noisy, scripted, and failing agent backends.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

use super::{AgentBackend, AgentError, AgentRequest, Verdict, VerdictLabel};
use crate::corpus::CorpusStore;
use crate::oracle::{Oracle, ViolationKind};

/// Section name used when a packet is judged against the general rules only
/// (empty retrieval fallback). The oracle agent answers over all violation
/// kinds for this section.
pub const GENERAL_SECTION: &str = "general-rules";

/// Grounds verdicts in the deterministic oracle, restricted to the
/// violation kinds associated with the section's source document.
#[derive(Debug, Clone)]
pub struct OracleAgent {
    oracle: Oracle,
    topics: BTreeMap<String, BTreeSet<ViolationKind>>,
}

impl OracleAgent {
    pub fn new(topics: BTreeMap<String, BTreeSet<ViolationKind>>) -> Self {
        OracleAgent { oracle: Oracle::default(), topics }
    }

    /// Adopt the topic tags a store assigned at ingest.
    pub fn from_store(store: &CorpusStore) -> Self {
        OracleAgent::new(store.doc_topics().clone())
    }

    fn kinds_for(&self, doc_name: &str) -> BTreeSet<ViolationKind> {
        if let Some(kinds) = self.topics.get(doc_name) {
            return kinds.clone();
        }
        if doc_name == GENERAL_SECTION {
            ViolationKind::ALL.into_iter().collect()
        } else {
            BTreeSet::new()
        }
    }

    fn judge(&self, req: &AgentRequest) -> Verdict {
        let kinds = self.kinds_for(&req.section.doc_name);
        let report = self.oracle.evaluate(&req.packet);
        let hit = report.evidence.iter().find(|e| kinds.contains(&e.kind));
        match hit {
            Some(evidence) => Verdict::new(
                VerdictLabel::No,
                format!(
                    "{} value {} contradicts the requirement: {}.",
                    evidence.field, evidence.observed, evidence.constraint
                ),
            ),
            None => Verdict::new(
                VerdictLabel::Yes,
                "All packet fields read by this section satisfy its requirements.",
            ),
        }
    }
}

impl AgentBackend for OracleAgent {
    fn assess(&self, req: &AgentRequest) -> Result<Verdict, AgentError> {
        Ok(self.judge(req))
    }

    fn debate(&self, req: &AgentRequest) -> Result<Verdict, AgentError> {
        Ok(self.judge(req))
    }

    fn name(&self) -> String {
        "oracle".into()
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x100_0000_01b3;

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET ^ seed;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

fn unit_interval(hash: u64) -> f64 {
    (hash >> 11) as f64 / (1u64 << 53) as f64
}

/// Wraps the oracle agent with seeded label noise: assessments flip to a
/// wrong or uncertain label with probability `p_flip`; debate rounds correct
/// toward oracle truth with probability `p_repair`, otherwise restate the
/// prior verdict.
///
/// Noise rolls are a pure function of the seed and the request content, so
/// runs are reproducible under any scheduling.
#[derive(Debug, Clone)]
pub struct NoisyAgent {
    inner: OracleAgent,
    seed: u64,
    p_flip: f64,
    p_repair: f64,
}

impl NoisyAgent {
    pub fn new(inner: OracleAgent, seed: u64, p_flip: f64, p_repair: f64) -> Self {
        NoisyAgent { inner, seed, p_flip, p_repair }
    }

    fn digest(&self, phase: &str, req: &AgentRequest) -> u64 {
        let mut material = String::new();
        material.push_str(phase);
        material.push('\x1f');
        material.push_str(&req.section.doc_name);
        material.push('\x1f');
        material.push_str(&req.packet.serialize());
        if let Some(prior) = &req.prior {
            material.push('\x1f');
            material.push_str(prior.label.as_str());
            material.push('\x1f');
            material.push_str(&prior.rationale);
        }
        fnv1a(self.seed, material.as_bytes())
    }
}

impl AgentBackend for NoisyAgent {
    fn assess(&self, req: &AgentRequest) -> Result<Verdict, AgentError> {
        let truth = self.inner.assess(req)?;
        let hash = self.digest("assess", req);
        if unit_interval(hash) >= self.p_flip {
            return Ok(truth);
        }
        let alternatives: Vec<VerdictLabel> = VerdictLabel::ALL
            .into_iter()
            .filter(|l| *l != truth.label)
            .collect();
        let pick = alternatives[(fnv1a(self.seed ^ 0x9E37, &hash.to_le_bytes()) % 3) as usize];
        Ok(Verdict::new(
            pick,
            format!(
                "Uncertain reading of {} for this packet; flagged for review.",
                req.section.doc_name
            ),
        ))
    }

    fn debate(&self, req: &AgentRequest) -> Result<Verdict, AgentError> {
        let truth = self.inner.debate(req)?;
        let hash = self.digest("debate", req);
        if unit_interval(hash) < self.p_repair {
            Ok(truth)
        } else {
            // Stubborn round: restate the previous position.
            Ok(req.prior.clone().unwrap_or(truth))
        }
    }

    fn name(&self) -> String {
        format!("noisy(seed={}, p_flip={}, p_repair={})", self.seed, self.p_flip, self.p_repair)
    }
}

/// Fixed answers for one section: the initial verdict plus the debate-round
/// sequence (the last entry repeats once exhausted).
#[derive(Debug, Clone)]
pub struct SectionScript {
    pub initial: Verdict,
    pub debate: Vec<Verdict>,
}

impl SectionScript {
    pub fn firm_yes() -> Self {
        SectionScript {
            initial: Verdict::new(VerdictLabel::Yes, "No requirement of this section is contradicted."),
            debate: vec![],
        }
    }
}

/// Replays scripted verdicts; used to pin debate-flow behavior in tests and
/// golden transcripts.
pub struct ScriptedAgent {
    scripts: BTreeMap<String, SectionScript>,
    default: Option<SectionScript>,
    cursors: Mutex<BTreeMap<(String, u64), usize>>,
}

impl ScriptedAgent {
    pub fn new(scripts: BTreeMap<String, SectionScript>) -> Self {
        ScriptedAgent { scripts, default: None, cursors: Mutex::new(BTreeMap::new()) }
    }

    /// Sections without a script answer with this one.
    pub fn with_default(mut self, script: SectionScript) -> Self {
        self.default = Some(script);
        self
    }

    fn script_for(&self, doc_name: &str) -> Result<&SectionScript, AgentError> {
        self.scripts
            .get(doc_name)
            .or(self.default.as_ref())
            .ok_or_else(|| AgentError::ScriptMissing(doc_name.to_string()))
    }
}

impl AgentBackend for ScriptedAgent {
    fn assess(&self, req: &AgentRequest) -> Result<Verdict, AgentError> {
        Ok(self.script_for(&req.section.doc_name)?.initial.clone())
    }

    fn debate(&self, req: &AgentRequest) -> Result<Verdict, AgentError> {
        let script = self.script_for(&req.section.doc_name)?;
        let key = (
            req.section.doc_name.clone(),
            fnv1a(0, req.packet.serialize().as_bytes()),
        );
        let mut cursors = self.cursors.lock().expect("cursor lock");
        let cursor = cursors.entry(key).or_insert(0);
        let verdict = if script.debate.is_empty() {
            script.initial.clone()
        } else {
            script.debate[(*cursor).min(script.debate.len() - 1)].clone()
        };
        *cursor += 1;
        Ok(verdict)
    }

    fn name(&self) -> String {
        "scripted".into()
    }
}

/// Oracle-grounded agent that fails on packets whose `Time` column matches
/// a marker; exercises the undecided-exclusion path.
pub struct FailingAgent {
    inner: OracleAgent,
    fail_time: String,
}

impl FailingAgent {
    pub fn new(inner: OracleAgent, fail_time: impl Into<String>) -> Self {
        FailingAgent { inner, fail_time: fail_time.into() }
    }
}

impl AgentBackend for FailingAgent {
    fn assess(&self, req: &AgentRequest) -> Result<Verdict, AgentError> {
        if req.packet.time.as_deref() == Some(self.fail_time.as_str()) {
            return Err(AgentError::Backend("injected transport failure".into()));
        }
        self.inner.assess(req)
    }

    fn debate(&self, req: &AgentRequest) -> Result<Verdict, AgentError> {
        if req.packet.time.as_deref() == Some(self.fail_time.as_str()) {
            return Err(AgentError::Backend("injected transport failure".into()));
        }
        self.inner.debate(req)
    }

    fn name(&self) -> String {
        "failing".into()
    }
}
