//! Verdict grammar, prompt construction, and the pluggable agent-backend
//! contract.
//!
//! A backend answers two kinds of requests: an initial per-section
//! assessment and a debate-round re-evaluation. Three implementations ship
//! here: the oracle-grounded agent, the seeded-noisy agent that wraps it,
//! and the remote chat-completion agent. A scripted agent supports
//! behavioral tests.

mod backends;
mod prompts;
mod remote;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use backends::{FailingAgent, NoisyAgent, OracleAgent, ScriptedAgent, SectionScript, GENERAL_SECTION};
pub use prompts::{build_assess_prompt, build_debate_prompt};
pub use remote::{RemoteAgent, RemoteConfig};

use crate::corpus::ReconstructedSection;
use crate::packet::PacketRecord;

/// Default general-rules text handed to every agent.
pub const DEFAULT_GENERAL_RULES: &str = include_str!("../../fixtures/general_rules.txt");

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("prompt template inputs missing: {0}")]
    Template(String),
    #[error("no recognized verdict label in agent output: {0:?}")]
    Protocol(String),
    #[error("remote backend failed after {attempts} attempt(s): {message}")]
    Remote { attempts: u32, message: String },
    #[error("scripted backend has no script for section {0:?}")]
    ScriptMissing(String),
    #[error("backend failure: {0}")]
    Backend(String),
}

/// The four output labels of the verdict protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VerdictLabel {
    Yes,
    No,
    MaybeYes,
    MaybeNo,
}

impl VerdictLabel {
    pub const ALL: [VerdictLabel; 4] = [
        VerdictLabel::Yes,
        VerdictLabel::No,
        VerdictLabel::MaybeYes,
        VerdictLabel::MaybeNo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VerdictLabel::Yes => "Yes",
            VerdictLabel::No => "No",
            VerdictLabel::MaybeYes => "Maybe Yes",
            VerdictLabel::MaybeNo => "Maybe No",
        }
    }

    /// Firm labels are `Yes` and `No`; the `Maybe` pair is uncertain.
    pub fn is_firm(self) -> bool {
        matches!(self, VerdictLabel::Yes | VerdictLabel::No)
    }

    /// Any output other than `Yes` triggers the debate phase.
    pub fn triggers_debate(self) -> bool {
        self != VerdictLabel::Yes
    }
}

/// An agent's answer: label plus one-sentence rationale.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: VerdictLabel,
    pub rationale: String,
}

impl Verdict {
    pub fn new(label: VerdictLabel, rationale: impl Into<String>) -> Self {
        Verdict { label, rationale: rationale.into() }
    }
}

/// Everything an agent sees for one call.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentRequest {
    pub section: ReconstructedSection,
    pub general_rules: String,
    pub packet: PacketRecord,
    /// This section's own latest verdict; present on debate rounds.
    pub prior: Option<Verdict>,
    /// Peer sections' previous-round verdicts; present iff this is a
    /// debate-round request.
    pub peer_verdicts: Option<Vec<(VerdictLabel, String)>>,
}

impl AgentRequest {
    pub fn assess(
        section: ReconstructedSection,
        general_rules: impl Into<String>,
        packet: PacketRecord,
    ) -> Self {
        AgentRequest {
            section,
            general_rules: general_rules.into(),
            packet,
            prior: None,
            peer_verdicts: None,
        }
    }

    pub fn is_debate(&self) -> bool {
        self.peer_verdicts.is_some()
    }
}

/// Fixed generation settings; defaults are the engine's standard operating
/// point (temperature 0.7, top_p 1.0, fan-out 8).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferenceSettings {
    pub temperature: f64,
    pub top_p: f64,
    pub max_concurrency: usize,
}

impl Default for InferenceSettings {
    fn default() -> Self {
        InferenceSettings { temperature: 0.7, top_p: 1.0, max_concurrency: 8 }
    }
}

/// The behavioral contract every agent backend satisfies. Implementations
/// must be safe for concurrent calls up to the configured fan-out.
pub trait AgentBackend: Send + Sync {
    fn assess(&self, req: &AgentRequest) -> Result<Verdict, AgentError>;
    fn debate(&self, req: &AgentRequest) -> Result<Verdict, AgentError>;
    fn name(&self) -> String;
}

/// Parse agent output: line 1 must start with exactly one of the four
/// labels (longest match, so "Maybe Yes" is never read as "Yes"); line 2 is
/// the rationale. Surrounding whitespace is tolerated.
pub fn parse_verdict(text: &str) -> Result<Verdict, AgentError> {
    let trimmed = text.trim_start();
    let mut lines = trimmed.lines();
    let first = lines.next().unwrap_or("").trim();
    // Longest candidates first.
    const CANDIDATES: [(&str, VerdictLabel); 4] = [
        ("Maybe Yes", VerdictLabel::MaybeYes),
        ("Maybe No", VerdictLabel::MaybeNo),
        ("Yes", VerdictLabel::Yes),
        ("No", VerdictLabel::No),
    ];
    for (prefix, label) in CANDIDATES {
        if let Some(rest) = first.strip_prefix(prefix) {
            // The label must end at a word boundary: "Noncompliant" is not
            // a "No" verdict.
            if rest.chars().next().map(|c| c.is_alphanumeric()).unwrap_or(false) {
                continue;
            }
            let rationale = lines
                .map(str::trim)
                .find(|l| !l.is_empty())
                .map(str::to_string)
                .unwrap_or_else(|| {
                    rest.trim_start_matches([',', '.', ':', ';', '-', ' ']).trim().to_string()
                });
            return Ok(Verdict { label, rationale });
        }
    }
    Err(AgentError::Protocol(first.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_parse_with_rationale_on_line_two() {
        let v = parse_verdict("Yes\nAll fields within range.").unwrap();
        assert_eq!(v.label, VerdictLabel::Yes);
        assert_eq!(v.rationale, "All fields within range.");
    }

    #[test]
    fn maybe_labels_use_longest_match() {
        let v = parse_verdict("Maybe No\nFlowLabel uncertain.").unwrap();
        assert_eq!(v.label, VerdictLabel::MaybeNo);
        let v = parse_verdict("Maybe Yes\nLooks fine but unsure.").unwrap();
        assert_eq!(v.label, VerdictLabel::MaybeYes);
    }

    #[test]
    fn unlabeled_output_is_a_protocol_error() {
        assert!(matches!(parse_verdict("Compliant."), Err(AgentError::Protocol(_))));
        assert!(matches!(parse_verdict(""), Err(AgentError::Protocol(_))));
        // "No" embedded in a longer word does not count.
        assert!(matches!(parse_verdict("Noncompliant."), Err(AgentError::Protocol(_))));
        assert!(matches!(parse_verdict("Yesterday it worked"), Err(AgentError::Protocol(_))));
    }

    #[test]
    fn surrounding_whitespace_is_tolerated() {
        let v = parse_verdict("\n\n  No, the hop limit is 0.\n").unwrap();
        assert_eq!(v.label, VerdictLabel::No);
        assert_eq!(v.rationale, "the hop limit is 0.");
    }

    #[test]
    fn all_four_labels_round_trip() {
        for label in VerdictLabel::ALL {
            let text = format!("{}\nbecause reasons", label.as_str());
            let v = parse_verdict(&text).unwrap();
            assert_eq!(v.label, label);
            assert_eq!(v.rationale, "because reasons");
        }
    }

    #[test]
    fn trigger_rule_spares_only_yes() {
        assert!(!VerdictLabel::Yes.triggers_debate());
        assert!(VerdictLabel::No.triggers_debate());
        assert!(VerdictLabel::MaybeYes.triggers_debate());
        assert!(VerdictLabel::MaybeNo.triggers_debate());
    }

    #[test]
    fn default_settings_are_the_standard_operating_point() {
        let s = InferenceSettings::default();
        assert_eq!(s.temperature, 0.7);
        assert_eq!(s.top_p, 1.0);
        assert_eq!(s.max_concurrency, 8);
    }
}
