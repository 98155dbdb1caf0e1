//! Byte-stable prompt templates for the assessment and debate calls.

use super::{AgentError, AgentRequest};

const ASSESS_SYSTEM: &str = r#"You are an IPv6 standards expert for {SECTION_NAME}.

You will be given:
1) Curated general IPv6 rules
2) A specific standards section excerpt
3) One IPv6 packet represented as a dictionary of observed fields/values

DECISION POLICY (critical):
- Use ONLY (a) explicit normative requirements in the provided section excerpt and the general rules, and (b) the packet fields present in the data sample.
- You MUST NOT mark the packet non-compliant because information is missing or unknown in that particular section.
- Output Non-compliance ONLY when an explicit MUST/SHALL/MUST NOT/SHALL NOT requirement is contradicted by an observed packet field value.
- Do NOT use SHOULD/RECOMMENDED/MAY as grounds for Non-compliance.
- Do NOT speculate beyond the provided packet fields, and do not request additional information.
- Keep the reasoning strictly tied to: (i) the normative clause and (ii) the packet fields used.

OUTPUT LABELS (critical):
- Your Line 1 MUST start with EXACTLY ONE of: "Yes", "No", "Maybe Yes", "Maybe No"
- "Yes"  = Compliant with respect to this section based on available fields.
- "No"   = Non-compliant with respect to this section due to a direct contradiction.
- "Maybe Yes" / "Maybe No" = borderline/uncertain due to interpretation tension; triggers debate.

General rules:
{GENERAL_RULES}
"#;

const ASSESS_USER: &str = r#"Specific Section:
{SECTION_TEXT}

TASK:
Does the packet satisfy all required compliance properties under this section? Decide under the decision policy.

IMPORTANT OUTPUT FORMAT:
Line 1: Yes OR No OR Maybe Yes OR Maybe No (exactly one of these strings)
Line 2: One sentence explaining (a) the concrete normative requirement and (b) the concrete packet field(s) used.

Data Sample:
{IPV6_SAMPLE_JSON}
"#;

const DEBATE_USER: &str = r#"Specific Section:
{SECTION_TEXT}

Previous agent conclusion: {PREV_VERDICT}
Previous agent reason:
{PREV_REASON}

Peer verdicts from the previous round:
{PEER_VERDICTS}

DEBATE TASK:
Re-evaluate the packet strictly under the same decision policy.
- If the previous decision relied on missing information, non-normative language (SHOULD/MAY), or reasoning not grounded in the provided section and general rules plus packet fields, you MUST correct it.
- If the previous decision missed a direct contradiction with a MUST/SHALL/MUST NOT/SHALL NOT clause, you MUST correct it.

IMPORTANT OUTPUT FORMAT:
Line 1: Yes OR No OR Maybe Yes OR Maybe No (exactly one of these strings)
Line 2: One sentence citing (a) the concrete normative requirement and (b) the concrete packet field(s) used.

Data Sample:
{IPV6_SAMPLE_JSON}
"#;

/// Instantiate the assessment prompt pair (system, user).
pub fn build_assess_prompt(req: &AgentRequest) -> Result<(String, String), AgentError> {
    if req.is_debate() {
        return Err(AgentError::Template(
            "assessment prompt built from a debate-round request".into(),
        ));
    }
    if req.section.text.is_empty() {
        return Err(AgentError::Template("section text is empty".into()));
    }
    let system = ASSESS_SYSTEM
        .replace("{SECTION_NAME}", &req.section.doc_name)
        .replace("{GENERAL_RULES}", &req.general_rules);
    let user = ASSESS_USER
        .replace("{SECTION_TEXT}", &req.section.text)
        .replace("{IPV6_SAMPLE_JSON}", &req.packet.serialize());
    Ok((system, user))
}

/// Instantiate the debate prompt pair (system, user). The system prompt is
/// shared with assessment; the user prompt carries the prior verdict and
/// the peer verdicts from the previous round.
pub fn build_debate_prompt(req: &AgentRequest) -> Result<(String, String), AgentError> {
    let Some(peers) = &req.peer_verdicts else {
        return Err(AgentError::Template("debate request lacks peer verdicts".into()));
    };
    let Some(prior) = &req.prior else {
        return Err(AgentError::Template("debate request lacks the prior verdict".into()));
    };
    if req.section.text.is_empty() {
        return Err(AgentError::Template("section text is empty".into()));
    }
    let peer_lines = if peers.is_empty() {
        "(none)".to_string()
    } else {
        peers
            .iter()
            .map(|(label, rationale)| format!("- {}: {}", label.as_str(), rationale))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let system = ASSESS_SYSTEM
        .replace("{SECTION_NAME}", &req.section.doc_name)
        .replace("{GENERAL_RULES}", &req.general_rules);
    let user = DEBATE_USER
        .replace("{SECTION_TEXT}", &req.section.text)
        .replace("{PREV_VERDICT}", prior.label.as_str())
        .replace("{PREV_REASON}", &prior.rationale)
        .replace("{PEER_VERDICTS}", &peer_lines)
        .replace("{IPV6_SAMPLE_JSON}", &req.packet.serialize());
    Ok((system, user))
}
