//! Deterministic compliance oracle: the eleven header checks, the label/code
//! mapping tables, and the evidence-carrying report.
//!
//! The oracle is pure and stateless. It is the ground-truth labeler for
//! dataset construction, the backbone of the oracle-grounded agent, and the
//! reference the acceptance suite compares every pipeline against.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::packet::{LabelOrCode, PacketRecord, TransportGroup};

/// The eleven violation categories.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum ViolationKind {
    Version,
    LengthField,
    AddressFormat,
    HopLimit,
    TransportOverlap,
    FlowLabel,
    Dscp,
    Ecn,
    ProtocolMismatch,
    NextHeader,
    Icmpv6Code,
}

/// How hard a violation class is to detect from a single record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Difficulty {
    Trivial,
    Moderate,
    Challenging,
}

impl ViolationKind {
    pub const ALL: [ViolationKind; 11] = [
        ViolationKind::Version,
        ViolationKind::LengthField,
        ViolationKind::AddressFormat,
        ViolationKind::HopLimit,
        ViolationKind::TransportOverlap,
        ViolationKind::FlowLabel,
        ViolationKind::Dscp,
        ViolationKind::Ecn,
        ViolationKind::ProtocolMismatch,
        ViolationKind::NextHeader,
        ViolationKind::Icmpv6Code,
    ];

    pub fn difficulty(self) -> Difficulty {
        match self {
            ViolationKind::Version | ViolationKind::AddressFormat => Difficulty::Trivial,
            ViolationKind::LengthField
            | ViolationKind::HopLimit
            | ViolationKind::FlowLabel
            | ViolationKind::Dscp
            | ViolationKind::Ecn
            | ViolationKind::Icmpv6Code => Difficulty::Moderate,
            ViolationKind::TransportOverlap
            | ViolationKind::ProtocolMismatch
            | ViolationKind::NextHeader => Difficulty::Challenging,
        }
    }

    /// Human-readable category name used in reports and rationales.
    pub fn describe(self) -> &'static str {
        match self {
            ViolationKind::Version => "IPv6 Version",
            ViolationKind::LengthField => "Length Field",
            ViolationKind::AddressFormat => "IPv6 Address",
            ViolationKind::HopLimit => "Hop Limit",
            ViolationKind::TransportOverlap => "TCP/UDP/ICMPv6 Overlap",
            ViolationKind::FlowLabel => "Flow Label",
            ViolationKind::Dscp => "DSCP Field",
            ViolationKind::Ecn => "ECN Field",
            ViolationKind::ProtocolMismatch => "Protocol Mismatch",
            ViolationKind::NextHeader => "Next Header Field",
            ViolationKind::Icmpv6Code => "ICMPv6 Code",
        }
    }
}

/// One piece of evidence: which field broke which constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub kind: ViolationKind,
    pub field: String,
    pub observed: String,
    pub constraint: String,
}

/// Result of running all checks against one record.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub violations: BTreeSet<ViolationKind>,
    pub evidence: Vec<Evidence>,
}

impl ComplianceReport {
    pub fn compliant(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Bounds used by both the oracle checks and the rule extractor.
pub const FLOW_LABEL_MAX: u64 = 0xFFFFF;
pub const HOP_LIMIT_MIN: i64 = 1;
pub const HOP_LIMIT_MAX: i64 = 255;
pub const DSCP_MAX: i64 = 63;
pub const ECN_MAX: i64 = 3;
pub const PAYLOAD_LENGTH_MAX: i64 = 65_535;

/// Default set of valid Next Header codes: transport protocols plus the
/// recognized extension headers.
pub const NEXT_HEADER_DEFAULT_VALID: [i64; 8] = [0, 6, 17, 43, 44, 58, 59, 60];

/// Transport protocol labels resolved to their next-header codes. "ICMP" in
/// an IPv6 record is read as ICMPv6.
pub const TRANSPORT_LABELS: [(&str, i64); 4] =
    [("TCP", 6), ("UDP", 17), ("ICMPv6", 58), ("ICMP", 58)];

/// Extension-header and transport labels that may appear in `Next Header`.
pub const NEXT_HEADER_LABELS: [(&str, i64); 10] = [
    ("Hop-by-Hop", 0),
    ("Hop-by-Hop Options", 0),
    ("TCP", 6),
    ("UDP", 17),
    ("Routing", 43),
    ("Fragment", 44),
    ("ICMPv6", 58),
    ("ICMP", 58),
    ("No Next Header", 59),
    ("Destination Options", 60),
];

/// DSCP label table: per-hop-behavior names mapped to their codes.
pub const DSCP_LABELS: [(&str, i64); 27] = [
    ("Default", 0),
    ("CS0", 0),
    ("CS1", 8),
    ("CS2", 16),
    ("CS3", 24),
    ("CS4", 32),
    ("CS5", 40),
    ("CS6", 48),
    ("CS7", 56),
    ("AF11", 10),
    ("AF12", 12),
    ("AF13", 14),
    ("AF21", 18),
    ("AF22", 20),
    ("AF23", 22),
    ("AF31", 26),
    ("AF32", 28),
    ("AF33", 30),
    ("AF41", 34),
    ("AF42", 36),
    ("AF43", 38),
    ("EF", 46),
    ("Expedited Forwarding", 46),
    ("VOICE-ADMIT", 44),
    ("LE", 1),
    ("Lower Effort", 1),
    ("Class Selector 6", 48),
];

/// ECN label table.
pub const ECN_LABELS: [(&str, i64); 4] = [
    ("Not ECN-Capable Transport", 0),
    ("ECN-Capable Transport (1)", 1),
    ("ECN-Capable Transport (0)", 2),
    ("Congestion Experienced", 3),
];

/// ICMPv6 message table: numeric type, display label, inclusive valid code
/// range for that type.
pub const ICMPV6_TYPES: [(i64, &str, (i64, i64)); 15] = [
    (1, "Destination Unreachable", (0, 7)),
    (2, "Packet Too Big", (0, 0)),
    (3, "Time Exceeded", (0, 1)),
    (4, "Parameter Problem", (0, 3)),
    (128, "Echo (ping) request", (0, 0)),
    (129, "Echo (ping) reply", (0, 0)),
    (130, "Multicast Listener Query", (0, 0)),
    (131, "Multicast Listener Report", (0, 0)),
    (132, "Multicast Listener Done", (0, 0)),
    (133, "Router Solicitation", (0, 0)),
    (134, "Router Advertisement", (0, 0)),
    (135, "Neighbor Solicitation", (0, 0)),
    (136, "Neighbor Advertisement", (0, 0)),
    (137, "Redirect", (0, 0)),
    (143, "Multicast Listener Report Message v2", (0, 0)),
];

pub fn transport_label_code(label: &str) -> Option<i64> {
    TRANSPORT_LABELS
        .iter()
        .find(|(l, _)| *l == label)
        .map(|(_, c)| *c)
}

pub fn next_header_label_code(label: &str) -> Option<i64> {
    NEXT_HEADER_LABELS
        .iter()
        .find(|(l, _)| *l == label)
        .map(|(_, c)| *c)
}

pub fn dscp_label_code(label: &str) -> Option<i64> {
    DSCP_LABELS.iter().find(|(l, _)| *l == label).map(|(_, c)| *c)
}

pub fn ecn_label_code(label: &str) -> Option<i64> {
    ECN_LABELS.iter().find(|(l, _)| *l == label).map(|(_, c)| *c)
}

/// Valid code range for an ICMPv6 type given as label or numeric code.
pub fn icmpv6_code_range(msg_type: &LabelOrCode) -> Option<(i64, i64)> {
    match msg_type {
        LabelOrCode::Label(l) => ICMPV6_TYPES
            .iter()
            .find(|(_, name, _)| name == l)
            .map(|(_, _, r)| *r),
        LabelOrCode::Code(c) => ICMPV6_TYPES
            .iter()
            .find(|(code, _, _)| code == c)
            .map(|(_, _, r)| *r),
    }
}

/// Resolve a label against the table of the column it appears in. Used by
/// rule evaluation so comparisons like `Protocol == 6` work when the record
/// carries the label "TCP" (and vice versa).
pub fn label_code_for_column(column: &str, label: &str) -> Option<i64> {
    match column {
        "Protocol" | "Next Header" => {
            next_header_label_code(label).or_else(|| transport_label_code(label))
        }
        "DSCP" => dscp_label_code(label),
        "ECN" => ecn_label_code(label),
        "ICMPv6 Type" => ICMPV6_TYPES
            .iter()
            .find(|(_, name, _)| *name == label)
            .map(|(code, _, _)| *code),
        _ => None,
    }
}

/// Resolve a declared protocol / next-header value to a transport group, if
/// it names one.
pub fn declared_transport(value: &LabelOrCode) -> Option<TransportGroup> {
    let code = match value {
        LabelOrCode::Label(l) => transport_label_code(l)?,
        LabelOrCode::Code(c) => *c,
    };
    match code {
        6 => Some(TransportGroup::Tcp),
        17 => Some(TransportGroup::Udp),
        58 => Some(TransportGroup::Icmpv6),
        _ => None,
    }
}

/// Validate IPv6 colon-hexadecimal text: groups of 1-4 hex digits separated
/// by ':', at most one '::' compression, exactly eight groups after
/// expansion, no other characters.
pub fn valid_ipv6_text(text: &str) -> bool {
    fn groups_ok(part: &str) -> Option<usize> {
        if part.is_empty() {
            return Some(0);
        }
        let mut count = 0;
        for group in part.split(':') {
            if group.is_empty()
                || group.len() > 4
                || !group.chars().all(|c| c.is_ascii_hexdigit())
            {
                return None;
            }
            count += 1;
        }
        Some(count)
    }

    let mut halves = text.splitn(2, "::");
    let head = halves.next().unwrap_or("");
    match halves.next() {
        Some(tail) => {
            if tail.contains("::") {
                return false;
            }
            match (groups_ok(head), groups_ok(tail)) {
                // '::' stands in for at least one zero group.
                (Some(h), Some(t)) => h + t <= 7,
                _ => false,
            }
        }
        None => groups_ok(text) == Some(8),
    }
}

/// Overridable oracle configuration. The built-in label tables stay fixed;
/// the next-header valid set is the one knob the standard leaves open-ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub next_header_valid: BTreeSet<i64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            next_header_valid: NEXT_HEADER_DEFAULT_VALID.into_iter().collect(),
        }
    }
}

impl OracleConfig {
    pub fn from_json(text: &str) -> Result<OracleConfig, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// The compliance oracle. Stateless apart from its configuration; safe to
/// share across threads.
#[derive(Debug, Clone, Default)]
pub struct Oracle {
    pub config: OracleConfig,
}

impl Oracle {
    pub fn new(config: OracleConfig) -> Self {
        Oracle { config }
    }

    /// Union of all eleven checks.
    pub fn evaluate(&self, p: &PacketRecord) -> ComplianceReport {
        let mut report = ComplianceReport::default();
        let checks = [
            self.check_version(p),
            self.check_length_field(p),
            self.check_address_format(p),
            self.check_hop_limit(p),
            self.check_transport_overlap(p),
            self.check_flow_label(p),
            self.check_dscp(p),
            self.check_ecn(p),
            self.check_protocol_mismatch(p),
            self.check_next_header(p),
            self.check_icmpv6_code(p),
        ];
        for evidence in checks.into_iter().flatten() {
            report.violations.insert(evidence.kind);
            report.evidence.push(evidence);
        }
        report
    }

    /// Run a single check by kind.
    pub fn check(&self, kind: ViolationKind, p: &PacketRecord) -> Option<Evidence> {
        match kind {
            ViolationKind::Version => self.check_version(p),
            ViolationKind::LengthField => self.check_length_field(p),
            ViolationKind::AddressFormat => self.check_address_format(p),
            ViolationKind::HopLimit => self.check_hop_limit(p),
            ViolationKind::TransportOverlap => self.check_transport_overlap(p),
            ViolationKind::FlowLabel => self.check_flow_label(p),
            ViolationKind::Dscp => self.check_dscp(p),
            ViolationKind::Ecn => self.check_ecn(p),
            ViolationKind::ProtocolMismatch => self.check_protocol_mismatch(p),
            ViolationKind::NextHeader => self.check_next_header(p),
            ViolationKind::Icmpv6Code => self.check_icmpv6_code(p),
        }
    }

    pub fn check_version(&self, p: &PacketRecord) -> Option<Evidence> {
        let v = p.ipv6_version?;
        (v != 6).then(|| Evidence {
            kind: ViolationKind::Version,
            field: "IPv6 Version".into(),
            observed: v.to_string(),
            constraint: "version field must equal 6".into(),
        })
    }

    pub fn check_flow_label(&self, p: &PacketRecord) -> Option<Evidence> {
        match p.flow_label_value() {
            Ok(None) => None,
            Ok(Some(v)) => (v > FLOW_LABEL_MAX).then(|| Evidence {
                kind: ViolationKind::FlowLabel,
                field: "FlowLabel".into(),
                observed: format!("{v}"),
                constraint: "flow label must be in [0, 1048575]".into(),
            }),
            Err(_) => Some(Evidence {
                kind: ViolationKind::FlowLabel,
                field: "FlowLabel".into(),
                observed: p.flow_label.clone().unwrap_or_default(),
                constraint: "flow label must be a 20-bit hexadecimal value".into(),
            }),
        }
    }

    pub fn check_hop_limit(&self, p: &PacketRecord) -> Option<Evidence> {
        let v = p.hop_limit?;
        (!(HOP_LIMIT_MIN..=HOP_LIMIT_MAX).contains(&v)).then(|| Evidence {
            kind: ViolationKind::HopLimit,
            field: "Hop Limit".into(),
            observed: v.to_string(),
            constraint: "hop limit must be in [1, 255]".into(),
        })
    }

    pub fn check_dscp(&self, p: &PacketRecord) -> Option<Evidence> {
        let value = p.dscp.as_ref()?;
        let code = match value {
            LabelOrCode::Code(c) => Some(*c),
            LabelOrCode::Label(l) => dscp_label_code(l),
        };
        match code {
            Some(c) if (0..=DSCP_MAX).contains(&c) => None,
            Some(c) => Some(Evidence {
                kind: ViolationKind::Dscp,
                field: "DSCP".into(),
                observed: c.to_string(),
                constraint: "DSCP code must be in [0, 63]".into(),
            }),
            None => Some(Evidence {
                kind: ViolationKind::Dscp,
                field: "DSCP".into(),
                observed: value.to_string(),
                constraint: "DSCP label must be a recognized per-hop-behavior name".into(),
            }),
        }
    }

    pub fn check_ecn(&self, p: &PacketRecord) -> Option<Evidence> {
        let value = p.ecn.as_ref()?;
        let code = match value {
            LabelOrCode::Code(c) => Some(*c),
            LabelOrCode::Label(l) => ecn_label_code(l),
        };
        match code {
            Some(c) if (0..=ECN_MAX).contains(&c) => None,
            Some(c) => Some(Evidence {
                kind: ViolationKind::Ecn,
                field: "ECN".into(),
                observed: c.to_string(),
                constraint: "ECN code must be in [0, 3]".into(),
            }),
            None => Some(Evidence {
                kind: ViolationKind::Ecn,
                field: "ECN".into(),
                observed: value.to_string(),
                constraint: "ECN label must be a recognized codepoint name".into(),
            }),
        }
    }

    pub fn check_address_format(&self, p: &PacketRecord) -> Option<Evidence> {
        for (field, value) in [("Source", &p.source_addr), ("Destination", &p.dest_addr)] {
            if let Some(addr) = value {
                if !valid_ipv6_text(addr) {
                    return Some(Evidence {
                        kind: ViolationKind::AddressFormat,
                        field: field.into(),
                        observed: addr.clone(),
                        constraint: "address must be colon-hexadecimal with eight 16-bit \
                                     groups after expansion"
                            .into(),
                    });
                }
            }
        }
        None
    }

    pub fn check_transport_overlap(&self, p: &PacketRecord) -> Option<Evidence> {
        let populated = p.populated_groups();
        (populated.len() >= 2).then(|| Evidence {
            kind: ViolationKind::TransportOverlap,
            field: populated
                .iter()
                .map(|g| g.name())
                .collect::<Vec<_>>()
                .join(", "),
            observed: format!("{} transport groups populated", populated.len()),
            constraint: "a record may populate at most one transport header group".into(),
        })
    }

    /// Mismatch between the declared transport (`Protocol` or `Next Header`)
    /// and the single populated transport group. The >=2-group case belongs
    /// to the overlap check; zero populated groups is insufficient evidence.
    pub fn check_protocol_mismatch(&self, p: &PacketRecord) -> Option<Evidence> {
        let populated = p.populated_groups();
        if populated.len() != 1 {
            return None;
        }
        let actual = populated[0];
        for (field, value) in [("Protocol", &p.protocol), ("Next Header", &p.next_header)] {
            if let Some(declared) = value.as_ref().and_then(declared_transport) {
                if declared != actual {
                    return Some(Evidence {
                        kind: ViolationKind::ProtocolMismatch,
                        field: field.into(),
                        observed: value.as_ref().unwrap().to_string(),
                        constraint: format!(
                            "declared transport must match the populated {} group",
                            actual.name()
                        ),
                    });
                }
            }
        }
        None
    }

    pub fn check_next_header(&self, p: &PacketRecord) -> Option<Evidence> {
        let value = p.next_header.as_ref()?;
        let code = match value {
            LabelOrCode::Code(c) => Some(*c),
            LabelOrCode::Label(l) => next_header_label_code(l),
        };
        let valid = code
            .map(|c| self.config.next_header_valid.contains(&c))
            .unwrap_or(false);
        (!valid).then(|| Evidence {
            kind: ViolationKind::NextHeader,
            field: "Next Header".into(),
            observed: value.to_string(),
            constraint: "next header must be a recognized transport or extension code".into(),
        })
    }

    pub fn check_icmpv6_code(&self, p: &PacketRecord) -> Option<Evidence> {
        let msg_type = p.icmpv6.msg_type.as_ref()?;
        match icmpv6_code_range(msg_type) {
            None => Some(Evidence {
                kind: ViolationKind::Icmpv6Code,
                field: "ICMPv6 Type".into(),
                observed: msg_type.to_string(),
                constraint: "ICMPv6 type must be a standard message type".into(),
            }),
            Some((lo, hi)) => {
                let code = p.icmpv6.code?;
                (!(lo..=hi).contains(&code)).then(|| Evidence {
                    kind: ViolationKind::Icmpv6Code,
                    field: "ICMPv6 Code".into(),
                    observed: code.to_string(),
                    constraint: format!(
                        "code for {msg_type} must be in [{lo}, {hi}]"
                    ),
                })
            }
        }
    }

    pub fn check_length_field(&self, p: &PacketRecord) -> Option<Evidence> {
        if let Some(pl) = p.payload_length {
            if pl == 0 && p.hop_by_hop.is_none() {
                return Some(Evidence {
                    kind: ViolationKind::LengthField,
                    field: "Payload Length".into(),
                    observed: "0".into(),
                    constraint: "payload length 0 is reserved for jumbograms and requires \
                                 a Hop-By-Hop option"
                        .into(),
                });
            }
            if !(0..=PAYLOAD_LENGTH_MAX).contains(&pl) {
                return Some(Evidence {
                    kind: ViolationKind::LengthField,
                    field: "Payload Length".into(),
                    observed: pl.to_string(),
                    constraint: "payload length must be in [1, 65535]".into(),
                });
            }
        }
        if let (Some(udp_len), Some(frame_len)) = (p.udp.length, p.length) {
            if udp_len > frame_len {
                return Some(Evidence {
                    kind: ViolationKind::LengthField,
                    field: "UDP Length".into(),
                    observed: udp_len.to_string(),
                    constraint: format!("UDP length must not exceed frame length {frame_len}"),
                });
            }
        }
        None
    }
}

/// Evaluate with the default configuration.
pub fn evaluate(p: &PacketRecord) -> ComplianceReport {
    Oracle::default().evaluate(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packet::PacketRecord;
    use std::net::Ipv6Addr;
    use std::str::FromStr;

    const CASE1: &str = include_str!("../fixtures/case1.json");
    const CASE2: &str = include_str!("../fixtures/case2.json");

    fn base() -> PacketRecord {
        PacketRecord::parse(CASE2).unwrap()
    }

    #[test]
    fn difficulty_assignment() {
        use Difficulty::*;
        use ViolationKind::*;
        let expected = [
            (Version, Trivial),
            (LengthField, Moderate),
            (AddressFormat, Trivial),
            (HopLimit, Moderate),
            (TransportOverlap, Challenging),
            (FlowLabel, Moderate),
            (Dscp, Moderate),
            (Ecn, Moderate),
            (ProtocolMismatch, Challenging),
            (NextHeader, Challenging),
            (Icmpv6Code, Moderate),
        ];
        for (kind, diff) in expected {
            assert_eq!(kind.difficulty(), diff, "{kind:?}");
        }
    }

    #[test]
    fn version_check() {
        let oracle = Oracle::default();
        let mut p = base();
        p.ipv6_version = Some(6);
        assert!(oracle.check_version(&p).is_none());
        p.ipv6_version = Some(4);
        assert_eq!(oracle.check_version(&p).unwrap().kind, ViolationKind::Version);
        p.ipv6_version = None;
        assert!(oracle.check_version(&p).is_none());
    }

    #[test]
    fn flow_label_check() {
        let oracle = Oracle::default();
        let mut p = base();
        p.flow_label = Some("0xb7cb4a".into());
        assert_eq!(
            oracle.check_flow_label(&p).unwrap().kind,
            ViolationKind::FlowLabel
        );
        p.flow_label = Some("0x00000".into());
        assert!(oracle.check_flow_label(&p).is_none());
        p.flow_label = Some("0xFFFFF".into());
        assert!(oracle.check_flow_label(&p).is_none());
        p.flow_label = Some("0x100000".into());
        assert!(oracle.check_flow_label(&p).is_some());
        p.flow_label = Some("not-hex".into());
        assert!(oracle.check_flow_label(&p).is_some());
    }

    #[test]
    fn hop_limit_boundaries() {
        let oracle = Oracle::default();
        let mut p = base();
        for (value, violates) in [(54, false), (1, false), (255, false), (0, true), (256, true)] {
            p.hop_limit = Some(value);
            assert_eq!(oracle.check_hop_limit(&p).is_some(), violates, "hop {value}");
        }
    }

    #[test]
    fn dscp_and_ecn_boundaries() {
        let oracle = Oracle::default();
        let mut p = base();
        p.dscp = Some(LabelOrCode::Code(63));
        assert!(oracle.check_dscp(&p).is_none());
        p.dscp = Some(LabelOrCode::Code(64));
        assert!(oracle.check_dscp(&p).is_some());
        p.dscp = Some(LabelOrCode::Code(0));
        assert!(oracle.check_dscp(&p).is_none());
        p.dscp = Some(LabelOrCode::Code(-1));
        assert!(oracle.check_dscp(&p).is_some());
        p.dscp = Some(LabelOrCode::Label("Default".into()));
        assert!(oracle.check_dscp(&p).is_none());
        p.dscp = Some(LabelOrCode::Label("Totally Made Up".into()));
        assert!(oracle.check_dscp(&p).is_some());

        p.ecn = Some(LabelOrCode::Code(3));
        assert!(oracle.check_ecn(&p).is_none());
        p.ecn = Some(LabelOrCode::Code(4));
        assert!(oracle.check_ecn(&p).is_some());
        p.ecn = Some(LabelOrCode::Label("Not ECN-Capable Transport".into()));
        assert!(oracle.check_ecn(&p).is_none());
    }

    #[test]
    fn address_grammar() {
        assert!(valid_ipv6_text("2a43:c071:ea8e:e12e:aef9:a3f7:ac:68e4"));
        assert!(valid_ipv6_text("::1"));
        assert!(valid_ipv6_text("::"));
        assert!(valid_ipv6_text("fe80::1:2:3"));
        assert!(!valid_ipv6_text("2a43:c071:zzzz::1"));
        assert!(!valid_ipv6_text("1:2:3:4:5:6:7"));
        assert!(!valid_ipv6_text("1:2:3:4:5:6:7:8:9"));
        assert!(!valid_ipv6_text("1::2::3"));
        assert!(!valid_ipv6_text("12345::1"));
        assert!(!valid_ipv6_text(""));
        // '::' plus eight explicit groups over-fills the address.
        assert!(!valid_ipv6_text("1:2:3:4:5:6:7:8::"));
    }

    #[test]
    fn address_grammar_agrees_with_std_parser_on_colon_hex() {
        // Reference oracle: the standard library parser, restricted to pure
        // colon-hexadecimal text (no embedded IPv4, no zone).
        let samples = [
            "2a43:c071:ea8e:e12e:aef9:a3f7:ac:68e4",
            "::1",
            "::",
            "1:2:3:4:5:6:7:8",
            "fe80::abcd",
            "a:b:c:d:e:f:0:1",
            "1:2:3:4:5:6:7",
            "1:2:3:4:5:6:7:8:9",
            "1::2::3",
            ":::1",
            "g::1",
            "1:2:3:4:5:6:7:zz",
            "abcd::ef01:2345:6789",
            "0:0:0:0:0:0:0:0",
        ];
        for s in samples {
            assert_eq!(
                valid_ipv6_text(s),
                Ipv6Addr::from_str(s).is_ok(),
                "disagreement on {s:?}"
            );
        }
    }

    #[test]
    fn transport_overlap_cases() {
        let oracle = Oracle::default();
        let case1 = PacketRecord::parse(CASE1).unwrap();
        assert_eq!(
            oracle.check_transport_overlap(&case1).unwrap().kind,
            ViolationKind::TransportOverlap
        );
        let case2 = base();
        assert!(oracle.check_transport_overlap(&case2).is_none());
        let empty = PacketRecord::parse("{}").unwrap();
        assert!(oracle.check_transport_overlap(&empty).is_none());
    }

    #[test]
    fn protocol_mismatch_cases() {
        let oracle = Oracle::default();
        // Declared ICMP but TCP group populated.
        let mut p = PacketRecord::parse(CASE1).unwrap();
        p.udp = Default::default();
        p.protocol = Some(LabelOrCode::Label("ICMP".into()));
        p.next_header = Some(LabelOrCode::Label("TCP".into()));
        assert_eq!(
            oracle.check_protocol_mismatch(&p).unwrap().kind,
            ViolationKind::ProtocolMismatch
        );
        // Agreement.
        p.protocol = Some(LabelOrCode::Label("TCP".into()));
        assert!(oracle.check_protocol_mismatch(&p).is_none());
        // Numeric declaration disagreeing.
        p.next_header = Some(LabelOrCode::Code(17));
        assert!(oracle.check_protocol_mismatch(&p).is_some());
        // No populated groups: insufficient evidence.
        let mut q = PacketRecord::parse("{}").unwrap();
        q.protocol = Some(LabelOrCode::Label("UDP".into()));
        assert!(oracle.check_protocol_mismatch(&q).is_none());
        // Two groups populated: owned by the overlap check.
        let overlap = PacketRecord::parse(CASE1).unwrap();
        assert!(oracle.check_protocol_mismatch(&overlap).is_none());
    }

    #[test]
    fn next_header_membership() {
        let oracle = Oracle::default();
        let mut p = base();
        p.next_header = Some(LabelOrCode::Label("TCP".into()));
        assert!(oracle.check_next_header(&p).is_none());
        p.next_header = Some(LabelOrCode::Code(58));
        assert!(oracle.check_next_header(&p).is_none());
        p.next_header = Some(LabelOrCode::Code(143));
        assert!(oracle.check_next_header(&p).is_some());
        p.next_header = Some(LabelOrCode::Label("Carrier Pigeon".into()));
        assert!(oracle.check_next_header(&p).is_some());
        p.next_header = None;
        assert!(oracle.check_next_header(&p).is_none());
    }

    #[test]
    fn next_header_set_is_configurable() {
        let config = OracleConfig::from_json(r#"{"next_header_valid": [6, 17, 58, 143]}"#).unwrap();
        let oracle = Oracle::new(config);
        let mut p = base();
        p.next_header = Some(LabelOrCode::Code(143));
        assert!(oracle.check_next_header(&p).is_none());
        p.next_header = Some(LabelOrCode::Code(0));
        assert!(oracle.check_next_header(&p).is_some());
    }

    #[test]
    fn icmpv6_code_table() {
        let oracle = Oracle::default();
        let mut p = base();
        assert!(oracle.check_icmpv6_code(&p).is_none());
        p.icmpv6.code = Some(7);
        assert_eq!(
            oracle.check_icmpv6_code(&p).unwrap().kind,
            ViolationKind::Icmpv6Code
        );
        p.icmpv6.msg_type = Some(LabelOrCode::Code(1));
        assert!(oracle.check_icmpv6_code(&p).is_none());
        p.icmpv6.msg_type = Some(LabelOrCode::Label("Unknown Message".into()));
        assert!(oracle.check_icmpv6_code(&p).is_some());
        let empty = PacketRecord::parse("{}").unwrap();
        assert!(oracle.check_icmpv6_code(&empty).is_none());
    }

    #[test]
    fn length_field_cases() {
        let oracle = Oracle::default();
        let mut p = base();
        p.payload_length = Some(36);
        p.length = Some(76);
        assert!(oracle.check_length_field(&p).is_none());
        p.payload_length = Some(0);
        assert!(oracle.check_length_field(&p).is_some());
        p.hop_by_hop = Some(serde_json::json!("Jumbo Payload"));
        assert!(oracle.check_length_field(&p).is_none());
        p.hop_by_hop = None;
        p.payload_length = Some(70_000);
        assert!(oracle.check_length_field(&p).is_some());
        p.payload_length = Some(65_535);
        assert!(oracle.check_length_field(&p).is_none());
        // UDP length above frame length.
        p.payload_length = None;
        p.udp.length = Some(120);
        p.length = Some(76);
        assert!(oracle.check_length_field(&p).is_some());
        p.udp.length = Some(36);
        assert!(oracle.check_length_field(&p).is_none());
    }

    #[test]
    fn evaluate_appendix_cases() {
        let case2 = base();
        let report = evaluate(&case2);
        assert!(report.compliant(), "case 2 must be compliant: {report:?}");

        let case1 = PacketRecord::parse(CASE1).unwrap();
        let report = evaluate(&case1);
        assert!(report.violations.contains(&ViolationKind::TransportOverlap));
        assert!(!report.evidence.is_empty());
    }

    #[test]
    fn evaluate_is_pure() {
        let case1 = PacketRecord::parse(CASE1).unwrap();
        let a = evaluate(&case1);
        let b = evaluate(&case1);
        assert_eq!(a, b);
        let json = serde_json::to_string(&a).unwrap();
        let back: ComplianceReport = serde_json::from_str(&json).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn every_violation_carries_evidence() {
        let mut p = PacketRecord::parse(CASE1).unwrap();
        p.ipv6_version = Some(4);
        p.flow_label = Some("0xFFFFFF".into());
        p.hop_limit = Some(0);
        let report = evaluate(&p);
        for kind in &report.violations {
            assert!(
                report.evidence.iter().any(|e| e.kind == *kind),
                "{kind:?} lacks evidence"
            );
        }
    }
}
