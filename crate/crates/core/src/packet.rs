//! Packet-record schema, JSON Lines parsing, and canonical serialization.
//!
//! A [`PacketRecord`] is one observed IPv6 packet rendered as a flat column
//! set: base-header fields, optional TCP/UDP/ICMPv6 transport groups, and an
//! `extras` map that preserves any column the schema does not know about.
//! Serialization is canonical: equal records produce byte-identical JSON.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::Value;
use thiserror::Error;

/// Number of columns in the known schema.
pub const COLUMN_COUNT: usize = 50;

/// Value kind a schema column carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    /// Integral quantity (lengths, ports, counters, version).
    Integer,
    /// `0x`-prefixed hexadecimal string (flow label, checksums, flags).
    HexString,
    /// IPv6 address in colon-hexadecimal text form.
    AddressString,
    /// Named label or numeric code (protocol, DSCP, ECN, next header).
    LabelOrCode,
    /// Free text (timestamps, info summaries) or opaque marker columns.
    Text,
}

/// One known dataset column: serialized name plus the kind of value it holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldSchema {
    pub column_name: &'static str,
    pub value_kind: ValueKind,
}

/// The full column inventory in canonical serialization order.
pub const SCHEMA: [FieldSchema; COLUMN_COUNT] = [
    FieldSchema { column_name: "Time", value_kind: ValueKind::Text },
    FieldSchema { column_name: "Host", value_kind: ValueKind::Text },
    FieldSchema { column_name: "Source", value_kind: ValueKind::AddressString },
    FieldSchema { column_name: "Destination", value_kind: ValueKind::AddressString },
    FieldSchema { column_name: "Protocol", value_kind: ValueKind::LabelOrCode },
    FieldSchema { column_name: "Length", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "Info", value_kind: ValueKind::Text },
    FieldSchema { column_name: "Hop Limit", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "Frag Header", value_kind: ValueKind::Text },
    FieldSchema { column_name: "Routing Header", value_kind: ValueKind::Text },
    FieldSchema { column_name: "DSCP", value_kind: ValueKind::LabelOrCode },
    FieldSchema { column_name: "ECN", value_kind: ValueKind::LabelOrCode },
    FieldSchema { column_name: "Freq/Channel", value_kind: ValueKind::Text },
    FieldSchema { column_name: "Pad1", value_kind: ValueKind::Text },
    FieldSchema { column_name: "PadN", value_kind: ValueKind::Text },
    FieldSchema { column_name: "IPv6 Version", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "FragCount", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "FlowLabel", value_kind: ValueKind::HexString },
    FieldSchema { column_name: "Bogus_Version", value_kind: ValueKind::Text },
    FieldSchema { column_name: "Hop-By-Hop", value_kind: ValueKind::Text },
    FieldSchema { column_name: "Frag_Error", value_kind: ValueKind::Text },
    FieldSchema { column_name: "Frag_Overlap", value_kind: ValueKind::Text },
    FieldSchema { column_name: "Next Header", value_kind: ValueKind::LabelOrCode },
    FieldSchema { column_name: "Source Port Resolved", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "Source Port Unresolved", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "Destination Port Resolved", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "Destination Port Unresolved", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "TCP Src Port", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "TCP Dst Port", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "TCP Stream", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "TCP Sequence", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "TCP Sequence Raw", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "TCP Acknowledgement", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "TCP Acknowledgement Raw", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "TCP Header Length", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "TCP Flags", value_kind: ValueKind::HexString },
    FieldSchema { column_name: "TCP Window Size", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "TCP Checksum", value_kind: ValueKind::HexString },
    FieldSchema { column_name: "TCP Options", value_kind: ValueKind::HexString },
    FieldSchema { column_name: "UDP Source Port", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "UDP Destination Port", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "UDP Stream", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "UDP Length", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "UDP Checksum", value_kind: ValueKind::HexString },
    FieldSchema { column_name: "ICMPv6 Type", value_kind: ValueKind::LabelOrCode },
    FieldSchema { column_name: "ICMPv6 Code", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "ICMPv6 Checksum", value_kind: ValueKind::HexString },
    FieldSchema { column_name: "ICMPv6 Length", value_kind: ValueKind::Integer },
    FieldSchema { column_name: "ICMPv6 Data", value_kind: ValueKind::Text },
    FieldSchema { column_name: "Payload Length", value_kind: ValueKind::Integer },
];

/// Look up a known column by its serialized name.
pub fn schema_lookup(column: &str) -> Option<FieldSchema> {
    SCHEMA.iter().copied().find(|f| f.column_name == column)
}

/// Errors raised while parsing or interpreting packet records.
#[derive(Debug, Error)]
pub enum PacketError {
    #[error("malformed JSON at byte offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("line is not a JSON object")]
    NotAnObject,
    #[error("type mismatch for column {column:?}: expected {expected}, got {got}")]
    Schema {
        column: String,
        expected: &'static str,
        got: String,
    },
    #[error("field {column:?} is not valid hexadecimal: {text:?}")]
    FieldFormat { column: String, text: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// A named label or a numeric code, as carried in mixed columns such as
/// `Protocol`, `DSCP`, `ECN`, and `Next Header`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelOrCode {
    Label(String),
    Code(i64),
}

impl LabelOrCode {
    pub fn as_label(&self) -> Option<&str> {
        match self {
            LabelOrCode::Label(s) => Some(s),
            LabelOrCode::Code(_) => None,
        }
    }

    pub fn as_code(&self) -> Option<i64> {
        match self {
            LabelOrCode::Label(_) => None,
            LabelOrCode::Code(c) => Some(*c),
        }
    }
}

impl fmt::Display for LabelOrCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelOrCode::Label(s) => write!(f, "{s}"),
            LabelOrCode::Code(c) => write!(f, "{c}"),
        }
    }
}

/// TCP header columns of a record. Wholly absent unless at least one member
/// is non-null.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TcpFields {
    pub src_port: Option<i64>,
    pub dst_port: Option<i64>,
    pub stream: Option<i64>,
    pub sequence: Option<i64>,
    pub sequence_raw: Option<i64>,
    pub ack: Option<i64>,
    pub ack_raw: Option<i64>,
    pub header_length: Option<i64>,
    pub flags: Option<String>,
    pub window_size: Option<i64>,
    pub checksum: Option<String>,
    pub options: Option<String>,
}

impl TcpFields {
    pub fn any_present(&self) -> bool {
        self.src_port.is_some()
            || self.dst_port.is_some()
            || self.stream.is_some()
            || self.sequence.is_some()
            || self.sequence_raw.is_some()
            || self.ack.is_some()
            || self.ack_raw.is_some()
            || self.header_length.is_some()
            || self.flags.is_some()
            || self.window_size.is_some()
            || self.checksum.is_some()
            || self.options.is_some()
    }
}

/// UDP header columns of a record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UdpFields {
    pub src_port: Option<i64>,
    pub dst_port: Option<i64>,
    pub stream: Option<i64>,
    pub length: Option<i64>,
    pub checksum: Option<String>,
}

impl UdpFields {
    pub fn any_present(&self) -> bool {
        self.src_port.is_some()
            || self.dst_port.is_some()
            || self.stream.is_some()
            || self.length.is_some()
            || self.checksum.is_some()
    }
}

/// ICMPv6 message columns of a record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Icmpv6Fields {
    pub msg_type: Option<LabelOrCode>,
    pub code: Option<i64>,
    pub checksum: Option<String>,
    pub length: Option<i64>,
    pub data: Option<Value>,
}

impl Icmpv6Fields {
    pub fn any_present(&self) -> bool {
        self.msg_type.is_some()
            || self.code.is_some()
            || self.checksum.is_some()
            || self.length.is_some()
            || self.data.is_some()
    }
}

/// One of the three transport header groups a record may carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransportGroup {
    Tcp,
    Udp,
    Icmpv6,
}

impl TransportGroup {
    pub const ALL: [TransportGroup; 3] =
        [TransportGroup::Tcp, TransportGroup::Udp, TransportGroup::Icmpv6];

    pub fn name(self) -> &'static str {
        match self {
            TransportGroup::Tcp => "TCP",
            TransportGroup::Udp => "UDP",
            TransportGroup::Icmpv6 => "ICMPv6",
        }
    }
}

/// One IPv6 packet observation. Immutable in practice: every pipeline treats
/// a parsed record as read-only; the injector clones before mutating.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PacketRecord {
    pub time: Option<String>,
    pub host: Option<String>,
    pub source_addr: Option<String>,
    pub dest_addr: Option<String>,
    pub protocol: Option<LabelOrCode>,
    pub length: Option<i64>,
    pub info: Option<String>,
    pub hop_limit: Option<i64>,
    pub frag_header: Option<Value>,
    pub routing_header: Option<Value>,
    pub dscp: Option<LabelOrCode>,
    pub ecn: Option<LabelOrCode>,
    pub freq_channel: Option<Value>,
    pub pad1: Option<Value>,
    pub padn: Option<Value>,
    pub ipv6_version: Option<i64>,
    pub frag_count: Option<i64>,
    pub flow_label: Option<String>,
    pub bogus_version: Option<Value>,
    pub hop_by_hop: Option<Value>,
    pub frag_error: Option<Value>,
    pub frag_overlap: Option<Value>,
    pub next_header: Option<LabelOrCode>,
    pub source_port_resolved: Option<i64>,
    pub source_port_unresolved: Option<i64>,
    pub dest_port_resolved: Option<i64>,
    pub dest_port_unresolved: Option<i64>,
    pub tcp: TcpFields,
    pub udp: UdpFields,
    pub icmpv6: Icmpv6Fields,
    pub payload_length: Option<i64>,
    /// Columns outside the known schema, preserved verbatim.
    pub extras: BTreeMap<String, Value>,
}

/// A column value viewed uniformly for rule evaluation: either an integer or
/// a piece of text. `None` from [`PacketRecord::column`] means absent/null.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnValue {
    Int(i64),
    Text(String),
}

impl PacketRecord {
    /// Parse one JSON Lines record.
    ///
    /// Known keys are mapped to typed fields (floats with zero fractional
    /// part become integers); unknown keys land in `extras` verbatim; nulls
    /// become absent values.
    pub fn parse(line: &str) -> Result<PacketRecord, PacketError> {
        let value: Value = serde_json::from_str(line).map_err(|e| {
            let offset = offset_of(line, e.line(), e.column());
            PacketError::Parse { offset, message: e.to_string() }
        })?;
        let Value::Object(map) = value else {
            return Err(PacketError::NotAnObject);
        };

        let mut rec = PacketRecord::default();
        for (key, val) in map {
            if val.is_null() {
                continue;
            }
            match key.as_str() {
                "Time" => rec.time = Some(as_text(&key, val)?),
                "Host" => rec.host = Some(as_text(&key, val)?),
                "Source" => rec.source_addr = Some(as_text(&key, val)?),
                "Destination" => rec.dest_addr = Some(as_text(&key, val)?),
                "Protocol" => rec.protocol = Some(as_label_or_code(&key, val)?),
                "Length" => rec.length = Some(as_int(&key, val)?),
                "Info" => rec.info = Some(as_text(&key, val)?),
                "Hop Limit" => rec.hop_limit = Some(as_int(&key, val)?),
                "Frag Header" => rec.frag_header = Some(val),
                "Routing Header" => rec.routing_header = Some(val),
                "DSCP" => rec.dscp = Some(as_label_or_code(&key, val)?),
                "ECN" => rec.ecn = Some(as_label_or_code(&key, val)?),
                "Freq/Channel" => rec.freq_channel = Some(val),
                "Pad1" => rec.pad1 = Some(val),
                "PadN" => rec.padn = Some(val),
                "IPv6 Version" => rec.ipv6_version = Some(as_int(&key, val)?),
                "FragCount" => rec.frag_count = Some(as_int(&key, val)?),
                "FlowLabel" => rec.flow_label = Some(as_text(&key, val)?),
                "Bogus_Version" => rec.bogus_version = Some(val),
                "Hop-By-Hop" => rec.hop_by_hop = Some(val),
                "Frag_Error" => rec.frag_error = Some(val),
                "Frag_Overlap" => rec.frag_overlap = Some(val),
                "Next Header" => rec.next_header = Some(as_label_or_code(&key, val)?),
                "Source Port Resolved" => rec.source_port_resolved = Some(as_int(&key, val)?),
                "Source Port Unresolved" => rec.source_port_unresolved = Some(as_int(&key, val)?),
                "Destination Port Resolved" => rec.dest_port_resolved = Some(as_int(&key, val)?),
                "Destination Port Unresolved" => {
                    rec.dest_port_unresolved = Some(as_int(&key, val)?)
                }
                "TCP Src Port" => rec.tcp.src_port = Some(as_int(&key, val)?),
                "TCP Dst Port" => rec.tcp.dst_port = Some(as_int(&key, val)?),
                "TCP Stream" => rec.tcp.stream = Some(as_int(&key, val)?),
                "TCP Sequence" => rec.tcp.sequence = Some(as_int(&key, val)?),
                "TCP Sequence Raw" => rec.tcp.sequence_raw = Some(as_int(&key, val)?),
                "TCP Acknowledgement" => rec.tcp.ack = Some(as_int(&key, val)?),
                "TCP Acknowledgement Raw" => rec.tcp.ack_raw = Some(as_int(&key, val)?),
                "TCP Header Length" => rec.tcp.header_length = Some(as_int(&key, val)?),
                "TCP Flags" => rec.tcp.flags = Some(as_text(&key, val)?),
                "TCP Window Size" => rec.tcp.window_size = Some(as_int(&key, val)?),
                "TCP Checksum" => rec.tcp.checksum = Some(as_text(&key, val)?),
                "TCP Options" => rec.tcp.options = Some(as_text(&key, val)?),
                "UDP Source Port" => rec.udp.src_port = Some(as_int(&key, val)?),
                "UDP Destination Port" => rec.udp.dst_port = Some(as_int(&key, val)?),
                "UDP Stream" => rec.udp.stream = Some(as_int(&key, val)?),
                "UDP Length" => rec.udp.length = Some(as_int(&key, val)?),
                "UDP Checksum" => rec.udp.checksum = Some(as_text(&key, val)?),
                "ICMPv6 Type" => rec.icmpv6.msg_type = Some(as_label_or_code(&key, val)?),
                "ICMPv6 Code" => rec.icmpv6.code = Some(as_int(&key, val)?),
                "ICMPv6 Checksum" => rec.icmpv6.checksum = Some(as_text(&key, val)?),
                "ICMPv6 Length" => rec.icmpv6.length = Some(as_int(&key, val)?),
                "ICMPv6 Data" => rec.icmpv6.data = Some(val),
                "Payload Length" => rec.payload_length = Some(as_int(&key, val)?),
                _ => {
                    rec.extras.insert(key, val);
                }
            }
        }
        Ok(rec)
    }

    /// Canonical serialization: known columns in schema order (nulls written
    /// explicitly), then extras in sorted key order. Equal records produce
    /// byte-identical output.
    pub fn serialize(&self) -> String {
        let mut parts: Vec<String> = Vec::with_capacity(COLUMN_COUNT + self.extras.len());
        for field in &SCHEMA {
            let value = self.column_json(field.column_name);
            parts.push(format!(
                "{}: {}",
                serde_json::to_string(field.column_name).expect("string key"),
                value
            ));
        }
        for (key, val) in &self.extras {
            parts.push(format!(
                "{}: {}",
                serde_json::to_string(key).expect("string key"),
                serde_json::to_string(val).expect("extras value")
            ));
        }
        format!("{{{}}}", parts.join(", "))
    }

    fn column_json(&self, column: &str) -> String {
        fn s<T: serde::Serialize>(v: &Option<T>) -> String {
            match v {
                Some(inner) => serde_json::to_string(inner).expect("column value"),
                None => "null".to_string(),
            }
        }
        fn lc(v: &Option<LabelOrCode>) -> String {
            match v {
                Some(LabelOrCode::Label(l)) => serde_json::to_string(l).expect("label"),
                Some(LabelOrCode::Code(c)) => c.to_string(),
                None => "null".to_string(),
            }
        }
        match column {
            "Time" => s(&self.time),
            "Host" => s(&self.host),
            "Source" => s(&self.source_addr),
            "Destination" => s(&self.dest_addr),
            "Protocol" => lc(&self.protocol),
            "Length" => s(&self.length),
            "Info" => s(&self.info),
            "Hop Limit" => s(&self.hop_limit),
            "Frag Header" => s(&self.frag_header),
            "Routing Header" => s(&self.routing_header),
            "DSCP" => lc(&self.dscp),
            "ECN" => lc(&self.ecn),
            "Freq/Channel" => s(&self.freq_channel),
            "Pad1" => s(&self.pad1),
            "PadN" => s(&self.padn),
            "IPv6 Version" => s(&self.ipv6_version),
            "FragCount" => s(&self.frag_count),
            "FlowLabel" => s(&self.flow_label),
            "Bogus_Version" => s(&self.bogus_version),
            "Hop-By-Hop" => s(&self.hop_by_hop),
            "Frag_Error" => s(&self.frag_error),
            "Frag_Overlap" => s(&self.frag_overlap),
            "Next Header" => lc(&self.next_header),
            "Source Port Resolved" => s(&self.source_port_resolved),
            "Source Port Unresolved" => s(&self.source_port_unresolved),
            "Destination Port Resolved" => s(&self.dest_port_resolved),
            "Destination Port Unresolved" => s(&self.dest_port_unresolved),
            "TCP Src Port" => s(&self.tcp.src_port),
            "TCP Dst Port" => s(&self.tcp.dst_port),
            "TCP Stream" => s(&self.tcp.stream),
            "TCP Sequence" => s(&self.tcp.sequence),
            "TCP Sequence Raw" => s(&self.tcp.sequence_raw),
            "TCP Acknowledgement" => s(&self.tcp.ack),
            "TCP Acknowledgement Raw" => s(&self.tcp.ack_raw),
            "TCP Header Length" => s(&self.tcp.header_length),
            "TCP Flags" => s(&self.tcp.flags),
            "TCP Window Size" => s(&self.tcp.window_size),
            "TCP Checksum" => s(&self.tcp.checksum),
            "TCP Options" => s(&self.tcp.options),
            "UDP Source Port" => s(&self.udp.src_port),
            "UDP Destination Port" => s(&self.udp.dst_port),
            "UDP Stream" => s(&self.udp.stream),
            "UDP Length" => s(&self.udp.length),
            "UDP Checksum" => s(&self.udp.checksum),
            "ICMPv6 Type" => lc(&self.icmpv6.msg_type),
            "ICMPv6 Code" => s(&self.icmpv6.code),
            "ICMPv6 Checksum" => s(&self.icmpv6.checksum),
            "ICMPv6 Length" => s(&self.icmpv6.length),
            "ICMPv6 Data" => s(&self.icmpv6.data),
            "Payload Length" => s(&self.payload_length),
            _ => "null".to_string(),
        }
    }

    /// Uniform column access for rule evaluation, total over the known
    /// schema. `None` means the column is absent or null on this record.
    pub fn column(&self, column: &str) -> Option<ColumnValue> {
        fn int(v: &Option<i64>) -> Option<ColumnValue> {
            v.map(ColumnValue::Int)
        }
        fn text(v: &Option<String>) -> Option<ColumnValue> {
            v.as_ref().map(|s| ColumnValue::Text(s.clone()))
        }
        fn lc(v: &Option<LabelOrCode>) -> Option<ColumnValue> {
            v.as_ref().map(|l| match l {
                LabelOrCode::Label(s) => ColumnValue::Text(s.clone()),
                LabelOrCode::Code(c) => ColumnValue::Int(*c),
            })
        }
        fn json(v: &Option<Value>) -> Option<ColumnValue> {
            v.as_ref().map(|val| match val {
                Value::Number(n) if n.is_i64() => ColumnValue::Int(n.as_i64().unwrap()),
                Value::String(s) => ColumnValue::Text(s.clone()),
                other => ColumnValue::Text(other.to_string()),
            })
        }
        match column {
            "Time" => text(&self.time),
            "Host" => text(&self.host),
            "Source" => text(&self.source_addr),
            "Destination" => text(&self.dest_addr),
            "Protocol" => lc(&self.protocol),
            "Length" => int(&self.length),
            "Info" => text(&self.info),
            "Hop Limit" => int(&self.hop_limit),
            "Frag Header" => json(&self.frag_header),
            "Routing Header" => json(&self.routing_header),
            "DSCP" => lc(&self.dscp),
            "ECN" => lc(&self.ecn),
            "Freq/Channel" => json(&self.freq_channel),
            "Pad1" => json(&self.pad1),
            "PadN" => json(&self.padn),
            "IPv6 Version" => int(&self.ipv6_version),
            "FragCount" => int(&self.frag_count),
            "FlowLabel" => text(&self.flow_label),
            "Bogus_Version" => json(&self.bogus_version),
            "Hop-By-Hop" => json(&self.hop_by_hop),
            "Frag_Error" => json(&self.frag_error),
            "Frag_Overlap" => json(&self.frag_overlap),
            "Next Header" => lc(&self.next_header),
            "Source Port Resolved" => int(&self.source_port_resolved),
            "Source Port Unresolved" => int(&self.source_port_unresolved),
            "Destination Port Resolved" => int(&self.dest_port_resolved),
            "Destination Port Unresolved" => int(&self.dest_port_unresolved),
            "TCP Src Port" => int(&self.tcp.src_port),
            "TCP Dst Port" => int(&self.tcp.dst_port),
            "TCP Stream" => int(&self.tcp.stream),
            "TCP Sequence" => int(&self.tcp.sequence),
            "TCP Sequence Raw" => int(&self.tcp.sequence_raw),
            "TCP Acknowledgement" => int(&self.tcp.ack),
            "TCP Acknowledgement Raw" => int(&self.tcp.ack_raw),
            "TCP Header Length" => int(&self.tcp.header_length),
            "TCP Flags" => text(&self.tcp.flags),
            "TCP Window Size" => int(&self.tcp.window_size),
            "TCP Checksum" => text(&self.tcp.checksum),
            "TCP Options" => text(&self.tcp.options),
            "UDP Source Port" => int(&self.udp.src_port),
            "UDP Destination Port" => int(&self.udp.dst_port),
            "UDP Stream" => int(&self.udp.stream),
            "UDP Length" => int(&self.udp.length),
            "UDP Checksum" => text(&self.udp.checksum),
            "ICMPv6 Type" => lc(&self.icmpv6.msg_type),
            "ICMPv6 Code" => int(&self.icmpv6.code),
            "ICMPv6 Checksum" => text(&self.icmpv6.checksum),
            "ICMPv6 Length" => int(&self.icmpv6.length),
            "ICMPv6 Data" => json(&self.icmpv6.data),
            "Payload Length" => int(&self.payload_length),
            _ => None,
        }
    }

    /// Whether the given transport group has at least one non-null member.
    pub fn has_group(&self, group: TransportGroup) -> bool {
        match group {
            TransportGroup::Tcp => self.tcp.any_present(),
            TransportGroup::Udp => self.udp.any_present(),
            TransportGroup::Icmpv6 => self.icmpv6.any_present(),
        }
    }

    /// Transport groups with at least one member present, in fixed order.
    pub fn populated_groups(&self) -> Vec<TransportGroup> {
        TransportGroup::ALL
            .into_iter()
            .filter(|g| self.has_group(*g))
            .collect()
    }

    /// Decode the 20-bit flow label carried as a hex string.
    ///
    /// Returns `Ok(None)` when the field is absent, and a field-format error
    /// when the text is not hexadecimal. Decoding is case-insensitive and an
    /// optional `0x`/`0X` prefix is accepted.
    pub fn flow_label_value(&self) -> Result<Option<u64>, PacketError> {
        let Some(text) = self.flow_label.as_deref() else {
            return Ok(None);
        };
        decode_hex(text)
            .map(Some)
            .ok_or_else(|| PacketError::FieldFormat {
                column: "FlowLabel".to_string(),
                text: text.to_string(),
            })
    }
}

/// Decode a hex string with optional `0x` prefix; `None` if malformed.
pub fn decode_hex(text: &str) -> Option<u64> {
    let stripped = text
        .strip_prefix("0x")
        .or_else(|| text.strip_prefix("0X"))
        .unwrap_or(text);
    if stripped.is_empty() || stripped.len() > 16 {
        return None;
    }
    u64::from_str_radix(stripped, 16).ok()
}

fn as_text(key: &str, val: Value) -> Result<String, PacketError> {
    match val {
        Value::String(s) => Ok(s),
        other => Err(PacketError::Schema {
            column: key.to_string(),
            expected: "string",
            got: other.to_string(),
        }),
    }
}

fn as_int(key: &str, val: Value) -> Result<i64, PacketError> {
    match &val {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                return Ok(i);
            }
            if let Some(f) = n.as_f64() {
                if f.fract() == 0.0 && f.abs() < 9.0e15 {
                    return Ok(f as i64);
                }
            }
            Err(PacketError::Schema {
                column: key.to_string(),
                expected: "integer",
                got: val.to_string(),
            })
        }
        _ => Err(PacketError::Schema {
            column: key.to_string(),
            expected: "integer",
            got: val.to_string(),
        }),
    }
}

fn as_label_or_code(key: &str, val: Value) -> Result<LabelOrCode, PacketError> {
    match val {
        Value::String(s) => Ok(LabelOrCode::Label(s)),
        Value::Number(_) => Ok(LabelOrCode::Code(as_int(key, val)?)),
        other => Err(PacketError::Schema {
            column: key.to_string(),
            expected: "label or numeric code",
            got: other.to_string(),
        }),
    }
}

fn offset_of(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut offset = 0;
    for (idx, l) in text.split('\n').enumerate() {
        if idx + 1 == line {
            return offset + column.saturating_sub(1);
        }
        offset += l.len() + 1;
    }
    text.len()
}

/// Parse a JSON Lines dataset: one packet object per non-empty line.
pub fn parse_dataset(text: &str) -> Result<Vec<PacketRecord>, PacketError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(PacketRecord::parse)
        .collect()
}

/// Serialize records as JSON Lines with a trailing newline per record.
pub fn serialize_dataset(records: &[PacketRecord]) -> String {
    let mut out = String::new();
    for rec in records {
        out.push_str(&rec.serialize());
        out.push('\n');
    }
    out
}
