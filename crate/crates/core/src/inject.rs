//! Dataset construction: mutate compliant records with seeded violations and
//! emit ground-truth labels plus a per-record injection log.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::Label;
use crate::oracle::{self, Oracle, ViolationKind};
use crate::packet::{LabelOrCode, PacketRecord, TransportGroup};

#[derive(Debug, Error)]
pub enum InjectError {
    #[error("input record is already non-compliant: {0:?}")]
    AlreadyNonCompliant(BTreeSet<ViolationKind>),
    #[error("violation kind set must be non-empty")]
    EmptyKinds,
    #[error("kind {kind:?} is not mutable on this record")]
    NotMutable { kind: ViolationKind },
    #[error("pool holds {pool} records but the plan needs {needed} to mutate")]
    PoolTooSmall { pool: usize, needed: usize },
    #[error("pool record {index} is not compliant: {violations:?}")]
    PoolNotCompliant {
        index: usize,
        violations: BTreeSet<ViolationKind>,
    },
    #[error("no eligible record remains for kind set {kinds:?}")]
    NoEligibleRecord { kinds: Vec<ViolationKind> },
    #[error("mutation for {kind:?} did not register with the oracle")]
    MutationIneffective { kind: ViolationKind },
    #[error("violations_per_sample range {lo}..={hi} is not within 1..=11")]
    BadRange { lo: usize, hi: usize },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// How a labeled dataset is built from a compliant pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionPlan {
    pub seed: u64,
    pub n_noncompliant: usize,
    /// Inclusive range of distinct violations per mutated sample.
    pub violations_per_sample: (usize, usize),
    /// Optional per-kind sampling weights; uniform when absent.
    pub kind_weights: Option<BTreeMap<ViolationKind, f64>>,
}

impl Default for InjectionPlan {
    fn default() -> Self {
        InjectionPlan {
            seed: 0,
            n_noncompliant: 300,
            violations_per_sample: (1, 3),
            kind_weights: None,
        }
    }
}

/// One field change applied during injection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDelta {
    pub field: String,
    pub old: String,
    pub new: String,
}

/// Log entry for one mutated record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionLogEntry {
    pub index: usize,
    pub kinds: Vec<ViolationKind>,
    pub deltas: Vec<FieldDelta>,
}

/// A built dataset: records, per-record labels, and the injection log.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub records: Vec<PacketRecord>,
    pub labels: Vec<Label>,
    pub log: Vec<InjectionLogEntry>,
}

impl LabeledDataset {
    /// Serialize the three dataset artifacts: records (JSON Lines),
    /// labels (CSV `index,label`), log (JSON Lines).
    pub fn to_files(&self) -> (String, String, String) {
        let records = crate::packet::serialize_dataset(&self.records);
        let mut labels = String::from("index,label\n");
        for (i, label) in self.labels.iter().enumerate() {
            labels.push_str(&format!("{i},{}\n", label.as_str()));
        }
        let mut log = String::new();
        for entry in &self.log {
            log.push_str(&serde_json::to_string(entry).expect("log entry"));
            log.push('\n');
        }
        (records, labels, log)
    }
}

/// Parse a labels CSV produced by [`LabeledDataset::to_files`].
pub fn parse_labels_csv(text: &str) -> Option<Vec<Label>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line.trim() != "index,label" {
                return None;
            }
            continue;
        }
        let (_, label) = line.split_once(',')?;
        out.push(Label::parse(label)?);
    }
    Some(out)
}

/// Whether `kind` can be injected into this record at all.
pub fn kind_mutable(p: &PacketRecord, kind: ViolationKind) -> bool {
    match kind {
        ViolationKind::AddressFormat => p.source_addr.is_some() || p.dest_addr.is_some(),
        ViolationKind::ProtocolMismatch => p.populated_groups().len() == 1,
        ViolationKind::Icmpv6Code => p
            .icmpv6
            .msg_type
            .as_ref()
            .map(|t| oracle::icmpv6_code_range(t).is_some())
            .unwrap_or(false),
        _ => true,
    }
}

/// Kind pairs that cannot coexist in one sample: populating a second
/// transport group (overlap) destroys the single-group precondition the
/// mismatch check reads.
pub fn kinds_compatible(a: ViolationKind, b: ViolationKind) -> bool {
    !matches!(
        (a, b),
        (ViolationKind::ProtocolMismatch, ViolationKind::TransportOverlap)
            | (ViolationKind::TransportOverlap, ViolationKind::ProtocolMismatch)
    )
}

/// Mutate a compliant record so that every kind in `kinds` is detected by
/// the oracle on the result. Returns the mutated record and field deltas.
pub fn inject(
    p: &PacketRecord,
    kinds: &BTreeSet<ViolationKind>,
    rng: &mut ChaCha12Rng,
) -> Result<(PacketRecord, Vec<FieldDelta>), InjectError> {
    if kinds.is_empty() {
        return Err(InjectError::EmptyKinds);
    }
    let before = oracle::evaluate(p);
    if !before.compliant() {
        return Err(InjectError::AlreadyNonCompliant(before.violations));
    }
    let mut record = p.clone();
    let mut deltas = Vec::new();
    // Canonical application order keeps results independent of set iteration.
    for kind in ViolationKind::ALL {
        if kinds.contains(&kind) {
            if !kind_mutable(&record, kind) {
                return Err(InjectError::NotMutable { kind });
            }
            mutate(&mut record, kind, rng, &mut deltas);
        }
    }
    let after = oracle::evaluate(&record);
    for kind in kinds {
        if !after.violations.contains(kind) {
            return Err(InjectError::MutationIneffective { kind: *kind });
        }
    }
    Ok((record, deltas))
}

fn push_delta(deltas: &mut Vec<FieldDelta>, field: &str, old: String, new: String) {
    deltas.push(FieldDelta { field: field.to_string(), old, new });
}

fn show<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_else(|| "null".into())
}

/// The mutation table. Each arm writes the fields its check reads and picks
/// values that are unambiguous for that kind: boundary-adjacent and far-out
/// values both occur.
fn mutate(
    p: &mut PacketRecord,
    kind: ViolationKind,
    rng: &mut ChaCha12Rng,
    deltas: &mut Vec<FieldDelta>,
) {
    match kind {
        ViolationKind::Version => {
            let new = *[4i64, 5].choose(rng).unwrap();
            push_delta(deltas, "IPv6 Version", show(&p.ipv6_version), new.to_string());
            p.ipv6_version = Some(new);
        }
        ViolationKind::HopLimit => {
            let new = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(256..=1024) };
            push_delta(deltas, "Hop Limit", show(&p.hop_limit), new.to_string());
            p.hop_limit = Some(new);
        }
        ViolationKind::FlowLabel => {
            let value: u64 = rng.gen_range((1 << 20) + 1..=(1 << 24));
            let new = format!("0x{value:x}");
            push_delta(deltas, "FlowLabel", show(&p.flow_label), new.clone());
            p.flow_label = Some(new);
        }
        ViolationKind::Dscp => {
            let new = rng.gen_range(64..=255);
            push_delta(
                deltas,
                "DSCP",
                p.dscp.as_ref().map(|v| v.to_string()).unwrap_or_else(|| "null".into()),
                new.to_string(),
            );
            p.dscp = Some(LabelOrCode::Code(new));
        }
        ViolationKind::Ecn => {
            let new = rng.gen_range(4..=15);
            push_delta(
                deltas,
                "ECN",
                p.ecn.as_ref().map(|v| v.to_string()).unwrap_or_else(|| "null".into()),
                new.to_string(),
            );
            p.ecn = Some(LabelOrCode::Code(new));
        }
        ViolationKind::AddressFormat => {
            let corrupt_source = match (&p.source_addr, &p.dest_addr) {
                (Some(_), Some(_)) => rng.gen_bool(0.5),
                (Some(_), None) => true,
                _ => false,
            };
            let (field, slot) = if corrupt_source {
                ("Source", &mut p.source_addr)
            } else {
                ("Destination", &mut p.dest_addr)
            };
            let old = slot.clone().unwrap_or_default();
            let bad_group = if rng.gen_bool(0.5) { "zzzz" } else { "fffff" };
            let new = match old.split_once(':') {
                Some((_, rest)) => format!("{bad_group}:{rest}"),
                None => format!("{bad_group}:{old}"),
            };
            push_delta(deltas, field, old, new.clone());
            *slot = Some(new);
        }
        ViolationKind::TransportOverlap => {
            let absent: Vec<TransportGroup> = TransportGroup::ALL
                .into_iter()
                .filter(|g| !p.has_group(*g))
                .collect();
            // Populate enough extra groups to reach two.
            let need = 2usize.saturating_sub(p.populated_groups().len());
            let mut picks = absent;
            picks.shuffle(rng);
            for group in picks.into_iter().take(need.max(1)) {
                populate_group(p, group, rng, deltas);
            }
        }
        ViolationKind::ProtocolMismatch => {
            let actual = p.populated_groups()[0];
            let wrong: Vec<&str> = ["TCP", "UDP", "ICMPv6", "ICMP"]
                .into_iter()
                .filter(|l| {
                    oracle::declared_transport(&LabelOrCode::Label((*l).into()))
                        .map(|g| g != actual)
                        .unwrap_or(false)
                })
                .collect();
            let new = wrong.choose(rng).unwrap().to_string();
            push_delta(
                deltas,
                "Protocol",
                p.protocol.as_ref().map(|v| v.to_string()).unwrap_or_else(|| "null".into()),
                new.clone(),
            );
            p.protocol = Some(LabelOrCode::Label(new));
        }
        ViolationKind::NextHeader => {
            // Everything above 60 is outside the default valid set and does
            // not name a transport, so no mismatch side effect.
            let new = rng.gen_range(61..=255);
            push_delta(
                deltas,
                "Next Header",
                p.next_header.as_ref().map(|v| v.to_string()).unwrap_or_else(|| "null".into()),
                new.to_string(),
            );
            p.next_header = Some(LabelOrCode::Code(new));
        }
        ViolationKind::Icmpv6Code => {
            let (_, hi) = p
                .icmpv6
                .msg_type
                .as_ref()
                .and_then(oracle::icmpv6_code_range)
                .expect("eligibility checked");
            let new = hi + 1 + rng.gen_range(0..=50);
            push_delta(deltas, "ICMPv6 Code", show(&p.icmpv6.code), new.to_string());
            p.icmpv6.code = Some(new);
        }
        ViolationKind::LengthField => {
            let new = if rng.gen_bool(0.5) && p.hop_by_hop.is_none() {
                0
            } else {
                rng.gen_range(65_536..=131_070)
            };
            push_delta(deltas, "Payload Length", show(&p.payload_length), new.to_string());
            p.payload_length = Some(new);
        }
    }
}

fn populate_group(
    p: &mut PacketRecord,
    group: TransportGroup,
    rng: &mut ChaCha12Rng,
    deltas: &mut Vec<FieldDelta>,
) {
    match group {
        TransportGroup::Tcp => {
            let src = rng.gen_range(1024..=65_535);
            let dst = *[80i64, 443, 22, 8080].choose(rng).unwrap();
            push_delta(deltas, "TCP Src Port", "null".into(), src.to_string());
            push_delta(deltas, "TCP Dst Port", "null".into(), dst.to_string());
            p.tcp.src_port = Some(src);
            p.tcp.dst_port = Some(dst);
            p.tcp.stream = Some(rng.gen_range(0..100_000));
            p.tcp.sequence = Some(1);
            p.tcp.header_length = Some(*[20i64, 32].choose(rng).unwrap());
            p.tcp.flags = Some("0x010".into());
            p.tcp.window_size = Some(rng.gen_range(1..=65_535));
            p.tcp.checksum = Some(format!("0x{:04x}", rng.gen_range(0..=0xFFFFu32)));
        }
        TransportGroup::Udp => {
            let src = rng.gen_range(1024..=65_535);
            let dst = *[53i64, 123, 443].choose(rng).unwrap();
            // Stay under the frame length so no length violation sneaks in.
            let cap = p.length.unwrap_or(512).max(9);
            let len = rng.gen_range(8..=cap.min(512));
            push_delta(deltas, "UDP Source Port", "null".into(), src.to_string());
            push_delta(deltas, "UDP Destination Port", "null".into(), dst.to_string());
            push_delta(deltas, "UDP Length", "null".into(), len.to_string());
            p.udp.src_port = Some(src);
            p.udp.dst_port = Some(dst);
            p.udp.stream = Some(rng.gen_range(0..500_000));
            p.udp.length = Some(len);
            p.udp.checksum = Some(format!("0x{:04x}", rng.gen_range(0..=0xFFFFu32)));
        }
        TransportGroup::Icmpv6 => {
            let label = *["Echo (ping) request", "Echo (ping) reply"].choose(rng).unwrap();
            push_delta(deltas, "ICMPv6 Type", "null".into(), label.to_string());
            push_delta(deltas, "ICMPv6 Code", "null".into(), "0".into());
            p.icmpv6.msg_type = Some(LabelOrCode::Label(label.to_string()));
            p.icmpv6.code = Some(0);
            p.icmpv6.checksum = Some(format!("0x{:04x}", rng.gen_range(0..=0xFFFFu32)));
        }
    }
}

/// Build a labeled dataset from a compliant pool.
///
/// Kind sets are drawn first (uniformly unless weighted), then matched to a
/// random remaining record on which every drawn kind is mutable, keeping
/// per-kind counts near the uniform expectation regardless of pool mix.
pub fn build_dataset(
    pool: &[PacketRecord],
    plan: &InjectionPlan,
) -> Result<LabeledDataset, InjectError> {
    let (lo, hi) = plan.violations_per_sample;
    if lo < 1 || hi > 11 || lo > hi {
        return Err(InjectError::BadRange { lo, hi });
    }
    if pool.len() < plan.n_noncompliant {
        return Err(InjectError::PoolTooSmall { pool: pool.len(), needed: plan.n_noncompliant });
    }
    let oracle = Oracle::default();
    for (index, record) in pool.iter().enumerate() {
        let report = oracle.evaluate(record);
        if !report.compliant() {
            return Err(InjectError::PoolNotCompliant { index, violations: report.violations });
        }
    }

    let mut rng = ChaCha12Rng::seed_from_u64(plan.seed);
    let mut records: Vec<PacketRecord> = pool.to_vec();
    let mut labels = vec![Label::Compliant; pool.len()];
    let mut log: Vec<InjectionLogEntry> = Vec::with_capacity(plan.n_noncompliant);
    let mut remaining: Vec<usize> = (0..pool.len()).collect();

    for _ in 0..plan.n_noncompliant {
        let mut attempt = 0;
        let (index, kinds) = loop {
            let count = rng.gen_range(lo..=hi);
            let kinds = draw_kinds(count, plan.kind_weights.as_ref(), &mut rng);
            let eligible: Vec<usize> = (0..remaining.len())
                .filter(|pos| {
                    let record = &pool[remaining[*pos]];
                    kinds.iter().all(|k| kind_mutable(record, *k))
                })
                .collect();
            if let Some(pos) = eligible.choose(&mut rng) {
                break (remaining.swap_remove(*pos), kinds);
            }
            attempt += 1;
            if attempt > 200 {
                return Err(InjectError::NoEligibleRecord {
                    kinds: kinds.into_iter().collect(),
                });
            }
        };
        let (mutated, deltas) = inject(&pool[index], &kinds, &mut rng)?;
        records[index] = mutated;
        labels[index] = Label::NonCompliant;
        log.push(InjectionLogEntry {
            index,
            kinds: kinds.into_iter().collect(),
            deltas,
        });
    }
    log.sort_by_key(|e| e.index);
    Ok(LabeledDataset { records, labels, log })
}

fn draw_kinds(
    count: usize,
    weights: Option<&BTreeMap<ViolationKind, f64>>,
    rng: &mut ChaCha12Rng,
) -> BTreeSet<ViolationKind> {
    let mut chosen: BTreeSet<ViolationKind> = BTreeSet::new();
    let mut guard = 0;
    while chosen.len() < count && guard < 1000 {
        guard += 1;
        let candidates: Vec<ViolationKind> = ViolationKind::ALL
            .into_iter()
            .filter(|k| !chosen.contains(k))
            .filter(|k| chosen.iter().all(|c| kinds_compatible(*c, *k)))
            .collect();
        if candidates.is_empty() {
            break;
        }
        let pick = match weights {
            None => *candidates.choose(rng).unwrap(),
            Some(w) => {
                let total: f64 = candidates.iter().map(|k| w.get(k).copied().unwrap_or(1.0)).sum();
                let mut roll = rng.gen_range(0.0..total.max(f64::MIN_POSITIVE));
                let mut picked = candidates[candidates.len() - 1];
                for k in &candidates {
                    let weight = w.get(k).copied().unwrap_or(1.0);
                    if roll < weight {
                        picked = *k;
                        break;
                    }
                    roll -= weight;
                }
                picked
            }
        };
        chosen.insert(pick);
    }
    chosen
}

/// Profile of the bundled synthetic compliant pool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolProfile {
    pub tcp_weight: u32,
    pub udp_weight: u32,
    pub icmpv6_weight: u32,
}

impl Default for PoolProfile {
    fn default() -> Self {
        PoolProfile { tcp_weight: 40, udp_weight: 25, icmpv6_weight: 35 }
    }
}

/// Generate `n` oracle-compliant records at desk scale: realistic header
/// values with one transport group each, per the profile mix.
pub fn synth_pool(seed: u64, n: usize, profile: PoolProfile) -> Vec<PacketRecord> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut pool = Vec::with_capacity(n);
    let total = profile.tcp_weight + profile.udp_weight + profile.icmpv6_weight;
    for i in 0..n {
        let roll = rng.gen_range(0..total.max(1));
        let group = if roll < profile.tcp_weight {
            TransportGroup::Tcp
        } else if roll < profile.tcp_weight + profile.udp_weight {
            TransportGroup::Udp
        } else {
            TransportGroup::Icmpv6
        };
        pool.push(synth_record(&mut rng, i, group));
    }
    pool
}

fn synth_address(rng: &mut ChaCha12Rng) -> String {
    let groups: Vec<String> = (0..8)
        .map(|_| format!("{:x}", rng.gen_range(0x1u32..=0xFFFF)))
        .collect();
    groups.join(":")
}

fn synth_record(rng: &mut ChaCha12Rng, index: usize, group: TransportGroup) -> PacketRecord {
    let mut p = PacketRecord::default();
    let src = synth_address(rng);
    let dst = synth_address(rng);
    p.time = Some(format!(
        "00:{:02}:{:02}.{:06}",
        rng.gen_range(0..60),
        rng.gen_range(0..60),
        rng.gen_range(0..1_000_000)
    ));
    p.host = Some(format!("{src},{dst}"));
    p.source_addr = Some(src);
    p.dest_addr = Some(dst);
    p.length = Some(rng.gen_range(60..=1500));
    p.hop_limit = Some(rng.gen_range(1..=255));
    p.ipv6_version = Some(6);
    p.flow_label = Some(if rng.gen_bool(0.5) {
        "0x00000".to_string()
    } else {
        format!("0x{:05x}", rng.gen_range(0u32..=0xFFFFF))
    });
    p.dscp = Some(if rng.gen_bool(0.7) {
        LabelOrCode::Label("Default".into())
    } else {
        LabelOrCode::Code(rng.gen_range(0..=63))
    });
    p.ecn = Some(if rng.gen_bool(0.7) {
        LabelOrCode::Label("Not ECN-Capable Transport".into())
    } else {
        LabelOrCode::Code(rng.gen_range(0..=3))
    });
    p.protocol = Some(LabelOrCode::Label(group.name().to_string()));
    p.next_header = Some(LabelOrCode::Label(group.name().to_string()));
    match group {
        TransportGroup::Tcp => {
            let src_port = rng.gen_range(1024i64..=65_535);
            let dst_port = *[80i64, 443, 22, 8080, 25].choose(rng).unwrap();
            p.tcp.src_port = Some(src_port);
            p.tcp.dst_port = Some(dst_port);
            p.tcp.stream = Some(rng.gen_range(0..100_000));
            p.tcp.sequence = Some(rng.gen_range(0..10));
            p.tcp.sequence_raw = Some(rng.gen_range(0..u32::MAX as i64));
            p.tcp.ack = Some(1);
            p.tcp.ack_raw = Some(rng.gen_range(0..u32::MAX as i64));
            p.tcp.header_length = Some(*[20i64, 32].choose(rng).unwrap());
            p.tcp.flags = Some("0x010".into());
            p.tcp.window_size = Some(rng.gen_range(1..=65_535));
            p.tcp.checksum = Some(format!("0x{:04x}", rng.gen_range(0..=0xFFFFu32)));
            p.tcp.options = rng.gen_bool(0.5).then(|| "0101080a".to_string());
            p.source_port_resolved = Some(src_port);
            p.source_port_unresolved = Some(src_port);
            p.dest_port_resolved = Some(dst_port);
            p.dest_port_unresolved = Some(dst_port);
            p.info = Some(format!(
                "{src_port}  >  {dst_port} [ACK] Seq=1 Ack=1 Win=113 Len=0"
            ));
        }
        TransportGroup::Udp => {
            let src_port = rng.gen_range(1024i64..=65_535);
            let dst_port = *[53i64, 123, 443, 4500].choose(rng).unwrap();
            let frame = p.length.unwrap();
            p.udp.src_port = Some(src_port);
            p.udp.dst_port = Some(dst_port);
            p.udp.stream = Some(rng.gen_range(0..500_000));
            p.udp.length = Some(rng.gen_range(8..=frame.min(512)));
            p.udp.checksum = Some(format!("0x{:04x}", rng.gen_range(0..=0xFFFFu32)));
            p.source_port_resolved = Some(src_port);
            p.source_port_unresolved = Some(src_port);
            p.dest_port_resolved = Some(dst_port);
            p.dest_port_unresolved = Some(dst_port);
            p.info = Some(format!("{src_port}  >  {dst_port} Len={}", p.udp.length.unwrap()));
        }
        TransportGroup::Icmpv6 => {
            let label = *[
                "Echo (ping) request",
                "Echo (ping) reply",
                "Neighbor Solicitation",
                "Neighbor Advertisement",
                "Router Advertisement",
            ]
            .choose(rng)
            .unwrap();
            p.icmpv6.msg_type = Some(LabelOrCode::Label(label.to_string()));
            p.icmpv6.code = Some(0);
            p.icmpv6.checksum = Some(format!("0x{:04x}", rng.gen_range(0..=0xFFFFu32)));
            p.info = Some(format!(
                "{label} id=0x{:04x}, seq={}, hop limit={}",
                rng.gen_range(0..=0xFFFFu32),
                index % 64,
                p.hop_limit.unwrap()
            ));
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::evaluate;

    fn pool20() -> Vec<PacketRecord> {
        synth_pool(7, 20, PoolProfile::default())
    }

    #[test]
    fn synth_pool_is_compliant() {
        for (i, p) in synth_pool(42, 200, PoolProfile::default()).iter().enumerate() {
            let report = evaluate(p);
            assert!(report.compliant(), "record {i}: {:?}", report.violations);
        }
    }

    #[test]
    fn single_kind_round_trip_for_all_kinds() {
        let icmp_pool =
            synth_pool(1, 40, PoolProfile { tcp_weight: 0, udp_weight: 0, icmpv6_weight: 1 });
        let tcp_pool =
            synth_pool(2, 40, PoolProfile { tcp_weight: 1, udp_weight: 0, icmpv6_weight: 0 });
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for kind in ViolationKind::ALL {
            let pool = if kind == ViolationKind::Icmpv6Code { &icmp_pool } else { &tcp_pool };
            let p = &pool[0];
            let kinds: BTreeSet<_> = [kind].into_iter().collect();
            let (mutated, deltas) = inject(p, &kinds, &mut rng).unwrap();
            assert!(
                evaluate(&mutated).violations.contains(&kind),
                "{kind:?} not detected after injection"
            );
            assert!(!deltas.is_empty(), "{kind:?} produced no deltas");
        }
    }

    #[test]
    fn flow_label_injection_exceeds_the_bound() {
        let pool = pool20();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let kinds: BTreeSet<_> = [ViolationKind::FlowLabel].into_iter().collect();
        let (mutated, _) = inject(&pool[0], &kinds, &mut rng).unwrap();
        assert!(mutated.flow_label_value().unwrap().unwrap() > 1_048_575);
    }

    #[test]
    fn version_injection_uses_4_or_5() {
        let pool = pool20();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let kinds: BTreeSet<_> = [ViolationKind::Version].into_iter().collect();
        for p in pool.iter().take(8) {
            let (mutated, _) = inject(p, &kinds, &mut rng).unwrap();
            assert!(matches!(mutated.ipv6_version, Some(4) | Some(5)));
        }
    }

    #[test]
    fn overlap_injection_populates_a_second_group() {
        let pool =
            synth_pool(3, 5, PoolProfile { tcp_weight: 1, udp_weight: 0, icmpv6_weight: 0 });
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let kinds: BTreeSet<_> = [ViolationKind::TransportOverlap].into_iter().collect();
        let (mutated, _) = inject(&pool[0], &kinds, &mut rng).unwrap();
        assert!(mutated.populated_groups().len() >= 2);
        assert!(mutated.tcp.any_present());
    }

    #[test]
    fn noncompliant_input_is_rejected() {
        let pool = pool20();
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let kinds: BTreeSet<_> = [ViolationKind::Version].into_iter().collect();
        let (mutated, _) = inject(&pool[0], &kinds, &mut rng).unwrap();
        let err = inject(&mutated, &kinds, &mut rng).unwrap_err();
        assert!(matches!(err, InjectError::AlreadyNonCompliant(_)));
    }

    #[test]
    fn icmp_code_needs_an_icmp_group() {
        let pool =
            synth_pool(4, 5, PoolProfile { tcp_weight: 1, udp_weight: 0, icmpv6_weight: 0 });
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        let kinds: BTreeSet<_> = [ViolationKind::Icmpv6Code].into_iter().collect();
        let err = inject(&pool[0], &kinds, &mut rng).unwrap_err();
        assert!(matches!(err, InjectError::NotMutable { kind: ViolationKind::Icmpv6Code }));
    }

    #[test]
    fn multi_kind_sets_round_trip() {
        let pool = synth_pool(23, 50, PoolProfile::default());
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let mut draw_rng = ChaCha12Rng::seed_from_u64(99);
        let mut tried = 0;
        for p in &pool {
            let kinds = draw_kinds(3, None, &mut draw_rng);
            if !kinds.iter().all(|k| kind_mutable(p, *k)) {
                continue;
            }
            tried += 1;
            let (mutated, _) = inject(p, &kinds, &mut rng).unwrap();
            let after = evaluate(&mutated);
            for kind in &kinds {
                assert!(after.violations.contains(kind), "{kind:?} missing");
            }
        }
        assert!(tried > 10, "too few eligible draws exercised: {tried}");
    }

    #[test]
    fn build_dataset_defaults_shape() {
        let pool = synth_pool(31, 400, PoolProfile::default());
        let plan = InjectionPlan { seed: 101, n_noncompliant: 80, ..Default::default() };
        let ds = build_dataset(&pool, &plan).unwrap();
        assert_eq!(ds.records.len(), 400);
        assert_eq!(ds.labels.iter().filter(|l| **l == Label::NonCompliant).count(), 80);
        assert_eq!(ds.log.len(), 80);
        let total: usize = ds.log.iter().map(|e| e.kinds.len()).sum();
        assert!((80..=240).contains(&total), "total injected {total}");
        for entry in &ds.log {
            assert_eq!(ds.labels[entry.index], Label::NonCompliant);
            assert!(!entry.kinds.is_empty());
        }
    }

    #[test]
    fn build_dataset_round_trip_detection() {
        let pool = synth_pool(37, 300, PoolProfile::default());
        let plan = InjectionPlan { seed: 7, n_noncompliant: 60, ..Default::default() };
        let ds = build_dataset(&pool, &plan).unwrap();
        for entry in &ds.log {
            let report = evaluate(&ds.records[entry.index]);
            for kind in &entry.kinds {
                assert!(report.violations.contains(kind));
            }
            assert!(!report.compliant());
        }
    }

    #[test]
    fn untouched_records_stay_byte_identical() {
        let pool = synth_pool(41, 120, PoolProfile::default());
        let plan = InjectionPlan { seed: 3, n_noncompliant: 30, ..Default::default() };
        let ds = build_dataset(&pool, &plan).unwrap();
        let mutated: BTreeSet<usize> = ds.log.iter().map(|e| e.index).collect();
        for (i, record) in ds.records.iter().enumerate() {
            if !mutated.contains(&i) {
                assert_eq!(record.serialize(), pool[i].serialize());
                assert!(evaluate(record).compliant());
            }
        }
    }

    #[test]
    fn same_seed_builds_identical_datasets() {
        let pool = synth_pool(43, 150, PoolProfile::default());
        let plan = InjectionPlan { seed: 2024, n_noncompliant: 40, ..Default::default() };
        let a = build_dataset(&pool, &plan).unwrap();
        let b = build_dataset(&pool, &plan).unwrap();
        assert_eq!(a.to_files(), b.to_files());
    }

    #[test]
    fn zero_noncompliant_is_a_no_op() {
        let pool = pool20();
        let plan = InjectionPlan { seed: 1, n_noncompliant: 0, ..Default::default() };
        let ds = build_dataset(&pool, &plan).unwrap();
        assert!(ds.log.is_empty());
        assert!(ds.labels.iter().all(|l| *l == Label::Compliant));
    }

    #[test]
    fn pool_too_small_is_an_error() {
        let pool = pool20();
        let plan = InjectionPlan { seed: 1, n_noncompliant: 21, ..Default::default() };
        assert!(matches!(build_dataset(&pool, &plan), Err(InjectError::PoolTooSmall { .. })));
    }

    #[test]
    fn noncompliant_pool_is_an_error() {
        let mut pool = pool20();
        pool[3].ipv6_version = Some(4);
        let plan = InjectionPlan { seed: 1, n_noncompliant: 2, ..Default::default() };
        assert!(matches!(
            build_dataset(&pool, &plan),
            Err(InjectError::PoolNotCompliant { index: 3, .. })
        ));
    }

    #[test]
    fn incompatible_kinds_never_cooccur() {
        let pool = synth_pool(47, 600, PoolProfile::default());
        let plan = InjectionPlan {
            seed: 55,
            n_noncompliant: 150,
            violations_per_sample: (2, 3),
            ..Default::default()
        };
        let ds = build_dataset(&pool, &plan).unwrap();
        for entry in &ds.log {
            let has_mismatch = entry.kinds.contains(&ViolationKind::ProtocolMismatch);
            let has_overlap = entry.kinds.contains(&ViolationKind::TransportOverlap);
            assert!(!(has_mismatch && has_overlap), "incompatible pair at {}", entry.index);
        }
    }

    #[test]
    fn per_kind_counts_stay_near_uniform() {
        let pool = synth_pool(53, 1500, PoolProfile::default());
        let plan = InjectionPlan { seed: 99, n_noncompliant: 300, ..Default::default() };
        let ds = build_dataset(&pool, &plan).unwrap();
        let total: usize = ds.log.iter().map(|e| e.kinds.len()).sum();
        let expectation = total as f64 / 11.0;
        let mut counts: BTreeMap<ViolationKind, usize> = BTreeMap::new();
        for entry in &ds.log {
            for kind in &entry.kinds {
                *counts.entry(*kind).or_default() += 1;
            }
        }
        for kind in ViolationKind::ALL {
            let count = *counts.get(&kind).unwrap_or(&0) as f64;
            assert!(
                (count - expectation).abs() <= 0.4 * expectation,
                "{kind:?}: {count} vs expectation {expectation:.1}"
            );
        }
    }

    #[test]
    fn labels_csv_round_trip() {
        let pool = pool20();
        let plan = InjectionPlan { seed: 8, n_noncompliant: 5, ..Default::default() };
        let ds = build_dataset(&pool, &plan).unwrap();
        let (_, labels_csv, _) = ds.to_files();
        assert_eq!(parse_labels_csv(&labels_csv).unwrap(), ds.labels);
    }
}
