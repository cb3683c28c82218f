//! Discrete-event session simulator.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frame::{AckPolicy, FrameType, MAX_FRAME_BYTES, MIN_FRAME_BYTES};
use crate::phy::{self, LinkConfig, LinkModel};

use super::{
    format_ps, prc_step, prdev_step, ps_from_s, s_from_ps, Action, EventKind, MacError, MacParams,
    Node, PrcPhase, PrcState, PrdevPhase, PrdevState, Ps, SimEvent, TxFrame, DEFAULT_PAIRNET_ID,
};

/// How frame losses are drawn. An infeasible link loses every frame
/// regardless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossModel {
    /// Independent Bernoulli loss per frame.
    Bernoulli(f64),
    /// Loss 0 when the link budget closes, 1 otherwise.
    FromLinkMargin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub link: LinkConfig,
    pub sifs_s: f64,
    pub beacon_period_s: f64,
    pub slot_count: u32,
    pub slot_duration_s: f64,
    pub prc_timeout_s: f64,
    pub payload_bytes_total: u64,
    pub frame_payload_bytes: u32,
    pub ack_policy: AckPolicy,
    pub loss: LossModel,
    pub setup_blob_bytes: u32,
    /// `(time_s, bytes)` deliveries from the application. Empty means the
    /// whole payload is ready at time zero.
    pub app_schedule: Vec<(f64, u64)>,
    pub max_duration_s: f64,
    pub pairnet_id: u16,
}

impl SessionConfig {
    /// Default MAC timing around the given link.
    pub fn new(link: LinkConfig) -> SessionConfig {
        SessionConfig {
            link,
            sifs_s: 1e-6,
            beacon_period_s: 10e-3,
            slot_count: 8,
            slot_duration_s: 100e-6,
            prc_timeout_s: 100e-3,
            payload_bytes_total: 0,
            frame_payload_bytes: MAX_FRAME_BYTES,
            ack_policy: AckPolicy::None,
            loss: LossModel::Bernoulli(0.0),
            setup_blob_bytes: 0,
            app_schedule: Vec::new(),
            max_duration_s: 10.0,
            pairnet_id: DEFAULT_PAIRNET_ID,
        }
    }

    pub fn validate(&self) -> Result<(), MacError> {
        let bad = |msg: String| Err(MacError::InvalidConfig(msg));
        self.link
            .validate()
            .map_err(|e| MacError::InvalidConfig(e.to_string()))?;
        if !(MIN_FRAME_BYTES..=MAX_FRAME_BYTES).contains(&self.frame_payload_bytes) {
            return bad(format!(
                "frame_payload_bytes {} outside [{MIN_FRAME_BYTES}, {MAX_FRAME_BYTES}]",
                self.frame_payload_bytes
            ));
        }
        if self.setup_blob_bytes > MAX_FRAME_BYTES {
            return bad(format!(
                "setup_blob_bytes {} too large",
                self.setup_blob_bytes
            ));
        }
        if self.slot_count == 0 {
            return bad("slot_count must be at least 1".into());
        }
        let durations = [
            ("sifs_s", self.sifs_s, false),
            ("beacon_period_s", self.beacon_period_s, true),
            ("slot_duration_s", self.slot_duration_s, true),
            ("prc_timeout_s", self.prc_timeout_s, true),
            ("max_duration_s", self.max_duration_s, true),
        ];
        for (name, v, strictly) in durations {
            let ok = v.is_finite() && if strictly { v > 0.0 } else { v >= 0.0 };
            if !ok || v > 1e6 {
                return bad(format!("{name} = {v} is out of range"));
            }
        }
        if let LossModel::Bernoulli(p) = self.loss {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("frame loss probability {p} outside [0, 1]"));
            }
        }
        for &(t, _) in &self.app_schedule {
            if !(t.is_finite() && t >= 0.0) {
                return bad(format!("app schedule time {t} is invalid"));
            }
        }
        if !self.app_schedule.is_empty() {
            let scheduled: u64 = self.app_schedule.iter().map(|&(_, b)| b).sum();
            if scheduled != self.payload_bytes_total {
                return bad(format!(
                    "app schedule carries {scheduled} bytes but payload_bytes_total is {}",
                    self.payload_bytes_total
                ));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> MacParams {
        MacParams {
            mcs: self.link.mcs,
            channel: self.link.channel,
            sifs: ps_from_s(self.sifs_s),
            beacon_period: ps_from_s(self.beacon_period_s),
            slot_count: self.slot_count,
            slot_duration: ps_from_s(self.slot_duration_s),
            prc_timeout: ps_from_s(self.prc_timeout_s),
            frame_payload_bytes: self.frame_payload_bytes,
            ack_policy: self.ack_policy,
            pairnet_id: self.pairnet_id,
            setup_blob_bytes: self.setup_blob_bytes,
        }
    }

    /// Per-frame loss probability after the link check.
    pub fn loss_probability(&self) -> f64 {
        let (feasible, _) = LinkModel::default().link_feasible(&self.link);
        match (feasible, self.loss) {
            (false, _) => 1.0,
            (true, LossModel::Bernoulli(p)) => p,
            (true, LossModel::FromLinkMargin) => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub start: Ps,
    pub end: Ps,
    pub sender: Node,
    pub frame_type: FrameType,
    pub seq_num: u16,
    pub bits: u64,
    pub app_bytes: u32,
    pub delivered: bool,
}

impl TraceEntry {
    pub fn start_s(&self) -> f64 {
        s_from_ps(self.start)
    }

    pub fn airtime_s(&self) -> f64 {
        s_from_ps(self.end - self.start)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionTrace {
    pub entries: Vec<TraceEntry>,
    /// End of the first delivered Association Response, from session start.
    pub association_latency_s: Option<f64>,
    /// Start of the Disassociation Request, from session start.
    pub completion_time_s: Option<f64>,
    pub delivered_app_bytes: u64,
    pub goodput_gbps: f64,
    pub data_rate_gbps: f64,
    pub final_prc: PrcPhase,
    pub final_prdev: PrdevPhase,
    pub end_time_s: f64,
}

impl SessionTrace {
    pub fn overhead_fraction(&self) -> f64 {
        if self.data_rate_gbps > 0.0 {
            1.0 - self.goodput_gbps / self.data_rate_gbps
        } else {
            0.0
        }
    }

    pub fn frame_types(&self) -> Vec<FrameType> {
        self.entries.iter().map(|e| e.frame_type).collect()
    }

    pub fn associations(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.frame_type == FrameType::AssocRsp && e.delivered)
            .count()
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("time_s,sender,frame_type,seq,bits,airtime_s,delivered\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                format_ps(e.start),
                e.sender,
                e.frame_type,
                e.seq_num,
                e.bits,
                format_ps(e.end - e.start),
                e.delivered
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |t| format!("{t:.9}"));
        format!(
            "frames,{}\nassociation_latency_s,{}\ncompletion_time_s,{}\ndelivered_bytes,{}\n\
             goodput_gbps,{:.2}\nphy_rate_gbps,{:.2}\noverhead_fraction,{:.4}\nend_time_s,{:.9}\n",
            self.entries.len(),
            opt(self.association_latency_s),
            opt(self.completion_time_s),
            self.delivered_app_bytes,
            self.goodput_gbps,
            self.data_rate_gbps,
            self.overhead_fraction(),
            self.end_time_s,
        )
    }
}

/// Queued event. Ordered by time, then event kind, then insertion.
#[derive(Debug)]
struct Queued {
    event: SimEvent,
    seq: u64,
    target: Node,
    /// Trace index for frame arrivals.
    trace_index: Option<usize>,
}

impl Queued {
    fn key(&self) -> (Ps, u8, u64) {
        (self.event.time, self.event.kind.rank(), self.seq)
    }
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        other.key().cmp(&self.key())
    }
}

struct Sim {
    queue: BinaryHeap<Queued>,
    next_seq: u64,
    entries: Vec<TraceEntry>,
    rng: ChaCha8Rng,
    loss: f64,
    params: MacParams,
}

/// Transmissions this far back are checked for overlap.
const COLLISION_LOOKBACK: usize = 8;

impl Sim {
    fn push(&mut self, target: Node, event: SimEvent, trace_index: Option<usize>) {
        self.queue.push(Queued {
            event,
            seq: self.next_seq,
            target,
            trace_index,
        });
        self.next_seq += 1;
    }

    fn apply(&mut self, node: Node, actions: Vec<Action>) {
        for action in actions {
            match action {
                Action::SetTimer { at, timer } => self.push(
                    node,
                    SimEvent {
                        time: at,
                        kind: EventKind::TimerExpiry(timer),
                    },
                    None,
                ),
                Action::Transmit { start, frame } => self.transmit(start, frame),
            }
        }
    }

    fn transmit(&mut self, start: Ps, frame: TxFrame) {
        let end = start + self.params.airtime(frame.frame_type(), frame.payload_bytes);
        let delivered = if self.loss <= 0.0 {
            true
        } else if self.loss >= 1.0 {
            false
        } else {
            self.rng.gen::<f64>() >= self.loss
        };
        let mut entry = TraceEntry {
            start,
            end,
            sender: frame.sender,
            frame_type: frame.frame_type(),
            seq_num: frame.header.seq_num,
            bits: frame.bits(),
            app_bytes: frame.app_bytes,
            delivered,
        };
        let n = self.entries.len();
        for other in self.entries[n.saturating_sub(COLLISION_LOOKBACK)..].iter_mut() {
            if other.sender != frame.sender && other.start < end && start < other.end {
                other.delivered = false;
                entry.delivered = false;
            }
        }
        self.entries.push(entry);
        self.push(
            frame.sender.peer(),
            SimEvent {
                time: end,
                kind: EventKind::FrameArrival(frame),
            },
            Some(n),
        );
    }
}

/// Runs one pairnet session: the PRC beacons from time zero, the PRDEV
/// associates, sends the application payload and disassociates. The run
/// stops at the first beacon after the PRDEV is done, or at
/// `max_duration_s`.
pub fn simulate_session(config: &SessionConfig, seed: u64) -> Result<SessionTrace, MacError> {
    config.validate()?;
    let params = config.params();
    let mut sim = Sim {
        queue: BinaryHeap::new(),
        next_seq: 0,
        entries: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(seed),
        loss: config.loss_probability(),
        params,
    };
    let (mut prc, init) = PrcState::new(params, 0);
    sim.apply(Node::Prc, init);
    let mut prdev = PrdevState::new(
        params,
        config.payload_bytes_total,
        seed ^ 0x9E37_79B9_7F4A_7C15,
    );
    if config.app_schedule.is_empty() {
        if config.payload_bytes_total > 0 {
            sim.push(
                Node::Prdev,
                SimEvent {
                    time: 0,
                    kind: EventKind::AppDataReady(config.payload_bytes_total),
                },
                None,
            );
        }
    } else {
        for &(t, bytes) in &config.app_schedule {
            sim.push(
                Node::Prdev,
                SimEvent {
                    time: ps_from_s(t),
                    kind: EventKind::AppDataReady(bytes),
                },
                None,
            );
        }
    }

    let horizon = ps_from_s(config.max_duration_s);
    let mut now = 0;
    let mut done_at: Option<Ps> = None;
    'run: while let Some(q) = sim.queue.pop() {
        if q.event.time > horizon {
            break;
        }
        now = q.event.time;
        if let Some(i) = q.trace_index {
            if !sim.entries[i].delivered {
                continue;
            }
        }
        let before = sim.entries.len();
        let actions = match q.target {
            Node::Prc => {
                let (s, a) = prc_step(&prc, &q.event)?;
                prc = s;
                a
            }
            Node::Prdev => {
                let (s, a) = prdev_step(&prdev, &q.event)?;
                prdev = s;
                a
            }
        };
        sim.apply(q.target, actions);
        if prdev.done && done_at.is_none() {
            done_at = Some(now);
        }
        if let Some(t) = done_at {
            for e in &sim.entries[before..] {
                if e.frame_type == FrameType::Beacon && e.start >= t {
                    now = now.max(e.end);
                    break 'run;
                }
            }
        }
    }

    let entries = sim.entries;
    let association_latency_s = entries
        .iter()
        .find(|e| e.frame_type == FrameType::AssocRsp && e.delivered)
        .map(|e| s_from_ps(e.end));
    let first_data = entries.iter().find(|e| e.frame_type == FrameType::Data);
    let disassoc = entries
        .iter()
        .find(|e| e.frame_type == FrameType::DisassocReq);
    let data_rate_gbps = phy::data_rate_gbps(&params.mcs, &params.channel);
    let goodput_gbps = match (first_data, disassoc) {
        (Some(d), Some(x)) if x.start > d.start => {
            prc.delivered_app_bytes as f64 * 8.0 / s_from_ps(x.start - d.start) / 1e9
        }
        _ => 0.0,
    };
    Ok(SessionTrace {
        association_latency_s,
        completion_time_s: disassoc.map(|x| s_from_ps(x.start)),
        delivered_app_bytes: prc.delivered_app_bytes,
        goodput_gbps,
        data_rate_gbps,
        final_prc: prc.phase,
        final_prdev: prdev.phase,
        end_time_s: s_from_ps(now),
        entries,
    })
}
