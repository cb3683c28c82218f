//! Pairnet MAC: coordinator (PRC) and device (PRDEV) state machines driven
//! by a deterministic discrete-event simulator.
//!
//! Both state machines are pure step functions `(state, event) -> (state,
//! actions)`. Time is kept in integer picoseconds so interframe spacing is
//! exact. Propagation delay is not modelled: a frame arrives when its
//! transmission ends.

mod prc;
mod prdev;
mod sim;
mod throughput;

use std::fmt;

use thiserror::Error;

use crate::channel_plan::ChannelDescriptor;
use crate::frame::{self, AckPolicy, FrameType, MacHeader, Preamble, MIN_FRAME_BYTES};
use crate::phy::Mcs;

pub use prc::{prc_step, PrcPhase, PrcState};
pub use prdev::{prdev_step, PrdevPhase, PrdevState, MAX_RETRIES};
pub use sim::{simulate_session, LossModel, SessionConfig, SessionTrace, TraceEntry};
pub use throughput::net_throughput_gbps;

/// Simulation time in picoseconds.
pub type Ps = u64;

pub const PS_PER_S: f64 = 1e12;
pub const PRC_ID: u8 = 1;
pub const PRDEV_ID: u8 = 2;
pub const DEFAULT_PAIRNET_ID: u16 = 0x0D3D;

pub fn ps_from_s(seconds: f64) -> Ps {
    (seconds * PS_PER_S).round() as Ps
}

pub fn s_from_ps(ps: Ps) -> f64 {
    ps as f64 / PS_PER_S
}

/// Exact decimal rendering of a picosecond timestamp in seconds.
pub fn format_ps(ps: Ps) -> String {
    format!("{}.{:012}", ps / 1_000_000_000_000, ps % 1_000_000_000_000)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MacError {
    #[error("event at {event_s} s precedes the node clock at {now_s} s")]
    TimeReversal { now_s: f64, event_s: f64 },
    #[error("invalid session configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Prc,
    Prdev,
}

impl Node {
    pub fn id(self) -> u8 {
        match self {
            Node::Prc => PRC_ID,
            Node::Prdev => PRDEV_ID,
        }
    }

    pub fn peer(self) -> Node {
        match self {
            Node::Prc => Node::Prdev,
            Node::Prdev => Node::Prc,
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Node::Prc => "PRC",
            Node::Prdev => "PRDEV",
        })
    }
}

/// Timing and radio parameters shared by both nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacParams {
    pub mcs: Mcs,
    pub channel: ChannelDescriptor,
    pub sifs: Ps,
    pub beacon_period: Ps,
    pub slot_count: u32,
    pub slot_duration: Ps,
    pub prc_timeout: Ps,
    /// Application bytes carried per DATA frame.
    pub frame_payload_bytes: u32,
    pub ack_policy: AckPolicy,
    pub pairnet_id: u16,
    /// Opaque higher-layer setup data carried by association frames.
    pub setup_blob_bytes: u32,
}

impl MacParams {
    /// On-air payload size: control frames and short DATA frames are padded
    /// to the minimum frame length.
    pub fn on_air_payload_bytes(&self, frame_type: FrameType, app_bytes: u32) -> u32 {
        let content = match frame_type {
            FrameType::AssocReq | FrameType::AssocRsp => self.setup_blob_bytes,
            FrameType::Data => app_bytes,
            _ => 0,
        };
        content.max(MIN_FRAME_BYTES)
    }

    pub fn airtime(&self, frame_type: FrameType, payload_bytes: u32) -> Ps {
        let seconds = frame::airtime_s(
            Preamble::for_frame_type(frame_type),
            payload_bytes as u64,
            &self.mcs,
            &self.channel,
        );
        (seconds * PS_PER_S).ceil() as Ps
    }

    pub(crate) fn frame(
        &self,
        sender: Node,
        frame_type: FrameType,
        seq_num: u16,
        app_bytes: u32,
    ) -> TxFrame {
        TxFrame {
            sender,
            header: MacHeader {
                frame_type,
                ack_policy: if frame_type == FrameType::Data {
                    self.ack_policy
                } else {
                    AckPolicy::None
                },
                pairnet_id: self.pairnet_id,
                src_id: sender.id(),
                dest_id: sender.peer().id(),
                seq_num,
            },
            payload_bytes: self.on_air_payload_bytes(frame_type, app_bytes),
            app_bytes,
        }
    }
}

/// A frame on the simulated medium. The payload content is not carried;
/// only its size matters to the MAC.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TxFrame {
    pub sender: Node,
    pub header: MacHeader,
    pub payload_bytes: u32,
    /// Application bytes inside the payload (DATA only).
    pub app_bytes: u32,
}

impl TxFrame {
    pub fn frame_type(&self) -> FrameType {
        self.header.frame_type
    }

    /// Total on-air bits: preamble tag, protected header and payload.
    pub fn bits(&self) -> u64 {
        frame::PAYLOAD_OFFSET_BITS as u64 + self.payload_bytes as u64 * 8
    }

    /// Codec-level frame with an all-zero payload.
    pub fn to_frame(&self, mcs: Mcs) -> frame::Frame {
        frame::Frame::new(mcs, self.header, vec![0; self.payload_bytes as usize])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TimerKind {
    Beacon,
    Timeout,
    TxOpp,
    AssocRspWait,
    AckWait,
    Probe,
}

/// A timer instance; a node ignores expiries whose generation it has since
/// moved past.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timer {
    pub kind: TimerKind,
    pub generation: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    FrameArrival(TxFrame),
    TimerExpiry(Timer),
    AppDataReady(u64),
}

impl EventKind {
    /// Tie-break order for simultaneous events.
    pub fn rank(&self) -> u8 {
        match self {
            EventKind::FrameArrival(_) => 0,
            EventKind::TimerExpiry(_) => 1,
            EventKind::AppDataReady(_) => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimEvent {
    pub time: Ps,
    pub kind: EventKind,
}

impl SimEvent {
    pub fn time_s(&self) -> f64 {
        s_from_ps(self.time)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Transmit { start: Ps, frame: TxFrame },
    SetTimer { at: Ps, timer: Timer },
}

fn check_time(now: Ps, event: &SimEvent) -> Result<(), MacError> {
    if event.time < now {
        return Err(MacError::TimeReversal {
            now_s: s_from_ps(now),
            event_s: event.time_s(),
        });
    }
    Ok(())
}
