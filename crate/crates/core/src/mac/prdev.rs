//! Pairnet device: joins the coordinator, sends the application data, then
//! disassociates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frame::{AckPolicy, FrameType, MAX_SEQ_NUM};

use super::{
    check_time, Action, EventKind, MacError, MacParams, Node, Ps, SimEvent, Timer, TimerKind,
    TxFrame,
};

/// Retransmissions of an unacknowledged DATA frame before giving up.
pub const MAX_RETRIES: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrdevPhase {
    Scanning,
    AwaitAssocRsp,
    PapActive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct InFlight {
    seq: u16,
    app_bytes: u32,
    retries: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrdevState {
    pub now: Ps,
    pub phase: PrdevPhase,
    /// Application bytes queued and not yet handed to the PHY.
    pub pending_payload_bytes: u64,
    /// Set once the Disassociation Request for a finished session is sent.
    pub done: bool,
    app_bytes_expected: u64,
    app_bytes_received: u64,
    in_flight: Option<InFlight>,
    next_seq: u16,
    last_tx_end: Ps,
    /// Generation per timer kind: TxOpp, AssocRspWait, AckWait, Probe.
    gens: [u32; 4],
    rng: ChaCha8Rng,
    params: MacParams,
}

fn gen_slot(kind: TimerKind) -> usize {
    match kind {
        TimerKind::TxOpp => 0,
        TimerKind::AssocRspWait => 1,
        TimerKind::AckWait => 2,
        TimerKind::Probe => 3,
        TimerKind::Beacon | TimerKind::Timeout => unreachable!("coordinator timer"),
    }
}

impl PrdevState {
    /// Fresh device expecting `app_bytes_expected` bytes from the
    /// application in total; `seed` drives access-slot selection.
    pub fn new(params: MacParams, app_bytes_expected: u64, seed: u64) -> PrdevState {
        PrdevState {
            now: 0,
            phase: PrdevPhase::Scanning,
            pending_payload_bytes: 0,
            done: false,
            app_bytes_expected,
            app_bytes_received: 0,
            in_flight: None,
            next_seq: 0,
            last_tx_end: 0,
            gens: [0; 4],
            rng: ChaCha8Rng::seed_from_u64(seed),
            params,
        }
    }

    pub fn params(&self) -> &MacParams {
        &self.params
    }

    /// All application data received, sent and (if required) acknowledged.
    pub fn app_complete(&self) -> bool {
        self.app_bytes_received >= self.app_bytes_expected
            && self.pending_payload_bytes == 0
            && self.in_flight.is_none()
    }

    fn set_timer(&mut self, kind: TimerKind, at: Ps, actions: &mut Vec<Action>) {
        let g = &mut self.gens[gen_slot(kind)];
        *g += 1;
        actions.push(Action::SetTimer {
            at,
            timer: Timer {
                kind,
                generation: *g,
            },
        });
    }

    fn cancel(&mut self, kind: TimerKind) {
        self.gens[gen_slot(kind)] += 1;
    }

    fn cancel_all(&mut self) {
        for g in &mut self.gens {
            *g += 1;
        }
    }

    fn is_current(&self, timer: Timer) -> bool {
        matches!(
            timer.kind,
            TimerKind::TxOpp | TimerKind::AssocRspWait | TimerKind::AckWait | TimerKind::Probe
        ) && self.gens[gen_slot(timer.kind)] == timer.generation
    }

    fn transmit(
        &mut self,
        start: Ps,
        frame_type: FrameType,
        seq: u16,
        app_bytes: u32,
        actions: &mut Vec<Action>,
    ) -> Ps {
        let frame = self.params.frame(Node::Prdev, frame_type, seq, app_bytes);
        actions.push(Action::Transmit { start, frame });
        let end = start + self.params.airtime(frame_type, frame.payload_bytes);
        self.last_tx_end = end;
        end
    }

    fn take_seq(&mut self) -> u16 {
        let seq = self.next_seq;
        self.next_seq = (self.next_seq + 1) & MAX_SEQ_NUM;
        seq
    }

    /// Arms the acknowledgement wait for a DATA frame ending at `end`.
    fn await_ack(&mut self, end: Ps, actions: &mut Vec<Action>) {
        let ack_bytes = self.params.on_air_payload_bytes(FrameType::Ack, 0);
        let ack_air = self.params.airtime(FrameType::Ack, ack_bytes);
        let at = end + 2 * self.params.sifs + ack_air;
        self.set_timer(TimerKind::AckWait, at, actions);
    }

    /// Uses the transmit opportunity starting at `start`.
    fn next_transmission(&mut self, start: Ps, actions: &mut Vec<Action>) {
        if self.pending_payload_bytes > 0 {
            let chunk = self
                .pending_payload_bytes
                .min(self.params.frame_payload_bytes as u64) as u32;
            self.pending_payload_bytes -= chunk as u64;
            let seq = self.take_seq();
            let end = self.transmit(start, FrameType::Data, seq, chunk, actions);
            match self.params.ack_policy {
                AckPolicy::None => {
                    self.set_timer(TimerKind::TxOpp, end + self.params.sifs, actions)
                }
                AckPolicy::PerFrame => {
                    self.in_flight = Some(InFlight {
                        seq,
                        app_bytes: chunk,
                        retries: 0,
                    });
                    self.await_ack(end, actions);
                }
            }
        } else if self.app_complete() {
            let seq = self.take_seq();
            self.transmit(start, FrameType::DisassocReq, seq, 0, actions);
            self.cancel_all();
            self.phase = PrdevPhase::Scanning;
            self.done = true;
        } else {
            let probe_at = start.max(self.last_tx_end + self.params.prc_timeout / 2);
            self.set_timer(TimerKind::Probe, probe_at, actions);
        }
    }

    /// Requeues unacknowledged data and drops back to scanning.
    fn lose_association(&mut self) {
        if let Some(f) = self.in_flight.take() {
            self.pending_payload_bytes += f.app_bytes as u64;
        }
        self.cancel_all();
        self.phase = PrdevPhase::Scanning;
    }

    fn on_timer(&mut self, timer: Timer, actions: &mut Vec<Action>) {
        if !self.is_current(timer) {
            return;
        }
        match (timer.kind, self.phase) {
            (TimerKind::AssocRspWait, PrdevPhase::AwaitAssocRsp) => {
                self.phase = PrdevPhase::Scanning;
            }
            (TimerKind::TxOpp, PrdevPhase::PapActive) => self.next_transmission(self.now, actions),
            (TimerKind::Probe, PrdevPhase::PapActive) => {
                if self.pending_payload_bytes > 0 || self.app_complete() {
                    self.next_transmission(self.now, actions);
                } else {
                    let seq = self.take_seq();
                    let end = self.transmit(self.now, FrameType::ProbeReq, seq, 0, actions);
                    self.set_timer(TimerKind::Probe, end + self.params.prc_timeout / 2, actions);
                }
            }
            (TimerKind::AckWait, PrdevPhase::PapActive) => {
                let Some(mut f) = self.in_flight else { return };
                if f.retries >= MAX_RETRIES {
                    self.lose_association();
                    return;
                }
                f.retries += 1;
                self.in_flight = Some(f);
                let end = self.transmit(self.now, FrameType::Data, f.seq, f.app_bytes, actions);
                self.await_ack(end, actions);
            }
            _ => {}
        }
    }

    fn on_frame(&mut self, frame: &TxFrame, actions: &mut Vec<Action>) {
        let h = &frame.header;
        if frame.sender != Node::Prc || h.pairnet_id != self.params.pairnet_id || self.done {
            return;
        }
        match (h.frame_type, self.phase) {
            (FrameType::Beacon, _) => {
                // A beacon in any phase means the coordinator is in setup.
                self.lose_association();
                let slot = self.rng.gen_range(0..self.params.slot_count) as Ps;
                let start = self.now + self.params.sifs + slot * self.params.slot_duration;
                let seq = self.take_seq();
                let end = self.transmit(start, FrameType::AssocReq, seq, 0, actions);
                self.phase = PrdevPhase::AwaitAssocRsp;
                self.set_timer(
                    TimerKind::AssocRspWait,
                    end + self.params.beacon_period,
                    actions,
                );
            }
            (FrameType::AssocRsp, PrdevPhase::AwaitAssocRsp) => {
                self.cancel(TimerKind::AssocRspWait);
                self.phase = PrdevPhase::PapActive;
                self.last_tx_end = self.now;
                self.next_transmission(self.now + self.params.sifs, actions);
            }
            (FrameType::Ack, PrdevPhase::PapActive)
                if self.in_flight.map(|f| f.seq) == Some(h.seq_num) =>
            {
                self.in_flight = None;
                self.cancel(TimerKind::AckWait);
                self.next_transmission(self.now + self.params.sifs, actions);
            }
            _ => {}
        }
    }

    fn on_app_data(&mut self, bytes: u64, actions: &mut Vec<Action>) {
        self.app_bytes_received += bytes;
        self.pending_payload_bytes += bytes;
        // Idle in the associated period: only a probe is pending.
        let idle = self.phase == PrdevPhase::PapActive
            && self.in_flight.is_none()
            && self.now >= self.last_tx_end;
        if idle {
            self.cancel(TimerKind::Probe);
            self.cancel(TimerKind::TxOpp);
            let start = self.now.max(self.last_tx_end + self.params.sifs);
            self.set_timer(TimerKind::TxOpp, start, actions);
        }
    }
}

/// Advances the device by one event.
pub fn prdev_step(
    state: &PrdevState,
    event: &SimEvent,
) -> Result<(PrdevState, Vec<Action>), MacError> {
    check_time(state.now, event)?;
    let mut s = state.clone();
    s.now = event.time;
    let mut actions = Vec::new();
    match &event.kind {
        EventKind::TimerExpiry(t) => s.on_timer(*t, &mut actions),
        EventKind::FrameArrival(f) => s.on_frame(f, &mut actions),
        EventKind::AppDataReady(bytes) => s.on_app_data(*bytes, &mut actions),
    }
    Ok((s, actions))
}
