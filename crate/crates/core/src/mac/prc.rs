//! Pairnet coordinator.

use crate::frame::{FrameType, MAX_SEQ_NUM};

use super::{
    check_time, Action, EventKind, MacError, MacParams, Node, Ps, SimEvent, Timer, TimerKind,
    TxFrame,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrcPhase {
    PspBeaconing,
    AwaitFirstData,
    PapActive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrcState {
    pub now: Ps,
    pub phase: PrcPhase,
    /// Armed only in the associated phases.
    pub timeout_deadline: Option<Ps>,
    /// End of the most recent beacon; the access window follows it.
    pub last_beacon_end: Option<Ps>,
    pub delivered_app_bytes: u64,
    pub delivered_frames: u64,
    pub associations: u32,
    beacon_gen: u32,
    timeout_gen: u32,
    last_data_seq: Option<u16>,
    next_seq: u16,
    params: MacParams,
}

impl PrcState {
    /// Fresh coordinator; the first beacon goes out at `start`.
    pub fn new(params: MacParams, start: Ps) -> (PrcState, Vec<Action>) {
        let mut s = PrcState {
            now: start,
            phase: PrcPhase::PspBeaconing,
            timeout_deadline: None,
            last_beacon_end: None,
            delivered_app_bytes: 0,
            delivered_frames: 0,
            associations: 0,
            beacon_gen: 0,
            timeout_gen: 0,
            last_data_seq: None,
            next_seq: 0,
            params,
        };
        let mut actions = Vec::new();
        s.schedule_beacon(start, &mut actions);
        (s, actions)
    }

    pub fn params(&self) -> &MacParams {
        &self.params
    }

    /// `[start, end)` of the access window after the last beacon. Slot `k`
    /// starts `k` slot durations after `start`.
    pub fn access_window(&self) -> Option<(Ps, Ps)> {
        self.last_beacon_end.map(|end| {
            let start = end + self.params.sifs;
            (
                start,
                start + self.params.slot_count as Ps * self.params.slot_duration,
            )
        })
    }

    fn schedule_beacon(&mut self, at: Ps, actions: &mut Vec<Action>) {
        self.beacon_gen += 1;
        actions.push(Action::SetTimer {
            at,
            timer: Timer {
                kind: TimerKind::Beacon,
                generation: self.beacon_gen,
            },
        });
    }

    fn arm_timeout(&mut self, from: Ps, actions: &mut Vec<Action>) {
        self.timeout_gen += 1;
        let at = from + self.params.prc_timeout;
        self.timeout_deadline = Some(at);
        actions.push(Action::SetTimer {
            at,
            timer: Timer {
                kind: TimerKind::Timeout,
                generation: self.timeout_gen,
            },
        });
    }

    fn back_to_psp(&mut self, first_beacon: Ps, actions: &mut Vec<Action>) {
        self.phase = PrcPhase::PspBeaconing;
        self.timeout_gen += 1;
        self.timeout_deadline = None;
        self.schedule_beacon(first_beacon, actions);
    }

    fn take_seq(&mut self) -> u16 {
        let seq = self.next_seq;
        self.next_seq = (self.next_seq + 1) & MAX_SEQ_NUM;
        seq
    }

    fn transmit(
        &mut self,
        start: Ps,
        frame_type: FrameType,
        seq: u16,
        actions: &mut Vec<Action>,
    ) -> Ps {
        let frame = self.params.frame(Node::Prc, frame_type, seq, 0);
        actions.push(Action::Transmit { start, frame });
        start + self.params.airtime(frame_type, frame.payload_bytes)
    }

    fn in_access_slot(&self, start: Ps) -> bool {
        match self.access_window() {
            Some((lo, hi)) => {
                start >= lo && start < hi && (start - lo).is_multiple_of(self.params.slot_duration)
            }
            None => false,
        }
    }

    fn on_timer(&mut self, timer: Timer, actions: &mut Vec<Action>) {
        match timer.kind {
            TimerKind::Beacon
                if timer.generation == self.beacon_gen && self.phase == PrcPhase::PspBeaconing =>
            {
                let seq = self.take_seq();
                let end = self.transmit(self.now, FrameType::Beacon, seq, actions);
                self.last_beacon_end = Some(end);
                self.schedule_beacon(self.now + self.params.beacon_period, actions);
            }
            TimerKind::Timeout
                if timer.generation == self.timeout_gen && self.phase != PrcPhase::PspBeaconing =>
            {
                // No frame in this step; the beacon timer fires next.
                self.back_to_psp(self.now, actions);
            }
            _ => {}
        }
    }

    fn on_frame(&mut self, frame: &TxFrame, actions: &mut Vec<Action>) {
        let h = &frame.header;
        if frame.sender != Node::Prdev || h.pairnet_id != self.params.pairnet_id {
            return;
        }
        match (self.phase, h.frame_type) {
            (PrcPhase::PspBeaconing, FrameType::AssocReq) => {
                let start = self.now
                    - self
                        .params
                        .airtime(FrameType::AssocReq, frame.payload_bytes);
                if !self.in_access_slot(start) {
                    return;
                }
                self.beacon_gen += 1;
                let seq = self.take_seq();
                let end = self.transmit(
                    self.now + self.params.sifs,
                    FrameType::AssocRsp,
                    seq,
                    actions,
                );
                self.phase = PrcPhase::AwaitFirstData;
                self.associations += 1;
                self.last_data_seq = None;
                self.arm_timeout(end, actions);
            }
            (PrcPhase::PspBeaconing, _) => {}
            (_, FrameType::DisassocReq) => {
                self.back_to_psp(self.now + self.params.sifs, actions);
            }
            (_, FrameType::Data) => {
                self.phase = PrcPhase::PapActive;
                if self.last_data_seq != Some(h.seq_num) {
                    self.last_data_seq = Some(h.seq_num);
                    self.delivered_app_bytes += frame.app_bytes as u64;
                    self.delivered_frames += 1;
                }
                self.arm_timeout(self.now, actions);
                if h.ack_policy == crate::frame::AckPolicy::PerFrame {
                    self.transmit(
                        self.now + self.params.sifs,
                        FrameType::Ack,
                        h.seq_num,
                        actions,
                    );
                }
            }
            (_, FrameType::ProbeReq) => self.arm_timeout(self.now, actions),
            _ => {}
        }
    }
}

/// Advances the coordinator by one event.
pub fn prc_step(state: &PrcState, event: &SimEvent) -> Result<(PrcState, Vec<Action>), MacError> {
    check_time(state.now, event)?;
    let mut s = state.clone();
    s.now = event.time;
    let mut actions = Vec::new();
    match &event.kind {
        EventKind::TimerExpiry(t) => s.on_timer(*t, &mut actions),
        EventKind::FrameArrival(f) => s.on_frame(f, &mut actions),
        EventKind::AppDataReady(_) => {}
    }
    Ok((s, actions))
}
