//! Closed-form net throughput of a saturated associated period.

use crate::channel_plan::ChannelDescriptor;
use crate::frame::{airtime_s, AckPolicy, Preamble, MIN_FRAME_BYTES};
use crate::phy::Mcs;

/// Payload bits per cycle over the cycle time, where a cycle is one DATA
/// frame and a SIFS, plus an ACK and a second SIFS under per-frame
/// acknowledgement.
pub fn net_throughput_gbps(
    frame_payload_bytes: u32,
    ack_policy: AckPolicy,
    sifs_s: f64,
    mcs: &Mcs,
    channel: &ChannelDescriptor,
) -> f64 {
    let data = airtime_s(Preamble::Short, frame_payload_bytes as u64, mcs, channel);
    let mut cycle = data + sifs_s;
    if ack_policy == AckPolicy::PerFrame {
        cycle += airtime_s(Preamble::Short, MIN_FRAME_BYTES as u64, mcs, channel) + sifs_s;
    }
    frame_payload_bytes as f64 * 8.0 / cycle / 1e9
}
