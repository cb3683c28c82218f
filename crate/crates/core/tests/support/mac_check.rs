//! Random session configurations and a trace checker for the pairnet MAC
//! invariants.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subthz::channel_plan::channel_by_id;
use subthz::frame::{AckPolicy, FrameType, MAX_FRAME_BYTES, MIN_FRAME_BYTES};
use subthz::mac::{ps_from_s, LossModel, Node, PrcPhase, PrdevPhase, SessionConfig, SessionTrace};
use subthz::phy::{self, Mcs, UseCase, UseCaseProfile};

/// A session configuration drawn from `seed`. Most draws are lossless on a
/// feasible link; some add Bernoulli loss.
pub fn random_config(seed: u64) -> SessionConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let channel = channel_by_id(rng.gen_range(1..=69)).unwrap();
    let all = Mcs::all();
    let mcs = all[rng.gen_range(0..all.len())];
    let distance = rng.gen_range(0.01..0.2);
    let profile = UseCaseProfile::new(UseCase::Kiosk);
    let mut link = profile.link(channel, mcs, distance);
    if !phy::link_feasible(&link).0 {
        if let Ok(m) = phy::best_mcs(&link) {
            link = link.with_mcs(m);
        }
    }
    let mut c = SessionConfig::new(link);
    c.payload_bytes_total = rng.gen_range(0..=3_000_000);
    c.frame_payload_bytes = rng.gen_range(MIN_FRAME_BYTES..=MAX_FRAME_BYTES);
    c.ack_policy = if rng.gen_bool(0.5) {
        AckPolicy::None
    } else {
        AckPolicy::PerFrame
    };
    c.sifs_s = rng.gen_range(0.1e-6..3e-6);
    c.slot_count = rng.gen_range(1..=8);
    c.slot_duration_s = rng.gen_range(10e-6..100e-6);
    c.beacon_period_s = rng.gen_range(5e-3..20e-3);
    c.prc_timeout_s = rng.gen_range(50e-3..200e-3);
    c.setup_blob_bytes = rng.gen_range(0..=8192);
    c.max_duration_s = 2.0;
    if c.payload_bytes_total > 0 && rng.gen_bool(0.3) {
        let first = rng.gen_range(0..=c.payload_bytes_total);
        let later = rng.gen_range(0.0..0.3);
        c.app_schedule = vec![(0.0, first), (later, c.payload_bytes_total - first)];
    }
    if rng.gen_bool(0.2) {
        c.loss = LossModel::Bernoulli(rng.gen_range(0.0..0.2));
    }
    c
}

fn is_pap(t: FrameType) -> bool {
    matches!(t, FrameType::Data | FrameType::Ack | FrameType::ProbeReq)
}

/// Every invariant violation found in `trace`.
pub fn violations(c: &SessionConfig, trace: &SessionTrace) -> Vec<String> {
    let mut v = Vec::new();
    let e = &trace.entries;
    let rate = phy::data_rate_gbps(&c.link.mcs, &c.link.channel);
    if trace.goodput_gbps > rate * (1.0 + 1e-12) {
        v.push(format!(
            "goodput {} above PHY rate {rate}",
            trace.goodput_gbps
        ));
    }
    if e.windows(2).any(|w| w[1].start < w[0].start) {
        v.push("trace not time-ordered".into());
    }
    let first_rsp = e
        .iter()
        .position(|x| x.frame_type == FrameType::AssocRsp && x.delivered);
    if let Some(d) = e.iter().position(|x| x.frame_type == FrameType::Data) {
        if first_rsp.is_none_or(|r| d < r) {
            v.push("DATA before the first Association Response".into());
        }
        if e[d].sender != Node::Prdev {
            v.push("first DATA not from the PRDEV".into());
        }
    }
    if trace.completion_time_s.is_some()
        && (trace.final_prc, trace.final_prdev) != (PrcPhase::PspBeaconing, PrdevPhase::Scanning)
    {
        v.push(format!(
            "final states {:?}/{:?}",
            trace.final_prc, trace.final_prdev
        ));
    }
    if c.loss_probability() > 0.0 {
        return v;
    }

    // Lossless from here.
    let sifs = ps_from_s(c.sifs_s);
    let n_beacons = e
        .iter()
        .take_while(|x| x.frame_type == FrameType::Beacon)
        .count();
    let body = &e[n_beacons..];
    let shape_ok = n_beacons >= 1
        && body.len() >= 4
        && body[0].frame_type == FrameType::AssocReq
        && body[1].frame_type == FrameType::AssocRsp
        && body[body.len() - 2].frame_type == FrameType::DisassocReq
        && body[body.len() - 1].frame_type == FrameType::Beacon
        && body[2..body.len() - 2].iter().all(|x| is_pap(x.frame_type));
    if !shape_ok {
        v.push(format!("sequence {:?}", trace.frame_types()));
        return v;
    }
    if trace.associations() != 1 {
        v.push(format!("{} associations", trace.associations()));
    }
    for w in body.windows(2) {
        if w[1].start < w[0].end + sifs {
            v.push(format!(
                "{} at {} closer than SIFS to previous frame",
                w[1].frame_type, w[1].start
            ));
        }
    }
    let disassoc = &body[body.len() - 2];
    let beacon = &body[body.len() - 1];
    if beacon.start - disassoc.end > ps_from_s(c.beacon_period_s) {
        v.push("no beacon within a beacon period of the Disassociation Request".into());
    }
    if trace.delivered_app_bytes != c.payload_bytes_total {
        v.push(format!(
            "delivered {} of {} bytes",
            trace.delivered_app_bytes, c.payload_bytes_total
        ));
    }
    let data = body
        .iter()
        .filter(|x| x.frame_type == FrameType::Data)
        .count();
    let acks = body
        .iter()
        .filter(|x| x.frame_type == FrameType::Ack)
        .count();
    let expect_acks = if c.ack_policy == AckPolicy::PerFrame {
        data
    } else {
        0
    };
    if acks != expect_acks {
        v.push(format!("{acks} ACKs for {data} DATA frames"));
    }
    // Probes only with nothing queued: all bytes that arrived earlier are sent.
    for p in body.iter().filter(|x| x.frame_type == FrameType::ProbeReq) {
        let arrived: u64 = if c.app_schedule.is_empty() {
            c.payload_bytes_total
        } else {
            c.app_schedule
                .iter()
                .filter(|&&(t, _)| ps_from_s(t) < p.start)
                .map(|&(_, b)| b)
                .sum()
        };
        let sent: u64 = body
            .iter()
            .filter(|x| x.frame_type == FrameType::Data && x.start < p.start)
            .map(|x| x.app_bytes as u64)
            .sum();
        if sent != arrived {
            v.push(format!(
                "probe at {} with {} bytes queued",
                p.start,
                arrived - sent
            ));
        }
    }
    v
}
