//! Scenario files and the canned reports behind the command-line tool.
//!
//! A scenario file is flat `key = value` text, one key per line, with `#`
//! starting a comment. Unknown keys are rejected.

use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::channel_plan::{self, ChannelDescriptor, ChannelError};
use crate::frame::{self, AckPolicy, MAX_FRAME_BYTES};
use crate::mac::{self, LossModel, SessionConfig, SessionTrace};
use crate::phy::{self, LinkConfig, LinkModel, Mcs, PhyError, UseCase, UseCaseProfile};

/// Rate the range figure is constrained to, Gbit/s.
pub const TARGET_RATE_GBPS: f64 = 100.0;
/// Kiosk download size, bytes.
pub const KIOSK_DOWNLOAD_BYTES: u64 = 900_000_000;
pub const KIOSK_DISTANCE_M: f64 = 0.3;
pub const KIOSK_CHANNEL_ID: u32 = 68;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error(transparent)]
    Mac(#[from] mac::MacError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum McsChoice {
    Fixed(Mcs),
    /// Highest-rate MCS that closes the link.
    Auto,
}

impl std::str::FromStr for McsChoice {
    type Err = PhyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("auto") {
            Ok(McsChoice::Auto)
        } else {
            Ok(McsChoice::Fixed(s.parse()?))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub profile: UseCaseProfile,
    pub channels: Vec<u32>,
    pub mcs: McsChoice,
    pub distances_m: Vec<f64>,
    pub output: Option<PathBuf>,
    pub payload_bytes: u64,
    pub frame_payload_bytes: u32,
    pub ack_policy: AckPolicy,
    pub sifs_s: f64,
    pub beacon_period_s: f64,
    pub slot_count: u32,
    pub slot_duration_s: f64,
    pub prc_timeout_s: f64,
    pub loss: LossModel,
    pub setup_blob_bytes: u32,
    pub app_schedule: Vec<(f64, u64)>,
    pub max_duration_s: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn new(profile: UseCaseProfile) -> Scenario {
        let defaults =
            SessionConfig::new(profile.link(channel_plan::default_channel(), profile.mcs(), 1.0));
        Scenario {
            profile,
            channels: vec![channel_plan::DEFAULT_CHANNEL_ID as u32],
            mcs: McsChoice::Auto,
            distances_m: vec![1.0],
            output: None,
            payload_bytes: 0,
            frame_payload_bytes: defaults.frame_payload_bytes,
            ack_policy: defaults.ack_policy,
            sifs_s: defaults.sifs_s,
            beacon_period_s: defaults.beacon_period_s,
            slot_count: defaults.slot_count,
            slot_duration_s: defaults.slot_duration_s,
            prc_timeout_s: defaults.prc_timeout_s,
            loss: defaults.loss,
            setup_blob_bytes: defaults.setup_blob_bytes,
            app_schedule: Vec::new(),
            max_duration_s: defaults.max_duration_s,
            seed: 1,
        }
    }

    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ScenarioError::Syntax {
                line: i + 1,
                message: format!("expected key = value, got '{line}'"),
            })?;
            pairs.push((i + 1, k.trim().to_ascii_lowercase(), v.trim().to_string()));
        }
        // The profile sets the radio defaults, so it is applied first.
        let profile = pairs
            .iter()
            .find(|(_, k, _)| k == "profile")
            .map(|(_, _, v)| v.parse::<UseCaseProfile>())
            .transpose()?
            .unwrap_or_else(|| UseCaseProfile::new(UseCase::FronthaulBackhaul));
        let mut sc = Scenario::new(profile);
        let mut seen = std::collections::HashSet::new();
        for (line, key, value) in pairs {
            if !seen.insert(key.clone()) {
                return Err(ScenarioError::Syntax {
                    line,
                    message: format!("duplicate key '{key}'"),
                });
            }
            sc.set(&key, &value)
                .map_err(|message| ScenarioError::Syntax { line, message })?;
        }
        sc.validate()?;
        Ok(sc)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse()
                .map_err(|_| format!("{key}: cannot parse '{v}' as a number"))
        }
        let p = &mut self.profile;
        match key {
            "profile" => {}
            "channel" | "channels" => {
                self.channels = value
                    .split(',')
                    .map(|c| num::<u32>(key, c.trim()))
                    .collect::<Result<_, _>>()?
            }
            "mcs" => self.mcs = value.parse().map_err(|e: PhyError| e.to_string())?,
            "distance_m" | "distance" => self.distances_m = parse_sweep(value)?,
            "output" | "out" => self.output = Some(PathBuf::from(value)),
            "payload_bytes" => self.payload_bytes = num(key, value)?,
            "frame_payload_bytes" => self.frame_payload_bytes = num(key, value)?,
            "ack_policy" => self.ack_policy = value.parse()?,
            "sifs_s" => self.sifs_s = num(key, value)?,
            "beacon_period_s" => self.beacon_period_s = num(key, value)?,
            "slot_count" => self.slot_count = num(key, value)?,
            "slot_duration_s" => self.slot_duration_s = num(key, value)?,
            "prc_timeout_s" => self.prc_timeout_s = num(key, value)?,
            "loss" | "frame_loss_probability" => {
                self.loss = if value.eq_ignore_ascii_case("margin") {
                    LossModel::FromLinkMargin
                } else {
                    LossModel::Bernoulli(num(key, value)?)
                }
            }
            "setup_blob_bytes" => self.setup_blob_bytes = num(key, value)?,
            "app_schedule" => {
                self.app_schedule = value
                    .split(',')
                    .map(|item| {
                        let (t, b) = item
                            .trim()
                            .split_once('@')
                            .map(|(b, t)| (t, b))
                            .ok_or(format!("{key}: expected bytes@time_s, got '{item}'"))?;
                        Ok((num(key, t.trim())?, num(key, b.trim())?))
                    })
                    .collect::<Result<_, String>>()?
            }
            "max_duration_s" => self.max_duration_s = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "tx_power_dbm" => p.tx_power_dbm = num(key, value)?,
            "tx_gain_db" => p.tx_gain_db = num(key, value)?,
            "rx_gain_db" => p.rx_gain_db = num(key, value)?,
            "noise_figure_db" => p.noise_figure_db = num(key, value)?,
            "carrier_ghz" => p.carrier_ghz = num(key, value)?,
            "absorption_db_per_km" => p.absorption_db_per_km = num(key, value)?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.channels.is_empty() {
            return Err(ScenarioError::Invalid("channel list is empty".into()));
        }
        for &c in &self.channels {
            channel_plan::channel_by_id(c)?;
        }
        if self.distances_m.is_empty()
            || self
                .distances_m
                .iter()
                .any(|d| !(*d > 0.0 && d.is_finite()))
        {
            return Err(ScenarioError::Invalid(
                "distances must be a non-empty list of positive values".into(),
            ));
        }
        self.session_config(self.channel()?, self.distances_m[0])?
            .validate()?;
        Ok(())
    }

    /// First channel of the scenario.
    pub fn channel(&self) -> Result<ChannelDescriptor, ScenarioError> {
        Ok(channel_plan::channel_by_id(self.channels[0])?)
    }

    /// Link at `distance_m` on `channel`, resolving `mcs = auto`.
    pub fn link(
        &self,
        channel: ChannelDescriptor,
        distance_m: f64,
    ) -> Result<LinkConfig, ScenarioError> {
        let link = self.profile.link(channel, self.profile.mcs(), distance_m);
        link.validate()?;
        let mcs = match self.mcs {
            McsChoice::Fixed(m) => m,
            McsChoice::Auto => phy::best_mcs(&link)?,
        };
        Ok(link.with_mcs(mcs))
    }

    pub fn session_config(
        &self,
        channel: ChannelDescriptor,
        distance_m: f64,
    ) -> Result<SessionConfig, ScenarioError> {
        let link = match self.link(channel, distance_m) {
            Ok(l) => l,
            // An auto MCS on a dead link still runs, with every frame lost.
            Err(ScenarioError::Phy(PhyError::NoFeasibleMcs)) => {
                self.profile.link(channel, self.profile.mcs(), distance_m)
            }
            Err(e) => return Err(e),
        };
        let mut c = SessionConfig::new(link);
        c.sifs_s = self.sifs_s;
        c.beacon_period_s = self.beacon_period_s;
        c.slot_count = self.slot_count;
        c.slot_duration_s = self.slot_duration_s;
        c.prc_timeout_s = self.prc_timeout_s;
        c.payload_bytes_total = self.payload_bytes;
        c.frame_payload_bytes = self.frame_payload_bytes;
        c.ack_policy = self.ack_policy;
        c.loss = self.loss;
        c.setup_blob_bytes = self.setup_blob_bytes;
        c.app_schedule = self.app_schedule.clone();
        c.max_duration_s = self.max_duration_s;
        Ok(c)
    }

    /// Simulates a session on the first channel and distance.
    pub fn run_mac(&self) -> Result<SessionTrace, ScenarioError> {
        let config = self.session_config(self.channel()?, self.distances_m[0])?;
        Ok(mac::simulate_session(&config, self.seed)?)
    }
}

/// A single value, a comma list, or `start:stop:count` (linear, inclusive).
pub fn parse_sweep(value: &str) -> Result<Vec<f64>, String> {
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("cannot parse '{s}' as a number"))
    };
    let parts: Vec<&str> = value.split(':').collect();
    match parts.as_slice() {
        [start, stop, count] => {
            let (a, b) = (parse(start)?, parse(stop)?);
            let n: usize = count
                .trim()
                .parse()
                .map_err(|_| format!("cannot parse sweep count '{count}'"))?;
            if n == 0 {
                return Err("sweep count must be positive".into());
            }
            if n == 1 {
                return Ok(vec![a]);
            }
            Ok((0..n)
                .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                .collect())
        }
        [_] => value.split(',').map(parse).collect(),
        _ => Err(format!("bad sweep '{value}', expected start:stop:count")),
    }
}

pub fn run_rate_table() -> String {
    phy::rate_table_csv()
}

/// One row of the range figure: a profile on one bandwidth class.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeRow {
    pub profile: UseCase,
    pub channel: ChannelDescriptor,
    /// The profile's own MCS.
    pub profile_mcs: Mcs,
    pub profile_rate_gbps: f64,
    pub profile_range_m: f64,
    /// MCS with the longest reach on this channel.
    pub reach_mcs: Option<Mcs>,
    pub reach_range_m: f64,
    /// Longest-reach MCS among those carrying at least 100 Gbit/s.
    pub target_mcs: Option<Mcs>,
    pub target_range_m: f64,
}

/// The 100 Gbit/s anchor for one profile: its own MCS on the narrowest
/// channel carrying the target rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeAnchor {
    pub profile: UseCase,
    pub channel: ChannelDescriptor,
    pub mcs: Mcs,
    pub rate_gbps: f64,
    pub range_m: f64,
    /// Range of the same MCS on a 2.16 GHz channel.
    pub narrowband_range_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeFigure {
    pub rows: Vec<RangeRow>,
    pub anchors: Vec<RangeAnchor>,
}

fn longest_reach<'a>(
    model: &LinkModel,
    profile: &UseCaseProfile,
    channel: ChannelDescriptor,
    candidates: impl Iterator<Item = &'a Mcs>,
) -> (Option<Mcs>, f64) {
    let mut best = (None, 0.0);
    for &mcs in candidates {
        let r = model.max_range(&profile.link(channel, mcs, 1.0));
        if r.feasible && r.range_m > best.1 {
            best = (Some(mcs), r.range_m);
        }
    }
    best
}

pub fn run_range_figure(profiles: &[UseCaseProfile]) -> Result<RangeFigure, PhyError> {
    let model = LinkModel::default();
    let mut rows = Vec::new();
    let mut anchors = Vec::new();
    for p in profiles {
        let own = p.mcs();
        let mode_mcs = Mcs::all_for_mode(own.mode());
        for &m in &channel_plan::MULTIPLIERS {
            let channel = phy::channel_for_carrier(m, p.carrier_ghz);
            let own_range = model.max_range(&p.link(channel, own, 1.0));
            let (reach_mcs, reach_range_m) = longest_reach(&model, p, channel, mode_mcs.iter());
            let fast: Vec<Mcs> = mode_mcs
                .iter()
                .copied()
                .filter(|x| phy::data_rate_gbps(x, &channel) >= TARGET_RATE_GBPS)
                .collect();
            let (target_mcs, target_range_m) = longest_reach(&model, p, channel, fast.iter());
            rows.push(RangeRow {
                profile: p.use_case,
                channel,
                profile_mcs: own,
                profile_rate_gbps: phy::data_rate_gbps(&own, &channel),
                profile_range_m: own_range.range_m,
                reach_mcs,
                reach_range_m,
                target_mcs,
                target_range_m,
            });
        }
        let (channel, r) = model.max_range_at_rate(p, TARGET_RATE_GBPS)?;
        let narrow = phy::channel_for_carrier(1, p.carrier_ghz);
        anchors.push(RangeAnchor {
            profile: p.use_case,
            channel,
            mcs: own,
            rate_gbps: phy::data_rate_gbps(&own, &channel),
            range_m: r.range_m,
            narrowband_range_m: model.max_range(&p.link(narrow, own, 1.0)).range_m,
        });
    }
    Ok(RangeFigure { rows, anchors })
}

fn mcs_or_none(m: Option<Mcs>) -> String {
    m.map_or("none".into(), |m| m.to_string())
}

impl RangeFigure {
    pub fn csv(&self) -> String {
        let mut out = String::from(
            "profile,bandwidth_ghz,channel,profile_mcs,profile_rate_gbps,profile_range_m,\
             reach_mcs,reach_range_m,target_mcs,target_range_m\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.2},{},{},{},{:.3},{},{:.3},{},{:.3}",
                r.profile,
                r.channel.bandwidth_ghz(),
                r.channel.id(),
                r.profile_mcs,
                phy::format_rate(phy::data_rate_exact(&r.profile_mcs, &r.channel)),
                r.profile_range_m,
                mcs_or_none(r.reach_mcs),
                r.reach_range_m,
                mcs_or_none(r.target_mcs),
                r.target_range_m,
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out =
            String::from("profile,channel,bandwidth_ghz,mcs,rate_gbps,range_100g_m,range_2g16_m\n");
        for a in &self.anchors {
            let _ = writeln!(
                out,
                "{},{},{:.2},{},{},{:.3},{:.3}",
                a.profile,
                a.channel.id(),
                a.channel.bandwidth_ghz(),
                a.mcs,
                phy::format_rate(phy::data_rate_exact(&a.mcs, &a.channel)),
                a.range_m,
                a.narrowband_range_m,
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KioskReport {
    pub channel: ChannelDescriptor,
    pub mcs: Mcs,
    pub distance_m: f64,
    pub phy_rate_gbps: f64,
    pub trace: SessionTrace,
}

impl KioskReport {
    /// Time from the first beacon until the whole file has been sent.
    pub fn completion_time_s(&self) -> Option<f64> {
        self.trace.completion_time_s
    }

    pub fn report(&self) -> String {
        format!(
            "channel,{}\nbandwidth_ghz,{:.2}\nmcs,{}\ndistance_m,{:.3}\n{}",
            self.channel.id(),
            self.channel.bandwidth_ghz(),
            self.mcs,
            self.distance_m,
            self.trace.summary()
        )
    }
}

/// A kiosk-profile session transferring `bytes` over the 51.84 GHz channel.
pub fn run_kiosk_download_demo(bytes: u64, seed: u64) -> Result<KioskReport, ScenarioError> {
    let profile = UseCaseProfile::new(UseCase::Kiosk);
    let channel = channel_plan::channel_by_id(KIOSK_CHANNEL_ID)?;
    let mcs = profile.mcs();
    let mut config = SessionConfig::new(profile.link(channel, mcs, KIOSK_DISTANCE_M));
    config.payload_bytes_total = bytes;
    config.frame_payload_bytes = MAX_FRAME_BYTES;
    config.loss = LossModel::FromLinkMargin;
    let trace = mac::simulate_session(&config, seed)?;
    Ok(KioskReport {
        channel,
        mcs,
        distance_m: KIOSK_DISTANCE_M,
        phy_rate_gbps: phy::data_rate_gbps(&mcs, &channel),
        trace,
    })
}

/// `name,mode,mcs,frame_type,bits,header_hex,frame_hex` for every
/// conformance vector.
pub fn codec_vectors_csv() -> String {
    let mut out = String::from("name,mode,mcs,frame_type,bits,header_hex,frame_hex\n");
    for v in frame::conformance_vectors() {
        let bits = frame::encode_frame(&v.frame).expect("conformance vectors are valid");
        let bytes = frame::encode_frame_bytes(&v.frame).expect("conformance vectors are valid");
        let header_len = frame::PAYLOAD_OFFSET_BITS / 8;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            v.name,
            v.frame.mode(),
            v.frame.phy_header.mcs,
            v.frame.mac_header.frame_type,
            bits.len(),
            frame::to_hex(&bytes[..header_len]),
            frame::to_hex(&bytes)
        );
    }
    out
}
