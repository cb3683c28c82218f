//! PHY abstraction: MCS set, data rates, and the link-budget engine.
//!
//! A link is declared error-free when its effective SNR (thermal SNR with
//! the transmitter EVM folded in as extra noise) reaches the calibrated
//! threshold of its MCS. Everything here is a pure function of its inputs.

mod mcs;
mod profile;

use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::channel_plan::{self, ChannelDescriptor};

pub use mcs::{Fec, Mcs, Modulation, PhyMode};
pub use profile::{UseCase, UseCaseProfile};

/// Propagation speed used by the path-loss law.
pub const SPEED_OF_LIGHT_M_S: f64 = 3.0e8;
/// Thermal noise density at 290 K, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;
/// Symbol rate of a 2.16 GHz channel, GBd.
pub const UNIT_SYMBOL_RATE_GBD: Ratio<u64> = Ratio::new_raw(176, 100);
pub const DEFAULT_CARRIER_GHZ: f64 = 300.0;
pub const DEFAULT_NOISE_FIGURE_DB: f64 = 8.0;
pub const DEFAULT_ABSORPTION_DB_PER_KM: f64 = 2.6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhyError {
    #[error("{modulation} cannot be combined with {fec}")]
    InvalidMcs { modulation: Modulation, fec: Fec },
    #[error("invalid link: {0}")]
    InvalidLink(String),
    #[error("requested {requested_gbps} Gbit/s but the configuration tops out at {available_gbps:.2} Gbit/s")]
    RateUnattainable {
        requested_gbps: f64,
        available_gbps: f64,
    },
    #[error("no MCS closes the link")]
    NoFeasibleMcs,
    #[error("unknown use-case profile '{0}'")]
    UnknownProfile(String),
    #[error("{0}")]
    Parse(String),
}

// ---------------------------------------------------------------------------
// Rates
// ---------------------------------------------------------------------------

/// Symbol rate in GBd: 1.76 GBd per 2.16 GHz of bandwidth.
pub fn symbol_rate_gbd(channel: &ChannelDescriptor) -> Ratio<u64> {
    UNIT_SYMBOL_RATE_GBD * channel.multiplier() as u64
}

pub fn symbol_rate_baud(channel: &ChannelDescriptor) -> f64 {
    ratio_to_f64(symbol_rate_gbd(channel)) * 1e9
}

/// Exact PHY rate in Gbit/s.
pub fn data_rate_exact(mcs: &Mcs, channel: &ChannelDescriptor) -> Ratio<u64> {
    symbol_rate_gbd(channel) * mcs.bits_per_symbol() as u64 * mcs.code_rate()
}

pub fn data_rate_gbps(mcs: &Mcs, channel: &ChannelDescriptor) -> f64 {
    ratio_to_f64(data_rate_exact(mcs, channel))
}

/// Rate truncated (not rounded) to two decimals, e.g. `52.56`.
pub fn format_rate(rate_gbps: Ratio<u64>) -> String {
    let centi = (rate_gbps * 100).to_integer();
    format!("{}.{:02}", centi / 100, centi % 100)
}

pub(crate) fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `mode,modulation,fec,mcs,bandwidth_ghz,rate_gbps` for every MCS and bandwidth class.
pub fn rate_table_csv() -> String {
    let mut out = String::from("mode,modulation,fec,mcs,bandwidth_ghz,rate_gbps\n");
    for mcs in Mcs::all() {
        for ch in channel_plan::representative_channels() {
            out.push_str(&format!(
                "{},{},{},{},{:.2},{}\n",
                mcs.mode(),
                mcs.modulation(),
                mcs.fec(),
                mcs,
                ch.bandwidth_ghz(),
                format_rate(data_rate_exact(&mcs, &ch))
            ));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Thresholds and EVM
// ---------------------------------------------------------------------------

/// Calibrated SNR thresholds (dB), `[11/15, 14/15 or RS]` per modulation.
///
/// Generated by the AWGN Monte-Carlo oracle (10^8 symbols per modulation):
/// uncoded BER 8e-2 for 11/15 and 7e-2 for 14/15 / RS(240,224), shifted so
/// BPSK 11/15 (THz-SC) and OOK 11/15 (THz-OOK) both sit at 5.65 dB, which
/// puts their sensitivity at -67 dBm on a 2.16 GHz channel with an 8 dB
/// noise figure.
const REQUIRED_SNR_DB: [(Modulation, [f64; 2]); 7] = [
    (Modulation::Bpsk, [5.650, 6.076]),
    (Modulation::Qpsk, [8.659, 9.085]),
    (Modulation::Psk8, [12.508, 13.043]),
    (Modulation::Apsk8, [12.805, 13.231]),
    (Modulation::Qam16, [14.597, 15.111]),
    (Modulation::Qam64, [19.717, 20.334]),
    (Modulation::Ook, [5.650, 6.077]),
];

/// SNR above which a link using `mcs` is declared error-free.
pub fn required_snr_db(mcs: &Mcs) -> f64 {
    let row = REQUIRED_SNR_DB
        .iter()
        .find(|(m, _)| *m == mcs.modulation())
        .map(|(_, r)| r)
        .expect("every modulation has a threshold row");
    match mcs.fec() {
        Fec::Ldpc11_15 => row[0],
        Fec::Ldpc14_15 | Fec::Rs240_224 => row[1],
    }
}

/// Transmit EVM per modulation and bandwidth.
///
/// `relaxation_db_per_doubling` degrades the EVM for each doubling of the
/// channel multiplier above 2.16 GHz; the result is clamped to `ceiling_db`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvmTable {
    pub bpsk_db: f64,
    pub qpsk_db: f64,
    pub psk8_db: f64,
    pub apsk8_db: f64,
    pub qam16_db: f64,
    pub qam64_db: f64,
    pub ook_db: f64,
    pub relaxation_db_per_doubling: f64,
    pub ceiling_db: f64,
}

impl Default for EvmTable {
    fn default() -> Self {
        Self {
            bpsk_db: -8.0,
            qpsk_db: -11.0,
            psk8_db: -15.0,
            apsk8_db: -15.0,
            qam16_db: -18.0,
            qam64_db: -22.0,
            ook_db: -8.0,
            relaxation_db_per_doubling: 0.0,
            ceiling_db: -3.0,
        }
    }
}

impl EvmTable {
    pub fn base_db(&self, modulation: Modulation) -> f64 {
        match modulation {
            Modulation::Bpsk => self.bpsk_db,
            Modulation::Qpsk => self.qpsk_db,
            Modulation::Psk8 => self.psk8_db,
            Modulation::Apsk8 => self.apsk8_db,
            Modulation::Qam16 => self.qam16_db,
            Modulation::Qam64 => self.qam64_db,
            Modulation::Ook => self.ook_db,
        }
    }

    pub fn evm_db(&self, mcs: &Mcs, channel: &ChannelDescriptor) -> f64 {
        let doublings = (channel.multiplier() as f64).log2();
        (self.base_db(mcs.modulation()) + self.relaxation_db_per_doubling * doublings)
            .min(self.ceiling_db)
    }
}

// ---------------------------------------------------------------------------
// Link budget
// ---------------------------------------------------------------------------

/// Free-space path loss, dB.
pub fn fspl_db(carrier_ghz: f64, distance_m: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * distance_m * carrier_ghz * 1e9 / SPEED_OF_LIGHT_M_S)
        .log10()
}

/// Thermal noise power in the channel bandwidth plus the receiver noise figure.
pub fn noise_floor_dbm(bandwidth_ghz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_NOISE_DBM_HZ + 10.0 * (bandwidth_ghz * 1e9).log10() + noise_figure_db
}

/// Combines thermal SNR and transmitter EVM (both dB) into one SNR.
pub fn effective_snr_db(snr_db: f64, evm_db: f64) -> f64 {
    -10.0 * (10f64.powf(-snr_db / 10.0) + 10f64.powf(evm_db / 10.0)).log10()
}

pub fn sensitivity_dbm(mcs: &Mcs, bandwidth_ghz: f64, noise_figure_db: f64) -> f64 {
    noise_floor_dbm(bandwidth_ghz, noise_figure_db) + required_snr_db(mcs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub tx_power_dbm: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
    pub distance_m: f64,
    pub channel: ChannelDescriptor,
    pub mcs: Mcs,
    pub noise_figure_db: f64,
    pub carrier_ghz: f64,
    pub absorption_db_per_km: f64,
}

impl LinkConfig {
    pub fn validate(&self) -> Result<(), PhyError> {
        let finite = [
            self.tx_power_dbm,
            self.tx_gain_db,
            self.rx_gain_db,
            self.noise_figure_db,
            self.absorption_db_per_km,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(PhyError::InvalidLink("non-finite budget term".into()));
        }
        if !(self.distance_m > 0.0 && self.distance_m.is_finite()) {
            return Err(PhyError::InvalidLink(format!(
                "distance must be positive, got {}",
                self.distance_m
            )));
        }
        if !(self.carrier_ghz > 0.0 && self.carrier_ghz.is_finite()) {
            return Err(PhyError::InvalidLink(format!(
                "carrier must be positive, got {}",
                self.carrier_ghz
            )));
        }
        if self.absorption_db_per_km < 0.0 {
            return Err(PhyError::InvalidLink(
                "absorption must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn with_distance(&self, distance_m: f64) -> Self {
        Self {
            distance_m,
            ..self.clone()
        }
    }

    pub fn with_mcs(&self, mcs: Mcs) -> Self {
        Self {
            mcs,
            ..self.clone()
        }
    }
}

pub fn absorption_loss_db(link: &LinkConfig) -> f64 {
    link.absorption_db_per_km * link.distance_m / 1000.0
}

pub fn rx_power_dbm(link: &LinkConfig) -> f64 {
    link.tx_power_dbm + link.tx_gain_db + link.rx_gain_db
        - fspl_db(link.carrier_ghz, link.distance_m)
        - absorption_loss_db(link)
}

/// Every term of a link budget, itemised.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
    pub fspl_db: f64,
    pub absorption_db: f64,
    pub rx_power_dbm: f64,
    pub noise_floor_dbm: f64,
    pub snr_db: f64,
    pub evm_db: f64,
    pub effective_snr_db: f64,
    pub required_snr_db: f64,
    pub margin_db: f64,
    pub feasible: bool,
    pub data_rate_gbps: f64,
}

impl fmt::Display for LinkBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tx_power_dbm       {:>9.2}", self.tx_power_dbm)?;
        writeln!(f, "tx_gain_db         {:>9.2}", self.tx_gain_db)?;
        writeln!(f, "rx_gain_db         {:>9.2}", self.rx_gain_db)?;
        writeln!(f, "fspl_db            {:>9.2}", -self.fspl_db)?;
        writeln!(f, "absorption_db      {:>9.2}", -self.absorption_db)?;
        writeln!(f, "rx_power_dbm       {:>9.2}", self.rx_power_dbm)?;
        writeln!(f, "noise_floor_dbm    {:>9.2}", self.noise_floor_dbm)?;
        writeln!(f, "snr_db             {:>9.2}", self.snr_db)?;
        writeln!(f, "evm_db             {:>9.2}", self.evm_db)?;
        writeln!(f, "effective_snr_db   {:>9.2}", self.effective_snr_db)?;
        writeln!(f, "required_snr_db    {:>9.2}", self.required_snr_db)?;
        writeln!(f, "margin_db          {:>9.2}", self.margin_db)?;
        writeln!(f, "data_rate_gbps     {:>9.2}", self.data_rate_gbps)?;
        write!(
            f,
            "feasible           {:>9}",
            if self.feasible { "yes" } else { "no" }
        )
    }
}

/// Link-budget engine parameterised by an EVM table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinkModel {
    pub evm: EvmTable,
}

impl LinkModel {
    pub fn budget(&self, link: &LinkConfig) -> LinkBudget {
        let fspl = fspl_db(link.carrier_ghz, link.distance_m);
        let absorption = absorption_loss_db(link);
        let rx = rx_power_dbm(link);
        let noise = noise_floor_dbm(link.channel.bandwidth_ghz(), link.noise_figure_db);
        let snr = rx - noise;
        let evm = self.evm.evm_db(&link.mcs, &link.channel);
        let eff = effective_snr_db(snr, evm);
        let req = required_snr_db(&link.mcs);
        LinkBudget {
            tx_power_dbm: link.tx_power_dbm,
            tx_gain_db: link.tx_gain_db,
            rx_gain_db: link.rx_gain_db,
            fspl_db: fspl,
            absorption_db: absorption,
            rx_power_dbm: rx,
            noise_floor_dbm: noise,
            snr_db: snr,
            evm_db: evm,
            effective_snr_db: eff,
            required_snr_db: req,
            margin_db: eff - req,
            feasible: eff >= req,
            data_rate_gbps: data_rate_gbps(&link.mcs, &link.channel),
        }
    }

    /// `(feasible, margin_db)`.
    pub fn link_feasible(&self, link: &LinkConfig) -> (bool, f64) {
        let b = self.budget(link);
        (b.feasible, b.margin_db)
    }

    /// Largest distance at which `link` (with its distance ignored) still
    /// closes.
    ///
    /// Bisects on the feasibility boundary down to adjacent floats, so the
    /// returned distance is itself feasible and never below a feasible
    /// input distance. Loss is assumed strictly increasing in distance.
    pub fn max_range(&self, link: &LinkConfig) -> RangeResult {
        let feasible_at = |d: f64| self.link_feasible(&link.with_distance(d)).0;
        let mut lo = 1e-6;
        if !feasible_at(lo) {
            return RangeResult {
                range_m: 0.0,
                feasible: false,
            };
        }
        let mut hi = 1.0;
        while feasible_at(hi) {
            lo = hi;
            hi *= 2.0;
            if hi > 1e9 {
                return RangeResult {
                    range_m: lo,
                    feasible: true,
                };
            }
        }
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if feasible_at(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        RangeResult {
            range_m: lo,
            feasible: true,
        }
    }

    /// Range of `profile` with `mcs` on `channel`; when `min_rate_gbps` is
    /// given the configuration must sustain it.
    pub fn max_range_m(
        &self,
        profile: &UseCaseProfile,
        mcs: Mcs,
        channel: ChannelDescriptor,
        min_rate_gbps: Option<f64>,
    ) -> Result<RangeResult, PhyError> {
        if let Some(min) = min_rate_gbps {
            let available = data_rate_gbps(&mcs, &channel);
            if available < min {
                return Err(PhyError::RateUnattainable {
                    requested_gbps: min,
                    available_gbps: available,
                });
            }
        }
        Ok(self.max_range(&profile.link(channel, mcs, 1.0)))
    }

    /// Range of the profile's own MCS on the narrowest bandwidth class that
    /// carries at least `min_rate_gbps`.
    pub fn max_range_at_rate(
        &self,
        profile: &UseCaseProfile,
        min_rate_gbps: f64,
    ) -> Result<(ChannelDescriptor, RangeResult), PhyError> {
        let mcs = profile.mcs();
        let multiplier = channel_plan::MULTIPLIERS
            .iter()
            .copied()
            .find(|&m| {
                let ch = channel_plan::first_channel_with_multiplier(m).expect("class exists");
                data_rate_gbps(&mcs, &ch) >= min_rate_gbps
            })
            .ok_or(PhyError::RateUnattainable {
                requested_gbps: min_rate_gbps,
                available_gbps: data_rate_gbps(&mcs, &channel_plan::full_band_channel()),
            })?;
        let channel = channel_for_carrier(multiplier, profile.carrier_ghz);
        Ok((
            channel,
            self.max_range_m(profile, mcs, channel, Some(min_rate_gbps))?,
        ))
    }

    /// Highest-rate feasible MCS of the link's PHY mode; equal rates go to
    /// the lower modulation order. `link.mcs` only selects the mode.
    pub fn best_mcs(&self, link: &LinkConfig) -> Result<Mcs, PhyError> {
        let mut best: Option<(Ratio<u64>, Mcs)> = None;
        for mcs in Mcs::all_for_mode(link.mcs.mode()) {
            if !self.link_feasible(&link.with_mcs(mcs)).0 {
                continue;
            }
            let rate = data_rate_exact(&mcs, &link.channel);
            let better = match best {
                None => true,
                Some((r, m)) => rate > r || (rate == r && mcs.modulation() < m.modulation()),
            };
            if better {
                best = Some((rate, mcs));
            }
        }
        best.map(|(_, m)| m).ok_or(PhyError::NoFeasibleMcs)
    }
}

/// Channel of the given bandwidth class whose band contains the carrier,
/// falling back to the lowest one in the class.
pub fn channel_for_carrier(multiplier: u8, carrier_ghz: f64) -> ChannelDescriptor {
    let carrier_cghz = (carrier_ghz * 100.0).round() as i64;
    let class = channel_plan::plan()
        .iter()
        .filter(|c| c.multiplier() == multiplier);
    class
        .clone()
        .find(|c| {
            (c.low_edge_cghz() as i64) <= carrier_cghz && carrier_cghz <= c.high_edge_cghz() as i64
        })
        .or_else(|| class.clone().next())
        .copied()
        .unwrap_or_else(channel_plan::full_band_channel)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeResult {
    pub range_m: f64,
    /// False when the link fails even at vanishing distance.
    pub feasible: bool,
}

pub fn budget(link: &LinkConfig) -> LinkBudget {
    LinkModel::default().budget(link)
}

pub fn link_feasible(link: &LinkConfig) -> (bool, f64) {
    LinkModel::default().link_feasible(link)
}

pub fn max_range_m(
    profile: &UseCaseProfile,
    mcs: Mcs,
    channel: ChannelDescriptor,
    min_rate_gbps: Option<f64>,
) -> Result<RangeResult, PhyError> {
    LinkModel::default().max_range_m(profile, mcs, channel, min_rate_gbps)
}

pub fn best_mcs(link: &LinkConfig) -> Result<Mcs, PhyError> {
    LinkModel::default().best_mcs(link)
}
