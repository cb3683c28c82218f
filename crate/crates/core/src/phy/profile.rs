//! Radio parameter presets for the four target deployments.

use std::fmt;
use std::str::FromStr;

use crate::channel_plan::ChannelDescriptor;

use super::{
    Fec, LinkConfig, Mcs, Modulation, PhyError, DEFAULT_ABSORPTION_DB_PER_KM, DEFAULT_CARRIER_GHZ,
    DEFAULT_NOISE_FIGURE_DB,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UseCase {
    FronthaulBackhaul,
    DataCenter,
    Kiosk,
    IntraDevice,
}

impl UseCase {
    pub const ALL: [UseCase; 4] = [
        UseCase::FronthaulBackhaul,
        UseCase::DataCenter,
        UseCase::Kiosk,
        UseCase::IntraDevice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UseCase::FronthaulBackhaul => "fronthaul_backhaul",
            UseCase::DataCenter => "data_center",
            UseCase::Kiosk => "kiosk",
            UseCase::IntraDevice => "intra_device",
        }
    }
}

impl fmt::Display for UseCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UseCase {
    type Err = PhyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase().replace('-', "_");
        let found = match s.as_str() {
            "fronthaul" | "backhaul" | "fronthaul_backhaul" => UseCase::FronthaulBackhaul,
            "data_center" | "datacenter" => UseCase::DataCenter,
            "kiosk" | "kiosk_download" => UseCase::Kiosk,
            "intra_device" | "intradevice" => UseCase::IntraDevice,
            _ => return Err(PhyError::UnknownProfile(s)),
        };
        Ok(found)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UseCaseProfile {
    pub use_case: UseCase,
    pub tx_power_dbm: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
    pub carrier_ghz: f64,
    pub noise_figure_db: f64,
    pub absorption_db_per_km: f64,
    pub modulation: Modulation,
    pub fec: Fec,
}

impl UseCaseProfile {
    pub fn new(use_case: UseCase) -> Self {
        let (tx_power_dbm, tx_gain_db, rx_gain_db) = match use_case {
            UseCase::FronthaulBackhaul => (25.0, 30.0, 30.0),
            UseCase::DataCenter => (10.0, 30.0, 30.0),
            UseCase::Kiosk => (0.0, 24.0, 12.0),
            UseCase::IntraDevice => (0.0, 6.0, 6.0),
        };
        let (modulation, absorption_db_per_km) = match use_case {
            UseCase::FronthaulBackhaul => (Modulation::Qam64, DEFAULT_ABSORPTION_DB_PER_KM),
            UseCase::DataCenter => (Modulation::Qam64, 0.0),
            UseCase::Kiosk => (Modulation::Apsk8, DEFAULT_ABSORPTION_DB_PER_KM),
            UseCase::IntraDevice => (Modulation::Apsk8, 0.0),
        };
        Self {
            use_case,
            tx_power_dbm,
            tx_gain_db,
            rx_gain_db,
            carrier_ghz: DEFAULT_CARRIER_GHZ,
            noise_figure_db: DEFAULT_NOISE_FIGURE_DB,
            absorption_db_per_km,
            modulation,
            fec: Fec::Ldpc14_15,
        }
    }

    pub fn all() -> Vec<UseCaseProfile> {
        UseCase::ALL
            .iter()
            .map(|&u| UseCaseProfile::new(u))
            .collect()
    }

    /// The profile's default MCS.
    pub fn mcs(&self) -> Mcs {
        Mcs::new(self.modulation, self.fec).expect("profile presets use valid SC schemes")
    }

    pub fn link(&self, channel: ChannelDescriptor, mcs: Mcs, distance_m: f64) -> LinkConfig {
        LinkConfig {
            tx_power_dbm: self.tx_power_dbm,
            tx_gain_db: self.tx_gain_db,
            rx_gain_db: self.rx_gain_db,
            distance_m,
            channel,
            mcs,
            noise_figure_db: self.noise_figure_db,
            carrier_ghz: self.carrier_ghz,
            absorption_db_per_km: self.absorption_db_per_km,
        }
    }
}

impl FromStr for UseCaseProfile {
    type Err = PhyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(UseCaseProfile::new(s.parse()?))
    }
}
