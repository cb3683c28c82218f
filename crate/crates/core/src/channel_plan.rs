//! The 69-channel sub-THz frequency plan between 252.72 GHz and 321.84 GHz.
//!
//! Channel bandwidths are integer multiples of 2.16 GHz. For each of the
//! eight multipliers the band is tiled contiguously from the lower edge with
//! `floor(32 / m)` channels; ids run by ascending bandwidth, then ascending
//! frequency. Frequencies are held as integer centi-GHz so every edge and
//! center is exact.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

/// Lower band edge, centi-GHz.
pub const BAND_LOW_CGHZ: u32 = 25_272;
/// Upper band edge, centi-GHz.
pub const BAND_HIGH_CGHZ: u32 = 32_184;
/// Width of the basic 2.16 GHz channel, centi-GHz.
pub const UNIT_BANDWIDTH_CGHZ: u32 = 216;
/// Supported bandwidth multipliers, ascending.
pub const MULTIPLIERS: [u8; 8] = [1, 2, 4, 6, 8, 12, 24, 32];
/// Number of basic channels that fit in the band.
const UNITS_IN_BAND: u8 = 32;

pub const CHANNEL_COUNT: usize = 69;
pub const DEFAULT_CHANNEL_ID: u8 = 41;
pub const FULL_BAND_CHANNEL_ID: u8 = 69;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("no such channel: {0} (valid ids are 1..=69)")]
    NoSuchChannel(u32),
}

/// One entry of the channel plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChannelDescriptor {
    id: u8,
    multiplier: u8,
    center_cghz: u32,
}

impl ChannelDescriptor {
    pub fn id(&self) -> u8 {
        self.id
    }

    /// Bandwidth as a multiple of 2.16 GHz.
    pub fn multiplier(&self) -> u8 {
        self.multiplier
    }

    pub fn center_cghz(&self) -> u32 {
        self.center_cghz
    }

    pub fn bandwidth_cghz(&self) -> u32 {
        self.multiplier as u32 * UNIT_BANDWIDTH_CGHZ
    }

    pub fn low_edge_cghz(&self) -> u32 {
        self.center_cghz - self.bandwidth_cghz() / 2
    }

    pub fn high_edge_cghz(&self) -> u32 {
        self.center_cghz + self.bandwidth_cghz() / 2
    }

    pub fn center_ghz(&self) -> f64 {
        self.center_cghz as f64 / 100.0
    }

    pub fn bandwidth_ghz(&self) -> f64 {
        self.bandwidth_cghz() as f64 / 100.0
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_cghz() as f64 * 1e7
    }

    /// True iff the open frequency intervals of the two channels intersect.
    pub fn overlaps(&self, other: &ChannelDescriptor) -> bool {
        overlaps(self, other)
    }
}

impl fmt::Display for ChannelDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ch{} ({:.2} GHz @ {:.2} GHz)",
            self.id,
            self.bandwidth_ghz(),
            self.center_ghz()
        )
    }
}

/// Builds the full plan, ordered by id.
pub fn build_plan() -> Vec<ChannelDescriptor> {
    let mut plan = Vec::with_capacity(CHANNEL_COUNT);
    let mut id = 1u8;
    for &m in &MULTIPLIERS {
        let width = m as u32 * UNIT_BANDWIDTH_CGHZ;
        for k in 0..(UNITS_IN_BAND / m) as u32 {
            let low = BAND_LOW_CGHZ + k * width;
            plan.push(ChannelDescriptor {
                id,
                multiplier: m,
                center_cghz: low + width / 2,
            });
            id += 1;
        }
    }
    debug_assert_eq!(plan.len(), CHANNEL_COUNT);
    plan
}

/// Shared, lazily-built copy of the plan.
pub fn plan() -> &'static [ChannelDescriptor] {
    static PLAN: OnceLock<Vec<ChannelDescriptor>> = OnceLock::new();
    PLAN.get_or_init(build_plan)
}

pub fn channel_by_id(id: u32) -> Result<ChannelDescriptor, ChannelError> {
    if id == 0 || id as usize > CHANNEL_COUNT {
        return Err(ChannelError::NoSuchChannel(id));
    }
    Ok(plan()[id as usize - 1])
}

pub fn default_channel() -> ChannelDescriptor {
    plan()[DEFAULT_CHANNEL_ID as usize - 1]
}

pub fn full_band_channel() -> ChannelDescriptor {
    plan()[FULL_BAND_CHANNEL_ID as usize - 1]
}

/// Lowest-frequency channel of the given bandwidth multiplier.
pub fn first_channel_with_multiplier(multiplier: u8) -> Option<ChannelDescriptor> {
    plan().iter().copied().find(|c| c.multiplier == multiplier)
}

/// One representative channel per bandwidth class, narrowest first.
pub fn representative_channels() -> Vec<ChannelDescriptor> {
    MULTIPLIERS
        .iter()
        .filter_map(|&m| first_channel_with_multiplier(m))
        .collect()
}

pub fn overlaps(a: &ChannelDescriptor, b: &ChannelDescriptor) -> bool {
    a.low_edge_cghz() < b.high_edge_cghz() && b.low_edge_cghz() < a.high_edge_cghz()
}

/// `id,center_ghz,bandwidth_ghz` CSV of the whole plan.
pub fn plan_csv() -> String {
    let mut out = String::from("id,center_ghz,bandwidth_ghz\n");
    for c in plan() {
        out.push_str(&format!(
            "{},{:.2},{:.2}\n",
            c.id,
            c.center_ghz(),
            c.bandwidth_ghz()
        ));
    }
    out
}
