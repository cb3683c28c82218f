//! Modulation and coding schemes of the THz-SC and THz-OOK PHY modes.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use super::PhyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhyMode {
    Sc,
    Ook,
}

impl PhyMode {
    /// Width of the MCS field in the PHY header.
    pub fn mcs_field_bits(self) -> u32 {
        match self {
            PhyMode::Sc => 4,
            PhyMode::Ook => 2,
        }
    }
}

impl fmt::Display for PhyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhyMode::Sc => "THZ_SC",
            PhyMode::Ook => "THZ_OOK",
        })
    }
}

impl FromStr for PhyMode {
    type Err = PhyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sc" | "thz_sc" | "thz-sc" => Ok(PhyMode::Sc),
            "ook" | "thz_ook" | "thz-ook" => Ok(PhyMode::Ook),
            _ => Err(PhyError::Parse(format!("unknown PHY mode '{s}'"))),
        }
    }
}

/// Declaration order is modulation order; tie-breaks rely on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Psk8,
    Apsk8,
    Qam16,
    Qam64,
    Ook,
}

impl Modulation {
    pub const SC: [Modulation; 6] = [
        Modulation::Bpsk,
        Modulation::Qpsk,
        Modulation::Psk8,
        Modulation::Apsk8,
        Modulation::Qam16,
        Modulation::Qam64,
    ];

    pub fn bits_per_symbol(self) -> u32 {
        match self {
            Modulation::Bpsk | Modulation::Ook => 1,
            Modulation::Qpsk => 2,
            Modulation::Psk8 | Modulation::Apsk8 => 3,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
        }
    }

    pub fn mode(self) -> PhyMode {
        match self {
            Modulation::Ook => PhyMode::Ook,
            _ => PhyMode::Sc,
        }
    }

    fn token(self) -> &'static str {
        match self {
            Modulation::Bpsk => "bpsk",
            Modulation::Qpsk => "qpsk",
            Modulation::Psk8 => "8psk",
            Modulation::Apsk8 => "8apsk",
            Modulation::Qam16 => "16qam",
            Modulation::Qam64 => "64qam",
            Modulation::Ook => "ook",
        }
    }

    fn sc_rank(self) -> Option<u8> {
        Modulation::SC
            .iter()
            .position(|&m| m == self)
            .map(|p| p as u8)
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modulation::Bpsk => "BPSK",
            Modulation::Qpsk => "QPSK",
            Modulation::Psk8 => "8-PSK",
            Modulation::Apsk8 => "8-APSK",
            Modulation::Qam16 => "16-QAM",
            Modulation::Qam64 => "64-QAM",
            Modulation::Ook => "OOK",
        })
    }
}

impl FromStr for Modulation {
    type Err = PhyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        [
            Modulation::Bpsk,
            Modulation::Qpsk,
            Modulation::Psk8,
            Modulation::Apsk8,
            Modulation::Qam16,
            Modulation::Qam64,
            Modulation::Ook,
        ]
        .into_iter()
        .find(|m| m.token() == norm)
        .ok_or_else(|| PhyError::Parse(format!("unknown modulation '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fec {
    /// LDPC(1440,1056).
    Ldpc11_15,
    /// LDPC(1440,1344).
    Ldpc14_15,
    /// RS(240,224).
    Rs240_224,
}

impl Fec {
    /// (information, codeword) lengths.
    pub fn block(self) -> (u64, u64) {
        match self {
            Fec::Ldpc11_15 => (1056, 1440),
            Fec::Ldpc14_15 => (1344, 1440),
            Fec::Rs240_224 => (224, 240),
        }
    }

    pub fn code_rate(self) -> Ratio<u64> {
        let (k, n) = self.block();
        Ratio::new(k, n)
    }

    fn token(self) -> &'static str {
        match self {
            Fec::Ldpc11_15 => "ldpc11",
            Fec::Ldpc14_15 => "ldpc14",
            Fec::Rs240_224 => "rs",
        }
    }
}

impl fmt::Display for Fec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fec::Ldpc11_15 => "LDPC 11/15",
            Fec::Ldpc14_15 => "LDPC 14/15",
            Fec::Rs240_224 => "RS 240/224",
        })
    }
}

impl FromStr for Fec {
    type Err = PhyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace([' ', '_'], "").as_str() {
            "ldpc11" | "ldpc11/15" | "11/15" => Ok(Fec::Ldpc11_15),
            "ldpc14" | "ldpc14/15" | "14/15" => Ok(Fec::Ldpc14_15),
            "rs" | "rs240" | "rs(240,224)" | "rs240/224" => Ok(Fec::Rs240_224),
            _ => Err(PhyError::Parse(format!("unknown FEC '{s}'"))),
        }
    }
}

/// A valid (modulation, FEC) pair. The PHY mode follows from the modulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mcs {
    modulation: Modulation,
    fec: Fec,
}

impl Mcs {
    pub fn new(modulation: Modulation, fec: Fec) -> Result<Self, PhyError> {
        let valid = match modulation.mode() {
            PhyMode::Sc => fec != Fec::Rs240_224,
            PhyMode::Ook => true,
        };
        if valid {
            Ok(Self { modulation, fec })
        } else {
            Err(PhyError::InvalidMcs { modulation, fec })
        }
    }

    pub fn mode(&self) -> PhyMode {
        self.modulation.mode()
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    pub fn fec(&self) -> Fec {
        self.fec
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.modulation.bits_per_symbol()
    }

    pub fn code_rate(&self) -> Ratio<u64> {
        self.fec.code_rate()
    }

    /// Support required of every device in the mode: BPSK/QPSK in THz-SC,
    /// RS(240,224) in THz-OOK.
    pub fn is_mandatory(&self) -> bool {
        match self.mode() {
            PhyMode::Sc => matches!(self.modulation, Modulation::Bpsk | Modulation::Qpsk),
            PhyMode::Ook => self.fec == Fec::Rs240_224,
        }
    }

    /// Value carried in the PHY header MCS field.
    pub fn index(&self) -> u8 {
        match self.mode() {
            PhyMode::Sc => {
                let rank = self.modulation.sc_rank().expect("SC modulation");
                2 * rank + u8::from(self.fec == Fec::Ldpc14_15)
            }
            PhyMode::Ook => match self.fec {
                Fec::Rs240_224 => 0,
                Fec::Ldpc11_15 => 1,
                Fec::Ldpc14_15 => 2,
            },
        }
    }

    pub fn from_index(mode: PhyMode, index: u8) -> Option<Mcs> {
        match mode {
            PhyMode::Sc => {
                let modulation = *Modulation::SC.get((index / 2) as usize)?;
                let fec = if index % 2 == 1 {
                    Fec::Ldpc14_15
                } else {
                    Fec::Ldpc11_15
                };
                Some(Mcs { modulation, fec })
            }
            PhyMode::Ook => {
                let fec = match index {
                    0 => Fec::Rs240_224,
                    1 => Fec::Ldpc11_15,
                    2 => Fec::Ldpc14_15,
                    _ => return None,
                };
                Some(Mcs {
                    modulation: Modulation::Ook,
                    fec,
                })
            }
        }
    }

    /// Every MCS valid in `mode`, in header-index order.
    pub fn all_for_mode(mode: PhyMode) -> Vec<Mcs> {
        let n = match mode {
            PhyMode::Sc => 12,
            PhyMode::Ook => 3,
        };
        (0..n).filter_map(|i| Mcs::from_index(mode, i)).collect()
    }

    /// The 12 THz-SC followed by the 3 THz-OOK schemes.
    pub fn all() -> Vec<Mcs> {
        let mut v = Mcs::all_for_mode(PhyMode::Sc);
        v.extend(Mcs::all_for_mode(PhyMode::Ook));
        v
    }
}

impl fmt::Display for Mcs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.modulation.token(), self.fec.token())
    }
}

impl FromStr for Mcs {
    type Err = PhyError;

    /// Accepts `<modulation>-<fec>`, e.g. `64qam-ldpc14` or `ook-rs`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (m, f) = s
            .trim()
            .rsplit_once(['-', ':', '+'])
            .ok_or_else(|| PhyError::Parse(format!("expected <modulation>-<fec>, got '{s}'")))?;
        Mcs::new(m.parse()?, f.parse()?)
    }
}
