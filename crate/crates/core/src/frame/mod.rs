//! Bit-exact frame codec.
//!
//! On-air layout:
//!
//! ```text
//! preamble tag (8) | EH(72,64) x 2 | payload bytes
//!                    '-- PHY header (32 SC / 30 OOK) | MAC header (64) | HCS (16) | stuff (0s)
//! ```
//!
//! The preamble itself is represented by an 8-bit tag; only its duration
//! (LONG = 2048, SHORT = 1024 symbols) matters for timing. LONG is used for
//! pairnet-setup frames (Beacon, Association Request/Response).

mod crc;
mod hamming;

use std::fmt;

use bitvec::prelude::*;
use thiserror::Error;

use crate::channel_plan::ChannelDescriptor;
use crate::phy::{self, Mcs, PhyMode};

pub use crc::{crc16, crc16_bits};
pub use hamming::{eh_decode, eh_encode, DetectedUncorrectable, CODEWORD_BITS, DATA_BITS};

pub type Bits = BitVec<u8, Msb0>;

pub const MIN_FRAME_BYTES: u32 = 2048;
pub const MAX_FRAME_BYTES: u32 = 2_099_200;
pub const PREAMBLE_TAG_BITS: usize = 8;
pub const MAC_HEADER_BITS: usize = 64;
pub const HCS_BITS: usize = 16;
const LENGTH_BITS: usize = 22;
const PHY_RESERVED_BITS: usize = 6;
/// Header blocks after stuffing and EH encoding.
pub const HEADER_BLOCKS: usize = 2;
pub const ON_AIR_HEADER_BITS: usize = HEADER_BLOCKS * CODEWORD_BITS;
/// Offset of the first payload bit.
pub const PAYLOAD_OFFSET_BITS: usize = PREAMBLE_TAG_BITS + ON_AIR_HEADER_BITS;
/// Largest number of tag bits that may differ from a known tag.
const TAG_TOLERANCE: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("payload has {payload} bytes but the length field says {field}")]
    LengthMismatch { field: u32, payload: usize },
    #[error("frame length {0} outside [2048, 2099200] bytes")]
    LengthOutOfRange(u32),
    #[error("{field} value {value} does not fit its field")]
    FieldOverflow { field: &'static str, value: u32 },
    #[error("{frame_type} must use the {expected} preamble")]
    PreambleMismatch {
        frame_type: FrameType,
        expected: Preamble,
    },
    #[error("bit stream truncated: need {needed} bits, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("unrecognised preamble tag {0:#04x}")]
    UnknownPreamble(u8),
    #[error("header codeword {0} has an uncorrectable error")]
    EhFailure(usize),
    #[error("header check sequence mismatch (computed {computed:#06x}, received {received:#06x})")]
    HcsFailure { computed: u16, received: u16 },
    #[error("MCS index {0} is not defined for this PHY mode")]
    InvalidMcsIndex(u8),
    #[error("frame type code {0} is not defined")]
    UnknownFrameType(u8),
    #[error("reserved or stuff bits are not zero")]
    ReservedBitsSet,
    #[error("{0} unexpected bits after the payload")]
    TrailingBits(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preamble {
    Long,
    Short,
}

impl Preamble {
    pub fn symbols(self) -> u32 {
        match self {
            Preamble::Long => 2048,
            Preamble::Short => 1024,
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Preamble::Long => 0xF0,
            Preamble::Short => 0x0F,
        }
    }

    /// Nearest known tag within the tolerance; the two tags are 8 bits apart.
    fn from_tag(tag: u8) -> Option<Preamble> {
        [Preamble::Long, Preamble::Short]
            .into_iter()
            .find(|p| (p.tag() ^ tag).count_ones() <= TAG_TOLERANCE)
    }

    pub fn for_frame_type(frame_type: FrameType) -> Preamble {
        if frame_type.is_setup() {
            Preamble::Long
        } else {
            Preamble::Short
        }
    }
}

impl fmt::Display for Preamble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preamble::Long => "LONG",
            Preamble::Short => "SHORT",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameType {
    Beacon,
    AssocReq,
    AssocRsp,
    Data,
    Ack,
    ProbeReq,
    DisassocReq,
}

impl FrameType {
    pub const ALL: [FrameType; 7] = [
        FrameType::Beacon,
        FrameType::AssocReq,
        FrameType::AssocRsp,
        FrameType::Data,
        FrameType::Ack,
        FrameType::ProbeReq,
        FrameType::DisassocReq,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<FrameType, FrameError> {
        Self::ALL
            .get(code as usize)
            .copied()
            .ok_or(FrameError::UnknownFrameType(code))
    }

    /// Sent during pairnet setup, hence with the long preamble.
    pub fn is_setup(self) -> bool {
        matches!(
            self,
            FrameType::Beacon | FrameType::AssocReq | FrameType::AssocRsp
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            FrameType::Beacon => "BEACON",
            FrameType::AssocReq => "ASSOC_REQ",
            FrameType::AssocRsp => "ASSOC_RSP",
            FrameType::Data => "DATA",
            FrameType::Ack => "ACK",
            FrameType::ProbeReq => "PROBE_REQ",
            FrameType::DisassocReq => "DISASSOC_REQ",
        }
    }
}

impl fmt::Display for FrameType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FrameType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_uppercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|t| t.name() == norm)
            .ok_or_else(|| format!("unknown frame type '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AckPolicy {
    #[default]
    None,
    PerFrame,
}

impl AckPolicy {
    fn bit(self) -> bool {
        self == AckPolicy::PerFrame
    }
}

impl fmt::Display for AckPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AckPolicy::None => "none",
            AckPolicy::PerFrame => "per_frame",
        })
    }
}

impl std::str::FromStr for AckPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "none" | "no_ack" => Ok(AckPolicy::None),
            "per_frame" | "perframe" | "imm" => Ok(AckPolicy::PerFrame),
            other => Err(format!("unknown ack policy '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhyHeader {
    pub mcs: Mcs,
    pub frame_length_bytes: u32,
}

impl PhyHeader {
    /// 32 bits for THz-SC, 30 for THz-OOK.
    pub fn bits(&self) -> usize {
        phy_header_bits(self.mcs.mode())
    }
}

pub fn phy_header_bits(mode: PhyMode) -> usize {
    mode.mcs_field_bits() as usize + LENGTH_BITS + PHY_RESERVED_BITS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MacHeader {
    pub frame_type: FrameType,
    pub ack_policy: AckPolicy,
    pub pairnet_id: u16,
    pub src_id: u8,
    pub dest_id: u8,
    /// 12 bits.
    pub seq_num: u16,
}

pub const MAX_SEQ_NUM: u16 = 0x0FFF;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub preamble: Preamble,
    pub phy_header: PhyHeader,
    pub mac_header: MacHeader,
    pub payload: Vec<u8>,
}

impl Frame {
    /// Frame with the preamble implied by the type and a length field
    /// matching the payload.
    pub fn new(mcs: Mcs, mac_header: MacHeader, payload: Vec<u8>) -> Frame {
        Frame {
            preamble: Preamble::for_frame_type(mac_header.frame_type),
            phy_header: PhyHeader {
                mcs,
                frame_length_bytes: u32::try_from(payload.len()).unwrap_or(u32::MAX),
            },
            mac_header,
            payload,
        }
    }

    pub fn mode(&self) -> PhyMode {
        self.phy_header.mcs.mode()
    }

    /// CRC-16 over the PHY and MAC header bits.
    pub fn hcs(&self) -> u16 {
        crc16_bits(&header_bits(&self.phy_header, &self.mac_header))
    }

    pub fn airtime_s(&self, channel: &ChannelDescriptor) -> f64 {
        frame_airtime_s(self, &self.phy_header.mcs, channel)
    }

    pub fn validate(&self) -> Result<(), FrameError> {
        let len = self.phy_header.frame_length_bytes;
        if !(MIN_FRAME_BYTES..=MAX_FRAME_BYTES).contains(&len) {
            return Err(FrameError::LengthOutOfRange(len));
        }
        if self.payload.len() != len as usize {
            return Err(FrameError::LengthMismatch {
                field: len,
                payload: self.payload.len(),
            });
        }
        if self.mac_header.seq_num > MAX_SEQ_NUM {
            return Err(FrameError::FieldOverflow {
                field: "seq_num",
                value: self.mac_header.seq_num as u32,
            });
        }
        let expected = Preamble::for_frame_type(self.mac_header.frame_type);
        if self.preamble != expected {
            return Err(FrameError::PreambleMismatch {
                frame_type: self.mac_header.frame_type,
                expected,
            });
        }
        Ok(())
    }
}

fn push_uint(bits: &mut Bits, value: u128, width: usize) {
    for i in (0..width).rev() {
        bits.push((value >> i) & 1 == 1);
    }
}

fn read_uint(bits: &BitSlice<u8, Msb0>) -> u128 {
    bits.iter()
        .by_vals()
        .fold(0, |acc, b| (acc << 1) | b as u128)
}

/// PHY header followed by MAC header, pre-HCS.
fn header_bits(phy: &PhyHeader, mac: &MacHeader) -> Bits {
    let mut bits = Bits::with_capacity(96);
    push_uint(
        &mut bits,
        phy.mcs.index() as u128,
        phy.mcs.mode().mcs_field_bits() as usize,
    );
    push_uint(&mut bits, phy.frame_length_bytes as u128, LENGTH_BITS);
    push_uint(&mut bits, 0, PHY_RESERVED_BITS);
    push_uint(&mut bits, mac.frame_type.code() as u128, 3);
    bits.push(mac.ack_policy.bit());
    push_uint(&mut bits, mac.pairnet_id as u128, 16);
    push_uint(&mut bits, mac.src_id as u128, 8);
    push_uint(&mut bits, mac.dest_id as u128, 8);
    push_uint(&mut bits, mac.seq_num as u128, 12);
    push_uint(&mut bits, 0, 16);
    bits
}

/// Serialises a frame to its on-air bit sequence.
pub fn encode_frame(frame: &Frame) -> Result<Bits, FrameError> {
    frame.validate()?;
    let mut out = Bits::with_capacity(PAYLOAD_OFFSET_BITS + frame.payload.len() * 8);
    push_uint(&mut out, frame.preamble.tag() as u128, PREAMBLE_TAG_BITS);

    let mut block = header_bits(&frame.phy_header, &frame.mac_header);
    let hcs = crc16_bits(&block);
    push_uint(&mut block, hcs as u128, HCS_BITS);
    block.resize(HEADER_BLOCKS * DATA_BITS, false);
    for chunk in block.chunks(DATA_BITS) {
        push_uint(&mut out, eh_encode(read_uint(chunk) as u64), CODEWORD_BITS);
    }

    out.extend_from_raw_slice(&frame.payload);
    Ok(out)
}

/// Encoded frame padded with zero bits to a whole number of bytes.
pub fn encode_frame_bytes(frame: &Frame) -> Result<Vec<u8>, FrameError> {
    let mut bits = encode_frame(frame)?;
    bits.set_uninitialized(false);
    Ok(bits.into_vec())
}

/// Header fields recovered from the protected header block.
struct DecodedHeader {
    phy: PhyHeader,
    mac: MacHeader,
}

fn decode_header(block: &BitSlice<u8, Msb0>, mode: PhyMode) -> Result<DecodedHeader, FrameError> {
    let phy_bits = phy_header_bits(mode);
    let covered = phy_bits + MAC_HEADER_BITS;
    let received = read_uint(&block[covered..covered + HCS_BITS]) as u16;
    let computed = crc16_bits(&block[..covered]);
    if computed != received {
        return Err(FrameError::HcsFailure { computed, received });
    }
    if block[covered + HCS_BITS..].any() {
        return Err(FrameError::ReservedBitsSet);
    }

    let mcs_bits = mode.mcs_field_bits() as usize;
    let index = read_uint(&block[..mcs_bits]) as u8;
    let mcs = Mcs::from_index(mode, index).ok_or(FrameError::InvalidMcsIndex(index))?;
    let length = read_uint(&block[mcs_bits..mcs_bits + LENGTH_BITS]) as u32;
    if block[mcs_bits + LENGTH_BITS..phy_bits].any() {
        return Err(FrameError::ReservedBitsSet);
    }
    if !(MIN_FRAME_BYTES..=MAX_FRAME_BYTES).contains(&length) {
        return Err(FrameError::LengthOutOfRange(length));
    }

    let mac = &block[phy_bits..covered];
    let frame_type = FrameType::from_code(read_uint(&mac[0..3]) as u8)?;
    if mac[48..64].any() {
        return Err(FrameError::ReservedBitsSet);
    }
    Ok(DecodedHeader {
        phy: PhyHeader {
            mcs,
            frame_length_bytes: length,
        },
        mac: MacHeader {
            frame_type,
            ack_policy: if mac[3] {
                AckPolicy::PerFrame
            } else {
                AckPolicy::None
            },
            pairnet_id: read_uint(&mac[4..20]) as u16,
            src_id: read_uint(&mac[20..28]) as u8,
            dest_id: read_uint(&mac[28..36]) as u8,
            seq_num: read_uint(&mac[36..48]) as u16,
        },
    })
}

/// Decoding result with the number of header bits the EH layer repaired.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub frame: Frame,
    pub corrected_bits: u32,
}

/// Parses an on-air bit sequence. Up to seven zero bits of byte padding may
/// follow the payload.
pub fn decode_frame(bits: &BitSlice<u8, Msb0>, mode: PhyMode) -> Result<Decoded, FrameError> {
    if bits.len() < PAYLOAD_OFFSET_BITS {
        return Err(FrameError::Truncated {
            needed: PAYLOAD_OFFSET_BITS,
            available: bits.len(),
        });
    }
    let tag = read_uint(&bits[..PREAMBLE_TAG_BITS]) as u8;
    let preamble = Preamble::from_tag(tag).ok_or(FrameError::UnknownPreamble(tag))?;
    let mut corrected_bits = (preamble.tag() ^ tag).count_ones();

    let mut block = Bits::with_capacity(HEADER_BLOCKS * DATA_BITS);
    for (i, cw) in bits[PREAMBLE_TAG_BITS..PAYLOAD_OFFSET_BITS]
        .chunks(CODEWORD_BITS)
        .enumerate()
    {
        let (data, fixed) = eh_decode(read_uint(cw)).map_err(|_| FrameError::EhFailure(i))?;
        corrected_bits += fixed;
        push_uint(&mut block, data as u128, DATA_BITS);
    }
    let header = decode_header(&block, mode)?;

    let expected = Preamble::for_frame_type(header.mac.frame_type);
    if preamble != expected {
        return Err(FrameError::PreambleMismatch {
            frame_type: header.mac.frame_type,
            expected,
        });
    }

    let payload_bits = header.phy.frame_length_bytes as usize * 8;
    let end = PAYLOAD_OFFSET_BITS + payload_bits;
    if bits.len() < end {
        return Err(FrameError::Truncated {
            needed: end,
            available: bits.len(),
        });
    }
    let trailing = &bits[end..];
    if trailing.len() >= 8 || trailing.any() {
        return Err(FrameError::TrailingBits(trailing.len()));
    }
    let mut payload = vec![0u8; header.phy.frame_length_bytes as usize];
    payload
        .view_bits_mut::<Msb0>()
        .copy_from_bitslice(&bits[PAYLOAD_OFFSET_BITS..end]);

    Ok(Decoded {
        frame: Frame {
            preamble,
            phy_header: header.phy,
            mac_header: header.mac,
            payload,
        },
        corrected_bits,
    })
}

pub fn decode_frame_bytes(bytes: &[u8], mode: PhyMode) -> Result<Decoded, FrameError> {
    decode_frame(bytes.view_bits::<Msb0>(), mode)
}

/// On-air duration of a frame with `payload_bytes` of payload.
///
/// Header bits are carried at the MCS modulation without payload FEC;
/// payload bits pay the code rate.
pub fn airtime_s(
    preamble: Preamble,
    payload_bytes: u64,
    mcs: &Mcs,
    channel: &ChannelDescriptor,
) -> f64 {
    let bps = mcs.bits_per_symbol() as f64;
    let rate = phy::ratio_to_f64(mcs.code_rate());
    let symbols = preamble.symbols() as f64
        + ON_AIR_HEADER_BITS as f64 / bps
        + (payload_bytes * 8) as f64 / (bps * rate);
    symbols / phy::symbol_rate_baud(channel)
}

pub fn frame_airtime_s(frame: &Frame, mcs: &Mcs, channel: &ChannelDescriptor) -> f64 {
    airtime_s(frame.preamble, frame.payload.len() as u64, mcs, channel)
}

/// A named frame for the conformance vector set.
#[derive(Debug, Clone)]
pub struct Vector {
    pub name: &'static str,
    pub frame: Frame,
}

/// Deterministic payload pattern used by the conformance vectors.
pub fn pattern_payload(len: usize, seed: u8) -> Vec<u8> {
    (0..len)
        .map(|i| (i as u32).wrapping_mul(31).wrapping_add(seed as u32) as u8)
        .collect()
}

/// Fixed frames covering every frame type and both PHY modes.
pub fn conformance_vectors() -> Vec<Vector> {
    let sc = |m: &str| m.parse::<Mcs>().expect("valid mcs literal");
    let mac = |frame_type, seq_num| MacHeader {
        frame_type,
        ack_policy: AckPolicy::None,
        pairnet_id: 0x0D3D,
        src_id: 1,
        dest_id: 2,
        seq_num,
    };
    let mut data = mac(FrameType::Data, 0x123);
    data.src_id = 2;
    data.dest_id = 1;
    data.ack_policy = AckPolicy::PerFrame;
    vec![
        Vector {
            name: "sc_beacon_bpsk",
            frame: Frame::new(sc("bpsk-ldpc11"), mac(FrameType::Beacon, 0), vec![0; 2048]),
        },
        Vector {
            name: "sc_assoc_rsp_qpsk",
            frame: Frame::new(
                sc("qpsk-ldpc14"),
                mac(FrameType::AssocRsp, 1),
                vec![0; 2048],
            ),
        },
        Vector {
            name: "sc_data_64qam",
            frame: Frame::new(sc("64qam-ldpc14"), data, pattern_payload(4096, 7)),
        },
        Vector {
            name: "sc_probe_8apsk",
            frame: Frame::new(
                sc("8apsk-ldpc14"),
                mac(FrameType::ProbeReq, 0xFFF),
                vec![0; 2048],
            ),
        },
        Vector {
            name: "ook_data_rs",
            frame: Frame::new(sc("ook-rs"), data, pattern_payload(2048, 1)),
        },
        Vector {
            name: "ook_disassoc_ldpc11",
            frame: Frame::new(
                sc("ook-ldpc11"),
                mac(FrameType::DisassocReq, 9),
                vec![0; 2048],
            ),
        },
    ]
}

pub fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
