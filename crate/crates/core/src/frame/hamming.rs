//! Extended Hamming (72,64) SECDED code.
//!
//! Codewords are systematic and read MSB-first: the 64 data bits, then seven
//! Hamming parity bits, then one overall parity bit. Each data bit gets a
//! distinct non-power-of-two 7-bit syndrome column (the 64 smallest from 3
//! up). The parity bits hold the data syndrome MSB first, so codeword
//! position `64 + j` owns column `1 << (6 - j)`.

use thiserror::Error;

pub const DATA_BITS: usize = 64;
pub const CODEWORD_BITS: usize = 72;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("uncorrectable error pattern in extended Hamming codeword")]
pub struct DetectedUncorrectable;

const fn data_columns() -> [u8; DATA_BITS] {
    let mut cols = [0u8; DATA_BITS];
    let mut n = 0;
    let mut c: u8 = 3;
    while n < DATA_BITS {
        if c & (c - 1) != 0 {
            cols[n] = c;
            n += 1;
        }
        c += 1;
    }
    cols
}

const COLUMNS: [u8; DATA_BITS] = data_columns();

/// Syndrome -> codeword bit position (0 = first on air), or `NONE`.
const NONE: u8 = u8::MAX;
const fn syndrome_positions() -> [u8; 128] {
    let mut map = [NONE; 128];
    let mut i = 0;
    while i < DATA_BITS {
        map[COLUMNS[i] as usize] = i as u8;
        i += 1;
    }
    let mut k = 0;
    while k < 7 {
        map[1 << k] = (DATA_BITS + 6 - k) as u8;
        k += 1;
    }
    map
}

const POSITION_OF: [u8; 128] = syndrome_positions();

fn data_syndrome(data: u64) -> u8 {
    let mut s = 0u8;
    for (i, col) in COLUMNS.iter().enumerate() {
        if (data >> (DATA_BITS - 1 - i)) & 1 == 1 {
            s ^= col;
        }
    }
    s
}

/// Encodes 64 data bits (MSB first) into a 72-bit codeword, right-aligned.
pub fn eh_encode(data: u64) -> u128 {
    let parity = data_syndrome(data) as u128;
    let word = ((data as u128) << 8) | (parity << 1);
    word | (word.count_ones() as u128 & 1)
}

/// Decodes a 72-bit codeword, returning the data and the number of bits
/// corrected (0 or 1).
pub fn eh_decode(word: u128) -> Result<(u64, u32), DetectedUncorrectable> {
    let word = word & ((1u128 << CODEWORD_BITS) - 1);
    let data = (word >> 8) as u64;
    let stored = ((word >> 1) & 0x7F) as u8;
    let syndrome = data_syndrome(data) ^ stored;
    let odd = word.count_ones() & 1 == 1;
    match (syndrome, odd) {
        (0, false) => Ok((data, 0)),
        // Only the overall parity bit flipped.
        (0, true) => Ok((data, 1)),
        (_, false) => Err(DetectedUncorrectable),
        (s, true) => {
            let pos = POSITION_OF[s as usize];
            if pos == NONE {
                return Err(DetectedUncorrectable);
            }
            let fixed = word ^ (1u128 << (CODEWORD_BITS - 1 - pos as usize));
            Ok(((fixed >> 8) as u64, 1))
        }
    }
}
