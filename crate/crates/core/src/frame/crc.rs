//! CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, MSB-first, no reflection,
//! no final XOR.

use bitvec::prelude::*;

const POLY: u16 = 0x1021;
const INIT: u16 = 0xFFFF;

/// CRC over an arbitrary-length bit string, first bit first.
pub fn crc16_bits(bits: &BitSlice<u8, Msb0>) -> u16 {
    let mut crc = INIT;
    for bit in bits.iter().by_vals() {
        let feedback = ((crc >> 15) & 1 == 1) ^ bit;
        crc <<= 1;
        if feedback {
            crc ^= POLY;
        }
    }
    crc
}

pub fn crc16(bytes: &[u8]) -> u16 {
    crc16_bits(bytes.view_bits::<Msb0>())
}
