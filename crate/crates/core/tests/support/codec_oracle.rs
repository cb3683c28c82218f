//! Reference header encoder built from strings of '0'/'1' characters, a
//! table-driven CRC and an explicit parity-check matrix. Shares no code
//! with the library codec.

#![allow(dead_code)]

/// CRC-16/CCITT-FALSE lookup table.
pub fn crc_table() -> [u16; 256] {
    let mut t = [0u16; 256];
    for (i, slot) in t.iter_mut().enumerate() {
        let mut c = (i as u16) << 8;
        for _ in 0..8 {
            c = if c & 0x8000 != 0 {
                (c << 1) ^ 0x1021
            } else {
                c << 1
            };
        }
        *slot = c;
    }
    t
}

pub fn crc_bytes(data: &[u8]) -> u16 {
    let t = crc_table();
    data.iter().fold(0xFFFF, |crc, &b| {
        (crc << 8) ^ t[(((crc >> 8) as u8) ^ b) as usize]
    })
}

/// CRC over a '0'/'1' string: whole bytes via the table, the tail bit by bit.
pub fn crc_bitstring(bits: &str) -> u16 {
    let b = bits.as_bytes();
    let whole = b.len() / 8;
    let bytes: Vec<u8> = (0..whole)
        .map(|i| u8::from_str_radix(&bits[i * 8..i * 8 + 8], 2).unwrap())
        .collect();
    let mut crc = crc_bytes(&bytes);
    for &c in &b[whole * 8..] {
        let bit = c == b'1';
        let fb = (crc & 0x8000 != 0) ^ bit;
        crc <<= 1;
        if fb {
            crc ^= 0x1021;
        }
    }
    crc
}

pub fn field(value: u64, width: usize) -> String {
    format!("{value:0width$b}")
}

/// Rows of the (72,64) parity-check matrix: seven Hamming rows plus the
/// all-ones overall-parity row. Column `i < 64` of the Hamming rows is the
/// i-th integer >= 3 with at least two bits set; columns 64..70 are the
/// unit vectors 64, 32, ..., 1; column 71 is zero.
pub fn parity_check_matrix() -> Vec<Vec<u8>> {
    let mut cols: Vec<u32> = (3u32..).filter(|c| c.count_ones() >= 2).take(64).collect();
    cols.extend((0..7).rev().map(|k| 1u32 << k));
    cols.push(0);
    let mut h: Vec<Vec<u8>> = (0..7)
        .map(|r| cols.iter().map(|c| ((c >> r) & 1) as u8).collect())
        .collect();
    h.push(vec![1; 72]);
    h
}

/// Systematic codeword by solving H c = 0 for the eight check bits.
pub fn eh_encode_bits(data: &str) -> String {
    assert_eq!(data.len(), 64);
    let h = parity_check_matrix();
    let d: Vec<u8> = data.bytes().map(|b| b - b'0').collect();
    let mut check = [0u8; 8];
    for r in 0..7 {
        check[r] = (0..64).map(|i| h[r][i] & d[i]).fold(0, |a, b| a ^ b);
    }
    let mut word = d.clone();
    // Position 64 + j owns Hamming row 6 - j.
    for &c in check[..7].iter().rev() {
        word.push(c);
    }
    let overall = word.iter().fold(0, |a, b| a ^ b);
    word.push(overall);
    for row in &h {
        let s = row
            .iter()
            .zip(&word)
            .map(|(a, b)| a & b)
            .fold(0, |a, b| a ^ b);
        assert_eq!(s, 0);
    }
    word.iter().map(|b| (b'0' + b) as char).collect()
}

pub struct HeaderFields {
    pub sc: bool,
    pub mcs_index: u64,
    pub length: u64,
    pub frame_type: u64,
    pub ack: bool,
    pub pairnet: u64,
    pub src: u64,
    pub dest: u64,
    pub seq: u64,
    pub long_preamble: bool,
}

/// Tag plus the two EH codewords, as a '0'/'1' string.
pub fn header_bitstring(f: &HeaderFields) -> String {
    let mut hdr = String::new();
    hdr += &field(f.mcs_index, if f.sc { 4 } else { 2 });
    hdr += &field(f.length, 22);
    hdr += &field(0, 6);
    hdr += &field(f.frame_type, 3);
    hdr += if f.ack { "1" } else { "0" };
    hdr += &field(f.pairnet, 16);
    hdr += &field(f.src, 8);
    hdr += &field(f.dest, 8);
    hdr += &field(f.seq, 12);
    hdr += &field(0, 16);
    let crc = crc_bitstring(&hdr);
    hdr += &field(crc as u64, 16);
    while hdr.len() < 128 {
        hdr.push('0');
    }
    let tag = if f.long_preamble {
        "11110000"
    } else {
        "00001111"
    };
    format!(
        "{tag}{}{}",
        eh_encode_bits(&hdr[..64]),
        eh_encode_bits(&hdr[64..])
    )
}

pub fn bitstring_to_hex(bits: &str) -> String {
    assert_eq!(bits.len() % 8, 0);
    (0..bits.len() / 8)
        .map(|i| {
            format!(
                "{:02x}",
                u8::from_str_radix(&bits[i * 8..i * 8 + 8], 2).unwrap()
            )
        })
        .collect()
}
