//! Monte-Carlo AWGN bit-error oracle for uncoded constellations.
//!
//! Self-contained on purpose: it shares no code with the library so it can
//! regenerate the shipped required-SNR table independently. SNR is Es/N0
//! with circularly-symmetric complex noise; every constellation is
//! normalised to unit average symbol energy.

#![allow(dead_code)]

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Uncoded pre-FEC BER target used for the 11/15 LDPC thresholds.
pub const TARGET_BER_LOW_RATE: f64 = 8e-2;
/// Uncoded pre-FEC BER target used for the 14/15 LDPC and RS(240,224) thresholds.
pub const TARGET_BER_HIGH_RATE: f64 = 7e-2;
/// Required SNR of BPSK (SC) and OOK with 11/15 LDPC after calibration.
pub const ANCHOR_DB: f64 = 5.65;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constellation {
    Bpsk,
    Qpsk,
    Psk8,
    Apsk8,
    Qam16,
    Qam64,
    Ook,
}

pub const ALL: [Constellation; 7] = [
    Constellation::Bpsk,
    Constellation::Qpsk,
    Constellation::Psk8,
    Constellation::Apsk8,
    Constellation::Qam16,
    Constellation::Qam64,
    Constellation::Ook,
];

fn gray(n: usize) -> usize {
    n ^ (n >> 1)
}

/// Constellation points (unit mean energy) with their bit labels.
pub struct Modem {
    pub points: Vec<(f64, f64)>,
    pub labels: Vec<usize>,
    pub bits: u32,
    kind: Constellation,
    pam_levels: usize,
    pam_scale: f64,
}

impl Modem {
    pub fn new(kind: Constellation) -> Self {
        let (points, labels, pam_levels) = match kind {
            Constellation::Bpsk => (vec![(-1.0, 0.0), (1.0, 0.0)], vec![0, 1], 0),
            Constellation::Ook => (vec![(0.0, 0.0), (2f64.sqrt(), 0.0)], vec![0, 1], 0),
            Constellation::Qpsk => psk(4),
            Constellation::Psk8 => psk(8),
            Constellation::Apsk8 => apsk8(),
            Constellation::Qam16 => qam(16),
            Constellation::Qam64 => qam(64),
        };
        let energy: f64 =
            points.iter().map(|(i, q)| i * i + q * q).sum::<f64>() / points.len() as f64;
        let norm = energy.sqrt();
        let points: Vec<(f64, f64)> = points.iter().map(|(i, q)| (i / norm, q / norm)).collect();
        let bits = points.len().trailing_zeros();
        Self {
            points,
            labels,
            bits,
            kind,
            pam_levels,
            pam_scale: norm,
        }
    }

    /// Index of the nearest constellation point.
    pub fn detect(&self, i: f64, q: f64) -> usize {
        match self.kind {
            Constellation::Bpsk => (i >= 0.0) as usize,
            Constellation::Ook => (i >= self.points[1].0 / 2.0) as usize,
            Constellation::Qam16 | Constellation::Qam64 => {
                let m = self.pam_levels;
                let slice = |v: f64| {
                    let x = v * self.pam_scale;
                    let k = ((x + (m as f64 - 1.0)) / 2.0).round();
                    k.clamp(0.0, m as f64 - 1.0) as usize
                };
                slice(i) * m + slice(q)
            }
            // Points at 0/90/180/270 degrees.
            Constellation::Qpsk => {
                if i.abs() >= q.abs() {
                    if i >= 0.0 {
                        0
                    } else {
                        2
                    }
                } else if q >= 0.0 {
                    1
                } else {
                    3
                }
            }
            // Rotate by +22.5 degrees so each decision sector becomes an octant.
            Constellation::Psk8 => {
                let (c, s) = (0.923_879_532_511_286_7, 0.382_683_432_365_089_8);
                let (x, y) = (i * c - q * s, i * s + q * c);
                let quadrant = match (x >= 0.0, y >= 0.0) {
                    (true, true) => 0,
                    (false, true) => 1,
                    (false, false) => 2,
                    (true, false) => 3,
                };
                let upper_half_of_quadrant = if quadrant % 2 == 0 {
                    y.abs() > x.abs()
                } else {
                    x.abs() > y.abs()
                };
                2 * quadrant + upper_half_of_quadrant as usize
            }
            Constellation::Apsk8 => self
                .points
                .iter()
                .enumerate()
                .map(|(k, (pi, pq))| (k, (i - pi).powi(2) + (q - pq).powi(2)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(k, _)| k)
                .unwrap(),
        }
    }
}

fn psk(m: usize) -> (Vec<(f64, f64)>, Vec<usize>, usize) {
    let pts = (0..m)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / m as f64;
            (a.cos(), a.sin())
        })
        .collect();
    (pts, (0..m).map(gray).collect(), 0)
}

fn qam(order: usize) -> (Vec<(f64, f64)>, Vec<usize>, usize) {
    let m = (order as f64).sqrt() as usize;
    let k = m.trailing_zeros();
    let level = |n: usize| 2.0 * n as f64 - (m as f64 - 1.0);
    let mut pts = Vec::with_capacity(order);
    let mut labels = Vec::with_capacity(order);
    for a in 0..m {
        for b in 0..m {
            pts.push((level(a), level(b)));
            labels.push((gray(a) << k) | gray(b));
        }
    }
    (pts, labels, m)
}

/// 4+4 star: inner ring at odd multiples of 45°, outer ring on the axes,
/// radius ratio chosen so every nearest-neighbour distance is equal.
fn apsk8() -> (Vec<(f64, f64)>, Vec<usize>, usize) {
    let r2 = (1.0 + 3f64.sqrt()) / 2f64.sqrt();
    let mut pts = Vec::with_capacity(8);
    for k in 0..4 {
        let a = std::f64::consts::FRAC_PI_4 + std::f64::consts::FRAC_PI_2 * k as f64;
        pts.push((a.cos(), a.sin()));
    }
    for k in 0..4 {
        let a = std::f64::consts::FRAC_PI_2 * k as f64;
        pts.push((r2 * a.cos(), r2 * a.sin()));
    }
    let dist = |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    let dmin = (0..8)
        .tuple_combinations()
        .map(|(a, b)| dist(pts[a], pts[b]))
        .fold(f64::INFINITY, f64::min);
    let neighbours: Vec<(usize, usize)> = (0..8)
        .tuple_combinations()
        .filter(|&(a, b)| (dist(pts[a], pts[b]) - dmin).abs() < 1e-9)
        .collect();
    let cost = |perm: &[usize]| -> u32 {
        neighbours
            .iter()
            .map(|&(a, b)| (perm[a] ^ perm[b]).count_ones())
            .sum()
    };
    let mut best: Option<(u32, Vec<usize>)> = None;
    for perm in (0..8).permutations(8) {
        let c = cost(&perm);
        if best.as_ref().is_none_or(|(bc, _)| c < *bc) {
            best = Some((c, perm));
        }
    }
    (pts, best.unwrap().1, 0)
}

/// Bit-error counts at every SNR on `grid_db`, all driven by the same
/// symbol and unit-noise realisation (common random numbers).
pub fn ber_on_grid(modem: &Modem, grid_db: &[f64], symbols: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigmas: Vec<f64> = grid_db
        .iter()
        .map(|snr| (10f64.powf(-snr / 10.0) / 2.0).sqrt())
        .collect();
    let mut errors = vec![0u64; grid_db.len()];
    let m = modem.points.len();
    for _ in 0..symbols {
        let tx = rng.gen_range(0..m);
        let (si, sq) = modem.points[tx];
        let ni: f64 = rng.sample(StandardNormal);
        let nq: f64 = rng.sample(StandardNormal);
        for (e, sigma) in errors.iter_mut().zip(&sigmas) {
            let rx = modem.detect(si + sigma * ni, sq + sigma * nq);
            *e += (modem.labels[tx] ^ modem.labels[rx]).count_ones() as u64;
        }
    }
    let total_bits = symbols as f64 * modem.bits as f64;
    errors.iter().map(|&e| e as f64 / total_bits).collect()
}

/// Uncalibrated AWGN SNRs (dB) where the uncoded BER equals each target.
///
/// A short bisection per target locates each crossing, then one pass of
/// `symbols` symbols evaluates a fine grid around all crossings and the
/// log-BER is interpolated.
pub fn required_snr_db(
    kind: Constellation,
    targets: &[f64],
    symbols: usize,
    seed: u64,
) -> Vec<f64> {
    let modem = Modem::new(kind);
    let coarse: Vec<f64> = targets
        .iter()
        .enumerate()
        .map(|(n, &target)| {
            let (mut lo, mut hi) = (-15.0, 40.0);
            let mut round = 0;
            while hi - lo > 0.02 {
                let mid = 0.5 * (lo + hi);
                let probe_seed = seed ^ (0x5eed_0000 + 64 * n as u64 + round);
                if ber_on_grid(&modem, &[mid], 200_000, probe_seed)[0] > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
                round += 1;
            }
            0.5 * (lo + hi)
        })
        .collect();
    let mut grid: Vec<f64> = coarse
        .iter()
        .flat_map(|c| (-2..=2).map(move |k| c + 0.05 * k as f64))
        .collect();
    grid.sort_by(f64::total_cmp);
    let ber = ber_on_grid(&modem, &grid, symbols, seed);
    targets
        .iter()
        .zip(&coarse)
        .map(|(&target, &c)| {
            // Nearest bracketing pair around the coarse estimate.
            let k = (1..grid.len())
                .filter(|&k| ber[k - 1] >= target && ber[k] <= target)
                .min_by(|&a, &b| (grid[a] - c).abs().total_cmp(&(grid[b] - c).abs()))
                .expect("fine grid does not bracket the target BER");
            let (b0, b1) = (ber[k - 1].log10(), ber[k].log10());
            let t = if b1 == b0 {
                0.5
            } else {
                (target.log10() - b0) / (b1 - b0)
            };
            grid[k - 1] + t * (grid[k] - grid[k - 1])
        })
        .collect()
}

/// One calibrated threshold row: constellation, code class, SNR in dB.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdRow {
    pub constellation: Constellation,
    /// `false` for 11/15 LDPC, `true` for 14/15 LDPC and RS(240,224).
    pub high_rate: bool,
    pub snr_db: f64,
}

/// Full calibrated table: SC constellations are shifted by one constant so
/// BPSK at the low-rate target lands on the anchor; OOK by its own constant.
pub fn calibrated_table(symbols: usize, seed: u64) -> Vec<ThresholdRow> {
    let mut raw = Vec::new();
    for (n, kind) in ALL.iter().enumerate() {
        let targets = [TARGET_BER_LOW_RATE, TARGET_BER_HIGH_RATE];
        let snrs = required_snr_db(*kind, &targets, symbols, seed.wrapping_add(31 * n as u64));
        for (high_rate, snr_db) in [(false, snrs[0]), (true, snrs[1])] {
            raw.push(ThresholdRow {
                constellation: *kind,
                high_rate,
                snr_db,
            });
        }
    }
    let anchor_of = |kind: Constellation| {
        raw.iter()
            .find(|r| r.constellation == kind && !r.high_rate)
            .unwrap()
            .snr_db
    };
    let sc_shift = ANCHOR_DB - anchor_of(Constellation::Bpsk);
    let ook_shift = ANCHOR_DB - anchor_of(Constellation::Ook);
    raw.iter()
        .map(|r| ThresholdRow {
            snr_db: r.snr_db
                + if r.constellation == Constellation::Ook {
                    ook_shift
                } else {
                    sc_shift
                },
            ..*r
        })
        .collect()
}
