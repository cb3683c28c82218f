//! Regenerates the calibrated required-SNR table with the Monte-Carlo oracle.
//!
//! `cargo run --release -p subthz --example threshold_table -- [symbols] [seed]`

#[path = "../tests/support/awgn_oracle.rs"]
mod awgn_oracle;

fn main() {
    let mut args = std::env::args().skip(1);
    let symbols: usize = args
        .next()
        .map_or(10_000_000, |s| s.parse().expect("symbols"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    println!("constellation,code,required_snr_db");
    for row in awgn_oracle::calibrated_table(symbols, seed) {
        let code = if row.high_rate { "14/15|RS" } else { "11/15" };
        println!("{:?},{},{:.3}", row.constellation, code, row.snr_db);
    }
}
