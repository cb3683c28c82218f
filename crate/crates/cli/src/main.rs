use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use subthz::channel_plan;
use subthz::frame::{self, AckPolicy, Frame, FrameType, MacHeader};
use subthz::mac::{DEFAULT_PAIRNET_ID, PRC_ID, PRDEV_ID};
use subthz::phy::{self, Mcs, PhyMode, UseCase, UseCaseProfile};
use subthz::scenario::{self, McsChoice, Scenario};

#[derive(Parser)]
#[command(name = "subthz", version, about = "Sub-THz link and pairnet toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Channel plan queries.
    Plan {
        #[command(subcommand)]
        action: PlanAction,
    },
    /// Data rate of every MCS on every bandwidth class, as CSV.
    Rates(OutArg),
    /// Itemised link budget for one link.
    Budget(BudgetArgs),
    /// Range per profile and bandwidth, plus the 100 Gbit/s anchors.
    Range(RangeArgs),
    /// Pairnet MAC simulation.
    Mac {
        #[command(subcommand)]
        action: MacAction,
    },
    /// Simulated 900 MB kiosk download.
    KioskDemo(KioskArgs),
    /// Frame encoder and decoder.
    Codec {
        #[command(subcommand)]
        action: CodecAction,
    },
}

#[derive(Subcommand)]
enum PlanAction {
    /// All 69 channels as CSV.
    Dump(OutArg),
}

#[derive(Subcommand)]
enum MacAction {
    /// Run a scenario file; the trace goes to --out (or the scenario's
    /// output) and the summary to stdout.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CodecAction {
    /// Encode one frame to a binary file.
    Encode(EncodeArgs),
    /// Decode a binary frame file and describe it.
    Decode {
        input: PathBuf,
        /// PHY mode the frame was sent in (sc or ook).
        #[arg(long, default_value = "sc")]
        mode: String,
        /// Write the decoded payload here.
        #[arg(long)]
        payload_out: Option<PathBuf>,
    },
    /// Conformance vectors as CSV.
    Vectors(OutArg),
}

#[derive(Args)]
struct OutArg {
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, default_value = "fronthaul_backhaul")]
    profile: String,
    #[arg(long, default_value_t = channel_plan::DEFAULT_CHANNEL_ID as u32)]
    channel: u32,
    /// MCS such as 64qam-ldpc14, or auto.
    #[arg(long, default_value = "auto")]
    mcs: String,
    #[arg(long, default_value_t = 1.0)]
    distance: f64,
}

#[derive(Args)]
struct RangeArgs {
    /// Restrict to one profile.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KioskArgs {
    #[arg(long, default_value_t = scenario::KIOSK_DOWNLOAD_BYTES)]
    bytes: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the frame trace here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long, default_value = "qpsk-ldpc14")]
    mcs: String,
    #[arg(long = "type", default_value = "data")]
    frame_type: String,
    #[arg(long, default_value_t = 0)]
    seq: u16,
    #[arg(long, default_value = "none")]
    ack: String,
    #[arg(long, default_value_t = DEFAULT_PAIRNET_ID)]
    pairnet: u16,
    #[arg(long, default_value_t = PRDEV_ID)]
    src: u8,
    #[arg(long, default_value_t = PRC_ID)]
    dest: u8,
    /// Payload bytes; a pattern payload of --payload-len bytes otherwise.
    #[arg(long)]
    payload_file: Option<PathBuf>,
    #[arg(long, default_value_t = frame::MIN_FRAME_BYTES)]
    payload_len: u32,
    #[arg(long, default_value_t = 1)]
    seed: u8,
    #[arg(long)]
    out: PathBuf,
}

/// Bad user input; reported with exit code 2.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid<E: std::fmt::Display>(e: E) -> anyhow::Error {
    Invalid(e.to_string()).into()
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Main output to `out` and the summary to stdout, or both to stdout /
/// stderr when there is no output file.
fn emit_with_summary(out: Option<&Path>, body: &str, summary: &str) -> anyhow::Result<()> {
    emit(out, body)?;
    if out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(())
}

fn budget(args: &BudgetArgs) -> anyhow::Result<()> {
    let profile: UseCaseProfile = args.profile.parse().map_err(invalid)?;
    let channel = channel_plan::channel_by_id(args.channel).map_err(invalid)?;
    let link = profile.link(channel, profile.mcs(), args.distance);
    link.validate().map_err(invalid)?;
    let choice: McsChoice = args.mcs.parse().map_err(invalid)?;
    let mcs = match choice {
        McsChoice::Fixed(m) => m,
        McsChoice::Auto => match phy::best_mcs(&link) {
            Ok(m) => m,
            // Show the profile's own MCS failing.
            Err(_) => profile.mcs(),
        },
    };
    let b = phy::budget(&link.with_mcs(mcs));
    println!("profile            {:>9}", profile.use_case);
    println!("channel            {:>9}", channel.id());
    println!("bandwidth_ghz      {:>9.2}", channel.bandwidth_ghz());
    println!("mcs                {:>9}", mcs);
    println!("distance_m         {:>9.3}", args.distance);
    println!("{b}");
    Ok(())
}

fn range(args: &RangeArgs) -> anyhow::Result<()> {
    let profiles = match &args.profile {
        Some(p) => vec![p.parse::<UseCaseProfile>().map_err(invalid)?],
        None => UseCase::ALL
            .iter()
            .map(|&u| UseCaseProfile::new(u))
            .collect(),
    };
    let fig = scenario::run_range_figure(&profiles).map_err(invalid)?;
    emit_with_summary(args.out.as_deref(), &fig.csv(), &fig.summary())
}

fn mac_run(path: &Path, seed: Option<u64>, out: Option<PathBuf>) -> anyhow::Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut sc = Scenario::parse(&text).map_err(invalid)?;
    if let Some(s) = seed {
        sc.seed = s;
    }
    let trace = sc.run_mac().map_err(invalid)?;
    let out = out.or(sc.output.clone());
    emit_with_summary(out.as_deref(), &trace.csv(), &trace.summary())
}

fn kiosk(args: &KioskArgs) -> anyhow::Result<()> {
    let report = scenario::run_kiosk_download_demo(args.bytes, args.seed).map_err(invalid)?;
    if let Some(p) = &args.out {
        emit(Some(p), &report.trace.csv())?;
    }
    print!("{}", report.report());
    Ok(())
}

fn encode(args: &EncodeArgs) -> anyhow::Result<()> {
    let mcs: Mcs = args.mcs.parse().map_err(invalid)?;
    let frame_type: FrameType = args.frame_type.parse().map_err(invalid)?;
    let ack_policy: AckPolicy = args.ack.parse().map_err(invalid)?;
    let payload = match &args.payload_file {
        Some(p) => fs::read(p).with_context(|| format!("reading {}", p.display()))?,
        None => frame::pattern_payload(args.payload_len as usize, args.seed),
    };
    let header = MacHeader {
        frame_type,
        ack_policy,
        pairnet_id: args.pairnet,
        src_id: args.src,
        dest_id: args.dest,
        seq_num: args.seq,
    };
    let f = Frame::new(mcs, header, payload);
    let bytes = frame::encode_frame_bytes(&f).map_err(invalid)?;
    fs::write(&args.out, &bytes).with_context(|| format!("writing {}", args.out.display()))?;
    println!("bits,{}", frame::encode_frame(&f).map_err(invalid)?.len());
    println!("bytes,{}", bytes.len());
    println!("hcs,{:#06x}", f.hcs());
    Ok(())
}

fn decode(input: &Path, mode: &str, payload_out: Option<&Path>) -> anyhow::Result<()> {
    let mode: PhyMode = mode.parse().map_err(invalid)?;
    let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let d = frame::decode_frame_bytes(&bytes, mode).map_err(invalid)?;
    let f = &d.frame;
    let h = &f.mac_header;
    println!("preamble,{}", f.preamble);
    println!("mcs,{}", f.phy_header.mcs);
    println!("frame_length_bytes,{}", f.phy_header.frame_length_bytes);
    println!("frame_type,{}", h.frame_type);
    println!("ack_policy,{}", h.ack_policy);
    println!("pairnet_id,{:#06x}", h.pairnet_id);
    println!("src_id,{}", h.src_id);
    println!("dest_id,{}", h.dest_id);
    println!("seq_num,{}", h.seq_num);
    println!("hcs,{:#06x}", f.hcs());
    println!("corrected_bits,{}", d.corrected_bits);
    if let Some(p) = payload_out {
        fs::write(p, &f.payload).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Plan {
            action: PlanAction::Dump(o),
        } => emit(o.out.as_deref(), &channel_plan::plan_csv()),
        Command::Rates(o) => emit(o.out.as_deref(), &scenario::run_rate_table()),
        Command::Budget(a) => budget(&a),
        Command::Range(a) => range(&a),
        Command::Mac {
            action:
                MacAction::Run {
                    scenario,
                    seed,
                    out,
                },
        } => mac_run(&scenario, seed, out),
        Command::KioskDemo(a) => kiosk(&a),
        Command::Codec { action } => match action {
            CodecAction::Encode(a) => encode(&a),
            CodecAction::Decode {
                input,
                mode,
                payload_out,
            } => decode(&input, &mode, payload_out.as_deref()),
            CodecAction::Vectors(o) => emit(o.out.as_deref(), &scenario::codec_vectors_csv()),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Invalid>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
