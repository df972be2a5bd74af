//! Command-line interface. `run` writes to any sink so tests can drive it
//! without spawning the binary.

use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tasklink_core::bch::BchCode;
use tasklink_core::bits::from_hex;
use tasklink_core::channel::{NoiseScope, SweepConfig, DEFAULT_SWEEP_BERS, DEFAULT_SWEEP_TRIALS, DEFAULT_SWEEP_TS};
use tasklink_core::executor::receive;
use tasklink_core::framing::{Bitstream, PACKET_HEX_DIGITS};

use crate::config::ConfigSource;
use crate::link::{breakdown, encode_packet, reception_report};
use crate::schedule::parse_schedule;
use crate::session::{Session, SessionConfig};
use crate::sim::{run_simulation, SimulationConfig};
use crate::spec::{command_from_pairs, parse_pattern};
use crate::sweep::{efficiency_table, run_sweep_parallel, sweep_summary_json, sweep_table};

/// Exit status for bad arguments or input, as clap uses.
pub const EXIT_USAGE: i32 = 2;
/// Exit status when a decoded packet is rejected.
pub const EXIT_REJECTED: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "tasklink", version, about = "Acoustic mission-command link and vehicle simulator")]
pub struct Cli {
    /// Configuration directory (defaults to $TASKLINK_CONFIG_DIR, then the built-in files).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a mission command and print the packet breakdown.
    Encode(EncodeArgs),
    /// Decode a received packet given as hex.
    Decode(DecodeArgs),
    /// Monte Carlo command success rate over BER and correction capability.
    Sweep(SweepArgs),
    /// Run the vehicle against a packet schedule.
    Simulate(SimulateArgs),
    /// Serve the live WebSocket session.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// straight, square, circle, lawnmower, spiral, helix, hover or box_orbit.
    pub pattern: String,
    #[arg(long)]
    pub speed: Option<String>,
    #[arg(long)]
    pub depth: Option<String>,
    #[arg(long)]
    pub start_depth: Option<String>,
    #[arg(long)]
    pub end_depth: Option<String>,
    #[arg(long)]
    pub duration: Option<String>,
    #[arg(long)]
    pub heading: Option<String>,
    #[arg(long)]
    pub side: Option<String>,
    #[arg(long)]
    pub width: Option<String>,
    #[arg(long)]
    pub height: Option<String>,
    #[arg(long)]
    pub radius: Option<String>,
    #[arg(long)]
    pub initial_radius: Option<String>,
    #[arg(long)]
    pub final_radius: Option<String>,
    #[arg(long)]
    pub laps: Option<String>,
    #[arg(long)]
    pub loops: Option<String>,
    #[arg(long)]
    pub turns: Option<String>,
    /// cw or ccw.
    #[arg(long)]
    pub dir: Option<String>,
    /// Print only the packet hex.
    #[arg(long)]
    pub hex: bool,
}

impl EncodeArgs {
    fn pairs(&self) -> Vec<(String, String)> {
        let fields = [
            ("speed", &self.speed),
            ("depth", &self.depth),
            ("start-depth", &self.start_depth),
            ("end-depth", &self.end_depth),
            ("duration", &self.duration),
            ("heading", &self.heading),
            ("side", &self.side),
            ("width", &self.width),
            ("height", &self.height),
            ("radius", &self.radius),
            ("initial-radius", &self.initial_radius),
            ("final-radius", &self.final_radius),
            ("laps", &self.laps),
            ("loops", &self.loops),
            ("turns", &self.turns),
            ("dir", &self.dir),
        ];
        fields.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v))).collect()
    }
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Packet as hex, 25 digits or longer (a longer stream is searched for sync).
    pub hex: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    /// Noise on every packet bit.
    Packet,
    /// Noise on the codeword only.
    Codeword,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = DEFAULT_SWEEP_TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Correction capabilities, comma separated.
    #[arg(long = "t", value_delimiter = ',', default_values_t = DEFAULT_SWEEP_TS)]
    pub t_values: Vec<usize>,
    /// Bit error rates, comma separated.
    #[arg(long = "ber", value_delimiter = ',', default_values_t = DEFAULT_SWEEP_BERS)]
    pub ber_values: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ScopeArg::Packet)]
    pub scope: ScopeArg,
    /// Directory for sweep.tsv, efficiency.tsv and sweep.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Schedule file; `-` reads stdin.
    #[arg(long)]
    pub schedule: PathBuf,
    #[arg(long, default_value = "cfg3")]
    pub vehicle: String,
    #[arg(long, default_value_t = 0.0)]
    pub ber: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Simulated seconds.
    #[arg(long, default_value_t = 120.0)]
    pub duration: f64,
    /// Directory for trajectory.tsv, commands.tsv and plans.tsv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,
    #[arg(long, default_value = "cfg3")]
    pub vehicle: String,
    #[arg(long, default_value_t = 0.0)]
    pub ber: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Simulated seconds per wall second; 0 runs unthrottled.
    #[arg(long, default_value_t = 1.0)]
    pub realtime: f64,
}

/// An error that should exit with [`EXIT_USAGE`].
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Run one command; returns the exit status.
pub fn run(cli: Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    let source = cli.config.map(ConfigSource::dir).unwrap_or_else(ConfigSource::from_env);
    match cli.command {
        Command::Encode(a) => encode(&source, &a, out),
        Command::Decode(a) => decode(&source, &a, out),
        Command::Sweep(a) => sweep(&a, out),
        Command::Simulate(a) => simulate(&source, &a, out),
        Command::Serve(a) => serve(&source, &a),
    }
}

fn encode(source: &ConfigSource, a: &EncodeArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let table = source.quant_table()?;
    let pattern = parse_pattern(&a.pattern).map_err(|e| usage(e.to_string()))?;
    let cmd = command_from_pairs(pattern, &a.pairs(), &table).map_err(|e| usage(e.to_string()))?;
    let enc = encode_packet(&cmd, &BchCode::link_default());
    if a.hex {
        writeln!(out, "{}", enc.packet.to_hex())?;
    } else {
        write!(out, "{}", breakdown(&enc, &table))?;
    }
    Ok(0)
}

/// Hex text to bits; at least one packet's worth of digits.
pub fn parse_hex_stream(text: &str) -> Result<Bitstream, UsageError> {
    let digits: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let n = digits.chars().count();
    if n < PACKET_HEX_DIGITS {
        return Err(UsageError(format!("expected at least {PACKET_HEX_DIGITS} hex digits, got {n}")));
    }
    from_hex(&digits, n * 4).map(Bitstream).map_err(|e| UsageError(e.to_string()))
}

fn decode(source: &ConfigSource, a: &DecodeArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let table = source.quant_table()?;
    let mission = source.mission()?;
    let bits = parse_hex_stream(&a.hex)?;
    let rx = receive(&BchCode::link_default(), &table, mission.sync, &bits);
    write!(out, "{}", reception_report(&rx, &table))?;
    Ok(if rx.disposition.accepted() { 0 } else { EXIT_REJECTED })
}

fn sweep(a: &SweepArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    if a.trials == 0 {
        return Err(usage("--trials must be positive"));
    }
    if let Some(b) = a.ber_values.iter().find(|b| !(0.0..=1.0).contains(*b)) {
        return Err(usage(format!("--ber {b} outside [0, 1]")));
    }
    let config = SweepConfig {
        t_values: a.t_values.clone(),
        ber_values: a.ber_values.clone(),
        trials: a.trials,
        seed: a.seed,
        scope: match a.scope {
            ScopeArg::Packet => NoiseScope::Packet,
            ScopeArg::Codeword => NoiseScope::CodewordOnly,
        },
        ..SweepConfig::default()
    };
    let result = run_sweep_parallel(&config).map_err(|e| usage(e.to_string()))?;
    let table = sweep_table(&result);
    let eff = efficiency_table(&result.efficiency);
    write!(out, "{table}\n{eff}")?;
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        std::fs::write(dir.join("sweep.tsv"), &table)?;
        std::fs::write(dir.join("efficiency.tsv"), &eff)?;
        std::fs::write(dir.join("sweep.json"), sweep_summary_json(&result))?;
    }
    Ok(0)
}

fn simulate(source: &ConfigSource, a: &SimulateArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let table = source.quant_table()?;
    let vehicle = source.vehicle(&a.vehicle)?;
    let mission = source.mission()?;
    if !(0.0..=1.0).contains(&a.ber) {
        return Err(usage(format!("--ber {} outside [0, 1]", a.ber)));
    }
    if !(a.duration.is_finite() && a.duration > 0.0) {
        return Err(usage("--duration must be positive"));
    }
    let text = if a.schedule.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())?
    } else {
        std::fs::read_to_string(&a.schedule).with_context(|| format!("reading {}", a.schedule.display()))?
    };
    let schedule = parse_schedule(&text, &table).map_err(|e| usage(e.to_string()))?;
    let cfg = SimulationConfig { vehicle, table, mission, ber: a.ber, seed: a.seed, duration: a.duration };
    let result = run_simulation(&cfg, &schedule);
    for ((t, d), p) in result.dispositions.iter().zip(&schedule) {
        writeln!(out, "t={t:.2}\t{d}\t{}", p.label)?;
    }
    let ex = &result.executor;
    let v = ex.vehicle();
    writeln!(out, "end t={:.2} phase={} x={:.3} y={:.3} z={:.3} yaw={:.1}°", ex.time(), ex.phase(), v.x, v.y, v.z, v.yaw.to_degrees())?;
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        std::fs::write(dir.join("trajectory.tsv"), result.trajectory_tsv())?;
        std::fs::write(dir.join("commands.tsv"), result.commands_tsv())?;
        std::fs::write(dir.join("plans.tsv"), result.plans_tsv())?;
    }
    Ok(0)
}

fn serve(source: &ConfigSource, a: &ServeArgs) -> anyhow::Result<i32> {
    let table = source.quant_table()?;
    let vehicle = source.vehicle(&a.vehicle)?;
    let mission = source.mission()?;
    let cfg = SessionConfig { vehicle_id: a.vehicle.clone(), ber: a.ber, seed: a.seed, realtime: a.realtime };
    let session = Session::new(cfg, vehicle, table, mission).map_err(usage)?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(crate::server::serve(a.bind, session))?;
    bail!("server exited")
}
