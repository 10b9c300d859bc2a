use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dpnfdm::acceptance::{self, Scale};
use dpnfdm::{emit_report, init_threads, run_scenario, Format, Mode, ScenarioConfig};
use dpnfdm_core::fiber::normalization_from_link;
use dpnfdm_core::transceiver::{bandwidth_99, build_frame, papr_db, random_symbols, watts_to_dbm, FrameLayout};
use dpnfdm_core::FiberParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "dpnfdm", version, about = "DP-NFDM link simulation and NFT toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// Payload symbols per sweep point.
    #[arg(long, default_value_t = 10_000)]
    symbols: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory for the report and constellation dumps.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Start from this scenario file; the flags above override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the acceptance properties; exits nonzero on any failure.
    Selftest {
        /// Smaller symbol counts (about a minute on one core).
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Back-to-back OSNR sweep.
    B2b {
        /// OSNR values in dB, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        osnr_list: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Transmission sweep over span counts.
    Transmit {
        /// Span counts, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        spans: Vec<usize>,
        #[arg(long, default_value_t = 41.5)]
        span_km: f64,
        /// Amplifier noise figure in dB.
        #[arg(long)]
        nf: Option<f64>,
        /// Disable amplifier noise.
        #[arg(long)]
        no_ase: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run a scenario file.
    Run {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Print a scenario file with the default settings.
    DefaultConfig {
        #[arg(long, value_enum, default_value_t = ModeArg::Transmission)]
        mode: ModeArg,
    },
    /// Write a frame waveform as CSV: t, q1 re/im, q2 re/im in seconds and
    /// sqrt(W).
    Genframe {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 16)]
        symbols: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Span length used for the launch power normalization.
        #[arg(long, default_value_t = 41.5)]
        span_km: f64,
        #[arg(long, default_value_t = 0)]
        training: usize,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    BackToBack,
    Transmission,
    RoundTripSelfTest,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::BackToBack => Mode::BackToBack,
            ModeArg::Transmission => Mode::Transmission,
            ModeArg::RoundTripSelfTest => Mode::RoundTripSelfTest,
        }
    }
}

fn base_config(common: &Common, mode: Mode, sweep: Vec<f64>) -> dpnfdm::Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::new(mode, sweep.clone(), common.symbols),
    };
    cfg.mode = mode;
    cfg.sweep = sweep;
    cfg.n_symbols = common.symbols;
    cfg.seed = common.seed;
    cfg.output_dir = common.out.clone();
    Ok(cfg)
}

fn execute(cfg: &ScenarioConfig, format: Format) -> dpnfdm::Result<()> {
    let report = run_scenario(cfg)?;
    print!("{}", dpnfdm::report::report_csv(&report));
    if let Some(rt) = &report.round_trip {
        println!(
            "round trip: {} symbols, max |dl| {:.2e}, max b rel {:.2e}, passed {}",
            rt.n_symbols, rt.max_lambda_error, rt.max_b_relative_error, rt.passed
        );
    }
    for path in emit_report(&report, format, &cfg.output_dir)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn genframe(out: &PathBuf, symbols: usize, seed: u64, span_km: f64, training: usize) -> dpnfdm::Result<()> {
    let fiber = FiberParams::default().with_spans(span_km, 1);
    let np = normalization_from_link(47e-12, &fiber, true)?;
    let layout = FrameLayout { n_training: training, ..Default::default() };
    let syms = random_symbols(symbols, &layout.constellation, &mut ChaCha8Rng::seed_from_u64(seed));
    let frame = build_frame(&syms, &layout, &np)?;
    let sig = &frame.signal;
    let mut text = String::from("t,q1_re,q1_im,q2_re,q2_im\n");
    for (k, (a, b)) in sig.q1.iter().zip(&sig.q2).enumerate() {
        text.push_str(&format!("{},{},{},{},{}\n", sig.grid.time(k), a.re, a.im, b.re, b.im));
    }
    std::fs::write(out, text).map_err(|e| dpnfdm::CliError::io(out, e))?;
    println!(
        "{} slots, {} samples, Ptx {:.2} dBm, PAPR {:.2} dB, bw99 {:.3} GHz -> {}",
        frame.n_slots(),
        sig.len(),
        watts_to_dbm(frame.p_tx()),
        papr_db(sig)?,
        bandwidth_99(sig)? * 1e-9,
        out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    let result = match cli.command {
        Command::Selftest { quick, seed } => {
            let scale = if quick { Scale::quick() } else { Scale::full() };
            let outcomes = acceptance::run_all(scale, seed);
            for o in &outcomes {
                println!("{o}");
            }
            if outcomes.iter().all(|o| o.passed) {
                Ok(())
            } else {
                return ExitCode::FAILURE;
            }
        }
        Command::B2b { osnr_list, common } => {
            base_config(&common, Mode::BackToBack, osnr_list).and_then(|cfg| execute(&cfg, common.format))
        }
        Command::Transmit { spans, span_km, nf, no_ase, common } => {
            let sweep = spans.iter().map(|&s| s as f64).collect();
            base_config(&common, Mode::Transmission, sweep).and_then(|mut cfg| {
                cfg.fiber.span_length = span_km;
                if let Some(nf) = nf {
                    cfg.fiber.noise_figure_db = nf;
                }
                if no_ase {
                    cfg.ase_enabled = false;
                }
                execute(&cfg, common.format)
            })
        }
        Command::Run { config, format } => ScenarioConfig::load(&config).and_then(|cfg| execute(&cfg, format)),
        Command::DefaultConfig { mode } => {
            let sweep = match mode {
                ModeArg::BackToBack => vec![8.0, 10.0, 12.0, 14.0, 16.0],
                ModeArg::Transmission => vec![1.0, 3.0, 5.0, 7.0, 9.0],
                ModeArg::RoundTripSelfTest => vec![0.0],
            };
            ScenarioConfig::new(mode.into(), sweep, 10_000)
                .to_toml()
                .map(|t| print!("{t}"))
        }
        Command::Genframe { out, symbols, seed, span_km, training } => genframe(&out, symbols, seed, span_km, training),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
