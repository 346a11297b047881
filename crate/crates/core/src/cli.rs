//! Command-line front-end: SNR sweeps for both scenarios, figure/table
//! presets, and plot-ready CSV output.
//!
//! Exit codes: 0 success, 2 invalid parameters (message on stderr),
//! 3 I/O failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::channel::{exp_decay_channel, InterfererConfig, MultipathChannel, Tap};
use crate::montecarlo::{simulate_interference, simulate_mpc, sigma2_from_snr_db, Detector,
    SerPoint, SimConfig};
use crate::ser_interference::{phi_extremes, ser_interference, ser_interference_reduced};
use crate::ser_mpc::{ser_mpc_coherent, ser_mpc_noncoherent, snr_at_target_ser};
use crate::special_fn::{gauss_hermite, GaussHermiteRule};
use crate::waveform::LoRaParams;

/// SNR grid in dB, parsed from `start:stop:step`.
#[derive(Clone, Copy, Debug)]
pub struct SnrGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SnrGrid {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| round6(self.start + i as f64 * self.step)).collect()
    }
}

/// Round to 1e-6 so grid arithmetic prints cleanly.
fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

impl FromStr for SnrGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:step, got {s:?}"));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|t| t.parse::<f64>().map_err(|_| format!("bad number {t:?}")))
            .collect::<Result<_, _>>()?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if step <= 0.0 {
            return Err(format!("step must be positive, got {step}"));
        }
        if start >= stop {
            return Err(format!("start {start} must be below stop {stop}"));
        }
        Ok(SnrGrid { start, stop, step })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Theory,
    Sim,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DetectorArg {
    Noncoherent,
    Coherent,
}

impl From<DetectorArg> for Detector {
    fn from(d: DetectorArg) -> Detector {
        match d {
            DetectorArg::Noncoherent => Detector::NonCoherent,
            DetectorArg::Coherent => Detector::Coherent,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PresetName {
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Fig10,
    Fig11,
    Table1,
}

#[derive(Parser, Debug)]
#[command(
    name = "lora-phy-lab",
    about = "LoRa physical-layer SER curves: semi-analytical theory and Monte Carlo simulation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// SER sweep over a multipath channel.
    Mpc(MpcArgs),
    /// SER sweep with one same-SF LoRa interferer.
    Interference(InterfArgs),
    /// Reproduce a canned experiment grid.
    Preset(PresetArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Spreading factor (7..=12).
    #[arg(long)]
    sf: u32,
    /// SNR grid in dB as start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    snr: SnrGrid,
    #[arg(long, value_enum, default_value = "theory")]
    mode: Mode,
    #[arg(long, value_enum, default_value = "noncoherent")]
    detector: DetectorArg,
    /// Monte Carlo trials per SNR point.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gauss-Hermite points per axis for the analytic curves.
    #[arg(long, default_value_t = 15)]
    gh_points: usize,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MpcArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Channel taps as delay:gain_re[:gain_im] joined by commas,
    /// e.g. "0:1,1:0.7". Defaults to the one-path channel.
    #[arg(long)]
    taps: Option<String>,
    /// Exponential-decay channel parameter (taps rho^i until rho^K <= 0.2).
    #[arg(long)]
    rho: Option<f64>,
    /// Channel description file (lines `delay gain_re gain_im`).
    #[arg(long)]
    channel_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InterfArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Interferer delay in samples (0..M).
    #[arg(long)]
    tau: usize,
    /// Signal-to-interference ratio in dB.
    #[arg(long, allow_hyphen_values = true)]
    sir_db: f64,
    /// Interferer phase offset in radians.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    phi: f64,
}

#[derive(Args, Debug)]
struct PresetArgs {
    #[arg(value_enum)]
    name: PresetName,
    /// Spreading factor override where the preset allows one.
    #[arg(long)]
    sf: Option<u32>,
    /// SIR override for the interference presets.
    #[arg(long, allow_hyphen_values = true)]
    sir_db: Option<f64>,
    /// SNR grid override.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<SnrGrid>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 15)]
    gh_points: usize,
    /// Directory receiving one CSV file per curve.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Spec(String),
    Io(String),
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Spec(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Parse and run the process command line; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Command::Mpc(args) => run_mpc(args),
        Command::Interference(args) => run_interference(args),
        Command::Preset(args) => run_preset(args),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Spec(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Io(msg)) => {
            eprintln!("I/O error: {msg}");
            3
        }
    }
}

fn params(common: &CommonArgs) -> Result<LoRaParams, CliError> {
    Ok(LoRaParams::new(common.sf)?)
}

fn rule(gh_points: usize) -> Result<GaussHermiteRule, CliError> {
    Ok(gauss_hermite(gh_points)?)
}

fn parse_taps(spec: &str, p: LoRaParams) -> Result<MultipathChannel, CliError> {
    let mut taps = Vec::new();
    for part in spec.split(',') {
        let fields: Vec<&str> = part.trim().split(':').collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(CliError::Spec(format!(
                "tap {part:?}: expected delay:gain_re[:gain_im]"
            )));
        }
        let delay: usize = fields[0]
            .parse()
            .map_err(|_| CliError::Spec(format!("tap {part:?}: bad delay")))?;
        let re: f64 = fields[1]
            .parse()
            .map_err(|_| CliError::Spec(format!("tap {part:?}: bad gain")))?;
        let im: f64 = if fields.len() == 3 {
            fields[2]
                .parse()
                .map_err(|_| CliError::Spec(format!("tap {part:?}: bad gain")))?
        } else {
            0.0
        };
        taps.push(Tap {
            delay,
            gain: Complex64::new(re, im),
        });
    }
    Ok(MultipathChannel::new(taps, p)?)
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn theory_row(snr_db: f64, ser: f64, tail: &str) -> String {
    format!("{},{},theory,{tail},,,\n", fmt_num(snr_db), fmt_num(ser))
}

fn sim_row(pt: &SerPoint, tail: &str) -> String {
    format!(
        "{},{},sim,{tail},{},{},{}\n",
        fmt_num(pt.snr_db),
        fmt_num(pt.ser),
        pt.errors,
        pt.trials,
        fmt_num(pt.ci95_halfwidth)
    )
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn run_mpc(args: MpcArgs) -> Result<(), CliError> {
    let p = params(&args.common)?;
    let sources = [&args.taps.is_some(), &args.rho.is_some(), &args.channel_file.is_some()];
    if sources.iter().filter(|s| ***s).count() > 1 {
        return Err(CliError::Spec(
            "choose only one of --taps, --rho, --channel-file".into(),
        ));
    }
    let (ch, label) = if let Some(rho) = args.rho {
        (exp_decay_channel(rho, p)?, format!("rho={rho}"))
    } else if let Some(path) = &args.channel_file {
        let text = std::fs::read_to_string(path)?;
        (
            MultipathChannel::parse(&text, p)?,
            format!("file={}", path.display()),
        )
    } else {
        let spec = args.taps.as_deref().unwrap_or("0:1");
        (parse_taps(spec, p)?, format!("taps={}", spec.replace(',', ";")))
    };
    let gh = rule(args.common.gh_points)?;
    let grid = args.common.snr.values();
    let detector: Detector = args.common.detector.into();

    let mut csv = String::from(
        "snr_db,ser,source,detector,sf,channel,errors,trials,ci95_halfwidth\n",
    );
    let tail = |snr: f64, ser: f64| {
        theory_row(
            snr,
            ser,
            &format!("{:?},{},{label}", args.common.detector, p.sf()),
        )
    };
    if matches!(args.common.mode, Mode::Theory | Mode::Both) {
        for &snr in &grid {
            let sigma2 = sigma2_from_snr_db(snr);
            let ser = match detector {
                Detector::NonCoherent => ser_mpc_noncoherent(&ch, sigma2, p, &gh),
                Detector::Coherent => ser_mpc_coherent(&ch, sigma2, p, &gh),
            };
            csv.push_str(&tail(snr, ser));
        }
    }
    if matches!(args.common.mode, Mode::Sim | Mode::Both) {
        let cfg = SimConfig {
            trials: args.common.trials,
            seed: args.common.seed,
            detector,
            warmup: true,
            target_errors: None,
        };
        for pt in simulate_mpc(&ch, &grid, &cfg, p) {
            csv.push_str(&sim_row(
                &pt,
                &format!("{:?},{},{label}", args.common.detector, p.sf()),
            ));
        }
    }
    emit(args.common.out.as_deref(), &csv)
}

fn interference_theory_point(
    cfg: &InterfererConfig,
    sigma2: f64,
    p: LoRaParams,
    gh: &GaussHermiteRule,
) -> f64 {
    if cfg.tau > 0 && cfg.tau % 2 == 0 {
        ser_interference_reduced(cfg, sigma2, p, gh).expect("even non-zero tau")
    } else {
        ser_interference(cfg, sigma2, p, gh)
    }
}

fn run_interference(args: InterfArgs) -> Result<(), CliError> {
    let p = params(&args.common)?;
    if args.common.detector == DetectorArg::Coherent
        && matches!(args.common.mode, Mode::Theory | Mode::Both)
    {
        return Err(CliError::Spec(
            "analytic interference curves cover the non-coherent detector only".into(),
        ));
    }
    let cfg_i = InterfererConfig::from_sir_db(args.tau, args.sir_db, args.phi, p)?;
    let gh = rule(args.common.gh_points)?;
    let grid = args.common.snr.values();
    let tail = format!(
        "{:?},{},{},{},{}",
        args.common.detector,
        p.sf(),
        args.tau,
        fmt_num(args.sir_db),
        fmt_num(args.phi)
    );

    let mut csv = String::from(
        "snr_db,ser,source,detector,sf,tau,sir_db,phi,errors,trials,ci95_halfwidth\n",
    );
    if matches!(args.common.mode, Mode::Theory | Mode::Both) {
        for &snr in &grid {
            let ser = interference_theory_point(&cfg_i, sigma2_from_snr_db(snr), p, &gh);
            csv.push_str(&theory_row(snr, ser, &tail));
        }
    }
    if matches!(args.common.mode, Mode::Sim | Mode::Both) {
        let cfg = SimConfig {
            trials: args.common.trials,
            seed: args.common.seed,
            detector: args.common.detector.into(),
            warmup: true,
            target_errors: None,
        };
        for pt in simulate_interference(&cfg_i, &grid, &cfg, p) {
            csv.push_str(&sim_row(&pt, &tail));
        }
    }
    emit(args.common.out.as_deref(), &csv)
}

fn write_curve(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, content)?;
    println!("{}", path.display());
    Ok(())
}

fn mpc_theory_csv(
    ch: &MultipathChannel,
    grid: &[f64],
    detector: DetectorArg,
    p: LoRaParams,
    gh: &GaussHermiteRule,
    label: &str,
) -> String {
    let mut csv = String::from(
        "snr_db,ser,source,detector,sf,channel,errors,trials,ci95_halfwidth\n",
    );
    for &snr in grid {
        let sigma2 = sigma2_from_snr_db(snr);
        let ser = match detector {
            DetectorArg::Noncoherent => ser_mpc_noncoherent(ch, sigma2, p, gh),
            DetectorArg::Coherent => ser_mpc_coherent(ch, sigma2, p, gh),
        };
        csv.push_str(&theory_row(
            snr,
            ser,
            &format!("{detector:?},{},{label}", p.sf()),
        ));
    }
    csv
}

fn run_preset(args: PresetArgs) -> Result<(), CliError> {
    match args.name {
        PresetName::Fig6 => preset_fig6(&args),
        PresetName::Fig7 => preset_fig7(&args),
        PresetName::Fig8 => preset_fig8(&args),
        PresetName::Fig9 => preset_fig9(&args),
        PresetName::Fig10 => preset_fig10(&args),
        PresetName::Fig11 => preset_fig11(&args),
        PresetName::Table1 => preset_table1(&args),
    }
}

/// Theory + simulation over the two-path channel, both detectors,
/// alpha1 in {0.7, 0.9} and k1 in {1, 10}.
fn preset_fig6(args: &PresetArgs) -> Result<(), CliError> {
    let p = LoRaParams::new(args.sf.unwrap_or(7))?;
    let gh = rule(args.gh_points)?;
    let grid = args
        .snr
        .unwrap_or(SnrGrid {
            start: -20.0,
            stop: 0.0,
            step: 1.0,
        })
        .values();
    for k1 in [1usize, 10] {
        for alpha in [0.7f64, 0.9] {
            let ch = MultipathChannel::two_path(Complex64::new(alpha, 0.0), k1, p)?;
            let label = format!("taps=0:1;{k1}:{alpha}");
            for detector in [DetectorArg::Noncoherent, DetectorArg::Coherent] {
                let mut csv = mpc_theory_csv(&ch, &grid, detector, p, &gh, &label);
                let cfg = SimConfig {
                    trials: args.trials,
                    seed: args.seed,
                    detector: detector.into(),
                    warmup: true,
                    target_errors: None,
                };
                for pt in simulate_mpc(&ch, &grid, &cfg, p) {
                    csv.push_str(&sim_row(
                        &pt,
                        &format!("{detector:?},{},{label}", p.sf()),
                    ));
                }
                let det = match detector {
                    DetectorArg::Noncoherent => "noncoherent",
                    DetectorArg::Coherent => "coherent",
                };
                write_curve(
                    &args.out_dir,
                    &format!("fig6_sf{}_k1-{k1}_alpha-{alpha}_{det}.csv", p.sf()),
                    &csv,
                )?;
            }
        }
    }
    Ok(())
}

/// Theory-only two-path grid: alpha1 in {0..0.9}, k1 in {1..11}, SF 7.
fn preset_fig7(args: &PresetArgs) -> Result<(), CliError> {
    let p = LoRaParams::new(args.sf.unwrap_or(7))?;
    let gh = rule(args.gh_points)?;
    let grid = args
        .snr
        .unwrap_or(SnrGrid {
            start: -20.0,
            stop: 0.0,
            step: 0.5,
        })
        .values();
    for alpha in [0.0f64, 0.2, 0.4, 0.6, 0.8, 0.9] {
        for k1 in [1usize, 3, 5, 7, 9, 11] {
            let (ch, label) = if alpha == 0.0 {
                (one_path(p)?, "taps=0:1".to_string())
            } else {
                (
                    MultipathChannel::two_path(Complex64::new(alpha, 0.0), k1, p)?,
                    format!("taps=0:1;{k1}:{alpha}"),
                )
            };
            let csv = mpc_theory_csv(&ch, &grid, DetectorArg::Noncoherent, p, &gh, &label);
            write_curve(
                &args.out_dir,
                &format!("fig7_sf{}_alpha-{alpha}_k1-{k1}.csv", p.sf()),
                &csv,
            )?;
            if alpha == 0.0 {
                break; // one-path curve does not depend on k1
            }
        }
    }
    Ok(())
}

fn one_path(p: LoRaParams) -> Result<MultipathChannel, crate::Error> {
    MultipathChannel::new(
        vec![Tap {
            delay: 0,
            gain: Complex64::new(1.0, 0.0),
        }],
        p,
    )
}

/// Theory-only SF sweep: SF in {7..10}, k1 = 1, alpha1 in {0, 0.4, 0.8}.
fn preset_fig8(args: &PresetArgs) -> Result<(), CliError> {
    let gh = rule(args.gh_points)?;
    let grid = args
        .snr
        .unwrap_or(SnrGrid {
            start: -26.0,
            stop: 2.0,
            step: 0.5,
        })
        .values();
    for sf in 7..=10u32 {
        let p = LoRaParams::new(sf)?;
        for alpha in [0.0f64, 0.4, 0.8] {
            let (ch, label) = if alpha == 0.0 {
                (one_path(p)?, "taps=0:1".to_string())
            } else {
                (
                    MultipathChannel::two_path(Complex64::new(alpha, 0.0), 1, p)?,
                    format!("taps=0:1;1:{alpha}"),
                )
            };
            let csv = mpc_theory_csv(&ch, &grid, DetectorArg::Noncoherent, p, &gh, &label);
            write_curve(&args.out_dir, &format!("fig8_sf{sf}_alpha-{alpha}.csv"), &csv)?;
        }
    }
    Ok(())
}

/// Theory-only two-path (C1) versus exponential-decay (C2) comparison.
fn preset_fig9(args: &PresetArgs) -> Result<(), CliError> {
    let gh = rule(args.gh_points)?;
    let grid = args
        .snr
        .unwrap_or(SnrGrid {
            start: -26.0,
            stop: 2.0,
            step: 0.5,
        })
        .values();
    for sf in [7u32, 10] {
        let p = LoRaParams::new(sf)?;
        for rho in [0.7f64, 0.8] {
            let c1 = MultipathChannel::two_path(Complex64::new(rho, 0.0), 1, p)?;
            let csv = mpc_theory_csv(
                &c1,
                &grid,
                DetectorArg::Noncoherent,
                p,
                &gh,
                &format!("taps=0:1;1:{rho}"),
            );
            write_curve(&args.out_dir, &format!("fig9_sf{sf}_c1_rho-{rho}.csv"), &csv)?;
            let c2 = exp_decay_channel(rho, p)?;
            let csv = mpc_theory_csv(
                &c2,
                &grid,
                DetectorArg::Noncoherent,
                p,
                &gh,
                &format!("rho={rho}"),
            );
            write_curve(&args.out_dir, &format!("fig9_sf{sf}_c2_rho-{rho}.csv"), &csv)?;
        }
    }
    Ok(())
}

/// Theory tau sweep at fixed SIR: even tau on the 2^(SF-5) step grid, both
/// extreme phases, a few SNR values per point.
fn preset_fig10(args: &PresetArgs) -> Result<(), CliError> {
    let p = LoRaParams::new(args.sf.unwrap_or(8))?;
    let sir_db = args.sir_db.unwrap_or(3.0);
    let gh = rule(args.gh_points)?;
    let m = p.m();
    let tau_step = 1usize << (p.sf() - 5);
    let snrs = args
        .snr
        .unwrap_or(SnrGrid {
            start: -14.0,
            stop: -8.0,
            step: 2.0,
        })
        .values();
    for phase_kind in ["phimin", "phimax"] {
        let mut csv = String::from(
            "snr_db,ser,source,detector,sf,tau,sir_db,phi,errors,trials,ci95_halfwidth\n",
        );
        for &snr in &snrs {
            let sigma2 = sigma2_from_snr_db(snr);
            for i in 0..(m / tau_step) {
                let tau = i * tau_step;
                let phi = if tau == 0 {
                    0.0 // the phase folds directly into the interferer gain
                } else {
                    let (pmin, pmax) = phi_extremes(tau, p)?;
                    if phase_kind == "phimin" {
                        pmin
                    } else {
                        pmax
                    }
                };
                let cfg = InterfererConfig::from_sir_db(tau, sir_db, phi, p)?;
                let ser = interference_theory_point(&cfg, sigma2, p, &gh);
                csv.push_str(&theory_row(
                    snr,
                    ser,
                    &format!(
                        "Noncoherent,{},{tau},{},{}",
                        p.sf(),
                        fmt_num(sir_db),
                        fmt_num(phi)
                    ),
                ));
            }
        }
        write_curve(
            &args.out_dir,
            &format!("fig10_sf{}_sir-{}_{phase_kind}.csv", p.sf(), sir_db),
            &csv,
        )?;
    }
    Ok(())
}

/// Theory BER bounds (BER taken as SER/2, an approximation) at the worst and
/// best delays tau = 1 and tau = M/2 - 1, SIR 6 dB, SF in {7, 8, 9}.
fn preset_fig11(args: &PresetArgs) -> Result<(), CliError> {
    let sir_db = args.sir_db.unwrap_or(6.0);
    let gh = rule(args.gh_points)?;
    for sf in [7u32, 8, 9] {
        let p = LoRaParams::new(sf)?;
        let grid = args
            .snr
            .unwrap_or(SnrGrid {
                start: -22.0,
                stop: 0.0,
                step: 1.0,
            })
            .values();
        for tau in [1usize, p.m() / 2 - 1] {
            let cfg = InterfererConfig::from_sir_db(tau, sir_db, 0.0, p)?;
            let mut csv = String::from(
                "snr_db,ser,ber_approx,source,detector,sf,tau,sir_db,phi\n",
            );
            for &snr in &grid {
                let ser = interference_theory_point(&cfg, sigma2_from_snr_db(snr), p, &gh);
                let _ = writeln!(
                    csv,
                    "{},{},{},theory,Noncoherent,{sf},{tau},{},0",
                    fmt_num(snr),
                    fmt_num(ser),
                    fmt_num(ser / 2.0),
                    fmt_num(sir_db)
                );
            }
            write_curve(&args.out_dir, &format!("fig11_sf{sf}_tau-{tau}.csv"), &csv)?;
        }
    }
    Ok(())
}

/// SNR losses at SER = 1e-8 between consecutive alpha1 values on the
/// two-path channel with k1 = 1.
fn preset_table1(args: &PresetArgs) -> Result<(), CliError> {
    let p = LoRaParams::new(args.sf.unwrap_or(7))?;
    let gh = rule(args.gh_points)?;
    let alphas = [0.0f64, 0.4, 0.5, 0.6, 0.7, 0.8];
    let shift = 3.5 * (p.sf() as f64 - 7.0);
    let grid = args
        .snr
        .unwrap_or(SnrGrid {
            start: -7.0 - shift,
            stop: 14.0 - shift,
            step: 0.1,
        })
        .values();
    let thresholds: Vec<f64> = alphas
        .iter()
        .map(|&alpha| {
            let ch = if alpha == 0.0 {
                one_path(p)?
            } else {
                MultipathChannel::two_path(Complex64::new(alpha, 0.0), 1, p)?
            };
            let curve: Vec<(f64, f64)> = grid
                .iter()
                .map(|&snr| (snr, ser_mpc_noncoherent(&ch, sigma2_from_snr_db(snr), p, &gh)))
                .collect();
            snr_at_target_ser(&curve, 1e-8).ok_or_else(|| {
                CliError::Spec(format!(
                    "SER 1e-8 not bracketed by the SNR grid for alpha1 = {alpha}"
                ))
            })
        })
        .collect::<Result<_, _>>()?;
    let mut csv = String::from("sf,delta,alpha_from,alpha_to,loss_db\n");
    let mut cumulative = 0.0;
    for i in 1..alphas.len() {
        let loss = thresholds[i] - thresholds[i - 1];
        cumulative += loss;
        println!(
            "delta_{i} (alpha1 {} -> {}): {:.2} dB",
            alphas[i - 1],
            alphas[i],
            loss
        );
        let _ = writeln!(
            csv,
            "{},{i},{},{},{}",
            p.sf(),
            alphas[i - 1],
            alphas[i],
            fmt_num((loss * 100.0).round() / 100.0)
        );
    }
    println!("cumulative (alpha1 0 -> 0.8): {cumulative:.2} dB");
    let _ = writeln!(
        csv,
        "{},cumulative,0,0.8,{}",
        p.sf(),
        fmt_num((cumulative * 100.0).round() / 100.0)
    );
    write_curve(&args.out_dir, &format!("table1_sf{}.csv", p.sf()), &csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_grid_parses_and_counts() {
        let g: SnrGrid = "-20:-5:0.5".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 31);
        assert_eq!(v[0], -20.0);
        assert_eq!(*v.last().unwrap(), -5.0);
        assert!("5:-5:1".parse::<SnrGrid>().is_err());
        assert!("-5:5:0".parse::<SnrGrid>().is_err());
        assert!("-5:5".parse::<SnrGrid>().is_err());
        assert!("a:b:c".parse::<SnrGrid>().is_err());
    }

    #[test]
    fn grid_values_round_cleanly() {
        let g: SnrGrid = "-20:-19:0.1".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 11);
        assert_eq!(format!("{}", v[3]), "-19.7");
    }

    #[test]
    fn taps_parser() {
        let p = LoRaParams::new(7).unwrap();
        let ch = parse_taps("0:1,1:0.7", p).unwrap();
        assert_eq!(ch.taps().len(), 2);
        let ch = parse_taps("0:1:0, 6:0.5:-0.2", p).unwrap();
        assert_eq!(ch.taps()[1].gain, Complex64::new(0.5, -0.2));
        assert!(parse_taps("1:0.7", p).is_err()); // first delay must be 0
        assert!(parse_taps("0:1,x:2", p).is_err());
        assert!(parse_taps("0", p).is_err());
    }
}
