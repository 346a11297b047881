//! Seeded Monte Carlo SER estimation for both scenarios: per-trial symbol
//! windows through the channel (or interferer superposition), AWGN, DFT
//! detection, and binomial error statistics.
//!
//! Trials run in fixed-size batches whose RNG streams are derived from
//! (seed, SNR-point index, batch index), so results are identical no matter
//! how the batches are scheduled across threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::channel::{add_awgn_in_place, InterfererConfig, MultipathChannel};
use crate::waveform::{
    chirp_sample, demod_dft, detect_coherent, detect_noncoherent, ChirpFrame, LoRaParams, Symbol,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Detector {
    NonCoherent,
    Coherent,
}

/// Simulation budget and reproducibility knobs.
#[derive(Clone, Copy, Debug)]
pub struct SimConfig {
    /// Trial cap per SNR point.
    pub trials: u64,
    pub seed: u64,
    pub detector: Detector,
    /// Prime stream simulations with a random (uncounted) leading symbol so
    /// the first detection window sees realistic ISI.
    pub warmup: bool,
    /// Stop a point early once this many errors have accumulated (checked at
    /// batch-round boundaries, so the stopping set stays deterministic).
    pub target_errors: Option<u64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 0,
            detector: Detector::NonCoherent,
            warmup: true,
            target_errors: None,
        }
    }
}

/// One estimated point of an SER curve.
#[derive(Clone, Copy, Debug)]
pub struct SerPoint {
    pub snr_db: f64,
    pub ser: f64,
    pub errors: u64,
    pub trials: u64,
    pub ci95_halfwidth: f64,
}

impl SerPoint {
    fn from_counts(snr_db: f64, errors: u64, trials: u64) -> Self {
        let ser = errors as f64 / trials as f64;
        let ci95_halfwidth = 1.96 * (ser * (1.0 - ser) / trials as f64).sqrt();
        Self {
            snr_db,
            ser,
            errors,
            trials,
            ci95_halfwidth,
        }
    }
}

/// SNR is defined as 1/sigma^2, so sigma^2 = 10^(-SNR_dB/10).
pub fn sigma2_from_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

const BATCH: u64 = 4096;
const BATCHES_PER_ROUND: u64 = 16;

fn batch_rng(seed: u64, stream: u64, batch: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(&batch.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

/// Run batches of `run_batch(rng, trial_count) -> errors` until the trial cap
/// or the early-stop error target is reached.
fn run_point<F>(snr_db: f64, stream: u64, cfg: &SimConfig, run_batch: F) -> SerPoint
where
    F: Fn(&mut ChaCha12Rng, u64) -> u64 + Sync,
{
    assert!(cfg.trials >= 1, "at least one trial required");
    let mut errors = 0u64;
    let mut trials = 0u64;
    let mut batch = 0u64;
    while trials < cfg.trials {
        let round: Vec<(u64, u64)> = (0..BATCHES_PER_ROUND)
            .filter_map(|j| {
                let done = trials + j * BATCH;
                if done >= cfg.trials {
                    return None;
                }
                Some((batch + j, (cfg.trials - done).min(BATCH)))
            })
            .collect();
        let counts: Vec<(u64, u64)> = round
            .into_par_iter()
            .map(|(b, n)| {
                let mut rng = batch_rng(cfg.seed, stream, b);
                (run_batch(&mut rng, n), n)
            })
            .collect();
        for (e, n) in counts {
            errors += e;
            trials += n;
        }
        batch += BATCHES_PER_ROUND;
        if let Some(target) = cfg.target_errors {
            if errors >= target {
                break;
            }
        }
    }
    SerPoint::from_counts(snr_db, errors, trials)
}

fn detect(frame: &ChirpFrame, detector: Detector, p: LoRaParams) -> usize {
    let spec = demod_dft(frame, p).expect("window has M samples");
    match detector {
        Detector::NonCoherent => detect_noncoherent(&spec).value(),
        Detector::Coherent => detect_coherent(&spec).value(),
    }
}

/// Monte Carlo SER over an SNR grid for the multipath scenario: each trial
/// draws an independent (previous, current) symbol pair, passes the detection
/// window through the channel plus AWGN, and detects.
pub fn simulate_mpc(
    ch: &MultipathChannel,
    snr_grid: &[f64],
    cfg: &SimConfig,
    p: LoRaParams,
) -> Vec<SerPoint> {
    let m = p.m();
    snr_grid
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let sigma2 = sigma2_from_snr_db(snr_db);
            run_point(snr_db, i as u64, cfg, |rng, n| {
                let mut errs = 0u64;
                for _ in 0..n {
                    let a_prev = Symbol::new(rng.gen_range(0..m), p).expect("in range");
                    let a = Symbol::new(rng.gen_range(0..m), p).expect("in range");
                    let mut w =
                        crate::channel::received_window_mpc(a_prev, a, ch, None, p)
                            .expect("valid symbols");
                    add_awgn_in_place(&mut w.samples, sigma2, rng);
                    if detect(&w, cfg.detector, p) != a.value() {
                        errs += 1;
                    }
                }
                errs
            })
        })
        .collect()
}

/// Monte Carlo SER over an SNR grid with one same-SF interferer: each trial
/// draws (a1, a2_prev, a2) independently; the interferer phase stays fixed at
/// the configured value.
pub fn simulate_interference(
    cfg_i: &InterfererConfig,
    snr_grid: &[f64],
    cfg: &SimConfig,
    p: LoRaParams,
) -> Vec<SerPoint> {
    let m = p.m();
    snr_grid
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let sigma2 = sigma2_from_snr_db(snr_db);
            run_point(snr_db, i as u64, cfg, |rng, n| {
                let mut errs = 0u64;
                for _ in 0..n {
                    let a1 = Symbol::new(rng.gen_range(0..m), p).expect("in range");
                    let a2_prev = Symbol::new(rng.gen_range(0..m), p).expect("in range");
                    let a2 = Symbol::new(rng.gen_range(0..m), p).expect("in range");
                    let mut w = crate::channel::received_window_interference(
                        a1, a2_prev, a2, cfg_i, None, p,
                    )
                    .expect("valid symbols");
                    add_awgn_in_place(&mut w.samples, sigma2, rng);
                    if detect(&w, cfg.detector, p) != a1.value() {
                        errs += 1;
                    }
                }
                errs
            })
        })
        .collect()
}

/// Stream-level Monte Carlo: modulate `symbol_count` random symbols into one
/// contiguous waveform, apply the channel as a plain linear convolution, add
/// noise, and detect every symbol from its window. Cross-checks the windowed
/// ISI construction used by [`simulate_mpc`].
pub fn simulate_stream_mpc(
    symbol_count: usize,
    ch: &MultipathChannel,
    snr_db: f64,
    cfg: &SimConfig,
    p: LoRaParams,
) -> SerPoint {
    assert!(symbol_count >= 1);
    let m = p.m();
    let sigma2 = sigma2_from_snr_db(snr_db);
    let mut rng = batch_rng(cfg.seed, u64::MAX, 0);
    let lead = usize::from(cfg.warmup);
    let symbols: Vec<usize> = (0..symbol_count + lead)
        .map(|_| rng.gen_range(0..m))
        .collect();

    // Transmitted stream sample, zero before time origin.
    let tx = |k: i64| -> Complex64 {
        if k < 0 {
            return Complex64::new(0.0, 0.0);
        }
        let l = (k / m as i64) as usize;
        if l >= symbols.len() {
            return Complex64::new(0.0, 0.0);
        }
        chirp_sample(symbols[l], k % m as i64, p)
    };

    let total = (symbol_count + lead) * m;
    let mut rx: Vec<Complex64> = (0..total as i64)
        .map(|k| {
            ch.taps()
                .iter()
                .map(|t| t.gain * tx(k - t.delay as i64))
                .sum()
        })
        .collect();
    add_awgn_in_place(&mut rx, sigma2, &mut rng);

    let mut errors = 0u64;
    for l in lead..symbols.len() {
        let window = ChirpFrame {
            samples: rx[l * m..(l + 1) * m].to_vec(),
        };
        if detect(&window, cfg.detector, p) != symbols[l] {
            errors += 1;
        }
    }
    SerPoint::from_counts(snr_db, errors, symbol_count as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Tap;
    use crate::ser_mpc::ser_mpc_noncoherent;
    use crate::special_fn::gauss_hermite;

    fn p7() -> LoRaParams {
        LoRaParams::new(7).unwrap()
    }

    fn two_path(alpha: f64, k1: usize, p: LoRaParams) -> MultipathChannel {
        MultipathChannel::two_path(Complex64::new(alpha, 0.0), k1, p).unwrap()
    }

    fn one_path(p: LoRaParams) -> MultipathChannel {
        MultipathChannel::new(
            vec![Tap {
                delay: 0,
                gain: Complex64::new(1.0, 0.0),
            }],
            p,
        )
        .unwrap()
    }

    #[test]
    fn determinism() {
        let p = p7();
        let ch = two_path(0.7, 3, p);
        let cfg = SimConfig {
            trials: 20_000,
            seed: 42,
            ..Default::default()
        };
        let a = simulate_mpc(&ch, &[-12.0, -9.0], &cfg, p);
        let b = simulate_mpc(&ch, &[-12.0, -9.0], &cfg, p);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.errors, y.errors);
            assert_eq!(x.trials, y.trials);
            assert_eq!(x.ser, y.ser);
        }
    }

    #[test]
    fn no_errors_at_high_snr() {
        let p = p7();
        let ch = two_path(0.7, 6, p);
        let cfg = SimConfig {
            trials: 10_000,
            seed: 1,
            ..Default::default()
        };
        let pts = simulate_mpc(&ch, &[60.0], &cfg, p);
        assert_eq!(pts[0].errors, 0);
        assert_eq!(pts[0].trials, 10_000);
    }

    #[test]
    fn early_stop_on_error_target() {
        let p = p7();
        let ch = one_path(p);
        let cfg = SimConfig {
            trials: 10_000_000,
            seed: 2,
            target_errors: Some(200),
            ..Default::default()
        };
        // SER ~ 0.2 at -12 dB, so the target hits within the first round.
        let pts = simulate_mpc(&ch, &[-12.0], &cfg, p);
        assert!(pts[0].errors >= 200);
        assert!(pts[0].trials <= BATCH * BATCHES_PER_ROUND);
    }

    #[test]
    fn matches_analytic_awgn_within_3_sigma() {
        let p = p7();
        let ch = one_path(p);
        let rule = gauss_hermite(15).unwrap();
        let cfg = SimConfig {
            trials: 100_000,
            seed: 7,
            ..Default::default()
        };
        for snr in [-12.0, -10.0] {
            let truth = ser_mpc_noncoherent(&ch, sigma2_from_snr_db(snr), p, &rule);
            let pt = &simulate_mpc(&ch, &[snr], &cfg, p)[0];
            let sigma = (truth * (1.0 - truth) / pt.trials as f64).sqrt();
            assert!(
                (pt.ser - truth).abs() <= 3.0 * sigma,
                "snr {snr}: sim {} vs theory {truth}",
                pt.ser
            );
        }
    }

    #[test]
    fn coherent_does_not_lose_to_noncoherent() {
        let p = p7();
        let ch = one_path(p);
        let mut cfg = SimConfig {
            trials: 50_000,
            seed: 9,
            ..Default::default()
        };
        let nc = simulate_mpc(&ch, &[-11.0], &cfg, p)[0].errors;
        cfg.detector = Detector::Coherent;
        let co = simulate_mpc(&ch, &[-11.0], &cfg, p)[0].errors;
        // Same seeds, same noise draws: the coherent detector sees identical
        // trials and discards the imaginary noise component.
        assert!(co <= nc, "coherent {co} vs non-coherent {nc}");
    }

    #[test]
    fn stream_agrees_with_window_model() {
        let p = p7();
        let ch = two_path(0.7, 6, p);
        let snr = -11.0;
        let cfg = SimConfig {
            trials: 60_000,
            seed: 11,
            ..Default::default()
        };
        let win = &simulate_mpc(&ch, &[snr], &cfg, p)[0];
        let stream = simulate_stream_mpc(60_000, &ch, snr, &cfg, p);
        let pooled = win.ser.max(stream.ser);
        let sigma = (pooled * (1.0 - pooled) * (1.0 / win.trials as f64 + 1.0 / stream.trials as f64))
            .sqrt();
        assert!(
            (win.ser - stream.ser).abs() <= 3.0 * sigma,
            "window {} vs stream {}",
            win.ser,
            stream.ser
        );
    }

    #[test]
    fn stream_identity_channel_matches_awgn_window() {
        let p = p7();
        let ch = one_path(p);
        let snr = -10.0;
        let cfg = SimConfig {
            trials: 50_000,
            seed: 13,
            ..Default::default()
        };
        let win = &simulate_mpc(&ch, &[snr], &cfg, p)[0];
        let stream = simulate_stream_mpc(50_000, &ch, snr, &cfg, p);
        let sigma = (win.ser * (1.0 - win.ser)
            * (1.0 / win.trials as f64 + 1.0 / stream.trials as f64))
            .sqrt();
        assert!((win.ser - stream.ser).abs() <= 3.0 * sigma);
        // Determinism of the stream path too.
        let again = simulate_stream_mpc(50_000, &ch, snr, &cfg, p);
        assert_eq!(stream.errors, again.errors);
    }

    #[test]
    fn interference_sim_matches_analytic() {
        let p = p7();
        let rule = gauss_hermite(15).unwrap();
        let cfg_i = InterfererConfig::from_sir_db(p.m() / 4, 3.0, 0.0, p).unwrap();
        let snr = -8.0;
        let truth =
            crate::ser_interference::ser_interference(&cfg_i, sigma2_from_snr_db(snr), p, &rule);
        let cfg = SimConfig {
            trials: 100_000,
            seed: 17,
            ..Default::default()
        };
        let pt = &simulate_interference(&cfg_i, &[snr], &cfg, p)[0];
        let sigma = (truth * (1.0 - truth) / pt.trials as f64).sqrt();
        assert!(
            (pt.ser - truth).abs() <= 3.0 * sigma,
            "sim {} vs theory {truth}",
            pt.ser
        );
    }

    #[test]
    fn interference_vanishing_power_matches_awgn_theory() {
        let p = p7();
        let rule = gauss_hermite(15).unwrap();
        let cfg_i = InterfererConfig::new(33, 1e-30, 0.4, p).unwrap();
        let snr = -10.0;
        let truth = ser_mpc_noncoherent(&one_path(p), sigma2_from_snr_db(snr), p, &rule);
        let cfg = SimConfig {
            trials: 80_000,
            seed: 19,
            ..Default::default()
        };
        let pt = &simulate_interference(&cfg_i, &[snr], &cfg, p)[0];
        let sigma = (truth * (1.0 - truth) / pt.trials as f64).sqrt();
        assert!((pt.ser - truth).abs() <= 3.0 * sigma);
    }

    #[test]
    fn mirrored_tau_statistically_indistinguishable() {
        let p = p7();
        let m = p.m();
        let tau = 24usize;
        let cfg = SimConfig {
            trials: 100_000,
            seed: 23,
            ..Default::default()
        };
        let a = &simulate_interference(
            &InterfererConfig::from_sir_db(tau, 3.0, 0.7, p).unwrap(),
            &[-8.0],
            &cfg,
            p,
        )[0];
        let b = &simulate_interference(
            &InterfererConfig::from_sir_db(m - tau, 3.0, 0.7, p).unwrap(),
            &[-8.0],
            &cfg,
            p,
        )[0];
        // Two-proportion z-test at alpha = 0.01.
        let n = a.trials as f64;
        let pool = (a.errors + b.errors) as f64 / (2.0 * n);
        let z = (a.ser - b.ser) / (pool * (1.0 - pool) * 2.0 / n).sqrt();
        assert!(z.abs() < 2.576, "z = {z}: {} vs {}", a.ser, b.ser);
    }

    #[test]
    fn ci_coverage_at_known_ser() {
        let p = p7();
        let ch = one_path(p);
        let rule = gauss_hermite(15).unwrap();
        let snr = -10.0;
        let truth = ser_mpc_noncoherent(&ch, sigma2_from_snr_db(snr), p, &rule);
        let mut covered = 0;
        for seed in 0..50u64 {
            let cfg = SimConfig {
                trials: 8192,
                seed: 1000 + seed,
                ..Default::default()
            };
            let pt = &simulate_mpc(&ch, &[snr], &cfg, p)[0];
            if (pt.ser - truth).abs() <= pt.ci95_halfwidth {
                covered += 1;
            }
        }
        assert!(covered >= 45, "CI covered the truth only {covered}/50 times");
    }
}
