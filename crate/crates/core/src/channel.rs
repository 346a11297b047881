//! Discrete multipath channels, same-SF LoRa interferer superposition and
//! complex AWGN.
//!
//! The receiver is synchronized on the first path, so the first tap always
//! sits at delay 0. A detection window for the current symbol sees the tail
//! of the previous symbol through each delayed tap: for tap delay `k_i` the
//! first `k_i` samples come from the previous symbol's chirp and the rest
//! from the current one.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::waveform::{chirp_sample, ChirpFrame, LoRaParams, Symbol};

/// One channel path: integer sample delay and complex gain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tap {
    pub delay: usize,
    pub gain: Complex64,
}

/// Ordered tap list with the direct path first (delay 0).
#[derive(Clone, Debug)]
pub struct MultipathChannel {
    taps: Vec<Tap>,
}

impl MultipathChannel {
    pub fn new(taps: Vec<Tap>, p: LoRaParams) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidChannel("no taps".into()));
        }
        if taps[0].delay != 0 {
            return Err(Error::InvalidChannel(format!(
                "first tap delay must be 0, got {}",
                taps[0].delay
            )));
        }
        for w in taps.windows(2) {
            if w[1].delay <= w[0].delay {
                return Err(Error::InvalidChannel(format!(
                    "tap delays must be strictly increasing ({} then {})",
                    w[0].delay, w[1].delay
                )));
            }
        }
        let last = taps.last().unwrap().delay;
        if last >= p.m() {
            return Err(Error::InvalidChannel(format!(
                "tap delay {last} >= M = {}",
                p.m()
            )));
        }
        Ok(Self { taps })
    }

    /// Direct path with gain 1 plus one echo.
    pub fn two_path(alpha1: Complex64, k1: usize, p: LoRaParams) -> Result<Self> {
        Self::new(
            vec![
                Tap {
                    delay: 0,
                    gain: Complex64::new(1.0, 0.0),
                },
                Tap {
                    delay: k1,
                    gain: alpha1,
                },
            ],
            p,
        )
    }

    /// Parse the plain-text channel description: one tap per line,
    /// `delay gain_re gain_im`, delays ascending, first delay 0.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str, p: LoRaParams) -> Result<Self> {
        let mut taps = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::InvalidChannel(format!(
                    "line {}: expected `delay gain_re gain_im`, got {line:?}",
                    lineno + 1
                )));
            }
            let delay: usize = fields[0].parse().map_err(|_| {
                Error::InvalidChannel(format!("line {}: bad delay {:?}", lineno + 1, fields[0]))
            })?;
            let re: f64 = fields[1].parse().map_err(|_| {
                Error::InvalidChannel(format!("line {}: bad gain_re {:?}", lineno + 1, fields[1]))
            })?;
            let im: f64 = fields[2].parse().map_err(|_| {
                Error::InvalidChannel(format!("line {}: bad gain_im {:?}", lineno + 1, fields[2]))
            })?;
            taps.push(Tap {
                delay,
                gain: Complex64::new(re, im),
            });
        }
        Self::new(taps, p)
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }
}

/// Exponential-decay channel: taps (i, rho^i) for i = 0..K-1, with K the
/// smallest integer satisfying |rho|^K <= 0.2.
pub fn exp_decay_channel(rho: f64, p: LoRaParams) -> Result<MultipathChannel> {
    if !(0.0 < rho && rho < 1.0) {
        return Err(Error::Domain(format!(
            "exp_decay_channel: rho = {rho} outside (0, 1)"
        )));
    }
    let mut k = 1usize;
    while rho.powi(k as i32) > 0.2 {
        k += 1;
    }
    let taps = (0..k)
        .map(|i| Tap {
            delay: i,
            gain: Complex64::new(rho.powi(i as i32), 0.0),
        })
        .collect();
    MultipathChannel::new(taps, p)
}

/// Complex AWGN with total variance `sigma2` (per-component `sigma2/2`).
#[derive(Clone, Copy, Debug)]
pub struct NoiseConfig {
    pub sigma2: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn new(sigma2: f64, seed: u64) -> Result<Self> {
        if sigma2 <= 0.0 {
            return Err(Error::Domain(format!("noise variance {sigma2} <= 0")));
        }
        Ok(Self { sigma2, seed })
    }
}

/// One same-SF interferer: sample delay `tau`, power `p_i` (1/SIR) and
/// phase offset `phi` relative to the desired user.
#[derive(Clone, Copy, Debug)]
pub struct InterfererConfig {
    pub tau: usize,
    pub p_i: f64,
    pub phi: f64,
}

impl InterfererConfig {
    pub fn new(tau: usize, p_i: f64, phi: f64, p: LoRaParams) -> Result<Self> {
        if tau >= p.m() {
            return Err(Error::Domain(format!("tau = {tau} >= M = {}", p.m())));
        }
        if p_i <= 0.0 {
            return Err(Error::Domain(format!("interferer power {p_i} <= 0")));
        }
        Ok(Self {
            tau,
            p_i,
            phi: phi.rem_euclid(2.0 * std::f64::consts::PI),
        })
    }

    /// Power from a signal-to-interference ratio in dB: P_I = 10^(-SIR/10).
    pub fn from_sir_db(tau: usize, sir_db: f64, phi: f64, p: LoRaParams) -> Result<Self> {
        Self::new(tau, 10f64.powf(-sir_db / 10.0), phi, p)
    }

    /// Complex interferer gain `sqrt(P_I)*exp(j*phi)`.
    pub fn gain(&self) -> Complex64 {
        Complex64::from_polar(self.p_i.sqrt(), self.phi)
    }
}

/// M-sample detection window of the current symbol through a multipath
/// channel, with the previous symbol leaking in through each delayed tap.
pub fn received_window_mpc(
    a_prev: Symbol,
    a_cur: Symbol,
    ch: &MultipathChannel,
    noise: Option<&NoiseConfig>,
    p: LoRaParams,
) -> Result<ChirpFrame> {
    for s in [a_prev, a_cur] {
        if s.value() >= p.m() {
            return Err(Error::InvalidSymbol {
                value: s.value(),
                m: p.m(),
            });
        }
    }
    let m = p.m();
    let mut samples = vec![Complex64::new(0.0, 0.0); m];
    for tap in ch.taps() {
        for (k, out) in samples.iter_mut().enumerate() {
            let sym = if k < tap.delay { a_prev } else { a_cur };
            *out += tap.gain * chirp_sample(sym.value(), k as i64 - tap.delay as i64, p);
        }
    }
    if let Some(nc) = noise {
        let mut rng = ChaCha12Rng::seed_from_u64(nc.seed);
        add_awgn_in_place(&mut samples, nc.sigma2, &mut rng);
    }
    Ok(ChirpFrame { samples })
}

/// M-sample detection window of the desired symbol `a1` with one same-SF
/// interferer delayed by `tau` samples.
pub fn received_window_interference(
    a1: Symbol,
    a2_prev: Symbol,
    a2: Symbol,
    cfg: &InterfererConfig,
    noise: Option<&NoiseConfig>,
    p: LoRaParams,
) -> Result<ChirpFrame> {
    for s in [a1, a2_prev, a2] {
        if s.value() >= p.m() {
            return Err(Error::InvalidSymbol {
                value: s.value(),
                m: p.m(),
            });
        }
    }
    let m = p.m();
    let gain = cfg.gain();
    let mut samples = Vec::with_capacity(m);
    for k in 0..m {
        let sym = if k < cfg.tau { a2_prev } else { a2 };
        let s = chirp_sample(a1.value(), k as i64, p)
            + gain * chirp_sample(sym.value(), k as i64 - cfg.tau as i64, p);
        samples.push(s);
    }
    if let Some(nc) = noise {
        let mut rng = ChaCha12Rng::seed_from_u64(nc.seed);
        add_awgn_in_place(&mut samples, nc.sigma2, &mut rng);
    }
    Ok(ChirpFrame { samples })
}

/// Add circular complex Gaussian noise, deterministic for a given seed.
pub fn add_awgn(frame: &ChirpFrame, noise: &NoiseConfig) -> Result<ChirpFrame> {
    if noise.sigma2 <= 0.0 {
        return Err(Error::Domain(format!(
            "noise variance {} <= 0",
            noise.sigma2
        )));
    }
    let mut samples = frame.samples.clone();
    let mut rng = ChaCha12Rng::seed_from_u64(noise.seed);
    add_awgn_in_place(&mut samples, noise.sigma2, &mut rng);
    Ok(ChirpFrame { samples })
}

/// Same as [`add_awgn`] but drawing from a caller-supplied generator, so
/// parallel workers can use disjoint streams.
pub fn add_awgn_in_place<R: Rng + ?Sized>(samples: &mut [Complex64], sigma2: f64, rng: &mut R) {
    let sd = (sigma2 / 2.0).sqrt();
    for s in samples.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *s += Complex64::new(sd * re, sd * im);
    }
}
