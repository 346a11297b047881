//! LoRa chirp generation, dechirping and the DFT-based symbol detector.
//!
//! A LoRa symbol `a` maps to a cyclically shifted up-chirp of `M = 2^SF`
//! samples. The receiver multiplies by the conjugate base chirp (dechirping),
//! which turns every symbol into a pure tone, and picks the DFT bin with
//! maximum magnitude (non-coherent) or maximum real part (coherent).

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Spreading factor and derived alphabet size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoRaParams {
    sf: u32,
    m: usize,
}

impl LoRaParams {
    pub fn new(sf: u32) -> Result<Self> {
        if !(7..=12).contains(&sf) {
            return Err(Error::InvalidSpreadingFactor(sf));
        }
        Ok(Self { sf, m: 1 << sf })
    }

    pub fn sf(self) -> u32 {
        self.sf
    }

    /// Alphabet size M = 2^SF, also the samples per symbol.
    pub fn m(self) -> usize {
        self.m
    }
}

/// A modulation symbol in `[0, M)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(usize);

impl Symbol {
    pub fn new(value: usize, p: LoRaParams) -> Result<Self> {
        if value >= p.m() {
            return Err(Error::InvalidSymbol { value, m: p.m() });
        }
        Ok(Self(value))
    }

    pub fn value(self) -> usize {
        self.0
    }
}

/// One symbol interval of complex baseband samples (length M).
#[derive(Clone, Debug)]
pub struct ChirpFrame {
    pub samples: Vec<Complex64>,
}

/// The M DFT bins produced by the detector front-end.
#[derive(Clone, Debug)]
pub struct DftSpectrum {
    pub bins: Vec<Complex64>,
}

/// `exp(j*pi*num/M)` with the numerator reduced modulo `2M` in integer
/// arithmetic, so phases that are exact multiples of `pi/M` stay exact.
pub(crate) fn unit_phasor(num: i64, m: usize) -> Complex64 {
    let two_m = 2 * m as i64;
    let r = num.rem_euclid(two_m);
    Complex64::cis(PI * r as f64 / m as f64)
}

/// Sample `x_a[k] = exp(2j*pi*k*(a/M - 1/2 + k/(2M)))` for any integer `k`.
///
/// The phase is `pi*k*(2a - M + k)/M`, an exact multiple of `pi/M`, and the
/// waveform is M-periodic in `k`, so negative indices wrap naturally.
pub fn chirp_sample(a: usize, k: i64, p: LoRaParams) -> Complex64 {
    let m = p.m() as i64;
    unit_phasor(k * (2 * a as i64 - m + k), p.m())
}

/// Map symbol `a` to its M-sample chirp frame.
pub fn modulate(a: Symbol, p: LoRaParams) -> Result<ChirpFrame> {
    if a.value() >= p.m() {
        return Err(Error::InvalidSymbol {
            value: a.value(),
            m: p.m(),
        });
    }
    let samples = (0..p.m() as i64)
        .map(|k| chirp_sample(a.value(), k, p))
        .collect();
    Ok(ChirpFrame { samples })
}

/// Multiply by the conjugate base chirp, turning chirps into tones.
pub fn dechirp(frame: &ChirpFrame, p: LoRaParams) -> Result<ChirpFrame> {
    if frame.samples.len() != p.m() {
        return Err(Error::LengthMismatch {
            got: frame.samples.len(),
            expected: p.m(),
        });
    }
    let samples = frame
        .samples
        .iter()
        .enumerate()
        .map(|(k, &s)| s * chirp_sample(0, k as i64, p).conj())
        .collect();
    Ok(ChirpFrame { samples })
}

thread_local! {
    static FFT_CACHE: RefCell<HashMap<usize, Arc<dyn Fft<f64>>>> = RefCell::new(HashMap::new());
}

fn fft_forward(m: usize) -> Arc<dyn Fft<f64>> {
    FFT_CACHE.with(|cache| {
        cache
            .borrow_mut()
            .entry(m)
            .or_insert_with(|| FftPlanner::new().plan_fft_forward(m))
            .clone()
    })
}

/// Dechirp the received frame and compute the M-point DFT of the result.
pub fn demod_dft(frame: &ChirpFrame, p: LoRaParams) -> Result<DftSpectrum> {
    let dechirped = dechirp(frame, p)?;
    let mut bins = dechirped.samples;
    fft_forward(p.m()).process(&mut bins);
    Ok(DftSpectrum { bins })
}

/// argmax of bin magnitude; ties resolved toward the lowest index.
pub fn detect_noncoherent(spec: &DftSpectrum) -> Symbol {
    argmax_by(&spec.bins, |b| b.norm_sqr())
}

/// argmax of bin real part; ties resolved toward the lowest index.
pub fn detect_coherent(spec: &DftSpectrum) -> Symbol {
    argmax_by(&spec.bins, |b| b.re)
}

fn argmax_by(bins: &[Complex64], key: impl Fn(&Complex64) -> f64) -> Symbol {
    let mut best = 0usize;
    let mut best_val = key(&bins[0]);
    for (n, b) in bins.iter().enumerate().skip(1) {
        let v = key(b);
        if v > best_val {
            best = n;
            best_val = v;
        }
    }
    Symbol(best)
}
