//! Closed-form DFT output of the dechirped receiver, for multipath self-ISI,
//! general ISI, and one same-SF interferer — plus the peak-only approximation
//! used by the error-rate engines.
//!
//! These expressions reproduce `demod_dft` applied to the corresponding
//! noiseless received window, bin by bin, which is what the simulation
//! cross-checks rely on.

use num_complex::Complex64;

use crate::channel::{InterfererConfig, MultipathChannel};
use crate::error::{Error, Result};
use crate::waveform::{chirp_sample, unit_phasor, DftSpectrum, LoRaParams, Symbol};

/// Effective echo gain after dechirping:
/// `alpha_tilde(a_bar) = alpha * x_{a_bar}[M - k_i]`.
///
/// Only delayed taps have one, so `k_i` must lie in `1..M`.
pub fn alpha_tilde(alpha: Complex64, k_i: usize, a_bar: usize, p: LoRaParams) -> Result<Complex64> {
    let m = p.m();
    if k_i == 0 || k_i >= m {
        return Err(Error::Domain(format!(
            "alpha_tilde: delay {k_i} outside 1..{m}"
        )));
    }
    if a_bar >= m {
        return Err(Error::InvalidSymbol { value: a_bar, m });
    }
    Ok(alpha * chirp_sample(a_bar, (m - k_i) as i64, p))
}

/// Partial geometric interference term
/// `M_i[n; a_bar] = alpha_tilde(a_bar) * sum_{k=0}^{k_i-1} e^{2j*pi*k*(a_bar - k_i - n)/M}`.
pub fn m_i_term(
    n: usize,
    a_bar: usize,
    alpha: Complex64,
    k_i: usize,
    p: LoRaParams,
) -> Result<Complex64> {
    let at = alpha_tilde(alpha, k_i, a_bar, p)?;
    let m = p.m();
    if n >= m {
        return Err(Error::Domain(format!("m_i_term: bin {n} >= M = {m}")));
    }
    let step = a_bar as i64 - k_i as i64 - n as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..k_i as i64 {
        sum += unit_phasor(2 * k * step, m);
    }
    Ok(at * sum)
}

/// Noiseless DFT bins when the previous symbol equals the current one
/// (self-ISI): a peak `M*alpha_0` at `a` and `M*alpha_tilde_i(a)` at each
/// `a - k_i`, zero elsewhere.
pub fn dft_self_isi(a: Symbol, ch: &MultipathChannel, p: LoRaParams) -> Result<DftSpectrum> {
    let m = p.m();
    if a.value() >= m {
        return Err(Error::InvalidSymbol { value: a.value(), m });
    }
    let mf = m as f64;
    let mut bins = vec![Complex64::new(0.0, 0.0); m];
    bins[a.value()] += mf * ch.taps()[0].gain;
    for tap in &ch.taps()[1..] {
        let n = (a.value() + m - tap.delay) % m;
        bins[n] += mf * alpha_tilde(tap.gain, tap.delay, a.value(), p)?;
    }
    Ok(DftSpectrum { bins })
}

/// Exact noiseless DFT bins in the general ISI case: echo peaks shrink to
/// `(M - k_i)*alpha_tilde_i(a)` plus an `M_i` correction, and the residual
/// `M_i[n; a_prev] - M_i[n; a]` leaks into every other bin.
pub fn dft_isi(
    a_prev: Symbol,
    a_cur: Symbol,
    ch: &MultipathChannel,
    p: LoRaParams,
) -> Result<DftSpectrum> {
    let m = p.m();
    for s in [a_prev, a_cur] {
        if s.value() >= m {
            return Err(Error::InvalidSymbol { value: s.value(), m });
        }
    }
    let mf = m as f64;
    let a = a_cur.value();
    let mut bins = vec![Complex64::new(0.0, 0.0); m];
    bins[a] += mf * ch.taps()[0].gain;
    for tap in &ch.taps()[1..] {
        let peak = (a + m - tap.delay) % m;
        for (n, bin) in bins.iter_mut().enumerate() {
            if n == peak {
                *bin += (mf - tap.delay as f64)
                    * alpha_tilde(tap.gain, tap.delay, a, p)?
                    + m_i_term(n, a_prev.value(), tap.gain, tap.delay, p)?;
            } else {
                *bin += m_i_term(n, a_prev.value(), tap.gain, tap.delay, p)?
                    - m_i_term(n, a, tap.gain, tap.delay, p)?;
            }
        }
    }
    Ok(DftSpectrum { bins })
}

/// Peak-only ISI approximation: keeps `M*alpha_0` at `a` and
/// `(M - k_i)*alpha_tilde_i(a)` at `a - k_i`, drops every `M_i` term.
pub fn dft_isi_approx(a_cur: Symbol, ch: &MultipathChannel, p: LoRaParams) -> Result<DftSpectrum> {
    let m = p.m();
    let a = a_cur.value();
    if a >= m {
        return Err(Error::InvalidSymbol { value: a, m });
    }
    let mf = m as f64;
    let mut bins = vec![Complex64::new(0.0, 0.0); m];
    bins[a] += mf * ch.taps()[0].gain;
    for tap in &ch.taps()[1..] {
        let n = (a + m - tap.delay) % m;
        bins[n] += (mf - tap.delay as f64) * alpha_tilde(tap.gain, tap.delay, a, p)?;
    }
    Ok(DftSpectrum { bins })
}

/// Exact noiseless DFT bins with one same-SF interferer delayed by `tau`.
///
/// The desired user contributes `M` at `a_1`; the interferer's current and
/// previous symbols contribute peaks at `a_2 - tau` and `a_2^- - tau` plus the
/// usual `M_tau` leakage. For `tau = 0` only `M*alpha` at `a_2` remains.
pub fn dft_interference(
    a1: Symbol,
    a2_prev: Symbol,
    a2: Symbol,
    cfg: &InterfererConfig,
    p: LoRaParams,
) -> Result<DftSpectrum> {
    let m = p.m();
    for s in [a1, a2_prev, a2] {
        if s.value() >= m {
            return Err(Error::InvalidSymbol { value: s.value(), m });
        }
    }
    let mf = m as f64;
    let tau = cfg.tau;
    let gain = cfg.gain();
    let mut bins = vec![Complex64::new(0.0, 0.0); m];
    bins[a1.value()] += Complex64::new(mf, 0.0);
    if tau == 0 {
        bins[a2.value()] += mf * gain;
        return Ok(DftSpectrum { bins });
    }
    let peak_cur = (a2.value() + m - tau) % m;
    let peak_prev = (a2_prev.value() + m - tau) % m;
    for (n, bin) in bins.iter_mut().enumerate() {
        let at_cur = n == peak_cur;
        let at_prev = n == peak_prev;
        if !at_cur && !at_prev {
            *bin += m_i_term(n, a2_prev.value(), gain, tau, p)?
                - m_i_term(n, a2.value(), gain, tau, p)?;
        }
        if at_cur {
            *bin += (mf - tau as f64) * alpha_tilde(gain, tau, a2.value(), p)?
                + m_i_term(n, a2_prev.value(), gain, tau, p)?;
        }
        if at_prev {
            *bin += tau as f64 * alpha_tilde(gain, tau, a2_prev.value(), p)?
                - m_i_term(n, a2.value(), gain, tau, p)?;
        }
    }
    Ok(DftSpectrum { bins })
}
