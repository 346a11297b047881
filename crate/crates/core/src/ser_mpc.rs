//! Semi-analytical symbol error rate under multipath: conditional detection
//! probabilities for the self-ISI and ISI cases, Gauss-Hermite expectation
//! over the noise at the desired peak, and the final case-weighted SER for
//! the non-coherent and coherent detectors.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytic_dft::alpha_tilde;
use crate::channel::MultipathChannel;
use crate::error::{Error, Result};
use crate::special_fn::{
    chi2_cdf_2dof_pow, noncentral_chi2_cdf_2dof, std_normal_cdf, std_normal_cdf_pow,
    GaussHermiteRule,
};
use crate::waveform::{LoRaParams, Symbol};

/// Which symbol-pair case a conditional probability refers to: the previous
/// symbol equal to the current one (c = 1) or different (c = 2).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseTag {
    SelfIsi,
    Isi,
}

/// Chi-square non-centrality of echo `i`:
/// `2M|alpha_i|^2/sigma^2` (self-ISI) or `2(M-k_i)^2|alpha_i|^2/(M sigma^2)` (ISI).
pub fn lambda_i(c: CaseTag, alpha_abs: f64, k_i: usize, sigma2: f64, p: LoRaParams) -> f64 {
    let m = p.m() as f64;
    match c {
        CaseTag::SelfIsi => 2.0 * m * alpha_abs * alpha_abs / sigma2,
        CaseTag::Isi => {
            let r = m - k_i as f64;
            2.0 * r * r * alpha_abs * alpha_abs / (m * sigma2)
        }
    }
}

/// Rician non-centrality of echo `i`: `M|alpha_i|` or `(M-k_i)|alpha_i|`.
pub fn rice_v_i(c: CaseTag, alpha_abs: f64, k_i: usize, p: LoRaParams) -> f64 {
    let m = p.m() as f64;
    match c {
        CaseTag::SelfIsi => m * alpha_abs,
        CaseTag::Isi => (m - k_i as f64) * alpha_abs,
    }
}

/// Complex echo peak amplitude for transmitted symbol `a`:
/// `M*alpha_tilde_i(a)` or `(M-k_i)*alpha_tilde_i(a)`.
pub fn d_i(c: CaseTag, gain: Complex64, k_i: usize, a: Symbol, p: LoRaParams) -> Result<Complex64> {
    let at = alpha_tilde(gain, k_i, a.value(), p)?;
    let m = p.m() as f64;
    Ok(match c {
        CaseTag::SelfIsi => m * at,
        CaseTag::Isi => (m - k_i as f64) * at,
    })
}

/// Probability of detecting the correct symbol with the non-coherent detector,
/// conditioned on the noise sample `w` at the desired peak:
/// `prod_i F_ncchi2(arg; lambda_i) * F_chi2(arg)^(M-K)` with
/// `arg = 2|M*alpha_0 + w|^2/(M*sigma^2)`. Independent of the symbol values.
pub fn pd_given_w_noncoherent(
    w: Complex64,
    ch: &MultipathChannel,
    sigma2: f64,
    c: CaseTag,
    p: LoRaParams,
) -> f64 {
    debug_assert!(sigma2 > 0.0);
    let m = p.m() as f64;
    let arg = 2.0 * (m * ch.taps()[0].gain + w).norm_sqr() / (m * sigma2);
    let mut prod = chi2_cdf_2dof_pow(arg, (p.m() - ch.taps().len()) as f64);
    for tap in &ch.taps()[1..] {
        let l = lambda_i(c, tap.gain.norm(), tap.delay, sigma2, p);
        prod *= noncentral_chi2_cdf_2dof(arg, l).expect("arg and lambda are non-negative");
    }
    prod
}

/// Same probability written with Rician CDFs of the peak magnitude; equal to
/// [`pd_given_w_noncoherent`] and kept as an algebraic cross-check.
pub fn pd_given_w_noncoherent_rician(
    w: Complex64,
    ch: &MultipathChannel,
    sigma2: f64,
    c: CaseTag,
    p: LoRaParams,
) -> f64 {
    let m = p.m() as f64;
    let s = (sigma2 * m / 2.0).sqrt();
    let amp = (m * ch.taps()[0].gain + w).norm();
    // Rayleigh CDF of the noise-only bins, as a chi-square of (amp/s)^2.
    let mut prod = chi2_cdf_2dof_pow((amp / s) * (amp / s), (p.m() - ch.taps().len()) as f64);
    for tap in &ch.taps()[1..] {
        let v = rice_v_i(c, tap.gain.norm(), tap.delay, p);
        prod *= crate::special_fn::rician_cdf(amp, v, s).expect("valid Rician arguments");
    }
    prod
}

/// Correct-detection probability for the coherent detector given the noise
/// sample `w` at the desired peak; depends on `a` through `Re{d_i(a)}`.
pub fn pd_given_w_coherent(
    w: Complex64,
    a: Symbol,
    ch: &MultipathChannel,
    sigma2: f64,
    c: CaseTag,
    p: LoRaParams,
) -> f64 {
    debug_assert!(sigma2 > 0.0);
    let m = p.m() as f64;
    let sd = (sigma2 * m / 2.0).sqrt();
    let x = (m * ch.taps()[0].gain + w).re;
    let mut prod = std_normal_cdf_pow(x / sd, (p.m() - ch.taps().len()) as f64);
    for tap in &ch.taps()[1..] {
        let d = d_i(c, tap.gain, tap.delay, a, p).expect("validated channel");
        prod *= std_normal_cdf((x - d.re) / sd);
    }
    prod
}

/// Gauss-Hermite evaluation of `E[g(W)]` for `W ~ CN(0, M*sigma^2)`:
/// `(1/pi) * sum_{n,m} g(sigma*sqrt(M)*(x_n + j*x_m)) p_n p_m`.
pub fn gh_expectation(
    g: impl Fn(Complex64) -> f64,
    sigma2: f64,
    rule: &GaussHermiteRule,
    p: LoRaParams,
) -> f64 {
    let scale = (sigma2 * p.m() as f64).sqrt();
    let mut sum = 0.0;
    for (xn, pn) in rule.nodes.iter().zip(&rule.weights) {
        let mut inner = 0.0;
        for (xm, pm) in rule.nodes.iter().zip(&rule.weights) {
            inner += pm * g(scale * Complex64::new(*xn, *xm));
        }
        sum += pn * inner;
    }
    sum / std::f64::consts::PI
}

/// Non-coherent SER: `P_e = (1/M) P_e^(1) + ((M-1)/M) P_e^(2)`.
pub fn ser_mpc_noncoherent(
    ch: &MultipathChannel,
    sigma2: f64,
    p: LoRaParams,
    rule: &GaussHermiteRule,
) -> f64 {
    assert!(sigma2 > 0.0, "sigma2 must be positive");
    let m = p.m() as f64;
    let pe = |c: CaseTag| {
        gh_expectation(
            |w| 1.0 - pd_given_w_noncoherent(w, ch, sigma2, c, p),
            sigma2,
            rule,
            p,
        )
    };
    ((pe(CaseTag::SelfIsi) + (m - 1.0) * pe(CaseTag::Isi)) / m).clamp(0.0, 1.0)
}

/// Coherent SER: `P_e = (1/M^2) sum_a (P_e^(1)(a) + (M-1) P_e^(2)(a))`,
/// evaluated for every symbol `a` (cost is M times the non-coherent case).
pub fn ser_mpc_coherent(
    ch: &MultipathChannel,
    sigma2: f64,
    p: LoRaParams,
    rule: &GaussHermiteRule,
) -> f64 {
    assert!(sigma2 > 0.0, "sigma2 must be positive");
    let m = p.m() as f64;
    let per_symbol: Vec<f64> = (0..p.m())
        .into_par_iter()
        .map(|a| {
            let a = Symbol::new(a, p).expect("a < M");
            let pe = |c: CaseTag| {
                gh_expectation(
                    |w| 1.0 - pd_given_w_coherent(w, a, ch, sigma2, c, p),
                    sigma2,
                    rule,
                    p,
                )
            };
            pe(CaseTag::SelfIsi) + (m - 1.0) * pe(CaseTag::Isi)
        })
        .collect();
    // Sequential sum in symbol order keeps the result bit-stable.
    (per_symbol.iter().sum::<f64>() / (m * m)).clamp(0.0, 1.0)
}

/// Non-coherent `g^(c)`-function of a two-path channel, ready for
/// [`gh_expectation`].
pub fn g_two_path(
    c: CaseTag,
    alpha1: Complex64,
    k1: usize,
    sigma2: f64,
    p: LoRaParams,
) -> Result<impl Fn(Complex64) -> f64> {
    let ch = MultipathChannel::two_path(alpha1, k1, p)?;
    if sigma2 <= 0.0 {
        return Err(Error::Domain(format!("sigma2 = {sigma2} <= 0")));
    }
    Ok(move |w| 1.0 - pd_given_w_noncoherent(w, &ch, sigma2, c, p))
}

/// Non-coherent `g^(c)`-function of the exponential-decay channel.
pub fn g_exp_decay(
    c: CaseTag,
    rho: f64,
    sigma2: f64,
    p: LoRaParams,
) -> Result<impl Fn(Complex64) -> f64> {
    let ch = crate::channel::exp_decay_channel(rho, p)?;
    if sigma2 <= 0.0 {
        return Err(Error::Domain(format!("sigma2 = {sigma2} <= 0")));
    }
    Ok(move |w| 1.0 - pd_given_w_noncoherent(w, &ch, sigma2, c, p))
}

/// SNR (dB) at which a monotone SER curve crosses `target`, by log-linear
/// interpolation between adjacent grid points. `curve` holds (snr_db, ser)
/// pairs sorted by ascending SNR with SER decreasing.
pub fn snr_at_target_ser(curve: &[(f64, f64)], target: f64) -> Option<f64> {
    if target <= 0.0 {
        return None;
    }
    for pair in curve.windows(2) {
        let (s0, e0) = pair[0];
        let (s1, e1) = pair[1];
        if e0 >= target && e1 <= target && e0 > 0.0 && e1 > 0.0 {
            if e0 == e1 {
                return Some(s0);
            }
            let t = (target.log10() - e0.log10()) / (e1.log10() - e0.log10());
            return Some(s0 + t * (s1 - s0));
        }
    }
    None
}
