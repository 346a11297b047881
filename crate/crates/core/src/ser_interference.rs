//! Semi-analytical SER for a LoRa user hit by one same-SF aligned interferer
//! (non-coherent detector): the five symbol-coincidence cases, their
//! chi-square parameters, the case-weighted combination, the even-delay
//! complexity reduction, and the worst/best interferer-phase values.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytic_dft::alpha_tilde;
use crate::channel::InterfererConfig;
use crate::error::{Error, Result};
use crate::ser_mpc::gh_expectation;
use crate::special_fn::{chi2_cdf_2dof_pow, noncentral_chi2_cdf_2dof, GaussHermiteRule};
use crate::waveform::{LoRaParams, Symbol};

/// The five interferer symbol-coincidence cases. A-cases have the
/// interferer's previous symbol differ from its current one, B-cases have
/// them equal; A2, A3 and B2 are the additive-interference cases where an
/// interferer peak lands on the desired bin `a_1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InterfCase {
    A1,
    A2,
    A3,
    B1,
    B2,
}

/// Chi-square non-centralities of the interferer peaks:
/// `l1 = 2(M-tau)^2 P_I/(M sigma^2)` (current-symbol peak),
/// `l2 = 2 tau^2 P_I/(M sigma^2)` (previous-symbol peak),
/// `l3 = 2 M P_I/sigma^2` (merged peak when both symbols coincide).
#[derive(Clone, Copy, Debug)]
pub struct InterfLambdas {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

pub fn interf_lambdas(cfg: &InterfererConfig, sigma2: f64, p: LoRaParams) -> InterfLambdas {
    let m = p.m() as f64;
    let tau = cfg.tau as f64;
    InterfLambdas {
        l1: 2.0 * (m - tau) * (m - tau) * cfg.p_i / (m * sigma2),
        l2: 2.0 * tau * tau * cfg.p_i / (m * sigma2),
        l3: 2.0 * m * cfg.p_i / sigma2,
    }
}

/// Dechirped interferer gain seen on the desired bin, `alpha_tilde_tau(a1+tau)`;
/// for `tau = 0` this is the raw gain `sqrt(P_I) e^{j phi}`.
fn interferer_atilde(cfg: &InterfererConfig, a1: usize, p: LoRaParams) -> Complex64 {
    if cfg.tau == 0 {
        cfg.gain()
    } else {
        alpha_tilde(cfg.gain(), cfg.tau, (a1 + cfg.tau) % p.m(), p)
            .expect("tau in 1..M and symbol reduced mod M")
    }
}

/// Correct-detection probability of the desired symbol conditioned on the
/// noise sample `w` at its peak, for one of the five cases.
///
/// `a1` is required for the additive-interference cases A2/A3/B2 (the
/// reinforced peak depends on it) and must be absent for A1/B1.
pub fn pd_case(
    case: InterfCase,
    a1: Option<Symbol>,
    w: Complex64,
    cfg: &InterfererConfig,
    sigma2: f64,
    p: LoRaParams,
) -> Result<f64> {
    if sigma2 <= 0.0 {
        return Err(Error::Domain(format!("sigma2 = {sigma2} <= 0")));
    }
    let m = p.m() as f64;
    let needs_a1 = matches!(case, InterfCase::A2 | InterfCase::A3 | InterfCase::B2);
    let a1 = match (needs_a1, a1) {
        (true, Some(a)) => Some(a.value()),
        (false, None) => None,
        (true, None) => {
            return Err(Error::Domain(format!(
                "{case:?} needs the desired symbol a1"
            )))
        }
        (false, Some(_)) => {
            return Err(Error::Domain(format!(
                "{case:?} is independent of a1; pass none"
            )))
        }
    };
    let l = interf_lambdas(cfg, sigma2, p);
    let tau = cfg.tau as f64;
    // Peak amplitude M (+ reinforcement) + W; the chi-square argument is
    // 2|amp|^2/(M sigma^2).
    let reinforcement = a1.map(|a1| {
        let at = interferer_atilde(cfg, a1, p);
        match case {
            InterfCase::A2 => (m - tau) * at,
            InterfCase::A3 => tau * at,
            InterfCase::B2 => m * at,
            _ => unreachable!(),
        }
    });
    let amp = Complex64::new(m, 0.0) + reinforcement.unwrap_or_default() + w;
    let d = 2.0 * amp.norm_sqr() / (m * sigma2);
    let ncx2 = |lambda: f64| {
        noncentral_chi2_cdf_2dof(d, lambda).expect("non-negative chi-square arguments")
    };
    Ok(match case {
        InterfCase::A1 => ncx2(l.l1) * ncx2(l.l2) * chi2_cdf_2dof_pow(d, m - 3.0),
        InterfCase::A2 => ncx2(l.l2) * chi2_cdf_2dof_pow(d, m - 2.0),
        InterfCase::A3 => ncx2(l.l1) * chi2_cdf_2dof_pow(d, m - 2.0),
        InterfCase::B1 => ncx2(l.l3) * chi2_cdf_2dof_pow(d, m - 2.0),
        InterfCase::B2 => chi2_cdf_2dof_pow(d, m - 1.0),
    })
}

fn pe_case(
    case: InterfCase,
    a1: Option<Symbol>,
    cfg: &InterfererConfig,
    sigma2: f64,
    p: LoRaParams,
    rule: &GaussHermiteRule,
) -> f64 {
    gh_expectation(
        |w| 1.0 - pd_case(case, a1, w, cfg, sigma2, p).expect("validated case arguments"),
        sigma2,
        rule,
        p,
    )
}

/// Sum of an a1-dependent case error over `a1 = 0..count`, in parallel but
/// accumulated in symbol order.
fn pe_sum_over_a1(
    case: InterfCase,
    count: usize,
    cfg: &InterfererConfig,
    sigma2: f64,
    p: LoRaParams,
    rule: &GaussHermiteRule,
) -> f64 {
    let terms: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|a1| {
            let a1 = Symbol::new(a1, p).expect("a1 < M");
            pe_case(case, Some(a1), cfg, sigma2, p, rule)
        })
        .collect();
    terms.iter().sum()
}

fn combine(
    cfg: &InterfererConfig,
    sigma2: f64,
    p: LoRaParams,
    rule: &GaussHermiteRule,
    sum_fraction: usize,
) -> f64 {
    let m = p.m() as f64;
    if cfg.tau == 0 {
        // Only the B cases occur and the reinforced peak M(1 + alpha) is
        // a1-independent: M P_e = (M-1) P_e^(B1) + P_e^(B2).
        let pe_b1 = pe_case(InterfCase::B1, None, cfg, sigma2, p, rule);
        let pe_b2 = pe_case(
            InterfCase::B2,
            Some(Symbol::new(0, p).expect("0 < M")),
            cfg,
            sigma2,
            p,
            rule,
        );
        return (((m - 1.0) * pe_b1 + pe_b2) / m).clamp(0.0, 1.0);
    }
    let count = p.m() / sum_fraction;
    let scale = sum_fraction as f64;
    let pe_a1 = pe_case(InterfCase::A1, None, cfg, sigma2, p, rule);
    let pe_b1 = pe_case(InterfCase::B1, None, cfg, sigma2, p, rule);
    let sum_a2 = scale * pe_sum_over_a1(InterfCase::A2, count, cfg, sigma2, p, rule);
    let sum_a3 = scale * pe_sum_over_a1(InterfCase::A3, count, cfg, sigma2, p, rule);
    let sum_b2 = scale * pe_sum_over_a1(InterfCase::B2, count, cfg, sigma2, p, rule);
    let total = m * (m - 1.0) * (m - 2.0) * pe_a1
        + (m - 1.0) * (sum_a2 + sum_a3)
        + m * (m - 1.0) * pe_b1
        + sum_b2;
    (total / (m * m * m)).clamp(0.0, 1.0)
}

/// Case-weighted SER under one same-SF interferer:
/// `M^3 P_e = M(M-1)(M-2)P_e^(A1) + (M-1)(sum_a1 P_e^(A2) + sum_a1 P_e^(A3))
///  + M(M-1)P_e^(B1) + sum_a1 P_e^(B2)`.
pub fn ser_interference(
    cfg: &InterfererConfig,
    sigma2: f64,
    p: LoRaParams,
    rule: &GaussHermiteRule,
) -> f64 {
    assert!(sigma2 > 0.0, "sigma2 must be positive");
    combine(cfg, sigma2, p, rule, 1)
}

/// Same SER with the a1-sums shortened by the factor `2^n` available when
/// `tau = k*2^n` with `k` odd and `n >= 1`: the reinforced amplitudes only
/// take `M_1 = M/2^n` distinct values.
pub fn ser_interference_reduced(
    cfg: &InterfererConfig,
    sigma2: f64,
    p: LoRaParams,
    rule: &GaussHermiteRule,
) -> Result<f64> {
    if sigma2 <= 0.0 {
        return Err(Error::Domain(format!("sigma2 = {sigma2} <= 0")));
    }
    if cfg.tau == 0 || cfg.tau % 2 != 0 {
        return Err(Error::Domain(format!(
            "tau = {} is not of the form k*2^n with k odd, n >= 1",
            cfg.tau
        )));
    }
    let n = cfg.tau.trailing_zeros();
    Ok(combine(cfg, sigma2, p, rule, 1 << n))
}

/// Worst-case and best-case interferer phases `(phi_min, phi_max)`:
/// `(0, pi/M_1)` for even `tau` (with `M_1 = M/2^n`), `(pi/M, 0)` for odd.
pub fn phi_extremes(tau: usize, p: LoRaParams) -> Result<(f64, f64)> {
    let m = p.m();
    if tau == 0 || tau >= m {
        return Err(Error::Domain(format!(
            "phi_extremes: tau = {tau} outside 1..{m}"
        )));
    }
    let pi = std::f64::consts::PI;
    if tau % 2 == 1 {
        Ok((pi / m as f64, 0.0))
    } else {
        let m1 = m >> tau.trailing_zeros();
        Ok((0.0, pi / m1 as f64))
    }
}
