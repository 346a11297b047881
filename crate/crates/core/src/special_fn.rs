//! Statistical special functions used by the error-rate engines:
//! central/non-central chi-square CDFs (2 degrees of freedom), the first-order
//! Marcum Q function, Rician and normal CDFs, and physicists' Gauss-Hermite
//! quadrature rules.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};

/// Nodes and weights of an N-point Gauss-Hermite rule for weight e^(-x^2).
#[derive(Clone, Debug)]
pub struct GaussHermiteRule {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// CDF of the central chi-square distribution with 2 degrees of freedom:
/// `1 - exp(-x/2)`.
pub fn chi2_cdf_2dof(x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::Domain(format!("chi2_cdf_2dof: negative x = {x}")));
    }
    Ok(chi2_cdf_2dof_unchecked(x))
}

#[inline]
pub(crate) fn chi2_cdf_2dof_unchecked(x: f64) -> f64 {
    -(-x / 2.0).exp_m1()
}

/// `F(x)^e` for the 2-dof chi-square CDF, evaluated as `exp(e*log F)` with
/// the log taken through `ln_1p` so exponents in the thousands stay accurate.
#[inline]
pub(crate) fn chi2_cdf_2dof_pow(x: f64, e: f64) -> f64 {
    let ln_f = (-(-x / 2.0).exp()).ln_1p();
    (e * ln_f).exp()
}

/// CDF of the non-central chi-square distribution with 2 degrees of freedom
/// and non-centrality `lambda`: `1 - Q1(sqrt(lambda), sqrt(x))`.
pub fn noncentral_chi2_cdf_2dof(x: f64, lambda: f64) -> Result<f64> {
    if x < 0.0 || lambda < 0.0 {
        return Err(Error::Domain(format!(
            "noncentral_chi2_cdf_2dof: negative argument (x = {x}, lambda = {lambda})"
        )));
    }
    Ok(noncentral_chi2_cdf_2dof_unchecked(x, lambda))
}

/// Poisson mixture of central chi-square CDFs,
/// `sum_k Pois(k; lambda/2) * P(k+1, x/2)`,
/// summed outward from the Poisson mode with the leading term taken in log
/// space, so it stays stable for non-centralities up to ~1e7.
pub(crate) fn noncentral_chi2_cdf_2dof_unchecked(x: f64, lambda: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if lambda == 0.0 {
        return chi2_cdf_2dof_unchecked(x);
    }
    let h = lambda / 2.0; // Poisson intensity
    let y = x / 2.0; // gamma argument
    let k0 = h.floor();
    // Leading Poisson weight, gamma CDF and gamma density term at the mode.
    let ln_p0 = -h + k0 * h.ln() - ln_gamma(k0 + 1.0);
    let p0 = ln_p0.exp();
    let g0 = gamma_lr(k0 + 1.0, y);
    let ln_t0 = -y + k0 * y.ln() - ln_gamma(k0 + 1.0);
    let t0 = ln_t0.exp();

    const REL_EPS: f64 = 1e-18;
    let mut sum = p0 * g0;

    // Upward from the mode: Poisson weights and the gamma CDF both decrease.
    let (mut p, mut g, mut t) = (p0, g0, t0);
    let mut k = k0;
    loop {
        k += 1.0;
        p *= h / k;
        t *= y / k;
        g = (g - t).max(0.0);
        let term = p * g;
        sum += term;
        if term <= REL_EPS * sum || g == 0.0 {
            break;
        }
    }

    // Downward from the mode.
    let (mut p, mut g, mut t) = (p0, g0, t0);
    let mut k = k0;
    while k >= 1.0 {
        g = (g + t).min(1.0);
        t *= k / y;
        p *= k / h;
        k -= 1.0;
        let term = p * g;
        sum += term;
        if term <= REL_EPS * sum {
            break;
        }
    }

    sum.clamp(0.0, 1.0)
}

/// First-order Marcum Q function, `Q1(a, b) = 1 - F_ncchi2(b^2; a^2)`.
pub fn marcum_q1(a: f64, b: f64) -> Result<f64> {
    if a < 0.0 || b < 0.0 {
        return Err(Error::Domain(format!(
            "marcum_q1: negative argument (a = {a}, b = {b})"
        )));
    }
    Ok(1.0 - noncentral_chi2_cdf_2dof_unchecked(b * b, a * a))
}

/// Rician CDF with non-centrality `v` and scale `sigma`:
/// `1 - Q1(v/sigma, x/sigma)`.
pub fn rician_cdf(x: f64, v: f64, sigma: f64) -> Result<f64> {
    if sigma <= 0.0 {
        return Err(Error::Domain(format!("rician_cdf: sigma = {sigma} <= 0")));
    }
    if x < 0.0 || v < 0.0 {
        return Err(Error::Domain(format!(
            "rician_cdf: negative argument (x = {x}, v = {v})"
        )));
    }
    Ok(noncentral_chi2_cdf_2dof_unchecked(
        (x / sigma) * (x / sigma),
        (v / sigma) * (v / sigma),
    ))
}

/// Normal CDF with mean `mu` and standard deviation `sigma`.
pub fn normal_cdf(x: f64, mu: f64, sigma: f64) -> Result<f64> {
    if sigma <= 0.0 {
        return Err(Error::Domain(format!("normal_cdf: sigma = {sigma} <= 0")));
    }
    Ok(std_normal_cdf((x - mu) / sigma))
}

#[inline]
pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// `Phi(z)^e` via `exp(e*log Phi(z))`, switching between the lower and upper
/// tail so the log stays accurate on both sides.
#[inline]
pub(crate) fn std_normal_cdf_pow(z: f64, e: f64) -> f64 {
    let ln_f = if z >= 0.0 {
        (-0.5 * erfc(z / SQRT_2)).ln_1p()
    } else {
        (0.5 * erfc(-z / SQRT_2)).ln()
    };
    (e * ln_f).exp()
}

/// Physicists' Gauss-Hermite rule (weight e^(-x^2)), nodes ascending.
///
/// Roots of the Hermite polynomial H_n are found by Newton iteration on the
/// normalized three-term recurrence, seeded with the usual asymptotic
/// estimates for the outermost roots.
pub fn gauss_hermite(n: usize) -> Result<GaussHermiteRule> {
    if n == 0 || n > 64 {
        return Err(Error::Domain(format!(
            "gauss_hermite: n = {n} outside 1..=64"
        )));
    }
    const EPS: f64 = 1e-15;
    const MAX_ITER: usize = 60;
    let pim4 = 1.0 / PI.powf(0.25);
    let nf = n as f64;
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let half = n.div_ceil(2);
    let mut z = 0.0f64;
    for i in 0..half {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[n - 1],
            3 => 1.91 * z - 0.91 * nodes[n - 2],
            _ => 2.0 * z - nodes[n - i + 1],
        };
        let mut pp = 0.0;
        for _ in 0..MAX_ITER {
            // Evaluate the orthonormal Hermite recurrence at z.
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= EPS {
                break;
            }
        }
        // Middle root of an odd rule is exactly zero.
        if n % 2 == 1 && i == half - 1 {
            z = 0.0;
        }
        nodes[n - 1 - i] = z;
        nodes[i] = -z;
        weights[n - 1 - i] = 2.0 / (pp * pp);
        weights[i] = weights[n - 1 - i];
    }
    Ok(GaussHermiteRule { n, nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn chi2_cdf_basics() {
        assert_eq!(chi2_cdf_2dof(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(chi2_cdf_2dof(2.0 * 2f64.ln()).unwrap(), 0.5, epsilon = 1e-15);
        assert!((1.0 - chi2_cdf_2dof(80.0).unwrap()).abs() <= 1e-15);
        assert!(chi2_cdf_2dof(-1.0).is_err());
    }

    #[test]
    fn chi2_pow_matches_naive_at_moderate_exponent() {
        let x = 3.7;
        let f = chi2_cdf_2dof(x).unwrap();
        assert_abs_diff_eq!(chi2_cdf_2dof_pow(x, 127.0), f.powi(127), epsilon = 1e-13);
    }

    #[test]
    fn marcum_degenerate_cases() {
        for b in [0.1, 1.0, 3.0, 10.0] {
            assert_abs_diff_eq!(
                marcum_q1(0.0, b).unwrap(),
                (-b * b / 2.0).exp(),
                epsilon = 1e-14
            );
        }
        for a in [0.0, 0.5, 2.0, 20.0] {
            assert_abs_diff_eq!(marcum_q1(a, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        }
    }

    // Test-side modified Bessel I0 via its power series; independent of the
    // implementation path above.
    fn bessel_i0(x: f64) -> f64 {
        let q = x * x / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..400 {
            term *= q / ((k * k) as f64);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        sum
    }

    // Adaptive Simpson quadrature of the Rician density tail.
    fn marcum_q1_oracle(a: f64, b: f64) -> f64 {
        let f = |x: f64| x * (-(x * x + a * a) / 2.0).exp() * bessel_i0(a * x);
        let upper = b.max(a) + 40.0;
        adaptive_simpson(&f, b, upper, 1e-12, 40)
    }

    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, depth: u32) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            whole: f64,
            eps: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let left = simpson(f, a, m);
            let right = simpson(f, m, b);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, left, eps / 2.0, depth - 1)
                    + rec(f, m, b, right, eps / 2.0, depth - 1)
            }
        }
        rec(f, a, b, simpson(f, a, b), eps, depth)
    }

    #[test]
    fn marcum_matches_quadrature_oracle() {
        assert_abs_diff_eq!(
            marcum_q1(1.0, 1.0).unwrap(),
            marcum_q1_oracle(1.0, 1.0),
            epsilon = 1e-9
        );
        for &(a, b) in &[
            (0.3, 0.1),
            (0.5, 2.0),
            (2.0, 0.5),
            (2.0, 2.0),
            (3.0, 4.0),
            (4.0, 3.0),
            (5.0, 5.0),
            (6.0, 1.0),
        ] {
            assert_abs_diff_eq!(
                marcum_q1(a, b).unwrap(),
                marcum_q1_oracle(a, b),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn marcum_large_arguments_stay_finite_and_bounded() {
        for &(a, b) in &[(30.0, 28.0), (100.0, 101.0), (1000.0, 999.0), (2000.0, 2100.0)] {
            let q = marcum_q1(a, b).unwrap();
            assert!((0.0..=1.0).contains(&q), "Q1({a},{b}) = {q}");
        }
        // Far tails pin to the right limits.
        assert_abs_diff_eq!(marcum_q1(100.0, 10.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(marcum_q1(10.0, 100.0).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn noncentral_reduces_to_central() {
        for x in [0.0, 0.5, 2.0, 10.0] {
            assert_abs_diff_eq!(
                noncentral_chi2_cdf_2dof(x, 0.0).unwrap(),
                chi2_cdf_2dof(x).unwrap(),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn noncentral_monotone() {
        let xs: Vec<f64> = (0..60).map(|i| i as f64 * 0.5).collect();
        let ls: Vec<f64> = (0..20).map(|i| i as f64 * 0.7).collect();
        for &l in &ls {
            let mut prev = 0.0;
            for &x in &xs {
                let f = noncentral_chi2_cdf_2dof(x, l).unwrap();
                assert!(f >= prev - 1e-14);
                prev = f;
            }
        }
        for &x in &xs {
            let mut prev = 1.0;
            for &l in &ls {
                let f = noncentral_chi2_cdf_2dof(x, l).unwrap();
                assert!(f <= prev + 1e-14);
                prev = f;
            }
        }
    }

    #[test]
    fn noncentral_matches_monte_carlo() {
        // |sqrt(lambda) + CN(0,2)/sqrt(2) components|^2 with unit-variance
        // parts follows chi2_nc(2 dof, lambda).
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let (x, lambda) = (4.0f64, 2.0f64);
        let n = 10_000_000u64;
        let mut count = 0u64;
        let normal = rand_distr::StandardNormal;
        for _ in 0..n {
            let u: f64 = rng.sample(normal);
            let v: f64 = rng.sample(normal);
            let s = (lambda.sqrt() + u).powi(2) + v * v;
            if s <= x {
                count += 1;
            }
        }
        let est = count as f64 / n as f64;
        let p = noncentral_chi2_cdf_2dof(x, lambda).unwrap();
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (est - p).abs() <= 3.0 * sigma,
            "est {est}, analytic {p}, 3sigma {}",
            3.0 * sigma
        );
    }

    #[test]
    fn rician_degenerates_to_rayleigh() {
        for x in [0.1, 0.5, 1.0, 3.0] {
            let sigma = 0.8;
            assert_abs_diff_eq!(
                rician_cdf(x, 0.0, sigma).unwrap(),
                1.0 - (-x * x / (2.0 * sigma * sigma)).exp(),
                epsilon = 1e-13
            );
        }
        assert_eq!(rician_cdf(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert!(rician_cdf(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn rician_equals_noncentral_chi2_form() {
        for &(x, v, s) in &[(1.0, 0.5, 0.7), (2.5, 2.0, 1.3), (0.3, 4.0, 0.5)] {
            let lhs = rician_cdf(x, v, s).unwrap();
            let rhs =
                noncentral_chi2_cdf_2dof((x / s) * (x / s), (v / s) * (v / s)).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn normal_cdf_values() {
        assert_abs_diff_eq!(normal_cdf(3.0, 3.0, 2.0).unwrap(), 0.5, epsilon = 1e-15);
        // The erfc kernel is accurate to ~1e-11 absolute.
        assert_abs_diff_eq!(
            normal_cdf(1.0, 0.0, 1.0).unwrap(),
            0.8413447460685429,
            epsilon = 1e-9
        );
        for z in [-3.0, -1.2, 0.4, 2.7] {
            assert_abs_diff_eq!(
                std_normal_cdf(-z),
                1.0 - std_normal_cdf(z),
                epsilon = 1e-14
            );
        }
        assert!(normal_cdf(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn gauss_hermite_small_rules() {
        let r1 = gauss_hermite(1).unwrap();
        assert_abs_diff_eq!(r1.nodes[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r1.weights[0], PI.sqrt(), epsilon = 1e-14);

        let r2 = gauss_hermite(2).unwrap();
        assert_abs_diff_eq!(r2.nodes[0], -(0.5f64.sqrt()), epsilon = 1e-13);
        assert_abs_diff_eq!(r2.nodes[1], 0.5f64.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(r2.weights[0], PI.sqrt() / 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(r2.weights[1], PI.sqrt() / 2.0, epsilon = 1e-13);
    }

    #[test]
    fn gauss_hermite_invariants() {
        for n in 1..=64 {
            let r = gauss_hermite(n).unwrap();
            let wsum: f64 = r.weights.iter().sum();
            assert_abs_diff_eq!(wsum, PI.sqrt(), epsilon = 1e-12);
            for i in 0..n {
                assert_eq!(r.nodes[i], -r.nodes[n - 1 - i]);
            }
            if n >= 2 {
                let m2: f64 = r
                    .nodes
                    .iter()
                    .zip(&r.weights)
                    .map(|(x, w)| w * x * x)
                    .sum();
                assert_abs_diff_eq!(m2, PI.sqrt() / 2.0, epsilon = 1e-12);
            }
        }
        assert!(gauss_hermite(0).is_err());
        assert!(gauss_hermite(65).is_err());
    }

    #[test]
    fn gauss_hermite_integrates_moments_exactly() {
        // Closed-form Gaussian moments: int x^k e^{-x^2} dx = 0 for odd k,
        // sqrt(pi)*(k-1)!!/2^(k/2) for even k.
        let r = gauss_hermite(15).unwrap();
        let mut exact = PI.sqrt();
        for k in (0..=29).step_by(2) {
            if k > 0 {
                exact *= (k - 1) as f64 / 2.0;
            }
            let got: f64 = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(x, w)| w * x.powi(k))
                .sum();
            assert!(
                (got - exact).abs() <= 1e-12 * exact.max(1.0),
                "k = {k}: got {got}, exact {exact}"
            );
            // Odd moments cancel by symmetry; high moments reach ~1e10, so
            // judge the cancellation relative to the term magnitudes.
            let (odd, scale): (f64, f64) = r.nodes.iter().zip(&r.weights).fold(
                (0.0, 0.0),
                |(s, m), (x, w)| (s + w * x.powi(k + 1), m + w * x.abs().powi(k + 1)),
            );
            assert!(odd.abs() <= 1e-12 * scale.max(1.0), "k = {}: {odd}", k + 1);
        }
    }
}
