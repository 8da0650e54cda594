//! Gamma and cylinder (Bessel) functions.
//!
//! Everything downstream — kernel coefficients, admissibility ranges,
//! closed-form targets in the verification suite — routes through
//! [`gamma`]. The Bessel functions are evaluated from their ascending
//! power series, which is the regime the kernel constructors use
//! (arguments `2*sqrt(t)` at desk scale).

use crate::Error;

/// Truncation policy for power-series evaluation.
///
/// Summation runs in ascending term order and stops once a term's
/// magnitude drops below `rel_tol` times the magnitude of the partial
/// sum. Exhausting `max_terms` first is reported as non-convergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTolerance {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl SeriesTolerance {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self, Error> {
        if !(rel_tol > 0.0) {
            return Err(Error::InvalidTolerance(format!(
                "rel_tol = {rel_tol} must be > 0"
            )));
        }
        if max_terms < 1 {
            return Err(Error::InvalidTolerance(
                "max_terms must be >= 1".to_string(),
            ));
        }
        Ok(SeriesTolerance { rel_tol, max_terms })
    }
}

impl Default for SeriesTolerance {
    fn default() -> Self {
        SeriesTolerance {
            rel_tol: 1e-15,
            max_terms: 200,
        }
    }
}

// Lanczos approximation, g = 607/128, 15 coefficients (Godfrey's set).
// Leaves ~1e-14 relative error headroom over the 1e-12 accuracy target
// on [-20, 50].
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_C: [f64; 15] = [
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
];

/// `sin(pi * x)` with the argument reduced exactly, so the result stays
/// accurate near integer `x` where the naive product loses digits.
fn sin_pi(x: f64) -> f64 {
    let m = x.round();
    let z = x - m; // exact for |x| within f64 integer range
    let s = (std::f64::consts::PI * z).sin();
    if (m as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

/// Unchecked gamma; returns non-finite values at the poles.
pub(crate) fn gamma_raw(x: f64) -> f64 {
    // exact factorials at small integer arguments (18! < 2^53), so the
    // common integration kernels carry no approximation error at all
    if x == x.floor() && x >= 1.0 && x <= 18.0 {
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < x {
            acc *= k;
            k += 1.0;
        }
        return acc;
    }
    if x < 0.5 {
        // reflection: gamma(x) = pi / (sin(pi x) * gamma(1 - x))
        std::f64::consts::PI / (sin_pi(x) * gamma_raw(1.0 - x))
    } else {
        let mut ser = LANCZOS_C[0];
        for (j, c) in LANCZOS_C.iter().enumerate().skip(1) {
            ser += c / (x - 1.0 + j as f64);
        }
        let base = x + LANCZOS_G - 0.5;
        (2.0 * std::f64::consts::PI).sqrt() * base.powf(x - 0.5) * (-base).exp() * ser
    }
}

/// Gamma function, accurate to better than twelve significant digits on
/// `[-20, 50]`. Non-positive integers are poles and are rejected.
pub fn gamma(x: f64) -> Result<f64, Error> {
    if x <= 0.0 && x == x.floor() {
        return Err(Error::GammaPole { x });
    }
    Ok(gamma_raw(x))
}

/// Shared series for `J` (`sign = -1`) and `I` (`sign = +1`):
/// `sum_k sign^k (t/2)^(2k+nu) / (k! gamma(k+nu+1))`.
fn cylinder_series(nu: f64, t: f64, sign: f64, tol: &SeriesTolerance) -> Result<f64, Error> {
    if !(nu > -1.0) {
        return Err(Error::out_of_range("nu", nu, "(-1, inf)"));
    }
    if t < 0.0 {
        return Err(Error::out_of_range("t", t, "[0, inf)"));
    }
    if t == 0.0 {
        // limit of (t/2)^nu / gamma(nu+1) as t -> 0+
        return Ok(if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    let x = 0.5 * t;
    let x2 = x * x;
    let mut term = x.powf(nu) / gamma_raw(nu + 1.0);
    let mut sum = term;
    for k in 0..tol.max_terms {
        let kf = k as f64;
        term *= sign * x2 / ((kf + 1.0) * (kf + 1.0 + nu));
        sum += term;
        if term.abs() < tol.rel_tol * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::SeriesNonConvergence {
        max_terms: tol.max_terms,
        last_term: term,
    })
}

/// Bessel function of the first kind `J_nu(t)` for `nu > -1`, `t >= 0`.
pub fn bessel_j(nu: f64, t: f64, tol: &SeriesTolerance) -> Result<f64, Error> {
    cylinder_series(nu, t, -1.0, tol)
}

/// Modified Bessel function of the first kind `I_nu(t)` for `nu > -1`,
/// `t >= 0`.
pub fn bessel_i(nu: f64, t: f64, tol: &SeriesTolerance) -> Result<f64, Error> {
    cylinder_series(nu, t, 1.0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rel_err(got: f64, want: f64) -> f64 {
        (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
    }

    /// Oracle: gamma at half-integers from sqrt(pi) by exact recurrence,
    /// independent of the Lanczos code path.
    fn gamma_half_integer_oracle(x: f64) -> f64 {
        assert_eq!((x - 0.5).fract(), 0.0, "oracle wants half-integer x");
        let mut v = PI.sqrt(); // gamma(1/2)
        let mut a = 0.5;
        while a < x {
            v *= a;
            a += 1.0;
        }
        while a > x {
            a -= 1.0;
            v /= a;
        }
        v
    }

    /// Oracle: gamma at positive integers via factorial product.
    fn factorial_oracle(n: u32) -> f64 {
        (1..n).fold(1.0_f64, |acc, k| acc * k as f64)
    }

    #[test]
    fn gamma_matches_half_integer_ladder() {
        // spans the stated accuracy window [-20, 50]
        for half in [-19.5, -7.5, -2.5, -1.5, -0.5, 0.5, 1.5, 7.5, 20.5, 49.5] {
            let want = gamma_half_integer_oracle(half);
            let got = gamma(half).unwrap();
            assert!(
                rel_err(got, want) < 1e-12,
                "gamma({half}) = {got}, oracle {want}"
            );
        }
    }

    #[test]
    fn gamma_matches_factorials() {
        for n in [1u32, 2, 3, 7, 20, 50] {
            let got = gamma(n as f64).unwrap();
            let want = factorial_oracle(n);
            assert!(
                rel_err(got, want) < 1e-12,
                "gamma({n}) = {got}, oracle {want}"
            );
        }
    }

    #[test]
    fn gamma_half_reference_value() {
        // frozen: sqrt(pi)
        let got = gamma(0.5).unwrap();
        assert!(rel_err(got, 1.7724538509055160273) < 1e-14);
        assert!(rel_err(got, PI.sqrt()) < 1e-14);
    }

    #[test]
    fn gamma_rejects_poles() {
        for x in [0.0, -1.0, -2.0, -20.0] {
            match gamma(x) {
                Err(Error::GammaPole { .. }) => {}
                other => panic!("gamma({x}) should be a pole, got {other:?}"),
            }
        }
        // nearby non-integers are fine
        assert!(gamma(-1.0 + 1e-6).is_ok());
    }

    proptest! {
        #[test]
        fn gamma_recurrence(x in 0.1f64..20.0) {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            prop_assert!(rel_err(lhs, rhs) < 1e-12, "x = {}, lhs = {}, rhs = {}", x, lhs, rhs);
        }

        #[test]
        fn gamma_reflection(x in 0.05f64..0.95) {
            // gamma(x) * gamma(1-x) = pi / sin(pi x); mixes both branches
            let lhs = gamma(x).unwrap() * gamma(1.0 - x).unwrap();
            let rhs = PI / (PI * x).sin();
            prop_assert!(rel_err(lhs, rhs) < 1e-12);
        }
    }

    // --- Bessel oracles: closed forms at half-integer order -----------

    fn j_half_oracle(t: f64) -> f64 {
        (2.0 / (PI * t)).sqrt() * t.sin()
    }

    fn i_neg_half_oracle(t: f64) -> f64 {
        (2.0 / (PI * t)).sqrt() * t.cosh()
    }

    fn i_half_oracle(t: f64) -> f64 {
        (2.0 / (PI * t)).sqrt() * t.sinh()
    }

    /// Cancellation in the alternating J series inflates rounding error
    /// by roughly `I_nu(t) / |J_nu(t)|`; tolerances scale with that.
    fn j_rel_tol(nu: f64, t: f64, want: f64) -> f64 {
        let tol = SeriesTolerance::default();
        let cond = bessel_i(nu, t, &tol).unwrap() / want.abs().max(f64::MIN_POSITIVE);
        1e-12 * cond.max(1.0)
    }

    #[test]
    fn bessel_j_half_closed_form() {
        let tol = SeriesTolerance::default();
        for t in [0.25, 1.0, 2.0, 5.0, 12.0] {
            let got = bessel_j(0.5, t, &tol).unwrap();
            let want = j_half_oracle(t);
            assert!(
                rel_err(got, want) < j_rel_tol(0.5, t, want),
                "J_1/2({t}) = {got}, oracle {want}"
            );
        }
        // frozen value from the closed form sin(2)/sqrt(pi)
        let got = bessel_j(0.5, 2.0, &tol).unwrap();
        assert!((got - 0.5130161365618278).abs() < 1e-14);
    }

    #[test]
    fn bessel_i_half_closed_forms() {
        let tol = SeriesTolerance::default();
        for t in [0.25, 1.0, 2.0, 5.0, 12.0] {
            let got = bessel_i(-0.5, t, &tol).unwrap();
            assert!(rel_err(got, i_neg_half_oracle(t)) < 1e-12);
            let got = bessel_i(0.5, t, &tol).unwrap();
            assert!(rel_err(got, i_half_oracle(t)) < 1e-12);
        }
        // frozen value from the closed form sqrt(2/pi) * cosh(1)
        let got = bessel_i(-0.5, 1.0, &tol).unwrap();
        assert!((got - 1.2312002145929675).abs() < 1e-14);
    }

    /// Oracle: brute-force summation of the defining series, terms built
    /// from scratch per index and accumulated smallest-first, so it does
    /// not share the production ratio recurrence.
    fn brute_force_series(nu: f64, t: f64, sign: f64, terms: usize) -> f64 {
        let x = 0.5 * t;
        let mut vals = Vec::new();
        for k in 0..terms {
            let mut denom = gamma(nu + 1.0).unwrap();
            for i in 1..=k {
                denom *= i as f64 * (nu + i as f64);
            }
            vals.push(sign.powi(k as i32) * x.powf(2.0 * k as f64 + nu) / denom);
        }
        vals.iter().rev().sum()
    }

    #[test]
    fn bessel_series_match_brute_force() {
        let tol = SeriesTolerance::default();
        for nu in [-0.7, -0.3, 0.0, 0.4, 1.6, 3.0] {
            for t in [0.1, 0.9, 3.0, 7.5] {
                let j = bessel_j(nu, t, &tol).unwrap();
                let i = bessel_i(nu, t, &tol).unwrap();
                let jb = brute_force_series(nu, t, -1.0, 30);
                let ib = brute_force_series(nu, t, 1.0, 30);
                assert!(
                    rel_err(j, jb) < j_rel_tol(nu, t, jb),
                    "J_{nu}({t}): {j} vs {jb}"
                );
                assert!(rel_err(i, ib) < 1e-12, "I_{nu}({t}): {i} vs {ib}");
            }
        }
    }

    #[test]
    fn bessel_limits_at_zero() {
        let tol = SeriesTolerance::default();
        assert_eq!(bessel_j(0.0, 0.0, &tol).unwrap(), 1.0);
        assert_eq!(bessel_i(0.0, 0.0, &tol).unwrap(), 1.0);
        assert_eq!(bessel_j(1.3, 0.0, &tol).unwrap(), 0.0);
        assert_eq!(bessel_i(0.5, 0.0, &tol).unwrap(), 0.0);
        assert_eq!(bessel_j(-0.5, 0.0, &tol).unwrap(), f64::INFINITY);
    }

    #[test]
    fn bessel_domain_errors() {
        let tol = SeriesTolerance::default();
        assert!(matches!(
            bessel_j(-1.0, 1.0, &tol),
            Err(Error::OutOfRange { name: "nu", .. })
        ));
        assert!(matches!(
            bessel_i(-1.5, 1.0, &tol),
            Err(Error::OutOfRange { name: "nu", .. })
        ));
        assert!(matches!(
            bessel_j(0.5, -0.1, &tol),
            Err(Error::OutOfRange { name: "t", .. })
        ));
    }

    #[test]
    fn series_tolerance_validation() {
        assert!(SeriesTolerance::new(1e-12, 100).is_ok());
        assert!(SeriesTolerance::new(0.0, 100).is_err());
        assert!(SeriesTolerance::new(-1e-9, 100).is_err());
        assert!(SeriesTolerance::new(1e-12, 0).is_err());
    }

    #[test]
    fn series_nonconvergence_reported() {
        let tight = SeriesTolerance::new(1e-15, 3).unwrap();
        assert!(matches!(
            bessel_i(0.3, 9.0, &tight),
            Err(Error::SeriesNonConvergence { max_terms: 3, .. })
        ));
    }

    #[test]
    fn dominance_of_modified_over_ordinary() {
        // I_nu(t) >= |J_nu(t)| pointwise (termwise |.| comparison)
        let tol = SeriesTolerance::default();
        for nu in [-0.9, -0.5, 0.0, 0.5, 1.0, 2.7] {
            let mut t = 0.0;
            while t <= 50.0 {
                let i = bessel_i(nu, t, &tol).unwrap();
                let j = bessel_j(nu, t, &tol).unwrap();
                assert!(i >= j.abs(), "nu = {nu}, t = {t}: I = {i}, J = {j}");
                t += 2.5;
            }
        }
    }

    proptest! {
        /// Halving rel_tol moves the value by no more than the looser
        /// tolerance (plus a rounding floor).
        #[test]
        fn truncation_is_tolerance_bounded(
            t in 0.1f64..8.0,
            nu in -0.7f64..2.0,
            exp in 6u32..11,
        ) {
            let tau = 10f64.powi(-(exp as i32));
            let loose = SeriesTolerance::new(tau, 200).unwrap();
            let tight = SeriesTolerance::new(tau / 2.0, 200).unwrap();
            for sign in [-1.0, 1.0] {
                let a = cylinder_series(nu, t, sign, &loose).unwrap();
                let b = cylinder_series(nu, t, sign, &tight).unwrap();
                prop_assert!(
                    (a - b).abs() <= tau * b.abs() + 1e-12,
                    "nu={} t={} tau={}: {} vs {}", nu, t, tau, a, b
                );
            }
        }
    }
}
