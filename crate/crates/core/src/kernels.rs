//! Sonine kernels and kernel pairs.
//!
//! Every kernel here has the form `kernel(t) = t^p * A(t)` with
//! `p > -1` and `A` either a constant or a truncated power series with
//! `A(0) != 0`. A pair `(kappa, k)` of order `n` is *admissible* when
//! `kappa` has exponent `> -1`, `k` has exponent in `(-1, 0)`, and
//! their convolution is `t^(n-1)/(n-1)!`; the constructors below build
//! families for which that holds by design, and
//! [`crate::verify::check_pair_condition`] certifies it numerically.
//!
//! Raising both members of an order-1 pair to `n`-fold convolution
//! powers would also satisfy the order-`n` condition algebraically, but
//! the `n`-fold power of `k` has exponent `n*(q+1) - 1` with
//! `q in (-1, 0)`, which leaves the admissible range `(-1, 0)` for most
//! `q`. That route is therefore deliberately not constructible here;
//! [`KernelPair::lift`] keeps `k` fixed and convolves extra integrations
//! into `kappa` instead, which stays admissible for every order.

use crate::specfun::gamma_raw;
use crate::Error;

/// Number of retained series terms for the built-in entire-series
/// kernels (Bessel-type). The last retained term at `t = 80` is below
/// `1e-49`, far under quadrature accuracy for every supported use.
const SERIES_TERMS: usize = 60;

/// Which constructor produced a kernel, carried along for reporting and
/// serialization. Evaluation only ever uses `exponent` + analytic part.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    /// `t^(alpha-1) / gamma(alpha)`, the kernel of `alpha`-fold
    /// integration.
    Power { alpha: f64 },
    /// `t^(nu/2) * J_nu(2 sqrt(t))` expanded as a power series in `t`.
    BesselJScaled { nu: f64 },
    /// `t^(nu/2) * I_nu(2 sqrt(t))` expanded as a power series in `t`.
    BesselIScaled { nu: f64 },
    /// Truncated Sonine series `h_alpha(t) * sum a_k t^k` (or its
    /// associate).
    Series { alpha: f64 },
    /// Result of convolving `shift` extra integrations into a series
    /// kernel.
    Lifted { shift: u32 },
}

impl KernelFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            KernelFamily::Power { .. } => "power",
            KernelFamily::BesselJScaled { .. } => "bessel_j_scaled",
            KernelFamily::BesselIScaled { .. } => "bessel_i_scaled",
            KernelFamily::Series { .. } => "series",
            KernelFamily::Lifted { .. } => "lifted",
        }
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        match self {
            KernelFamily::Power { alpha } => vec![("alpha", *alpha)],
            KernelFamily::BesselJScaled { nu } => vec![("nu", *nu)],
            KernelFamily::BesselIScaled { nu } => vec![("nu", *nu)],
            KernelFamily::Series { alpha } => vec![("alpha", *alpha)],
            KernelFamily::Lifted { shift } => vec![("shift", *shift as f64)],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum AnalyticPart {
    Constant(f64),
    /// `A(t) = sum_k coeffs[k] * t^k`, `coeffs[0] != 0`.
    Series(Vec<f64>),
}

/// A weakly singular (or continuous) kernel `t^exponent * A(t)` on
/// `(0, T]`, with `exponent > -1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    family: KernelFamily,
    exponent: f64,
    pub(crate) analytic: AnalyticPart,
}

impl Kernel {
    fn new(family: KernelFamily, exponent: f64, analytic: AnalyticPart) -> Result<Self, Error> {
        if !(exponent > -1.0) || !exponent.is_finite() {
            return Err(Error::out_of_range("exponent", exponent, "(-1, inf)"));
        }
        Ok(Kernel {
            family,
            exponent,
            analytic,
        })
    }

    /// `h_alpha(t) = t^(alpha-1) / gamma(alpha)` for `alpha > 0`.
    pub fn power(alpha: f64) -> Result<Self, Error> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::out_of_range("alpha", alpha, "(0, inf)"));
        }
        Kernel::new(
            KernelFamily::Power { alpha },
            alpha - 1.0,
            AnalyticPart::Constant(1.0 / gamma_raw(alpha)),
        )
    }

    /// Scaled cylinder-function kernel `t^(nu/2) C_nu(2 sqrt(t))` as an
    /// explicit series: coefficient of `t^(k+nu)` is
    /// `sign^k / (k! gamma(k+nu+1))`.
    fn cylinder(nu: f64, sign: f64) -> Result<Self, Error> {
        let mut coeffs = Vec::with_capacity(SERIES_TERMS);
        let mut c = 1.0 / gamma_raw(nu + 1.0);
        for k in 0..SERIES_TERMS {
            coeffs.push(c);
            let kf = k as f64;
            c *= sign / ((kf + 1.0) * (kf + 1.0 + nu));
        }
        let family = if sign < 0.0 {
            KernelFamily::BesselJScaled { nu }
        } else {
            KernelFamily::BesselIScaled { nu }
        };
        Kernel::new(family, nu, AnalyticPart::Series(coeffs))
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    /// Exponent `p` of the leading power `t^p`.
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Series coefficients `c_k` of `sum c_k t^(k+p)`; empty for power
    /// kernels, whose analytic part is a constant.
    pub fn coeffs(&self) -> &[f64] {
        match &self.analytic {
            AnalyticPart::Constant(_) => &[],
            AnalyticPart::Series(c) => c,
        }
    }

    /// The analytic factor `A(t)`.
    pub(crate) fn analytic_eval(&self, t: f64) -> f64 {
        match &self.analytic {
            AnalyticPart::Constant(c) => *c,
            AnalyticPart::Series(coeffs) => {
                let mut acc = 0.0;
                for c in coeffs.iter().rev() {
                    acc = acc * t + c;
                }
                acc
            }
        }
    }

    /// Kernel value at `t`. `t = 0` is admissible only when the kernel
    /// is not singular there (`exponent >= 0`).
    pub fn eval(&self, t: f64) -> Result<f64, Error> {
        if t < 0.0 || (t == 0.0 && self.exponent < 0.0) {
            let range = if self.exponent < 0.0 { "(0, inf)" } else { "[0, inf)" };
            return Err(Error::out_of_range("t", t, range));
        }
        Ok(t.powf(self.exponent) * self.analytic_eval(t))
    }

    /// `m`-th pointwise derivative at `t > 0`, taken termwise:
    /// `t^q` maps to `q (q-1) ... (q-m+1) t^(q-m)`.
    pub fn derivative(&self, m: u32, t: f64) -> Result<f64, Error> {
        if m == 0 {
            return self.eval(t);
        }
        if t <= 0.0 {
            return Err(Error::out_of_range("t", t, "(0, inf)"));
        }
        let p = self.exponent;
        Ok(match &self.analytic {
            AnalyticPart::Constant(c) => c * falling(p, m) * t.powf(p - m as f64),
            AnalyticPart::Series(coeffs) => {
                // Horner in t over the differentiated series
                let mut acc = 0.0;
                for (k, c) in coeffs.iter().enumerate().rev() {
                    acc = acc * t + c * falling(p + k as f64, m);
                }
                acc * t.powf(p - m as f64)
            }
        })
    }

    /// The `m`-th derivative as a kernel object, when it stays in the
    /// admissible class (exponent `> -1`). Used by the verification
    /// checks, which convolve `k` against derivatives of `kappa`.
    pub(crate) fn derivative_kernel(&self, m: u32) -> Result<Self, Error> {
        if m == 0 {
            return Ok(self.clone());
        }
        let p = self.exponent;
        let new_p = p - m as f64;
        let analytic = match &self.analytic {
            AnalyticPart::Constant(c) => AnalyticPart::Constant(c * falling(p, m)),
            AnalyticPart::Series(coeffs) => AnalyticPart::Series(
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * falling(p + k as f64, m))
                    .collect(),
            ),
        };
        Kernel::new(self.family.clone(), new_p, analytic)
    }

    /// Magnitude of the last retained series term at `t`, as a
    /// truncation indicator; `None` for closed-form kernels.
    pub fn tail_bound(&self, t: f64) -> Option<f64> {
        match &self.analytic {
            AnalyticPart::Constant(_) => None,
            AnalyticPart::Series(coeffs) => {
                let k = coeffs.len() - 1;
                Some((coeffs[k] * t.powf(self.exponent + k as f64)).abs())
            }
        }
    }

    /// One-line text record: family tag, exponent, named parameters,
    /// coefficients, all reals at 17 significant digits.
    pub fn record(&self) -> String {
        let mut s = format!(
            "family={} exponent={:.16e}",
            self.family.tag(),
            self.exponent
        );
        for (name, value) in self.family.params() {
            s.push_str(&format!(" {name}={value:.16e}"));
        }
        let coeffs = self.coeffs();
        s.push_str(" coeffs=");
        for (i, c) in coeffs.iter().enumerate() {
            if i > 0 {
                s.push(';');
            }
            s.push_str(&format!("{c:.16e}"));
        }
        s
    }
}

/// Falling factorial `q (q-1) ... (q-m+1)`; hits an exact zero whenever
/// `q` is a nonnegative integer below `m`, which is what makes
/// polynomial terms vanish under differentiation.
fn falling(q: f64, m: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..m {
        acc *= q - i as f64;
    }
    acc
}

/// An admissible kernel pair of order `n`: generalized integration
/// against `kappa`, differentiation against `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPair {
    kappa: Kernel,
    k: Kernel,
    order: u32,
}

impl KernelPair {
    /// Validates class membership (not the convolution condition, which
    /// is a numerical statement certified by the verify module).
    pub fn new(kappa: Kernel, k: Kernel, order: u32) -> Result<Self, Error> {
        if order < 1 {
            return Err(Error::out_of_range("order", order as f64, "[1, inf) integers"));
        }
        if !(k.exponent > -1.0 && k.exponent < 0.0) {
            return Err(Error::out_of_range("k exponent", k.exponent, "(-1, 0)"));
        }
        Ok(KernelPair { kappa, k, order })
    }

    /// Power-law pair `(h_alpha, h_(n-alpha))` for `n-1 < alpha < n`;
    /// reproduces the classical Riemann-Liouville operators.
    pub fn power(alpha: f64, n: u32) -> Result<Self, Error> {
        let (lo, hi) = (n as f64 - 1.0, n as f64);
        if !(alpha > lo && alpha < hi) {
            return Err(Error::out_of_range("alpha", alpha, format!("({lo}, {hi})")));
        }
        KernelPair::new(Kernel::power(alpha)?, Kernel::power(hi - alpha)?, n)
    }

    /// Cylinder-function pair of order `n` for `n-2 < nu < n-1`:
    /// `kappa(t) = t^(nu/2) J_nu(2 sqrt(t))`,
    /// `k(t) = t^((n-nu)/2-1) I_(n-nu-2)(2 sqrt(t))`.
    pub fn bessel(nu: f64, n: u32) -> Result<Self, Error> {
        let (lo, hi) = (n as f64 - 2.0, n as f64 - 1.0);
        if !(nu > lo && nu < hi) {
            return Err(Error::out_of_range("nu", nu, format!("({lo}, {hi})")));
        }
        let kappa = Kernel::cylinder(nu, -1.0)?;
        let k = Kernel::cylinder(n as f64 - nu - 2.0, 1.0)?;
        KernelPair::new(kappa, k, n)
    }

    /// Order-1 pair from a truncated Sonine series:
    /// `kappa = h_alpha * sum_(k<=n_terms) a_k t^k` with the associated
    /// `k = h_(1-alpha) * sum b_k t^k` solved from the pair condition.
    /// Retains powers `t^0 .. t^n_terms` on both sides.
    pub fn series(a: &[f64], alpha: f64, n_terms: usize) -> Result<Self, Error> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::out_of_range("alpha", alpha, "(0, 1)"));
        }
        let b = solve_associated_coefficients(a, alpha, n_terms)?;
        let ga = gamma_raw(alpha);
        let gb = gamma_raw(1.0 - alpha);
        let mut ka = Vec::with_capacity(n_terms + 1);
        for k in 0..=n_terms {
            ka.push(a.get(k).copied().unwrap_or(0.0) / ga);
        }
        let kb: Vec<f64> = b.iter().map(|v| v / gb).collect();
        let kappa = Kernel::new(
            KernelFamily::Series { alpha },
            alpha - 1.0,
            AnalyticPart::Series(ka),
        )?;
        let k = Kernel::new(
            KernelFamily::Series { alpha },
            -alpha,
            AnalyticPart::Series(kb),
        )?;
        KernelPair::new(kappa, k, 1)
    }

    /// Lifts an order-1 pair to order `n >= 2` by convolving `n-1`
    /// integrations into `kappa` and keeping `k` unchanged. Power
    /// kernels lift exactly (`h_beta` to `h_(beta+n-1)`); series kernels
    /// lift termwise via
    /// `t^q -> t^(q+n-1) * gamma(q+1)/gamma(q+n)`.
    pub fn lift(&self, n: u32) -> Result<Self, Error> {
        if self.order != 1 {
            return Err(Error::Unsupported(format!(
                "lift requires an order-1 pair, got order {}",
                self.order
            )));
        }
        if n < 2 {
            return Err(Error::out_of_range("n", n as f64, "[2, inf) integers"));
        }
        let shift = (n - 1) as f64;
        let kappa = &self.kappa;
        let lifted = match &kappa.family {
            KernelFamily::Power { alpha } => Kernel::power(alpha + shift)?,
            // exact: shifting nu by n-1 reproduces the termwise
            // gamma-ratio lift for this family
            KernelFamily::BesselJScaled { nu } => Kernel::cylinder(nu + shift, -1.0)?,
            _ => {
                let p = kappa.exponent;
                let coeffs: Vec<f64> = kappa
                    .coeffs()
                    .iter()
                    .enumerate()
                    .map(|(k, c)| {
                        let q = p + k as f64;
                        c * gamma_raw(q + 1.0) / gamma_raw(q + n as f64)
                    })
                    .collect();
                Kernel::new(
                    KernelFamily::Lifted { shift: n - 1 },
                    p + shift,
                    AnalyticPart::Series(coeffs),
                )?
            }
        };
        KernelPair::new(lifted, self.k.clone(), n)
    }

    pub fn kappa(&self) -> &Kernel {
        &self.kappa
    }

    pub fn k(&self) -> &Kernel {
        &self.k
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Two-line text record of the pair (see [`Kernel::record`]).
    pub fn record(&self) -> String {
        format!(
            "order={} role=kappa {}\norder={} role=k {}",
            self.order,
            self.kappa.record(),
            self.order,
            self.k.record()
        )
    }
}

// --- compensated (double-double) arithmetic -------------------------
//
// The associate-coefficient recursion is a power-series reciprocal; in
// plain f64 its rounding errors compound roughly like 2^m by term m,
// which is visible well before m = 20. Carrying the recurrence state in
// unevaluated double-double form removes the compounding; only the
// one-rounding representation error of the inputs remains.

#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let hi = a + b;
    let v = hi - a;
    let lo = (a - (hi - v)) + (b - v);
    Dd { hi, lo }
}

fn quick_renorm(hi: f64, lo: f64) -> Dd {
    let s = hi + lo;
    Dd {
        hi: s,
        lo: lo - (s - hi),
    }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let hi = a * b;
    let lo = a.mul_add(b, -hi);
    Dd { hi, lo }
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, other: Dd) -> Dd {
        let s = two_sum(self.hi, other.hi);
        quick_renorm(s.hi, s.lo + self.lo + other.lo)
    }

    fn mul(self, other: Dd) -> Dd {
        let p = two_prod(self.hi, other.hi);
        quick_renorm(p.hi, p.lo + self.hi * other.lo + self.lo * other.hi)
    }

    fn div(self, other: Dd) -> Dd {
        let q0 = self.hi / other.hi;
        let r = self.add(other.mul(Dd::from(-q0)));
        quick_renorm(q0, (r.hi + r.lo) / other.hi)
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

/// Solves the triangular system pairing `a` with its Sonine associate:
/// `b_0 = 1/a_0` and, for `1 <= m <= n`,
/// `sum_(k=0..m) gamma(k+1-alpha) gamma(alpha+m-k) a_(m-k) b_k = 0`.
/// Missing entries of `a` are treated as zero; returns `b_0 ..= b_n`.
pub fn solve_associated_coefficients(a: &[f64], alpha: f64, n: usize) -> Result<Vec<f64>, Error> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::out_of_range("alpha", alpha, "(0, 1)"));
    }
    let a0 = a.first().copied().unwrap_or(0.0);
    if a0 == 0.0 {
        return Err(Error::InvalidInput(
            "leading coefficient a_0 must be nonzero".to_string(),
        ));
    }
    let at = |i: usize| a.get(i).copied().unwrap_or(0.0);

    // grouped form: with A_j = gamma(j+alpha) a_j and
    // beta_k = gamma(k+1-alpha) b_k the system is the series reciprocal
    // sum_(k=0..m) A_(m-k) beta_k = 0
    let big_a: Vec<Dd> = (0..=n)
        .map(|j| two_prod(gamma_raw(j as f64 + alpha), at(j)))
        .collect();
    let g_dn: Vec<f64> = (0..=n)
        .map(|k| gamma_raw(k as f64 + 1.0 - alpha))
        .collect();
    let mut beta: Vec<Dd> = vec![Dd::from(g_dn[0]).div(Dd::from(a0))];
    let mut b = Vec::with_capacity(n + 1);
    b.push(1.0 / a0);
    for m in 1..=n {
        let mut acc = Dd::from(0.0);
        for (k, bk) in beta.iter().enumerate() {
            acc = acc.add(big_a[m - k].mul(*bk));
        }
        let bm = acc.neg().div(big_a[0]);
        beta.push(bm);
        b.push(bm.div(Dd::from(g_dn[m])).hi);
    }
    Ok(b)
}

/// The built-in pair catalog: one representative per constructor family
/// and order, used by the verification suite and the CLI listing.
pub fn standard_pairs() -> Vec<(&'static str, KernelPair)> {
    vec![
        ("power_a0.5_n1", KernelPair::power(0.5, 1).unwrap()),
        ("power_a1.5_n2", KernelPair::power(1.5, 2).unwrap()),
        ("power_a2.5_n3", KernelPair::power(2.5, 3).unwrap()),
        ("bessel_nu-0.5_n1", KernelPair::bessel(-0.5, 1).unwrap()),
        ("bessel_nu0.5_n2", KernelPair::bessel(0.5, 2).unwrap()),
        (
            "series_a0.3_n1",
            KernelPair::series(&[1.0, -1.0], 0.3, 12).unwrap(),
        ),
        (
            "lifted_bessel_n2",
            KernelPair::bessel(-0.5, 1).unwrap().lift(2).unwrap(),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{bessel_i, bessel_j, gamma, SeriesTolerance};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rel_err(got: f64, want: f64) -> f64 {
        (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn power_kernel_matches_closed_form() {
        let k = Kernel::power(0.5).unwrap();
        // t^(-1/2)/sqrt(pi) at t = 0.25 is 2/sqrt(pi)
        let want = 2.0 / PI.sqrt();
        assert!(rel_err(k.eval(0.25).unwrap(), want) < 1e-14);
        assert_eq!(k.exponent(), -0.5);
        assert!(k.coeffs().is_empty());
        // integration kernel of order 1 is the constant one
        let one = Kernel::power(1.0).unwrap();
        assert_eq!(one.eval(0.7).unwrap(), 1.0);
        assert_eq!(one.eval(0.0).unwrap(), 1.0);
    }

    #[test]
    fn power_kernel_rejects_bad_alpha() {
        assert!(matches!(
            Kernel::power(0.0),
            Err(Error::OutOfRange { name: "alpha", .. })
        ));
        assert!(Kernel::power(-2.0).is_err());
    }

    #[test]
    fn eval_domain_rules() {
        let singular = Kernel::power(0.5).unwrap();
        assert!(singular.eval(0.0).is_err());
        assert!(singular.eval(-1.0).is_err());
        let continuous = Kernel::power(1.5).unwrap();
        assert_eq!(continuous.eval(0.0).unwrap(), 0.0);
        assert!(continuous.eval(-1.0).is_err());
    }

    // Closed-form oracles for the order-1 cylinder pair at nu = -1/2:
    //   kappa(t) = cos(2 sqrt(t)) / sqrt(pi t)
    //   k(t)     = cosh(2 sqrt(t)) / sqrt(pi t)
    #[test]
    fn bessel_pair_order1_closed_forms() {
        let pair = KernelPair::bessel(-0.5, 1).unwrap();
        for t in [0.05f64, 0.3, 1.0, 2.0] {
            let x = 2.0 * t.sqrt();
            let kappa_want = x.cos() / (PI * t).sqrt();
            let k_want = x.cosh() / (PI * t).sqrt();
            assert!(rel_err(pair.kappa().eval(t).unwrap(), kappa_want) < 1e-13);
            assert!(rel_err(pair.k().eval(t).unwrap(), k_want) < 1e-13);
        }
        assert_eq!(pair.kappa().exponent(), -0.5);
        assert_eq!(pair.k().exponent(), -0.5);
    }

    #[test]
    fn bessel_pair_matches_specfun_evaluation() {
        // series-in-t representation against t^(nu/2) C_nu(2 sqrt(t))
        let tol = SeriesTolerance::default();
        let pair = KernelPair::bessel(0.5, 2).unwrap();
        for t in [0.1f64, 0.7, 1.9] {
            let x = 2.0 * t.sqrt();
            let kappa_want = t.powf(0.25) * bessel_j(0.5, x, &tol).unwrap();
            let k_want = t.powf(-0.25) * bessel_i(-0.5, x, &tol).unwrap();
            assert!(rel_err(pair.kappa().eval(t).unwrap(), kappa_want) < 1e-13);
            assert!(rel_err(pair.k().eval(t).unwrap(), k_want) < 1e-13);
        }
    }

    #[test]
    fn bessel_pair_coefficients_closed_form() {
        let pair = KernelPair::bessel(0.5, 2).unwrap();
        let c = pair.kappa().coeffs();
        for k in 0..10usize {
            let mut want = 1.0 / gamma(k as f64 + 1.5).unwrap();
            for i in 1..=k {
                want /= i as f64;
            }
            if k % 2 == 1 {
                want = -want;
            }
            assert!(rel_err(c[k], want) < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn pair_admissibility_messages() {
        let err = KernelPair::power(1.0, 1).unwrap_err();
        assert_eq!(err.to_string(), "alpha = 1 outside admissible range (0, 1)");
        assert!(KernelPair::power(2.0, 2).is_err());
        assert!(KernelPair::power(0.5, 2).is_err());
        let err = KernelPair::bessel(0.5, 1).unwrap_err();
        assert!(err.to_string().contains("(-1, 0)"));
        assert!(KernelPair::bessel(-0.5, 2).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        // central difference with step 1e-5, agreement to 1e-6
        let h = 1e-5;
        let kernels = [
            Kernel::power(1.5).unwrap(),
            Kernel::power(0.5).unwrap(),
            KernelPair::bessel(0.5, 2).unwrap().kappa().clone(),
            KernelPair::bessel(-0.5, 1).unwrap().k().clone(),
        ];
        for kernel in &kernels {
            for t in [0.4, 0.9] {
                let fd1 =
                    (kernel.eval(t + h).unwrap() - kernel.eval(t - h).unwrap()) / (2.0 * h);
                let d1 = kernel.derivative(1, t).unwrap();
                assert!(
                    (d1 - fd1).abs() <= 1e-6 * d1.abs().max(1.0),
                    "{:?} m=1 t={t}: {d1} vs {fd1}",
                    kernel.family().tag()
                );
                let fd2 = (kernel.eval(t + h).unwrap() - 2.0 * kernel.eval(t).unwrap()
                    + kernel.eval(t - h).unwrap())
                    / (h * h);
                let d2 = kernel.derivative(2, t).unwrap();
                assert!(
                    (d2 - fd2).abs() <= 1e-4 * d2.abs().max(1.0),
                    "{:?} m=2 t={t}: {d2} vs {fd2}",
                    kernel.family().tag()
                );
            }
        }
    }

    #[test]
    fn power_derivative_is_shifted_power() {
        // d/dt h_alpha = h_(alpha-1) pointwise; second derivative of h_2
        // (the linear kernel t) vanishes identically
        let k = Kernel::power(2.0).unwrap();
        assert_eq!(k.derivative(2, 0.7).unwrap(), 0.0);
        let k = Kernel::power(0.5).unwrap();
        let want = |t: f64| t.powf(-1.5) / gamma(-0.5).unwrap();
        assert!(rel_err(k.derivative(1, 0.3).unwrap(), want(0.3)) < 1e-13);
    }

    #[test]
    fn derivative_kernel_matches_pointwise_derivative() {
        let kappa = KernelPair::bessel(0.5, 2).unwrap().kappa().clone();
        let dk = kappa.derivative_kernel(1).unwrap();
        for t in [0.2, 0.8, 1.7] {
            assert!(rel_err(dk.eval(t).unwrap(), kappa.derivative(1, t).unwrap()) < 1e-14);
        }
        // exponent drops by one and stays admissible here
        assert_eq!(dk.exponent(), kappa.exponent() - 1.0);
        // h_0.5 second derivative leaves the admissible class
        assert!(Kernel::power(0.5).unwrap().derivative_kernel(2).is_err());
    }

    #[test]
    fn associated_coefficients_recover_bessel_closed_form() {
        // a_k = (-1)^k gamma(alpha) / (k! gamma(k+alpha))  pairs with
        // b_k = gamma(1-alpha) / (k! gamma(k+1-alpha))
        let alpha = 0.7;
        let ga = gamma(alpha).unwrap();
        let gb = gamma(1.0 - alpha).unwrap();
        let mut a = Vec::new();
        let mut want_b = Vec::new();
        let mut kfact = 1.0;
        for k in 0..=20usize {
            if k > 0 {
                kfact *= k as f64;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            a.push(sign * ga / (kfact * gamma(k as f64 + alpha).unwrap()));
            want_b.push(gb / (kfact * gamma(k as f64 + 1.0 - alpha).unwrap()));
        }
        let b = solve_associated_coefficients(&a, alpha, 20).unwrap();
        // the reciprocal-series map amplifies rounding in a_j by roughly
        // C(m,j) 2^(m-j), so the floor set by the f64 inputs grows past
        // 1e-10 near m = 15 no matter how the recursion is evaluated;
        // the loose bound covers that amplification with margin
        for k in 0..=20 {
            let tol = if k <= 12 { 1e-10 } else { 1e-5 };
            assert!(
                rel_err(b[k], want_b[k]) < tol,
                "k = {k}: {} vs {}",
                b[k],
                want_b[k]
            );
        }
    }

    #[test]
    fn associated_coefficients_reject_zero_leading() {
        assert!(matches!(
            solve_associated_coefficients(&[0.0, 1.0], 0.5, 4),
            Err(Error::InvalidInput(_))
        ));
        assert!(solve_associated_coefficients(&[1.0], 1.0, 4).is_err());
    }

    proptest! {
        /// Re-substituting the solved coefficients into the pairing
        /// system leaves residuals at rounding level.
        #[test]
        fn associated_coefficients_satisfy_system(
            alpha in 0.05f64..0.95,
            a1 in -2.0f64..2.0,
            a2 in -2.0f64..2.0,
            a3 in -2.0f64..2.0,
        ) {
            let a = [1.0, a1, a2, a3];
            let n = 10usize;
            let b = solve_associated_coefficients(&a, alpha, n).unwrap();
            for m in 1..=n {
                let mut acc: f64 = 0.0;
                let mut scale: f64 = 0.0;
                for k in 0..=m {
                    let ai = a.get(m - k).copied().unwrap_or(0.0);
                    let term = gamma(k as f64 + 1.0 - alpha).unwrap()
                        * gamma(alpha + (m - k) as f64).unwrap()
                        * ai
                        * b[k];
                    acc += term;
                    scale = scale.max(term.abs());
                }
                prop_assert!(acc.abs() <= 1e-12 * scale.max(1.0), "m = {}: {}", m, acc);
            }
        }
    }

    /// Closed-form convolution of two truncated series kernels:
    /// `t^(i+p) * t^(j+q) = B(i+p+1, j+q+1) t^(i+j+p+q+1)`.
    /// Returns the coefficient list indexed by `m = i + j`.
    fn convolution_series_coeffs(ka: &Kernel, kb: &Kernel) -> Vec<f64> {
        let (p, q) = (ka.exponent(), kb.exponent());
        let ca = ka.coeffs();
        let cb = kb.coeffs();
        let mut d = vec![0.0; ca.len() + cb.len() - 1];
        for (i, ai) in ca.iter().enumerate() {
            for (j, bj) in cb.iter().enumerate() {
                let beta = gamma(i as f64 + p + 1.0).unwrap()
                    * gamma(j as f64 + q + 1.0).unwrap()
                    / gamma((i + j) as f64 + p + q + 2.0).unwrap();
                d[i + j] += ai * bj * beta;
            }
        }
        d
    }

    #[test]
    fn series_pair_satisfies_condition_formally() {
        let pair = KernelPair::series(&[1.0, -1.0], 0.3, 12).unwrap();
        let d = convolution_series_coeffs(pair.kappa(), pair.k());
        // (kappa*k)(t) = sum d_m t^m must be 1 + O(t^(n_terms+1))
        assert!(rel_err(d[0], 1.0) < 1e-12);
        for (m, dm) in d.iter().enumerate().skip(1).take(11) {
            assert!(dm.abs() < 1e-12, "m = {m}: {dm}");
        }
        assert_eq!(pair.kappa().exponent(), 0.3 - 1.0);
        assert_eq!(pair.k().exponent(), -0.3);
    }

    #[test]
    fn series_pair_validation() {
        assert!(KernelPair::series(&[0.0, 1.0], 0.3, 8).is_err());
        assert!(KernelPair::series(&[1.0], 0.0, 8).is_err());
        assert!(KernelPair::series(&[1.0], 1.0, 8).is_err());
    }

    #[test]
    fn lift_power_pair_is_exact() {
        let base = KernelPair::power(0.6, 1).unwrap();
        let lifted = base.lift(3).unwrap();
        assert_eq!(lifted.order(), 3);
        let want = KernelPair::power(2.6, 3).unwrap();
        assert_eq!(lifted.kappa(), want.kappa());
        // k is carried over bitwise
        assert_eq!(lifted.k(), base.k());
        assert_eq!(lifted.kappa().exponent(), 1.6);
    }

    #[test]
    fn lift_bessel_matches_direct_constructor() {
        let lifted = KernelPair::bessel(-0.5, 1).unwrap().lift(2).unwrap();
        let direct = KernelPair::bessel(0.5, 2).unwrap();
        assert_eq!(lifted.kappa(), direct.kappa());
        assert_eq!(lifted.kappa().exponent(), 0.5);
        // associated kernels agree because n - nu - 2 is invariant
        // under (nu, n) -> (nu + 1, n + 1)
        assert_eq!(lifted.k(), KernelPair::bessel(-0.5, 1).unwrap().k());
    }

    #[test]
    fn lift_series_matches_iterated_integration() {
        // two integrations of t^q give t^(q+2) / ((q+1)(q+2))
        let base = KernelPair::series(&[1.0, -1.0], 0.3, 12).unwrap();
        let lifted = base.lift(3).unwrap();
        let p = base.kappa().exponent();
        for (k, (c_new, c_old)) in lifted
            .kappa()
            .coeffs()
            .iter()
            .zip(base.kappa().coeffs())
            .enumerate()
        {
            let q = p + k as f64;
            let want = c_old / ((q + 1.0) * (q + 2.0));
            assert!(rel_err(*c_new, want) < 1e-12, "k = {k}");
        }
        assert_eq!(lifted.kappa().exponent(), p + 2.0);
        assert!(matches!(
            lifted.kappa().family(),
            KernelFamily::Lifted { shift: 2 }
        ));
    }

    #[test]
    fn lift_requires_order_one_and_n_at_least_two() {
        let base = KernelPair::power(0.6, 1).unwrap();
        assert!(base.lift(1).is_err());
        let lifted = base.lift(2).unwrap();
        assert!(matches!(lifted.lift(2), Err(Error::Unsupported(_))));
    }

    #[test]
    fn records_have_full_precision() {
        let pair = KernelPair::power(0.5, 1).unwrap();
        let rec = pair.kappa().record();
        assert!(rec.contains("family=power"));
        assert!(rec.contains("exponent=-5.0000000000000000e-1"));
        assert!(rec.contains("alpha=5.0000000000000000e-1"));
        let rec = KernelPair::bessel(0.5, 2).unwrap().k().record();
        assert!(rec.contains("family=bessel_i_scaled"));
        assert!(rec.contains("coeffs="));
        // a 17-significant-digit value round-trips bitwise
        let c = KernelPair::bessel(0.5, 2).unwrap().k().coeffs()[3];
        let printed = format!("{c:.16e}");
        assert_eq!(printed.parse::<f64>().unwrap(), c);
    }

    #[test]
    fn standard_catalog_is_well_formed() {
        let pairs = standard_pairs();
        assert_eq!(pairs.len(), 7);
        for (name, pair) in &pairs {
            assert!(pair.order() >= 1, "{name}");
            assert!(pair.kappa().exponent() > -1.0, "{name}");
            let q = pair.k().exponent();
            assert!(q > -1.0 && q < 0.0, "{name}");
        }
    }
}
