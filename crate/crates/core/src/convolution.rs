//! Laplace-convolution quadrature on graded meshes.
//!
//! Everything here is product integration in the Linz style: the factor
//! carrying the integrable singularity stays inside the quadrature weight
//! and is integrated in closed form, while the remaining smooth part is
//! replaced by its piecewise-linear interpolant on the mesh. The rule is
//! exact whenever the smooth part is affine on every subinterval, which is
//! what the closed-form tests lean on.
//!
//! Node values may be computed in parallel, but the subinterval summation
//! inside each node always runs left to right, so repeated runs produce
//! bitwise-identical results regardless of scheduling.

use crate::error::Error;
use crate::exec;
use crate::kernels::{AnalyticPart, Kernel};

/// Graded mesh on [0, T]: node i sits at T·(i/N)^r for i = 0..=N.
/// r = 1 is uniform; larger r crowds nodes toward the origin, where the
/// kernels are rough and the convolution integrands need resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    t_max: f64,
    intervals: usize,
    grading: f64,
}

impl Grid {
    pub fn new(t_max: f64, intervals: usize, grading: f64) -> Result<Self, Error> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::out_of_range("T", t_max, "(0, inf)"));
        }
        if intervals < 2 {
            return Err(Error::out_of_range("N", intervals as f64, "[2, inf)"));
        }
        if !(grading.is_finite() && grading >= 1.0) {
            return Err(Error::out_of_range("r", grading, "[1, inf)"));
        }
        Ok(Grid {
            t_max,
            intervals,
            grading,
        })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    /// Node position t_i = T·(i/N)^r; i = N lands on T exactly.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.intervals);
        let frac = i as f64 / self.intervals as f64;
        self.t_max * frac.powf(self.grading)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.intervals).map(|i| self.node(i)).collect()
    }

    /// Index of the subinterval containing t: the largest i with
    /// node(i) <= t, clamped to 0..N-1 so [node(i), node(i+1)] brackets t.
    fn bracket(&self, t: f64) -> usize {
        let frac = (t / self.t_max).clamp(0.0, 1.0);
        let guess = (frac.powf(1.0 / self.grading) * self.intervals as f64).floor();
        let mut i = (guess as usize).min(self.intervals - 1);
        while i > 0 && self.node(i) > t {
            i -= 1;
        }
        while i + 1 < self.intervals && self.node(i + 1) < t {
            i += 1;
        }
        i
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            t_max: 1.0,
            intervals: 2048,
            grading: 2.0,
        }
    }
}

/// Values of a convolution on the interior nodes t_1..t_N of a grid. The
/// origin is kept separate because several results of interest are
/// singular or merely defined as a limit there.
#[derive(Debug, Clone)]
pub struct SampledResult {
    grid: Grid,
    values: Vec<f64>,
    value_at_zero: f64,
    lower_accuracy: bool,
}

impl SampledResult {
    pub fn new(grid: Grid, values: Vec<f64>, value_at_zero: f64) -> Result<Self, Error> {
        if values.len() != grid.intervals() {
            return Err(Error::InvalidInput(format!(
                "expected {} node values, got {}",
                grid.intervals(),
                values.len()
            )));
        }
        for (j, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteEval {
                    index: j + 1,
                    t: grid.node(j + 1),
                });
            }
        }
        if !value_at_zero.is_finite() {
            return Err(Error::NonFiniteEval { index: 0, t: 0.0 });
        }
        Ok(SampledResult {
            grid,
            values,
            value_at_zero,
            lower_accuracy: false,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Values at nodes t_1..t_N, in node order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at node i, i in 1..=N.
    pub fn value(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    pub fn value_at_zero(&self) -> f64 {
        self.value_at_zero
    }

    /// Set when the producing route had to fall back to something cruder
    /// than the product rule (e.g. finite differences on tabulated data).
    pub fn lower_accuracy(&self) -> bool {
        self.lower_accuracy
    }

    pub(crate) fn flag_lower_accuracy(mut self) -> Self {
        self.lower_accuracy = true;
        self
    }

    fn node_value(&self, i: usize) -> f64 {
        if i == 0 {
            self.value_at_zero
        } else {
            self.values[i - 1]
        }
    }

    /// Piecewise-linear evaluation between grid nodes, t in [0, T].
    pub fn eval_linear(&self, t: f64) -> Result<f64, Error> {
        if !(t >= 0.0 && t <= self.grid.t_max()) {
            return Err(Error::out_of_range(
                "t",
                t,
                format!("[0, {}]", self.grid.t_max()),
            ));
        }
        let i = self.grid.bracket(t);
        let (t_lo, t_hi) = (self.grid.node(i), self.grid.node(i + 1));
        let (v_lo, v_hi) = (self.node_value(i), self.node_value(i + 1));
        if t == t_lo {
            return Ok(v_lo);
        }
        Ok(v_lo + (t - t_lo) * (v_hi - v_lo) / (t_hi - t_lo))
    }
}

/// ∫_{s_lo}^{s_hi} s^p · ℓ(s) ds for the linear interpolant ℓ through
/// (s_lo, g_lo) and (s_hi, g_hi), with the weight moments in closed form.
/// The first moment is carried as K = ∫ s^p (s − s_lo) ds so the usual
/// cancellation between ∫s^{p+1} and s_lo·∫s^p stays mild; both moments
/// use expm1 so nothing degrades as p + 1 → 0 or on narrow subintervals.
pub(crate) fn singular_trapezoid(p: f64, s_lo: f64, s_hi: f64, g_lo: f64, g_hi: f64) -> f64 {
    debug_assert!(p > -1.0);
    debug_assert!(0.0 <= s_lo && s_lo <= s_hi);
    let ds = s_hi - s_lo;
    if ds == 0.0 {
        return 0.0;
    }
    if p == 0.0 {
        // plain trapezoid; keeps the constant-weight path exact
        return 0.5 * ds * (g_lo + g_hi);
    }
    let (m0, k) = if s_lo == 0.0 {
        let hi_pow = s_hi.powf(p + 1.0);
        (hi_pow / (p + 1.0), hi_pow * s_hi / (p + 2.0))
    } else {
        let rho = s_lo / s_hi;
        let log_rho = rho.ln();
        let hi_pow = s_hi.powf(p + 1.0);
        let e1 = -f64::exp_m1((p + 1.0) * log_rho); // 1 − rho^{p+1}
        let e2 = -f64::exp_m1((p + 2.0) * log_rho); // 1 − rho^{p+2}
        let m0 = hi_pow * e1 / (p + 1.0);
        let k = hi_pow * s_hi * (e2 / (p + 2.0) - rho * e1 / (p + 1.0));
        (m0, k)
    };
    g_lo * m0 + (g_hi - g_lo) * (k / ds)
}

/// (kernel * f)(t_i) at every grid node: ∫_0^{t_i} kernel(t_i − τ) f(τ) dτ
/// with the kernel power t^p kept in the weight and A(t_i − τ)·f(τ)
/// interpolated linearly over the grid subintervals.
///
/// f only needs to be evaluable on (0, T]. If f(0) fails or is not finite,
/// the first subinterval reuses the value at t_1 (one-sided start); the
/// handful of nodes nearest the origin then carry that local error.
pub fn convolve_kernel_function<F>(kernel: &Kernel, f: F, grid: &Grid) -> Result<SampledResult, Error>
where
    F: Fn(f64) -> Result<f64, Error> + Sync + Send,
{
    let n = grid.intervals();
    let mut fvals = vec![0.0; n + 1];
    for (j, slot) in fvals.iter_mut().enumerate().skip(1) {
        let t = grid.node(j);
        let v = f(t)?;
        if !v.is_finite() {
            return Err(Error::NonFiniteEval { index: j, t });
        }
        *slot = v;
    }
    fvals[0] = match f(0.0) {
        Ok(v) if v.is_finite() => v,
        _ => fvals[1],
    };

    let p = kernel.exponent();
    let values = match &kernel.analytic {
        AnalyticPart::Constant(c) => {
            // smooth part c·f(τ) does not depend on the target node
            let gvals: Vec<f64> = fvals.iter().map(|v| c * v).collect();
            exec::map_node_indices(n, |i| {
                let t = grid.node(i);
                let mut acc = 0.0;
                for j in 0..i {
                    let u_hi = t - grid.node(j);
                    let u_lo = t - grid.node(j + 1);
                    acc += singular_trapezoid(p, u_lo, u_hi, gvals[j + 1], gvals[j]);
                }
                if !acc.is_finite() {
                    return Err(Error::NonFiniteEval { index: i, t });
                }
                Ok(acc)
            })?
        }
        AnalyticPart::Series(_) => exec::map_node_indices(n, |i| {
            let t = grid.node(i);
            let mut acc = 0.0;
            let mut u_hi = t;
            let mut g_hi = kernel.analytic_eval(u_hi) * fvals[0];
            for j in 0..i {
                let u_lo = t - grid.node(j + 1);
                let g_lo = kernel.analytic_eval(u_lo) * fvals[j + 1];
                acc += singular_trapezoid(p, u_lo, u_hi, g_lo, g_hi);
                u_hi = u_lo;
                g_hi = g_lo;
            }
            if !acc.is_finite() {
                return Err(Error::NonFiniteEval { index: i, t });
            }
            Ok(acc)
        })?,
    };
    SampledResult::new(grid.clone(), values, 0.0)
}

/// Convolution with an already-sampled factor; the factor is read back
/// through its piecewise-linear interpolant on its own grid, and the
/// result lives on that same grid.
pub fn convolve_kernel_sampled(kernel: &Kernel, f: &SampledResult) -> Result<SampledResult, Error> {
    let out = convolve_kernel_function(kernel, |t| f.eval_linear(t), f.grid())?;
    Ok(if f.lower_accuracy() {
        out.flag_lower_accuracy()
    } else {
        out
    })
}

/// (k1 * k2)(t_i) where both factors may blow up at their own origin.
/// The integral splits at t_i/2; on each half the factor evaluated near
/// zero supplies the weight and the other factor is smooth, so the
/// product rule applies cleanly on a graded submesh of [0, t_i/2]. The
/// two halves are computed by the same procedure with the roles swapped,
/// which makes the result exactly symmetric in the arguments.
pub fn convolve_kernels(k1: &Kernel, k2: &Kernel, grid: &Grid) -> Result<SampledResult, Error> {
    let n = grid.intervals();
    let r = grid.grading();
    let values = exec::map_node_indices(n, |i| {
        let t = grid.node(i);
        let segments = 2.max(i.div_ceil(2));
        let first = half_convolution(k2, k1, t, segments, r)?;
        let second = half_convolution(k1, k2, t, segments, r)?;
        let v = first + second;
        if !v.is_finite() {
            return Err(Error::NonFiniteEval { index: i, t });
        }
        Ok(v)
    })?;
    SampledResult::new(grid.clone(), values, 0.0)
}

/// ∫_0^{t/2} sing(τ)·smooth(t − τ) dτ on a graded submesh; the weight is
/// the power of `sing`, whose origin is the only rough point in range.
fn half_convolution(
    sing: &Kernel,
    smooth: &Kernel,
    t: f64,
    segments: usize,
    grading: f64,
) -> Result<f64, Error> {
    let half = 0.5 * t;
    let p = sing.exponent();
    let mut acc = 0.0;
    let mut s_lo = 0.0;
    let mut g_lo = sing.analytic_eval(0.0) * smooth.eval(t)?;
    for m in 1..=segments {
        let s_hi = half * (m as f64 / segments as f64).powf(grading);
        let g_hi = sing.analytic_eval(s_hi) * smooth.eval(t - s_hi)?;
        acc += singular_trapezoid(p, s_lo, s_hi, g_lo, g_hi);
        s_lo = s_hi;
        g_lo = g_hi;
    }
    Ok(acc)
}

/// (kernel * f)(t) at a single off-grid point: the same product rule on a
/// dedicated graded submesh of [0, t]. Used where results are needed
/// between nodes, e.g. finite-difference stencils.
pub(crate) fn convolve_point<F>(
    kernel: &Kernel,
    f: F,
    t: f64,
    segments: usize,
    grading: f64,
) -> Result<f64, Error>
where
    F: Fn(f64) -> Result<f64, Error>,
{
    debug_assert!(t > 0.0 && segments >= 2);
    let p = kernel.exponent();
    let eval_f = |tau: f64| -> Result<f64, Error> {
        let v = f(tau)?;
        if !v.is_finite() {
            return Err(Error::NonFiniteEval { index: 0, t: tau });
        }
        Ok(v)
    };
    let tau_at = |m: usize| t * (m as f64 / segments as f64).powf(grading);
    let f0 = match f(0.0) {
        Ok(v) if v.is_finite() => v,
        _ => eval_f(tau_at(1))?,
    };
    let mut acc = 0.0;
    let mut tau_hi_prev = 0.0;
    let mut g_prev = kernel.analytic_eval(t) * f0;
    for m in 1..=segments {
        let tau = tau_at(m);
        let u = t - tau;
        let g = kernel.analytic_eval(u) * eval_f(tau)?;
        acc += singular_trapezoid(p, u, t - tau_hi_prev, g, g_prev);
        tau_hi_prev = tau;
        g_prev = g;
    }
    Ok(acc)
}

/// Truncated Laplace transform of a kernel together with a bound on what
/// the truncation discarded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceValue {
    pub value: f64,
    /// Estimate of |∫_{T_max}^∞ kernel(t) e^{−pt} dt|: the largest |A| on
    /// [T_max, 2·T_max] times the closed-form weight tail.
    pub tail_bound: f64,
}

/// Truncation horizon keeping e^{−p·T_max} at or below e^{−40}, which
/// swamps the growth of every implemented kernel family.
pub fn default_truncation(p: f64) -> f64 {
    (40.0 / p).max(40.0)
}

pub const DEFAULT_LAPLACE_DENSITY: usize = 4096;

/// ∫_0^{T_max} kernel(t)·e^{−pt} dt by the same product rule (weight t^p
/// from the kernel, smooth part A(t)·e^{−pt}), on a graded mesh with
/// `density` subintervals. Restricted to p ≥ 1 so the stored tail bound
/// stays certifiable without any knowledge of the kernel beyond its
/// series envelope.
pub fn laplace_transform(
    kernel: &Kernel,
    p: f64,
    t_max: f64,
    density: usize,
) -> Result<LaplaceValue, Error> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::out_of_range("p", p, "[1, inf)"));
    }
    let grid = Grid::new(t_max, density.max(2), 2.0)?;
    let q = kernel.exponent();
    let mut acc = 0.0;
    let mut s_lo = 0.0;
    let mut g_lo = kernel.analytic_eval(0.0);
    for m in 1..=grid.intervals() {
        let s_hi = grid.node(m);
        let g_hi = kernel.analytic_eval(s_hi) * (-p * s_hi).exp();
        acc += singular_trapezoid(q, s_lo, s_hi, g_lo, g_hi);
        s_lo = s_hi;
        g_lo = g_hi;
    }
    if !acc.is_finite() {
        return Err(Error::NonFiniteEval {
            index: grid.intervals(),
            t: t_max,
        });
    }

    let samples = 64;
    let mut a_max: f64 = 0.0;
    for j in 0..=samples {
        let t = t_max * (1.0 + j as f64 / samples as f64);
        a_max = a_max.max(kernel.analytic_eval(t).abs());
    }
    let tail_bound = a_max * weight_tail(q, p, t_max);
    Ok(LaplaceValue {
        value: acc,
        tail_bound,
    })
}

/// ∫_{T}^∞ t^q e^{−pt} dt = p^{−(q+1)} Γ(q+1, pT), by the asymptotic
/// expansion of the upper incomplete gamma function; p·T ≥ 40 here, so a
/// dozen terms leave a remainder far below the leading one, which the
/// padding term covers.
fn weight_tail(q: f64, p: f64, t_big: f64) -> f64 {
    let x = p * t_big;
    let s = q + 1.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..12 {
        term *= (s - 1.0 - k as f64) / x;
        sum += term;
    }
    sum += term.abs();
    x.powf(s - 1.0) * (-x).exp() * sum * p.powf(-s)
}
