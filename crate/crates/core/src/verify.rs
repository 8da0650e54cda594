//! Numerical certification of the defining identities behind the
//! operators: the order-n kernel condition κ*k = h_n, its Laplace-domain
//! form, the two fundamental theorems connecting the integral and the
//! derivatives, the index law, and mesh-convergence studies backing the
//! tolerances used everywhere else.
//!
//! Failure of a check is data, not an error: every check returns a
//! ResidualReport whose `passed` flag records the verdict. Errors are
//! reserved for inputs the check cannot process at all.
//!
//! Two routes here deserve a note, both chosen to keep numerical
//! differentiation out of theorem checks:
//!
//! * The Riemann–Liouville branch of the first fundamental theorem needs
//!   D_(k)(κ*f). Writing v = κ*f, all derivatives v^(j)(0) with j < n
//!   vanish (the exponent of κ exceeds n−2, so v vanishes to order n−1+ε
//!   at 0), hence D_(k) v = k * v^(n), and peeling derivatives off the
//!   convolution gives v^(n) = κ*f^(n) + Σ_j f^(j)(0)·κ^(n−1−j). Every
//!   piece is a convolution of known kernels — nothing is differenced.
//! * The Caputo branch of the same theorem concerns inputs g = k*φ whose
//!   exact derivatives are unknowable from samples. The identity
//!   *D_(k)(κ*g) = g is certified in integrated form instead:
//!   k*(κ*g) = h_n*g, which is equivalent for continuous integrands
//!   because both sides vanish to order n at the origin.

use crate::convolution::{
    convolve_kernel_function, convolve_kernel_sampled, convolve_kernels, default_truncation,
    laplace_transform, Grid, SampledResult,
};
use crate::error::Error;
use crate::kernels::{Kernel, KernelFamily, KernelPair};
use crate::operators::{gfd_caputo, gfi, FunctionSpec};

/// Quadrature density used for Laplace-domain checks; the transform is a
/// single one-dimensional integral, so a fine mesh costs little.
pub const LAPLACE_CHECK_DENSITY: usize = 8192;

/// The checks this module offers, for tolerance lookup and dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    PairCondition,
    LaplaceCondition,
    Ftc1,
    Ftc2,
    IndexLaw,
}

/// Default tolerance per check, calibrated by the refinement run in
/// `examples/calibrate.rs` and recorded in `fixtures/calibration.txt`;
/// a consistency test keeps the two in sync.
pub fn default_tolerance(kind: CheckKind) -> f64 {
    match kind {
        CheckKind::PairCondition => 1e-3,
        CheckKind::LaplaceCondition => 1e-4,
        CheckKind::Ftc1 => 1e-3,
        CheckKind::Ftc2 => 1e-3,
        CheckKind::IndexLaw => 1e-4,
    }
}

/// Outcome of one verification check.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub check_name: String,
    /// Abscissae the residuals were measured at (grid times, or Laplace
    /// parameters for the Laplace-domain check).
    pub nodes: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_abs: f64,
    /// Σ|rᵢ|·wᵢ with wᵢ the node spacing for grid checks and 1 for
    /// discrete abscissa sets.
    pub l1: f64,
    pub tolerance_used: f64,
    pub passed: bool,
}

impl ResidualReport {
    /// Assemble a report; weights default to 1 per node when absent.
    pub fn new(
        check_name: impl Into<String>,
        nodes: Vec<f64>,
        residuals: Vec<f64>,
        weights: Option<&[f64]>,
        tolerance: f64,
    ) -> Self {
        debug_assert_eq!(nodes.len(), residuals.len());
        let max_abs = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let l1 = match weights {
            Some(w) => residuals.iter().zip(w).map(|(r, w)| r.abs() * w).sum(),
            None => residuals.iter().map(|r| r.abs()).sum(),
        };
        ResidualReport {
            check_name: check_name.into(),
            nodes,
            residuals,
            max_abs,
            l1,
            tolerance_used: tolerance,
            passed: max_abs <= tolerance,
        }
    }

    /// Structured text form: one header line with the summary fields,
    /// then one `t residual` row per node, all at full precision.
    pub fn to_record(&self) -> String {
        let mut out = format!(
            "check={} tol={:.16e} max_abs={:.16e} l1={:.16e} passed={}\n",
            self.check_name, self.tolerance_used, self.max_abs, self.l1, self.passed
        );
        for (t, r) in self.nodes.iter().zip(&self.residuals) {
            out.push_str(&format!("{t:.16e} {r:.16e}\n"));
        }
        out
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Keep only nodes at or beyond the cut, with their spacings as weights.
fn cut_nodes(grid: &Grid, t_cut: f64) -> (Vec<f64>, Vec<usize>, Vec<f64>) {
    let mut nodes = Vec::new();
    let mut indices = Vec::new();
    let mut weights = Vec::new();
    for i in 1..=grid.intervals() {
        let t = grid.node(i);
        if t >= t_cut {
            nodes.push(t);
            indices.push(i);
            weights.push(t - grid.node(i - 1));
        }
    }
    (nodes, indices, weights)
}

/// Residuals of (κ*k)(t) − h_n(t) on nodes t ≥ T/20. The corner nearest
/// the singularity is excluded because that is where the product rule is
/// least accurate; the convergence study documents that the excluded
/// region shrinks under refinement.
pub fn check_pair_condition(
    pair: &KernelPair,
    grid: &Grid,
    tol: f64,
) -> Result<ResidualReport, Error> {
    let conv = convolve_kernels(pair.kappa(), pair.k(), grid)?;
    let n = pair.order();
    let scale = factorial(n - 1);
    let (nodes, indices, weights) = cut_nodes(grid, grid.t_max() / 20.0);
    let residuals: Vec<f64> = nodes
        .iter()
        .zip(&indices)
        .map(|(&t, &i)| conv.value(i) - t.powi(n as i32 - 1) / scale)
        .collect();
    Ok(ResidualReport::new(
        format!("pair_condition[{}]", pair.record()),
        nodes,
        residuals,
        Some(&weights),
        tol,
    ))
}

/// Residuals of |ℒκ(p)·ℒk(p) − p^(−n)| at the given Laplace parameters.
/// Each residual carries the propagated truncation allowance of both
/// transforms, so a passing report is honest about the tail.
pub fn check_laplace_condition(
    pair: &KernelPair,
    p_values: &[f64],
    tol: f64,
) -> Result<ResidualReport, Error> {
    let n = pair.order();
    let mut residuals = Vec::with_capacity(p_values.len());
    for &p in p_values {
        let t_max = default_truncation(p);
        let lk = laplace_transform(pair.kappa(), p, t_max, LAPLACE_CHECK_DENSITY)?;
        let la = laplace_transform(pair.k(), p, t_max, LAPLACE_CHECK_DENSITY)?;
        let want = p.powi(-(n as i32));
        let tail = lk.value.abs() * la.tail_bound
            + la.value.abs() * lk.tail_bound
            + lk.tail_bound * la.tail_bound;
        residuals.push((lk.value * la.value - want).abs() + tail);
    }
    Ok(ResidualReport::new(
        format!("laplace_condition[{}]", pair.record()),
        p_values.to_vec(),
        residuals,
        None,
        tol,
    ))
}

/// D_(k)(κ*f) on the grid without numerical differentiation, via
/// k*(κ*f^(n)) + Σ_j f^(j)(0)·(k*κ^(n−1−j)). Shared by both theorem
/// checks.
fn rl_derivative_of_gfi(
    pair: &KernelPair,
    f: &FunctionSpec,
    grid: &Grid,
) -> Result<SampledResult, Error> {
    let n = pair.order();
    if f.derivative_order_available() < n {
        return Err(Error::Unsupported(
            "theorem checks need exact derivatives of f".into(),
        ));
    }
    let w = convolve_kernel_function(pair.kappa(), |t| f.derivative(n, t), grid)?;
    let base = convolve_kernel_sampled(pair.k(), &w)?;
    let mut values = base.values().to_vec();
    for j in 0..n {
        let c = f.initial_value(j)?;
        if c == 0.0 {
            continue;
        }
        let kd = pair.kappa().derivative_kernel(n - 1 - j)?;
        let term = convolve_kernels(pair.k(), &kd, grid)?;
        for (slot, i) in values.iter_mut().zip(1..) {
            *slot += c * term.value(i);
        }
    }
    SampledResult::new(grid.clone(), values, 0.0)
}

/// First fundamental theorem: the derivatives invert the integral.
/// The report concatenates two branches over the same nodes: first the
/// RL branch residuals D_(k) I_(κ) f − f, then the Caputo branch in
/// integrated form, k*(κ*g) − h_n*g for the constructed input g = k*f.
pub fn check_ftc1(
    pair: &KernelPair,
    f: &FunctionSpec,
    grid: &Grid,
    tol: f64,
) -> Result<ResidualReport, Error> {
    let n = pair.order();
    let rl = rl_derivative_of_gfi(pair, f, grid)?;

    let g = convolve_kernel_function(pair.k(), |t| f.eval(t), grid)?;
    let u = convolve_kernel_sampled(pair.kappa(), &g)?;
    let lhs = convolve_kernel_sampled(pair.k(), &u)?;
    let h_n = Kernel::power(n as f64)?;
    let rhs = convolve_kernel_sampled(&h_n, &g)?;

    let (nodes, indices, weights) = cut_nodes(grid, grid.t_max() / 20.0);
    let mut residuals = Vec::with_capacity(2 * nodes.len());
    for (&t, &i) in nodes.iter().zip(&indices) {
        residuals.push(rl.value(i) - f.eval(t)?);
    }
    for &i in &indices {
        residuals.push(lhs.value(i) - rhs.value(i));
    }
    let mut all_nodes = nodes.clone();
    all_nodes.extend_from_slice(&nodes);
    let mut all_weights = weights.clone();
    all_weights.extend_from_slice(&weights);
    Ok(ResidualReport::new(
        format!("ftc1[{}]", pair.record()),
        all_nodes,
        residuals,
        Some(&all_weights),
        tol,
    ))
}

/// Second fundamental theorem: the integral inverts the derivatives.
/// The report concatenates two branches over the same nodes: first the
/// Caputo branch pointwise, I_(κ) *D_(k) f − (f − Taylor_{n−1} f), then
/// the RL branch on the constructed input v = κ*f: I_(κ) D_(k) v − v.
pub fn check_ftc2(
    pair: &KernelPair,
    f: &FunctionSpec,
    grid: &Grid,
    tol: f64,
) -> Result<ResidualReport, Error> {
    let n = pair.order();
    let dcap = gfd_caputo(pair, f, grid)?;
    let lhs_cap = convolve_kernel_sampled(pair.kappa(), &dcap)?;

    let v = gfi(pair, f, grid)?;
    let dv = rl_derivative_of_gfi(pair, f, grid)?;
    let lhs_rl = convolve_kernel_sampled(pair.kappa(), &dv)?;

    let mut initial = Vec::with_capacity(n as usize);
    for j in 0..n {
        initial.push(f.initial_value(j)? / factorial(j));
    }

    let (nodes, indices, weights) = cut_nodes(grid, grid.t_max() / 20.0);
    let mut residuals = Vec::with_capacity(2 * nodes.len());
    for (&t, &i) in nodes.iter().zip(&indices) {
        let mut taylor = 0.0;
        for c in initial.iter().rev() {
            taylor = taylor * t + c;
        }
        residuals.push(lhs_cap.value(i) - (f.eval(t)? - taylor));
    }
    for &i in &indices {
        residuals.push(lhs_rl.value(i) - v.value(i));
    }
    let mut all_nodes = nodes.clone();
    all_nodes.extend_from_slice(&nodes);
    let mut all_weights = weights.clone();
    all_weights.extend_from_slice(&weights);
    Ok(ResidualReport::new(
        format!("ftc2[{}]", pair.record()),
        all_nodes,
        residuals,
        Some(&all_weights),
        tol,
    ))
}

/// Index law I_(κ1) I_(κ2) f = I_(κ1*κ2) f, checked where the composite
/// kernel is analytic: both kernels of the power family, whose
/// convolution is again a power kernel.
pub fn check_index_law(
    k1: &Kernel,
    k2: &Kernel,
    f: &FunctionSpec,
    grid: &Grid,
    tol: f64,
) -> Result<ResidualReport, Error> {
    let (a1, a2) = match (k1.family(), k2.family()) {
        (KernelFamily::Power { alpha: a }, KernelFamily::Power { alpha: b }) => (*a, *b),
        _ => {
            return Err(Error::Unsupported(
                "index-law check needs a closed-form composite kernel; \
                 only power kernels are supported"
                    .into(),
            ))
        }
    };
    let inner = convolve_kernel_function(k2, |t| f.eval(t), grid)?;
    let nested = convolve_kernel_sampled(k1, &inner)?;
    let composite = Kernel::power(a1 + a2)?;
    let single = convolve_kernel_function(&composite, |t| f.eval(t), grid)?;
    let (nodes, indices, weights) = cut_nodes(grid, grid.t_max() / 20.0);
    let residuals: Vec<f64> = indices
        .iter()
        .map(|&i| nested.value(i) - single.value(i))
        .collect();
    Ok(ResidualReport::new(
        format!("index_law[{} ; {}]", k1.record(), k2.record()),
        nodes,
        residuals,
        Some(&weights),
        tol,
    ))
}

/// What a convergence study re-runs at each mesh size.
#[derive(Debug, Clone)]
pub enum StudyTarget {
    PairCondition(KernelPair),
    Ftc1(KernelPair, FunctionSpec),
    IndexLaw(Kernel, Kernel, FunctionSpec),
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    /// (N, max_abs) per mesh size, in the order given.
    pub samples: Vec<(usize, f64)>,
    /// Least-squares slope of log error against log N, negated so larger
    /// is better; absent when the errors sit at rounding level.
    pub fitted_order: Option<f64>,
    pub at_rounding_level: bool,
}

/// Errors below this are rounding noise; fitting an order to them would
/// be meaningless.
const ROUNDING_FLOOR: f64 = 1e-12;

pub fn convergence_study(
    target: &StudyTarget,
    n_values: &[usize],
    t_max: f64,
    grading: f64,
) -> Result<ConvergenceStudy, Error> {
    if n_values.len() < 3 {
        return Err(Error::InvalidInput(
            "a convergence study needs at least three mesh sizes".into(),
        ));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "mesh sizes must increase strictly".into(),
        ));
    }
    let mut samples = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let grid = Grid::new(t_max, n, grading)?;
        let report = match target {
            StudyTarget::PairCondition(pair) => {
                check_pair_condition(pair, &grid, f64::INFINITY)?
            }
            StudyTarget::Ftc1(pair, f) => check_ftc1(pair, f, &grid, f64::INFINITY)?,
            StudyTarget::IndexLaw(k1, k2, f) => {
                check_index_law(k1, k2, f, &grid, f64::INFINITY)?
            }
        };
        samples.push((n, report.max_abs));
    }
    let at_rounding_level = samples.iter().all(|&(_, e)| e <= ROUNDING_FLOOR);
    let fitted_order = if at_rounding_level {
        None
    } else {
        // least squares on (ln N, ln error)
        let pts: Vec<(f64, f64)> = samples
            .iter()
            .map(|&(n, e)| ((n as f64).ln(), e.max(f64::MIN_POSITIVE).ln()))
            .collect();
        let m = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        Some(-(m * sxy - sx * sy) / (m * sxx - sx * sx))
    };
    Ok(ConvergenceStudy {
        samples,
        fitted_order,
        at_rounding_level,
    })
}
