//! Closed-form solver for the capped min-sum problem and an independent KKT
//! certificate checker.
//!
//! The problem: minimize Σx_j subject to Πx_j ≥ (Πk_j)/D and 0 ≤ x_j ≤ k_j,
//! with caps sorted ascending. The solution saturates the d−I smallest caps
//! and equalizes the remaining I variables at (K_I/D)^{1/I}, where the active
//! case index I is determined by which threshold interval [L_I, L_{I+1})
//! contains D.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::shape::MultiTtmShape;

/// Relative tolerance for threshold comparisons on non-integral data.
const THRESH_REL_TOL: f64 = 1e-9;

/// Relative tolerance for the KKT condition groups.
const KKT_REL_TOL: f64 = 1e-8;

/// x^(1/i), snapped to the nearest integer when that integer is the exact
/// root (power-of-two instances hit integer roots constantly and libm powf
/// returns values like 3.9999999999999996 for them).
pub(crate) fn nth_root(x: f64, i: usize) -> f64 {
    let y = x.powf(1.0 / i as f64);
    let r = y.round();
    if r >= 1.0 && (r.powi(i as i32) - x).abs() <= 1e-9 * x.abs() {
        r
    } else {
        y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CappedMinSumProblem {
    caps: Vec<f64>,
    divisor: f64,
}

impl CappedMinSumProblem {
    /// Caps must be positive and ascending; the divisor D ≥ 1 so that the
    /// product target (Πcaps)/D is feasible.
    pub fn new(caps: Vec<f64>, divisor: f64) -> Result<Self> {
        if caps.len() < 2 {
            return Err(Error::InvalidShape(format!(
                "need at least 2 caps, got {}",
                caps.len()
            )));
        }
        if caps.iter().any(|&k| !k.is_finite() || k <= 0.0) {
            return Err(Error::InvalidShape("caps must be positive finite".into()));
        }
        if caps.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidShape("caps must be ascending".into()));
        }
        if !divisor.is_finite() || divisor < 1.0 - THRESH_REL_TOL {
            return Err(Error::InfeasibleDivisor(format!(
                "divisor {divisor} < 1 leaves no feasible point in the box"
            )));
        }
        Ok(CappedMinSumProblem { caps, divisor })
    }

    pub fn caps(&self) -> &[f64] {
        &self.caps
    }

    pub fn divisor(&self) -> f64 {
        self.divisor
    }

    pub fn d(&self) -> usize {
        self.caps.len()
    }

    /// Product of all caps.
    pub fn cap_product(&self) -> f64 {
        self.caps.iter().product()
    }

    /// The product constraint target (Πcaps)/D.
    pub fn target(&self) -> f64 {
        self.cap_product() / self.divisor
    }

    /// Suffix cap product K_j = Π of the j largest caps.
    fn suffix_product(&self, j: usize) -> f64 {
        self.caps[self.d() - j..].iter().product()
    }

    /// Case thresholds L_1..L_d plus L_{d+1} = ∞.
    /// L_j = K_j / (k_{d-j+1})^j; always non-decreasing with L_1 = 1.
    pub fn thresholds(&self) -> Vec<f64> {
        let d = self.d();
        let mut out = Vec::with_capacity(d + 1);
        for j in 1..=d {
            let kj = self.suffix_product(j);
            out.push(kj / self.caps[d - j].powi(j as i32));
        }
        out.push(f64::INFINITY);
        out
    }
}

/// Solution of a capped min-sum problem.
#[derive(Debug, Clone, Serialize)]
pub struct OptSolution {
    /// Optimal point; the first d−I entries sit at their caps.
    pub x: Vec<f64>,
    /// Number of interior (non-cap-saturated) variables, 1-based in [1, d].
    pub case_index: usize,
    /// Minimum of Σx_j.
    pub objective: f64,
    /// Thresholds L_1..L_d, L_{d+1} = ∞ used to pick the case.
    pub thresholds: Vec<f64>,
}

/// Solves the capped min-sum problem in closed form.
pub fn solve(problem: &CappedMinSumProblem) -> OptSolution {
    let d = problem.d();
    let dv = problem.divisor;
    let thresholds = problem.thresholds();
    // Largest I with L_I <= D; ties resolve upward (half-open intervals).
    let mut case_index = 1;
    for (j, &l) in thresholds[..d].iter().enumerate() {
        if l <= dv * (1.0 + THRESH_REL_TOL) {
            case_index = j + 1;
        }
    }
    let interior = nth_root(problem.suffix_product(case_index) / dv, case_index);
    let mut x = Vec::with_capacity(d);
    x.extend_from_slice(&problem.caps[..d - case_index]);
    x.resize(d, interior);
    let objective = case_index as f64 * interior + problem.caps[..d - case_index].iter().sum::<f64>();
    OptSolution {
        x,
        case_index,
        objective,
        thresholds,
    }
}

/// Dual multipliers and worst-case normalized residuals of the four KKT
/// condition groups.
#[derive(Debug, Clone, Serialize)]
pub struct KktCertificate {
    /// μ_0 (product constraint) followed by μ_1..μ_d (cap constraints).
    pub mu: Vec<f64>,
    pub primal_residual: f64,
    pub stationarity_residual: f64,
    pub dual_residual: f64,
    pub complementary_residual: f64,
}

/// Constructs the dual certificate for `solution` and checks primal
/// feasibility, stationarity, dual feasibility, and complementary slackness.
///
/// The multipliers are μ_0 = D·(K_I/D)^{1/I}/Πk_j and, for the saturated
/// caps, μ_i = (K_I/D)^{1/I}/k_i − 1 (zero for interior variables). With
/// g_0 = (Πk)/D − Πx and ∂g_0/∂x_j = −Π_{ℓ≠j}x_ℓ these are the unique
/// multipliers satisfying stationarity at the closed-form optimum.
pub fn verify_kkt(
    problem: &CappedMinSumProblem,
    solution: &OptSolution,
) -> Result<KktCertificate> {
    let d = problem.d();
    if solution.x.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "solution has {} variables, problem has {d}",
            solution.x.len()
        )));
    }
    let case_index = solution.case_index.clamp(1, d);
    let dv = problem.divisor;
    let target = problem.target();
    let interior = nth_root(problem.suffix_product(case_index) / dv, case_index);

    let mut mu = vec![0.0; d + 1];
    mu[0] = dv * interior / problem.cap_product();
    for (m, k) in mu[1..=d - case_index].iter_mut().zip(&problem.caps) {
        *m = interior / k - 1.0;
    }

    let x = &solution.x;
    // Products of all x except one, via prefix/suffix sweeps.
    let mut prefix = vec![1.0; d + 1];
    for j in 0..d {
        prefix[j + 1] = prefix[j] * x[j];
    }
    let mut suffix = vec![1.0; d + 1];
    for j in (0..d).rev() {
        suffix[j] = suffix[j + 1] * x[j];
    }
    let x_product = prefix[d];

    let mut failures = Vec::new();

    // Primal feasibility: g_0 = target - Πx <= 0 and g_i = x_i - k_i <= 0.
    let mut primal = (target - x_product) / target;
    for (j, &xj) in x.iter().enumerate() {
        primal = primal.max((xj - problem.caps[j]) / problem.caps[j]);
    }
    if primal > KKT_REL_TOL {
        failures.push(format!("primal feasibility (residual {primal:.3e})"));
    }

    // Stationarity: 1 + μ_0 ∂g_0/∂x_j + μ_j = 0 for each j.
    let mut stationarity = 0.0f64;
    for j in 0..d {
        let grad0 = prefix[j] * suffix[j + 1];
        let s = 1.0 - mu[0] * grad0 + mu[j + 1];
        let scale = 1.0 + mu[0] * grad0 + mu[j + 1];
        stationarity = stationarity.max(s.abs() / scale);
    }
    if stationarity > KKT_REL_TOL {
        failures.push(format!("stationarity (residual {stationarity:.3e})"));
    }

    // Dual feasibility: μ_i >= 0.
    let mut dual = 0.0f64;
    for &m in &mu {
        dual = dual.max(-m / (1.0 + m.abs()));
    }
    if dual > KKT_REL_TOL {
        failures.push(format!("dual feasibility (residual {dual:.3e})"));
    }

    // Complementary slackness: μ_i g_i = 0.
    let g0 = target - x_product;
    let mut complementary = (mu[0] * g0).abs() / (1.0 + mu[0] * target);
    for j in 0..d {
        let gj = x[j] - problem.caps[j];
        let r = (mu[j + 1] * gj).abs() / (1.0 + mu[j + 1] * problem.caps[j]);
        complementary = complementary.max(r);
    }
    if complementary > KKT_REL_TOL {
        failures.push(format!("complementary slackness (residual {complementary:.3e})"));
    }

    let cert = KktCertificate {
        mu,
        primal_residual: primal.max(0.0),
        stationarity_residual: stationarity,
        dual_residual: dual.max(0.0),
        complementary_residual: complementary,
    };
    if failures.is_empty() {
        Ok(cert)
    } else {
        Err(Error::CertificateInvalid {
            condition: failures.join("; "),
            detail: format!("x = {:?}, case I = {case_index}", solution.x),
        })
    }
}

/// Matrix-access optimization: caps k_i = n_i·r_i, divisor P.
pub fn solve_matrix_term(shape: &MultiTtmShape, p: u128) -> Result<OptSolution> {
    let caps: Vec<f64> = shape.matrix_sizes().iter().map(|&s| s as f64).collect();
    let problem = CappedMinSumProblem::new(caps, p as f64)?;
    Ok(solve(&problem))
}

/// Tensor-access optimization: caps (r, n), divisor P.
pub fn solve_tensor_term(shape: &MultiTtmShape, p: u128) -> Result<OptSolution> {
    let caps = vec![shape.r_total() as f64, shape.n_total() as f64];
    let problem = CappedMinSumProblem::new(caps, p as f64)?;
    Ok(solve(&problem))
}
