//! Communication lower bounds: the atomic Multi-TTM bound (general d and the
//! cubical 3D closed form) and per-multiplication bounds for the
//! TTM-in-sequence approach.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::shape::MultiTtmShape;
use crate::solver::{nth_root, solve_matrix_term, solve_tensor_term};

/// Lower bound on sends-or-receives for a load-balanced atomic Multi-TTM,
/// split into matrix-access and tensor-access parts.
#[derive(Debug, Clone, Serialize)]
pub struct LbBreakdown {
    /// Minimum matrix elements accessed (A).
    pub matrix_access: f64,
    /// Minimum tensor elements accessed or partially computed (B).
    pub tensor_access: f64,
    /// Data a processor may own at start/end: (n + r + Σn_jr_j)/P.
    pub owned: f64,
    /// Matrix share of the bound: A − Σn_jr_j/P.
    pub lb_matrix: f64,
    /// Tensor share of the bound: B − (n + r)/P.
    pub lb_tensor: f64,
    /// A + B − owned, clamped at zero.
    pub lb: f64,
    /// Active case of the matrix optimization (number of interior terms).
    pub matrix_case: usize,
    /// Active case of the tensor optimization (1: output replicated).
    pub tensor_case: usize,
}

/// Communication lower bound for atomic Multi-TTM on `p` processors.
///
/// The owned-data credit is cancelled against the access terms per array
/// rather than subtracted from the grand total, so the bound stays accurate
/// when the input tensor dwarfs every other term.
pub fn multi_ttm_lb(shape: &MultiTtmShape, p: u128) -> Result<LbBreakdown> {
    if p < 1 {
        return Err(Error::LoadBalance("P must be at least 1".into()));
    }
    let nr = shape.n_total().saturating_mul(shape.r_total());
    if p > nr {
        return Err(Error::LoadBalance(format!(
            "P = {p} exceeds the {nr} multiplication terms; some processor would be idle"
        )));
    }
    let matrix = solve_matrix_term(shape, p)?;
    let tensor = solve_tensor_term(shape, p)?;
    let pf = p as f64;
    let nf = shape.n_total() as f64;
    let rf = shape.r_total() as f64;
    let mats: Vec<f64> = shape.matrix_sizes().iter().map(|&s| s as f64).collect();
    let owned = (nf + rf + mats.iter().sum::<f64>()) / pf;

    let active = shape.d() - matrix.case_index;
    let interior = matrix.x[shape.d() - 1];
    let lb_matrix = mats[..active].iter().map(|&k| k * (1.0 - 1.0 / pf)).sum::<f64>()
        + matrix.case_index as f64 * interior
        - mats[active..].iter().sum::<f64>() / pf;
    let lb_tensor = match tensor.case_index {
        1 => rf * (1.0 - 1.0 / pf), // the n/P terms cancel exactly
        _ => 2.0 * (nf * rf / pf).sqrt() - (nf + rf) / pf,
    };
    Ok(LbBreakdown {
        matrix_access: matrix.objective,
        tensor_access: tensor.objective,
        owned,
        lb_matrix,
        lb_tensor,
        lb: (lb_matrix + lb_tensor).max(0.0),
        matrix_case: matrix.case_index,
        tensor_case: tensor.case_index,
    })
}

fn icbrt(v: u128) -> Option<u128> {
    let mut lo = 1u128;
    let mut hi = 1u128 << 43;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if mid * mid * mid < v {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    (lo * lo * lo == v).then_some(lo)
}

/// Closed-form bound for 3D cubical tensors with `n_total` input and
/// `r_total` output entries (both perfect cubes, n ≥ r).
pub fn cubical_lb(n_total: u128, r_total: u128, p: u128) -> Result<f64> {
    if icbrt(n_total).is_none() || icbrt(r_total).is_none() {
        return Err(Error::InvalidShape(format!(
            "{n_total} and {r_total} must be perfect cubes"
        )));
    }
    if n_total < r_total {
        return Err(Error::InvalidShape("need n >= r".into()));
    }
    if p < 1 {
        return Err(Error::LoadBalance("P must be at least 1".into()));
    }
    let n = n_total as f64;
    let r = r_total as f64;
    let pf = p as f64;
    let nr = n * r;
    let matrix = 3.0 * nth_root(nr / pf, 3);
    let owned_matrices = 3.0 * nth_root(nr, 3);
    let lb = if p.saturating_mul(r_total) < n_total {
        matrix + r - (owned_matrices + r) / pf
    } else {
        matrix + 2.0 * (nr / pf).sqrt() - (n + owned_matrices + r) / pf
    };
    Ok(lb.max(0.0))
}

/// Tight memory-independent lower bound for one m × k × n matrix
/// multiplication on `p` processors, assuming each processor owns a 1/P
/// share of each of the three arrays at start and end.
///
/// With array sizes sorted s1 ≤ s2 ≤ s3, the per-array access x_i lies in
/// [s_i/P, s_i] and the product must cover the Loomis-Whitney volume
/// (mkn/P)² = s1·s2·s3/P². Minimizing Σ(x_i − s_i/P) gives three cases: the
/// two large arrays stay at their owned shares, then one, then none.
pub fn matmul_lb(m: u128, k: u128, n: u128, p: u128) -> f64 {
    if p <= 1 {
        return 0.0;
    }
    let mut s = [
        (m * k) as f64,
        (k * n) as f64,
        (m * n) as f64,
    ];
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let [s1, s2, s3] = s;
    let pf = p as f64;
    let w = if pf < s2 / s1 {
        s1 * (1.0 - 1.0 / pf)
    } else if pf < (s3 / s1) * (s3 / s2) {
        2.0 * (s1 * s2 / pf).sqrt() - (s1 + s2) / pf
    } else {
        3.0 * nth_root(s1 * s2 * s3 / (pf * pf), 3) - (s1 + s2 + s3) / pf
    };
    w.max(0.0)
}

/// The matrix multiplications performed by a TTM-in-sequence evaluation in
/// the given mode order: step k contracts the r_k × n_k factor against the
/// mode-k unfolding of the current intermediate. Returns (m, k, n) triples.
pub fn ttm_seq_steps(shape: &MultiTtmShape, order: &[usize]) -> Result<Vec<(u128, u128, u128)>> {
    let d = shape.d();
    validate_order(order, d)?;
    let mut cur: Vec<u128> = shape.n_dims().iter().map(|&v| v as u128).collect();
    let mut steps = Vec::with_capacity(d);
    for &mode in order {
        let rest: u128 = cur
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != mode)
            .map(|(_, &v)| v)
            .product();
        steps.push((
            shape.r_dims()[mode] as u128,
            shape.n_dims()[mode] as u128,
            rest,
        ));
        cur[mode] = shape.r_dims()[mode] as u128;
    }
    Ok(steps)
}

fn validate_order(order: &[usize], d: usize) -> Result<()> {
    let mut seen = vec![false; d];
    if order.len() != d {
        return Err(Error::InvalidModeOrder(format!(
            "order has {} entries for {d} modes",
            order.len()
        )));
    }
    for &m in order {
        if m >= d || seen[m] {
            return Err(Error::InvalidModeOrder(format!("bad mode {m}")));
        }
        seen[m] = true;
    }
    Ok(())
}

/// Lower bound for the TTM-in-sequence approach: the sum of per-step matrix
/// multiplication bounds over the first d−1 products of the sequence (the
/// reference curves this reproduces do not charge the final product).
pub fn ttm_seq_lb(shape: &MultiTtmShape, p: u128, order: Option<&[usize]>) -> Result<f64> {
    let increasing: Vec<usize> = (0..shape.d()).collect();
    let order = order.unwrap_or(&increasing);
    let steps = ttm_seq_steps(shape, order)?;
    Ok(steps[..steps.len() - 1]
        .iter()
        .map(|&(m, k, n)| matmul_lb(m, k, n, p))
        .sum())
}

/// Bound for the first TTM alone (increasing mode order); a valid bound for
/// the whole sequence.
pub fn first_ttm_lb(shape: &MultiTtmShape, p: u128) -> Result<f64> {
    let increasing: Vec<usize> = (0..shape.d()).collect();
    let steps = ttm_seq_steps(shape, &increasing)?;
    let (m, k, n) = steps[0];
    Ok(matmul_lb(m, k, n, p))
}
