//! Deterministic rank-level execution of the atomic grid algorithm on dense
//! data: every rank's local contraction runs in a fixed order inside one
//! process, collectives are exact word accounting, and reductions sum in
//! ascending rank order so results are bit-reproducible.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::shape::{MultiTtmShape, ProcGrid};

/// Dense tensor, first mode fastest (column-major linearization).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let len: usize = dims.iter().product();
        if values.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "{} values for dims {dims:?}",
                values.len()
            )));
        }
        Ok(DenseTensor { dims, values })
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let len = dims.iter().product();
        DenseTensor {
            dims,
            values: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Strides of the linearization (stride of mode 0 is 1).
    fn strides(&self) -> Vec<usize> {
        strides_of(&self.dims)
    }

    /// Largest elementwise relative difference against another tensor.
    pub fn max_rel_err(&self, other: &DenseTensor) -> f64 {
        assert_eq!(self.dims, other.dims);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).abs() / a.abs().max(b.abs()).max(1e-300))
            .fold(0.0, f64::max)
    }
}

fn strides_of(dims: &[usize]) -> Vec<usize> {
    let mut s = Vec::with_capacity(dims.len());
    let mut acc = 1;
    for &d in dims {
        s.push(acc);
        acc *= d;
    }
    s
}

/// n_k × r_k factor matrix, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl FactorMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {rows}x{cols} matrix",
                values.len()
            )));
        }
        Ok(FactorMatrix { rows, cols, values })
    }

    pub fn identity(n: usize) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i + n * i] = 1.0;
        }
        FactorMatrix {
            rows: n,
            cols: n,
            values,
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i + self.rows * j]
    }
}

/// Mode-k contraction: result dim k becomes a.cols, summing over a.rows.
/// Returns the result and the flop count (2 per multiply-add).
fn ttm_counted(x: &DenseTensor, a: &FactorMatrix, mode: usize) -> Result<(DenseTensor, u128)> {
    if mode >= x.dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "mode {mode} out of range for order {}",
            x.dims.len()
        )));
    }
    if a.rows != x.dims[mode] {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows, mode {mode} has extent {}",
            a.rows, x.dims[mode]
        )));
    }
    let inner: usize = x.dims[..mode].iter().product();
    let outer: usize = x.dims[mode + 1..].iter().product();
    let n_mode = x.dims[mode];
    let mut dims = x.dims.clone();
    dims[mode] = a.cols;
    let mut y = DenseTensor::zeros(dims);
    for o in 0..outer {
        for c in 0..a.cols {
            let y_base = inner * (c + a.cols * o);
            for i in 0..n_mode {
                let coeff = a.at(i, c);
                let x_base = inner * (i + n_mode * o);
                for l in 0..inner {
                    y.values[y_base + l] += coeff * x.values[x_base + l];
                }
            }
        }
    }
    let macs = outer as u128 * a.cols as u128 * n_mode as u128 * inner as u128;
    Ok((y, 2 * macs))
}

/// Mode-k tensor-times-matrix product.
pub fn ttm(x: &DenseTensor, a: &FactorMatrix, mode: usize) -> Result<DenseTensor> {
    ttm_counted(x, a, mode).map(|(y, _)| y)
}

/// Reference evaluation as a sequence of single-mode products in the given
/// order, with the measured flop count.
pub fn oracle_sequence_counted(
    x: &DenseTensor,
    mats: &[FactorMatrix],
    order: &[usize],
) -> Result<(DenseTensor, u128)> {
    if mats.len() != x.dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} matrices for order-{} tensor",
            mats.len(),
            x.dims.len()
        )));
    }
    let mut seen = vec![false; x.dims.len()];
    for &m in order {
        if m >= x.dims.len() || seen[m] {
            return Err(Error::InvalidModeOrder(format!("bad mode {m}")));
        }
        seen[m] = true;
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::InvalidModeOrder("order misses modes".into()));
    }
    let mut cur = x.clone();
    let mut flops = 0u128;
    for &m in order {
        let (next, f) = ttm_counted(&cur, &mats[m], m)?;
        cur = next;
        flops += f;
    }
    Ok((cur, flops))
}

/// Reference evaluation in increasing mode order.
pub fn oracle_sequence(x: &DenseTensor, mats: &[FactorMatrix]) -> Result<DenseTensor> {
    let order: Vec<usize> = (0..x.dims.len()).collect();
    oracle_sequence_counted(x, mats, &order).map(|(y, _)| y)
}

/// Direct evaluation of the defining sum: one (d+1)-ary multiply per
/// (input index, output index) pair, accumulated in ascending input order.
/// Intended for tiny instances.
pub fn oracle_atomic(x: &DenseTensor, mats: &[FactorMatrix]) -> Result<DenseTensor> {
    let d = x.dims.len();
    if mats.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "{} matrices for order-{d} tensor",
            mats.len()
        )));
    }
    for (k, m) in mats.iter().enumerate() {
        if m.rows != x.dims[k] {
            return Err(Error::DimensionMismatch(format!(
                "matrix {k} has {} rows, mode has extent {}",
                m.rows, x.dims[k]
            )));
        }
    }
    let r_dims: Vec<usize> = mats.iter().map(|m| m.cols).collect();
    let mut y = DenseTensor::zeros(r_dims.clone());
    let mut n_idx = vec![0usize; d];
    let mut r_idx = vec![0usize; d];
    let mut xi = 0usize;
    loop {
        let xv = x.values[xi];
        r_idx.iter_mut().for_each(|v| *v = 0);
        let mut yi = 0usize;
        loop {
            let mut term = xv;
            for j in 0..d {
                term *= mats[j].at(n_idx[j], r_idx[j]);
            }
            y.values[yi] += term;
            yi += 1;
            if !advance(&mut r_idx, &r_dims) {
                break;
            }
        }
        xi += 1;
        if !advance(&mut n_idx, &x.dims) {
            return Ok(y);
        }
    }
}

/// Odometer increment, first index fastest. False once wrapped to zero.
fn advance(idx: &mut [usize], dims: &[usize]) -> bool {
    for (i, &d) in idx.iter_mut().zip(dims) {
        *i += 1;
        if *i < d {
            return true;
        }
        *i = 0;
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CollectiveKind {
    AllGather,
    ReduceScatter,
}

impl std::fmt::Display for CollectiveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CollectiveKind::AllGather => write!(f, "all-gather"),
            CollectiveKind::ReduceScatter => write!(f, "reduce-scatter"),
        }
    }
}

/// One collective stage as seen by a rank.
#[derive(Debug, Clone, Serialize)]
pub struct CollectiveRecord {
    pub kind: CollectiveKind,
    /// Which array moved: "X", "A1".."Ad", or "Y".
    pub array: String,
    pub group_size: u64,
    /// (1 − 1/Q)·w with w the per-group block words.
    pub words_per_rank: u128,
}

impl CollectiveRecord {
    pub fn trace_line(&self) -> String {
        format!(
            "{},{},{},{}",
            self.kind, self.array, self.group_size, self.words_per_rank
        )
    }
}

/// Output tensor plus exact per-rank accounting from a logical execution.
#[derive(Debug, Clone)]
pub struct SimResult {
    pub y: DenseTensor,
    /// Words moved per rank (gathers received plus reduce contributions sent).
    pub per_rank_words: Vec<u128>,
    /// Maximum over ranks.
    pub critical_path_words: u128,
    pub collectives: Vec<CollectiveRecord>,
    /// Measured flops per rank: 2 per local multiply-add plus reduction adds.
    pub flops_per_rank: Vec<u128>,
}

impl SimResult {
    pub fn trace(&self) -> String {
        self.collectives
            .iter()
            .map(|c| c.trace_line())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Generates a tensor and matrices with uniform [0,1) entries from one
/// seeded stream: the tensor first, then each matrix in mode order.
pub fn seeded_data(shape: &MultiTtmShape, seed: u64) -> (DenseTensor, Vec<FactorMatrix>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new(0.0f64, 1.0);
    let dims: Vec<usize> = shape.n_dims().iter().map(|&v| v as usize).collect();
    let len: usize = dims.iter().product();
    let x = DenseTensor {
        values: (0..len).map(|_| dist.sample(&mut rng)).collect(),
        dims,
    };
    let mats = shape
        .n_dims()
        .iter()
        .zip(shape.r_dims())
        .map(|(&n, &r)| FactorMatrix {
            rows: n as usize,
            cols: r as usize,
            values: (0..(n * r) as usize).map(|_| dist.sample(&mut rng)).collect(),
        })
        .collect();
    (x, mats)
}

/// Copies the block of `x` starting at `offset` with extents `extent`.
fn extract_block(x: &DenseTensor, offset: &[usize], extent: &[usize]) -> DenseTensor {
    let strides = x.strides();
    let mut block = DenseTensor::zeros(extent.to_vec());
    let mut idx = vec![0usize; extent.len()];
    let mut bi = 0usize;
    loop {
        let src: usize = idx
            .iter()
            .zip(offset)
            .zip(&strides)
            .map(|((&i, &o), &s)| (i + o) * s)
            .sum();
        block.values[bi] = x.values[src];
        bi += 1;
        if !advance(&mut idx, extent) {
            return block;
        }
    }
}

fn group_share(words: u128, group: u128, what: &str) -> Result<u128> {
    if !words.is_multiple_of(group) {
        return Err(Error::Divisibility(format!(
            "{what}: block of {words} words not evenly divisible over group of {group}"
        )));
    }
    Ok(words / group)
}

/// Runs the atomic algorithm logically: every rank gathers its blocks,
/// contracts locally in increasing mode order, and contributes to its output
/// group's reduction (summed in ascending rank order). Word counts are the
/// blocks actually received (gathers) or shipped (reduction).
pub fn simulate_alg(
    shape: &MultiTtmShape,
    grid: &ProcGrid,
    x: &DenseTensor,
    mats: &[FactorMatrix],
) -> Result<SimResult> {
    let d = shape.d();
    // Input validation.
    let n_dims: Vec<usize> = shape.n_dims().iter().map(|&v| v as usize).collect();
    let r_dims: Vec<usize> = shape.r_dims().iter().map(|&v| v as usize).collect();
    if x.dims != n_dims {
        return Err(Error::DimensionMismatch(format!(
            "tensor dims {:?} vs shape {:?}",
            x.dims, n_dims
        )));
    }
    if mats.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "{} matrices for order {d}",
            mats.len()
        )));
    }
    for (k, m) in mats.iter().enumerate() {
        if m.rows != n_dims[k] || m.cols != r_dims[k] {
            return Err(Error::DimensionMismatch(format!(
                "matrix {k} is {}x{}, expected {}x{}",
                m.rows, m.cols, n_dims[k], r_dims[k]
            )));
        }
    }
    if !grid.divides(shape) {
        return Err(Error::Divisibility(format!(
            "grid {grid} does not divide {shape}"
        )));
    }
    let p_total = grid.total();
    if p_total > 1 << 20 {
        return Err(Error::LoadBalance(format!(
            "P = {p_total} too large for rank-level simulation"
        )));
    }

    let p_dims: Vec<usize> = grid.p.iter().map(|&v| v as usize).collect();
    let q_dims: Vec<usize> = grid.q.iter().map(|&v| v as usize).collect();
    let nb: Vec<usize> = (0..d).map(|k| n_dims[k] / p_dims[k]).collect();
    let rb: Vec<usize> = (0..d).map(|k| r_dims[k] / q_dims[k]).collect();

    // Per-rank word accounting; identical across ranks by symmetry, but
    // derived from the actual block sizes.
    let x_block: u128 = nb.iter().map(|&v| v as u128).product();
    let y_block: u128 = rb.iter().map(|&v| v as u128).product();
    let p_prod = grid.p_product();
    let q_prod = grid.q_product();
    let mut collectives = Vec::with_capacity(d + 2);
    let q_x = p_total / p_prod;
    let mut words = x_block - group_share(x_block, q_x, "input all-gather")?;
    collectives.push(CollectiveRecord {
        kind: CollectiveKind::AllGather,
        array: "X".into(),
        group_size: q_x as u64,
        words_per_rank: words,
    });
    for k in 0..d {
        let w_k = (nb[k] * rb[k]) as u128;
        let q_k = p_total / (grid.p[k] as u128 * grid.q[k] as u128);
        let recv = w_k - group_share(w_k, q_k, "matrix all-gather")?;
        collectives.push(CollectiveRecord {
            kind: CollectiveKind::AllGather,
            array: format!("A{}", k + 1),
            group_size: q_k as u64,
            words_per_rank: recv,
        });
        words += recv;
    }
    let q_y = p_total / q_prod;
    let y_sent = y_block - group_share(y_block, q_y, "output reduce-scatter")?;
    collectives.push(CollectiveRecord {
        kind: CollectiveKind::ReduceScatter,
        array: "Y".into(),
        group_size: q_y as u64,
        words_per_rank: y_sent,
    });
    words += y_sent;

    // Execute: iterate output groups, then input coordinates ascending, so
    // each reduction accumulates in a fixed rank order.
    let mut y = DenseTensor::zeros(r_dims.clone());
    let y_strides = strides_of(&r_dims);
    let mut kernel_flops = 0u128;
    let mut reduce_adds_total = 0u128;
    let mut q_coord = vec![0usize; d];
    loop {
        let mut acc = DenseTensor::zeros(rb.clone());
        let mut first = true;
        let mut p_coord = vec![0usize; d];
        loop {
            // Local blocks for rank (p_coord, q_coord).
            let x_off: Vec<usize> = (0..d).map(|k| p_coord[k] * nb[k]).collect();
            let x_loc = extract_block(x, &x_off, &nb);
            let mut local_flops = 0u128;
            let mut cur = x_loc;
            for k in 0..d {
                let mut vals = Vec::with_capacity(nb[k] * rb[k]);
                for c in 0..rb[k] {
                    let col = q_coord[k] * rb[k] + c;
                    for i in 0..nb[k] {
                        let row = p_coord[k] * nb[k] + i;
                        vals.push(mats[k].at(row, col));
                    }
                }
                let a_loc = FactorMatrix {
                    rows: nb[k],
                    cols: rb[k],
                    values: vals,
                };
                let (next, f) = ttm_counted(&cur, &a_loc, k)?;
                cur = next;
                local_flops += f;
            }
            kernel_flops += local_flops;
            if first {
                acc.values.copy_from_slice(&cur.values);
                first = false;
            } else {
                for (a, &v) in acc.values.iter_mut().zip(&cur.values) {
                    *a += v;
                }
                reduce_adds_total += cur.values.len() as u128;
            }
            if !advance(&mut p_coord, &p_dims) {
                break;
            }
        }
        // Place the reduced block of Y owned by this output group.
        let mut idx = vec![0usize; d];
        let mut bi = 0usize;
        loop {
            let dst: usize = (0..d)
                .map(|k| (q_coord[k] * rb[k] + idx[k]) * y_strides[k])
                .sum();
            y.values[dst] = acc.values[bi];
            bi += 1;
            if !advance(&mut idx, &rb) {
                break;
            }
        }
        if !advance(&mut q_coord, &q_dims) {
            break;
        }
    }

    // Attribute measured work evenly over the ranks that performed it.
    let ranks = p_total as usize;
    let kernel_per_rank = group_share(kernel_flops, p_total, "kernel flops")?;
    let reduce_per_rank = group_share(reduce_adds_total, p_total, "reduce adds")?;
    let flops_per_rank = vec![kernel_per_rank + reduce_per_rank; ranks];
    Ok(SimResult {
        y,
        per_rank_words: vec![words; ranks],
        critical_path_words: words,
        collectives,
        flops_per_rank,
    })
}
