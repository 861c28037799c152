//! Problem instances: tensor shapes, canonicalization, and processor grids.
//!
//! A Multi-TTM instance multiplies an n₁ × ⋯ × n_d input tensor by one
//! n_k × r_k matrix per mode, producing an r₁ × ⋯ × r_d output tensor.
//! Analysis code assumes the canonical form: the input tensor is at least as
//! large as the output and modes are sorted by n_i·r_i ascending.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensions of a Multi-TTM instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ShapeRepr", into = "ShapeRepr")]
pub struct MultiTtmShape {
    n: Vec<u64>,
    r: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct ShapeRepr {
    d: usize,
    n: Vec<u64>,
    r: Vec<u64>,
}

impl From<MultiTtmShape> for ShapeRepr {
    fn from(s: MultiTtmShape) -> Self {
        ShapeRepr { d: s.d(), n: s.n, r: s.r }
    }
}

impl TryFrom<ShapeRepr> for MultiTtmShape {
    type Error = Error;
    fn try_from(repr: ShapeRepr) -> Result<Self> {
        if repr.d != repr.n.len() {
            return Err(Error::InvalidShape(format!(
                "declared order {} does not match {} input dims",
                repr.d,
                repr.n.len()
            )));
        }
        MultiTtmShape::new(repr.n, repr.r)
    }
}

impl MultiTtmShape {
    /// Builds a shape, requiring order ≥ 2 and every dimension ≥ 2.
    pub fn new(n: Vec<u64>, r: Vec<u64>) -> Result<Self> {
        if n.len() != r.len() {
            return Err(Error::InvalidShape(format!(
                "{} input dims vs {} output dims",
                n.len(),
                r.len()
            )));
        }
        if n.len() < 2 {
            return Err(Error::InvalidShape(format!("order {} < 2", n.len())));
        }
        if let Some(&bad) = n.iter().chain(r.iter()).find(|&&v| v < 2) {
            return Err(Error::InvalidShape(format!("dimension {bad} < 2")));
        }
        Ok(MultiTtmShape { n, r })
    }

    /// Cubical shape with all input dims `n_i` and all output dims `r_i`.
    pub fn cubical(d: usize, n_i: u64, r_i: u64) -> Result<Self> {
        Self::new(vec![n_i; d], vec![r_i; d])
    }

    pub fn d(&self) -> usize {
        self.n.len()
    }

    pub fn n_dims(&self) -> &[u64] {
        &self.n
    }

    pub fn r_dims(&self) -> &[u64] {
        &self.r
    }

    /// Total input tensor size n = Πn_i (saturating above u128::MAX).
    pub fn n_total(&self) -> u128 {
        self.n.iter().fold(1u128, |acc, &v| acc.saturating_mul(v as u128))
    }

    /// Total output tensor size r = Πr_i.
    pub fn r_total(&self) -> u128 {
        self.r.iter().fold(1u128, |acc, &v| acc.saturating_mul(v as u128))
    }

    /// Per-mode matrix sizes n_i·r_i.
    pub fn matrix_sizes(&self) -> Vec<u128> {
        self.n
            .iter()
            .zip(&self.r)
            .map(|(&n, &r)| n as u128 * r as u128)
            .collect()
    }

    /// True when mode products are ascending and the input is no smaller than
    /// the output.
    pub fn is_canonical(&self) -> bool {
        let sizes = self.matrix_sizes();
        sizes.windows(2).all(|w| w[0] <= w[1]) && self.n_total() >= self.r_total()
    }

    /// True when every dimension is a power of two.
    pub fn is_pow2(&self) -> bool {
        self.n
            .iter()
            .chain(self.r.iter())
            .all(|&v| v.is_power_of_two())
    }

    /// Largest processor count at which every array still has at least one
    /// element per processor: min{n_i·r_i, n, r}.
    pub fn p_max(&self) -> u128 {
        let mut m = self.n_total().min(self.r_total());
        for s in self.matrix_sizes() {
            m = m.min(s);
        }
        m
    }

    /// Parses the text form `n=4,8,64 r=2,2,2`.
    pub fn parse_text(s: &str) -> Result<Self> {
        let mut n = None;
        let mut r = None;
        for field in s.split_whitespace() {
            let (key, vals) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{field}`")))?;
            let dims = parse_dim_list(vals)?;
            match key {
                "n" => n = Some(dims),
                "r" => r = Some(dims),
                other => return Err(Error::Parse(format!("unknown shape key `{other}`"))),
            }
        }
        match (n, r) {
            (Some(n), Some(r)) => MultiTtmShape::new(n, r),
            _ => Err(Error::Parse("shape needs both n= and r=".into())),
        }
    }

    /// Parses a key-value config file: one `n = ...` and one `r = ...` line,
    /// `#` comments and blank lines ignored.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut n = None;
        let mut r = None;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, vals) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key = value, got `{line}`")))?;
            match key.trim() {
                "n" => n = Some(parse_dim_list(vals.trim())?),
                "r" => r = Some(parse_dim_list(vals.trim())?),
                other => return Err(Error::Parse(format!("unknown config key `{other}`"))),
            }
        }
        match (n, r) {
            (Some(n), Some(r)) => MultiTtmShape::new(n, r),
            _ => Err(Error::Parse("config needs both n and r entries".into())),
        }
    }
}

impl std::fmt::Display for MultiTtmShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "n={} r={}", join_dims(&self.n), join_dims(&self.r))
    }
}

/// Accepts plain integers and `2^k` exponent notation.
pub fn parse_dim(tok: &str) -> Result<u64> {
    let tok = tok.trim();
    if let Some(exp) = tok.strip_prefix("2^") {
        let e: u32 = exp
            .parse()
            .map_err(|_| Error::Parse(format!("bad exponent `{tok}`")))?;
        if e >= 64 {
            return Err(Error::Parse(format!("`{tok}` exceeds u64")));
        }
        return Ok(1u64 << e);
    }
    tok.parse()
        .map_err(|_| Error::Parse(format!("bad dimension `{tok}`")))
}

fn parse_dim_list(s: &str) -> Result<Vec<u64>> {
    s.split(',').map(parse_dim).collect()
}

fn join_dims<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Record of how a raw shape was brought to canonical form, sufficient to
/// undo the transformation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalMap {
    /// `canonical mode i` came from `original mode perm[i]`.
    pub perm: Vec<usize>,
    /// Input/output roles were exchanged to enforce n ≥ r.
    pub swapped: bool,
    /// The shape as given.
    pub original: MultiTtmShape,
}

/// Sorts modes by n_i·r_i ascending (ties by original mode index) and swaps
/// the input/output roles if the output tensor is larger. The returned map
/// inverts the transformation.
pub fn canonicalize(raw: &MultiTtmShape) -> (MultiTtmShape, CanonicalMap) {
    let swapped = raw.n_total() < raw.r_total();
    let (n_src, r_src) = if swapped {
        (raw.r.clone(), raw.n.clone())
    } else {
        (raw.n.clone(), raw.r.clone())
    };
    let mut perm: Vec<usize> = (0..raw.d()).collect();
    perm.sort_by_key(|&i| (n_src[i] as u128 * r_src[i] as u128, i));
    let n: Vec<u64> = perm.iter().map(|&i| n_src[i]).collect();
    let r: Vec<u64> = perm.iter().map(|&i| r_src[i]).collect();
    let shape = MultiTtmShape { n, r };
    debug_assert!(shape.is_canonical());
    (
        shape,
        CanonicalMap {
            perm,
            swapped,
            original: raw.clone(),
        },
    )
}

impl CanonicalMap {
    /// Maps a grid for the canonical shape back to one for the original shape.
    pub fn grid_to_original(&self, grid: &ProcGrid) -> ProcGrid {
        let d = self.perm.len();
        let mut p = vec![1u64; d];
        let mut q = vec![1u64; d];
        for (i, &src) in self.perm.iter().enumerate() {
            if self.swapped {
                // Canonical n dims are the original r dims, so the p grid
                // splits the original output tensor.
                q[src] = grid.p[i];
                p[src] = grid.q[i];
            } else {
                p[src] = grid.p[i];
                q[src] = grid.q[i];
            }
        }
        ProcGrid { p, q }
    }
}

/// Suffix products N_i = Π_{j=d-i+1..d} n_j and the analogue for r.
/// `n_suffix[0]` is N_1 = n_d and `n_suffix[d-1]` is N_d = n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixProducts {
    pub n_suffix: Vec<u128>,
    pub r_suffix: Vec<u128>,
}

/// Exact suffix products of the mode dimensions.
pub fn suffix_products(shape: &MultiTtmShape) -> SuffixProducts {
    let build = |dims: &[u64]| {
        let mut acc = 1u128;
        let mut out = Vec::with_capacity(dims.len());
        for &v in dims.iter().rev() {
            acc = acc
                .checked_mul(v as u128)
                .expect("suffix product exceeds u128");
            out.push(acc);
        }
        out
    };
    SuffixProducts {
        n_suffix: build(&shape.n),
        r_suffix: build(&shape.r),
    }
}

/// Integer 2d-dimensional processor grid (p_1..p_d, q_1..q_d).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcGrid {
    pub p: Vec<u64>,
    pub q: Vec<u64>,
}

impl ProcGrid {
    pub fn ones(d: usize) -> Self {
        ProcGrid {
            p: vec![1; d],
            q: vec![1; d],
        }
    }

    /// Total processor count P = Πp_i · Πq_i.
    pub fn total(&self) -> u128 {
        self.p
            .iter()
            .chain(self.q.iter())
            .fold(1u128, |acc, &v| acc * v as u128)
    }

    pub fn p_product(&self) -> u128 {
        self.p.iter().fold(1u128, |acc, &v| acc * v as u128)
    }

    pub fn q_product(&self) -> u128 {
        self.q.iter().fold(1u128, |acc, &v| acc * v as u128)
    }

    /// Checks p_i | n_i and q_i | r_i, the executability requirement.
    pub fn divides(&self, shape: &MultiTtmShape) -> bool {
        self.p.len() == shape.d()
            && self
                .p
                .iter()
                .zip(shape.n_dims())
                .all(|(&p, &n)| p >= 1 && n % p == 0)
            && self
                .q
                .iter()
                .zip(shape.r_dims())
                .all(|(&q, &r)| q >= 1 && r % q == 0)
    }

    pub fn to_real(&self) -> RealGrid {
        RealGrid {
            p: self.p.iter().map(|&v| v as f64).collect(),
            q: self.q.iter().map(|&v| v as f64).collect(),
        }
    }

    /// Parses `p=2,2,2 q=1,1,1` (also accepts `;` between the two lists).
    pub fn parse_text(s: &str) -> Result<Self> {
        let mut p = None;
        let mut q = None;
        for field in s.split(|c: char| c.is_whitespace() || c == ';') {
            if field.is_empty() {
                continue;
            }
            let (key, vals) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{field}`")))?;
            let dims = parse_dim_list(vals)?;
            match key {
                "p" => p = Some(dims),
                "q" => q = Some(dims),
                other => return Err(Error::Parse(format!("unknown grid key `{other}`"))),
            }
        }
        match (p, q) {
            (Some(p), Some(q)) if p.len() == q.len() && !p.is_empty() => Ok(ProcGrid { p, q }),
            (Some(_), Some(_)) => Err(Error::Parse("p and q must have equal length".into())),
            _ => Err(Error::Parse("grid needs both p= and q=".into())),
        }
    }
}

impl std::fmt::Display for ProcGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "p={} q={}", join_dims(&self.p), join_dims(&self.q))
    }
}

/// Real-valued grid used by the constructive selection procedure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealGrid {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl RealGrid {
    pub fn p_product(&self) -> f64 {
        self.p.iter().product()
    }

    pub fn q_product(&self) -> f64 {
        self.q.iter().product()
    }

    pub fn total(&self) -> f64 {
        self.p_product() * self.q_product()
    }
}
