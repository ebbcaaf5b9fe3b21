//! Minibatch partitions of the measurement rows and the local accumulated
//! coherence
//!
//! ```text
//! μ_ℓ(A, S̄, K) = max_q max_{j ∈ S_q} Σ_{k ∈ S_q} |⟨a_j, a_k⟩|
//! ```
//!
//! which includes the diagonal term `‖a_j‖²`.

use std::fmt;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{stream, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Block `k` holds rows `k, k + K, k + 2K, …`.
    Interleaved,
    /// Seeded shuffle, then consecutive chunking.
    Random { seed: u64 },
    /// Contiguous chunks of rows.
    Consecutive,
    /// Explicit, user-provided blocks.
    Custom,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Interleaved => "interleaved",
            Scheme::Random { .. } => "random",
            Scheme::Consecutive => "consecutive",
            Scheme::Custom => "custom",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Scheme::Random { seed } => Some(*seed),
            _ => None,
        }
    }

    /// Parse `interleaved`, `consecutive` or `random` (which takes `seed`).
    pub fn parse(name: &str, seed: u64) -> Result<Scheme> {
        match name {
            "interleaved" => Ok(Scheme::Interleaved),
            "consecutive" => Ok(Scheme::Consecutive),
            "random" => Ok(Scheme::Random { seed }),
            other => Err(Error::invalid(format!("unknown partition scheme `{other}`"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Random { seed } => write!(f, "random({seed})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Disjoint nonempty blocks covering `0..n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "PartitionRecord", try_from = "PartitionRecord")]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    scheme: Scheme,
    n: usize,
}

/// Serialized form: generated schemes are stored by recipe, custom ones by
/// their explicit blocks.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct PartitionRecord {
    scheme: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    k: usize,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    blocks: Option<Vec<Vec<usize>>>,
}

impl From<Partition> for PartitionRecord {
    fn from(p: Partition) -> Self {
        PartitionRecord {
            scheme: p.scheme.name().into(),
            seed: p.scheme.seed(),
            k: p.k(),
            n: p.n,
            blocks: (p.scheme == Scheme::Custom).then_some(p.blocks),
        }
    }
}

impl TryFrom<PartitionRecord> for Partition {
    type Error = Error;

    fn try_from(r: PartitionRecord) -> Result<Self> {
        let p = if r.scheme == "custom" {
            let blocks = r
                .blocks
                .ok_or_else(|| Error::invalid("custom partition needs explicit blocks"))?;
            Partition::custom(blocks, r.n)?
        } else {
            let scheme = Scheme::parse(&r.scheme, r.seed.unwrap_or(0))?;
            make_partition(scheme, r.n, r.k)?
        };
        if p.k() != r.k {
            return Err(Error::invalid(format!(
                "partition declares K = {} but has {} blocks",
                r.k,
                p.k()
            )));
        }
        Ok(p)
    }
}

impl Partition {
    /// Validate explicit blocks over `0..n`.
    pub fn custom(blocks: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for (k, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::invalid(format!("block {k} is empty")));
            }
            for &i in block {
                if i >= n {
                    return Err(Error::invalid(format!("row {i} out of range 0..{n}")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::invalid(format!("row {i} appears in two blocks")));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::invalid(format!("row {missing} is not covered")));
        }
        Ok(Partition {
            blocks,
            scheme: Scheme::Custom,
            n,
        })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &[usize] {
        &self.blocks[k]
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn has_equal_blocks(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == self.blocks[0].len())
    }

    /// Apply a row permutation `perm` (old row `i` becomes row `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Partition> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|&i| perm[i]).collect())
            .collect();
        Partition::custom(blocks, self.n)
    }
}

/// Build a `K`-block partition of `0..n`.
///
/// When `K` does not divide `n` the first `n mod K` blocks get one extra row.
pub fn make_partition(scheme: Scheme, n: usize, k: usize) -> Result<Partition> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 ≤ K ≤ n, got K = {k}, n = {n}")));
    }
    let chunked = |order: Vec<usize>| -> Vec<Vec<usize>> {
        let (base, extra) = (n / k, n % k);
        let mut out = Vec::with_capacity(k);
        let mut start = 0;
        for b in 0..k {
            let len = base + usize::from(b < extra);
            out.push(order[start..start + len].to_vec());
            start += len;
        }
        out
    };
    let blocks = match scheme {
        Scheme::Interleaved => (0..k).map(|b| (b..n).step_by(k).collect()).collect(),
        Scheme::Consecutive => chunked((0..n).collect()),
        Scheme::Random { seed } => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut stream(seed, Stream::Partition));
            chunked(order)
        }
        Scheme::Custom => {
            return Err(Error::invalid(
                "custom partitions are built from explicit blocks",
            ))
        }
    };
    Ok(Partition { blocks, scheme, n })
}

fn check_rows(a: &Matrix, p: &Partition) -> Result<()> {
    if p.n() != a.nrows() {
        return Err(Error::dims(format!(
            "partition covers {} rows, operator has {}",
            p.n(),
            a.nrows()
        )));
    }
    Ok(())
}

/// Largest absolute row sum of `|S^k A (S^k A)ᵀ|` over one block.
pub fn block_coherence(a: &Matrix, block: &[usize]) -> f64 {
    let m = block.len();
    let gram = a.row_gram(block);
    gram.chunks(m)
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Exact `μ_ℓ(A, P)`.
pub fn local_accumulated_coherence(a: &Matrix, p: &Partition) -> Result<f64> {
    check_rows(a, p)?;
    Ok(p.blocks()
        .par_iter()
        .map(|b| block_coherence(a, b))
        .reduce(|| 0.0, f64::max))
}

/// `S^k A`: the rows of `block`, in order.
pub fn subset_operator(a: &Matrix, block: &[usize]) -> Result<Matrix> {
    let mut sorted = block.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("block indices must be distinct"));
    }
    a.select_rows(block)
}
