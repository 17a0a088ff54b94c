//! Partition schemes, block bookkeeping and the uncoded reference product.
//!
//! Matrix `M_i` (shape `r_i x r_{i+1}`) is cut into `p_i` row bands and
//! `p_{i+1}` column bands. Block `(b, b')` sits at flat position
//! `b * p_{i+1} + b'`, row index varying slowest.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{FieldMatrix, PrimeField};
use crate::index::MixedRadix;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartitionScheme {
    dims: Vec<usize>,
    parts: Vec<usize>,
}

impl PartitionScheme {
    /// `dims = (r_0..r_m)`, `parts = (p_0..p_m)`, chain length `m >= 2`.
    pub fn new(dims: Vec<usize>, parts: Vec<usize>) -> Result<Self> {
        if dims.len() != parts.len() {
            return Err(Error::InvalidParameter(format!(
                "{} dimensions but {} partition counts",
                dims.len(),
                parts.len()
            )));
        }
        if dims.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "chain length m = {} must be at least 2",
                dims.len().saturating_sub(1)
            )));
        }
        for (index, (&dim, &p)) in dims.iter().zip(&parts).enumerate() {
            if dim == 0 || p == 0 {
                return Err(Error::InvalidParameter(format!("r_{index} and p_{index} must be positive")));
            }
            if dim % p != 0 {
                return Err(Error::IndivisibleDimension { index, dim, parts: p });
            }
        }
        Ok(Self { dims, parts })
    }

    /// Scheme whose block sizes are `block[i]`, i.e. `r_i = p_i * block[i]`.
    pub fn with_block_sizes(parts: Vec<usize>, block: &[usize]) -> Result<Self> {
        if parts.len() != block.len() {
            return Err(Error::InvalidParameter("block size list length differs from parts".into()));
        }
        let dims = parts.iter().zip(block).map(|(p, b)| p * b).collect();
        Self::new(dims, parts)
    }

    /// Number of matrices in the chain.
    pub fn m(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// `K = prod p_i`.
    pub fn partition_level(&self) -> u128 {
        self.parts.iter().map(|&p| p as u128).product()
    }

    /// Shape of every block of `M_i`.
    pub fn block_shape(&self, i: usize) -> (usize, usize) {
        (self.dims[i] / self.parts[i], self.dims[i + 1] / self.parts[i + 1])
    }

    /// Shape of every block of the final product.
    pub fn result_block_shape(&self) -> (usize, usize) {
        let m = self.m();
        (self.dims[0] / self.parts[0], self.dims[m] / self.parts[m])
    }

    /// All index tuples `(n_0, n_1, .., n_m)`; there are exactly `K`.
    pub fn index_tuples(&self) -> MixedRadix {
        MixedRadix::new(&self.parts)
    }
}

/// The `m` input matrices cut into blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockChain {
    scheme: PartitionScheme,
    blocks: Vec<Vec<FieldMatrix>>,
}

impl BlockChain {
    pub fn scheme(&self) -> &PartitionScheme {
        &self.scheme
    }

    /// Block `M_i^{(b, b')}`.
    pub fn block(&self, i: usize, b: usize, b_next: usize) -> &FieldMatrix {
        &self.blocks[i][b * self.scheme.parts[i + 1] + b_next]
    }

    /// Blocks of `M_i` in row-major block order.
    pub fn blocks_of(&self, i: usize) -> &[FieldMatrix] {
        &self.blocks[i]
    }

    /// Stitches the blocks back into the original matrices.
    pub fn reassemble(&self) -> Vec<FieldMatrix> {
        (0..self.scheme.m())
            .map(|i| {
                let (br, bc) = self.scheme.block_shape(i);
                let mut full = FieldMatrix::zeros(self.scheme.dims[i], self.scheme.dims[i + 1]);
                for b in 0..self.scheme.parts[i] {
                    for b2 in 0..self.scheme.parts[i + 1] {
                        full.paste(b * br, b2 * bc, self.block(i, b, b2)).expect("block fits");
                    }
                }
                full
            })
            .collect()
    }
}

/// Splits a conformable chain according to `parts = (p_0..p_m)`.
pub fn partition(matrices: &[FieldMatrix], parts: &[usize]) -> Result<BlockChain> {
    let dims = chain_dims(matrices)?;
    if parts.len() != dims.len() {
        return Err(Error::InvalidParameter(format!(
            "{} matrices need {} partition counts, got {}",
            matrices.len(),
            dims.len(),
            parts.len()
        )));
    }
    let scheme = PartitionScheme::new(dims, parts.to_vec())?;
    let blocks = matrices
        .iter()
        .enumerate()
        .map(|(i, mat)| {
            let (br, bc) = scheme.block_shape(i);
            let mut out = Vec::with_capacity(parts[i] * parts[i + 1]);
            for b in 0..parts[i] {
                for b2 in 0..parts[i + 1] {
                    out.push(mat.submatrix(b * br, b2 * bc, br, bc)?);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(BlockChain { scheme, blocks })
}

/// Seeded random chain with the scheme's dimensions.
pub fn random_chain<R: Rng + ?Sized>(scheme: &PartitionScheme, field: &PrimeField, rng: &mut R) -> BlockChain {
    let matrices: Vec<FieldMatrix> = (0..scheme.m())
        .map(|i| FieldMatrix::random(scheme.dims[i], scheme.dims[i + 1], field, rng))
        .collect();
    partition(&matrices, &scheme.parts).expect("dimensions come from a valid scheme")
}

/// `M^{(n_0, n, n_m)} = M_0^{n_0,n_1} M_1^{n_1,n_2} ... M_{m-1}^{n_{m-1},n_m}`.
pub fn block_chain_product(chain: &BlockChain, indices: &[usize], field: &PrimeField) -> Result<FieldMatrix> {
    let parts = chain.scheme.parts();
    if indices.len() != parts.len() {
        return Err(Error::IndexOutOfRange(format!(
            "need {} indices, got {}",
            parts.len(),
            indices.len()
        )));
    }
    if let Some(k) = indices.iter().zip(parts).position(|(n, p)| n >= p) {
        return Err(Error::IndexOutOfRange(format!("n_{k} = {} but p_{k} = {}", indices[k], parts[k])));
    }
    let mut acc = chain.block(0, indices[0], indices[1]).clone();
    for i in 1..chain.scheme.m() {
        acc = acc.mat_mul(chain.block(i, indices[i], indices[i + 1]), field)?;
    }
    Ok(acc)
}

/// Uncoded product of the whole chain, multiplied left to right.
pub fn oracle_chain_multiply(matrices: &[FieldMatrix], field: &PrimeField) -> Result<FieldMatrix> {
    chain_dims(matrices)?;
    let mut iter = matrices.iter();
    let first = iter.next().expect("chain_dims rejects empty chains").clone();
    iter.try_fold(first, |acc, m| acc.mat_mul(m, field))
}

fn chain_dims(matrices: &[FieldMatrix]) -> Result<Vec<usize>> {
    let Some(first) = matrices.first() else {
        return Err(Error::ChainShapeMismatch("empty chain".into()));
    };
    let mut dims = vec![first.rows()];
    for (i, m) in matrices.iter().enumerate() {
        if m.rows() != *dims.last().unwrap() {
            return Err(Error::ChainShapeMismatch(format!(
                "M_{} has {} columns but M_{i} has {} rows",
                i.wrapping_sub(1),
                dims.last().unwrap(),
                m.rows()
            )));
        }
        dims.push(m.cols());
    }
    Ok(dims)
}

/// The `p_0 x p_m` grid of result blocks `M^{n_0, n_m}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainResult {
    scheme: PartitionScheme,
    blocks: Vec<Option<FieldMatrix>>,
}

impl ChainResult {
    pub fn empty(scheme: PartitionScheme) -> Self {
        let m = scheme.m();
        let count = scheme.parts[0] * scheme.parts[m];
        Self { scheme, blocks: vec![None; count] }
    }

    pub fn scheme(&self) -> &PartitionScheme {
        &self.scheme
    }

    fn slot(&self, n0: usize, nm: usize) -> Result<usize> {
        let (p0, pm) = (self.scheme.parts[0], self.scheme.parts[self.scheme.m()]);
        if n0 >= p0 || nm >= pm {
            return Err(Error::IndexOutOfRange(format!("result block ({n0}, {nm}) in a {p0}x{pm} grid")));
        }
        Ok(n0 * pm + nm)
    }

    pub fn set(&mut self, n0: usize, nm: usize, block: FieldMatrix) -> Result<()> {
        if block.shape() != self.scheme.result_block_shape() {
            return Err(Error::ShapeMismatch);
        }
        let slot = self.slot(n0, nm)?;
        self.blocks[slot] = Some(block);
        Ok(())
    }

    pub fn get(&self, n0: usize, nm: usize) -> Option<&FieldMatrix> {
        self.slot(n0, nm).ok().and_then(|s| self.blocks[s].as_ref())
    }
}

/// Tiles the result blocks into the `r_0 x r_m` product.
pub fn assemble_result(result: &ChainResult) -> Result<FieldMatrix> {
    let scheme = &result.scheme;
    let m = scheme.m();
    let (br, bc) = scheme.result_block_shape();
    let mut out = FieldMatrix::zeros(scheme.dims[0], scheme.dims[m]);
    for n0 in 0..scheme.parts[0] {
        for nm in 0..scheme.parts[m] {
            let block = result.get(n0, nm).ok_or(Error::MissingBlock(n0, nm))?;
            out.paste(n0 * br, nm * bc, block)?;
        }
    }
    Ok(out)
}
