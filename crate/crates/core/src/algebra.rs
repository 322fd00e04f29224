//! Finite-dimensional C*-algebras `M_{n_1} ⊕ … ⊕ M_{n_B}` and their elements.
//!
//! An [`Element`] is a list of dense square blocks. Every operation returns a
//! new value; nothing is mutated in place. The center consists of elements
//! that are scalar multiples of the identity in each block, and the maximal
//! ideals are indexed by blocks: ideal `k` is the set of elements whose block
//! `k` vanishes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ONE, ZERO};

/// Default cap on a single block dimension.
pub const MAX_BLOCK_DIM: usize = 8;
/// Default cap on the number of blocks.
pub const MAX_BLOCKS: usize = 6;

/// The algebra `⊕ₖ M_{nₖ}(ℂ)`, described by its block dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FdAlgebra {
    block_dims: Vec<usize>,
}

impl FdAlgebra {
    /// Builds an algebra within the default size caps.
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        Self::with_limits(block_dims, MAX_BLOCK_DIM, MAX_BLOCKS)
    }

    pub fn with_limits(block_dims: Vec<usize>, max_dim: usize, max_blocks: usize) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::InvalidDims("at least one block is required".into()));
        }
        if block_dims.len() > max_blocks {
            return Err(Error::InvalidDims(format!(
                "{} blocks exceeds the limit of {max_blocks}",
                block_dims.len()
            )));
        }
        if let Some(&bad) = block_dims.iter().find(|&&n| n == 0 || n > max_dim) {
            return Err(Error::InvalidDims(format!(
                "block dimension {bad} outside 1..={max_dim}"
            )));
        }
        Ok(Self { block_dims })
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// Total complex dimension `Σ nₖ²`.
    pub fn dimension(&self) -> usize {
        self.block_dims.iter().map(|n| n * n).sum()
    }

    /// Maximal ideals, one per block.
    pub fn maximal_ideals(&self) -> impl Iterator<Item = usize> + '_ {
        0..self.block_dims.len()
    }

    pub fn check_block(&self, k: usize) -> Result<()> {
        if k < self.num_blocks() {
            Ok(())
        } else {
            Err(Error::InvalidBlock {
                index: k,
                blocks: self.num_blocks(),
            })
        }
    }

    pub fn zero(&self) -> Element {
        Element {
            blocks: self.block_dims.iter().map(|&n| CMat::zeros(n, n)).collect(),
        }
    }

    pub fn unit(&self) -> Element {
        Element {
            blocks: self
                .block_dims
                .iter()
                .map(|&n| CMat::identity(n, n))
                .collect(),
        }
    }

    /// Central element with scalar `values[k]` on block `k`.
    pub fn central(&self, values: &[Complex64]) -> Result<Element> {
        if values.len() != self.num_blocks() {
            return Err(Error::InvalidArgument(format!(
                "expected {} central values, got {}",
                self.num_blocks(),
                values.len()
            )));
        }
        Ok(Element {
            blocks: self
                .block_dims
                .iter()
                .zip(values)
                .map(|(&n, &c)| CMat::from_diagonal_element(n, n, c))
                .collect(),
        })
    }

    /// Central projection onto block `k` (identity there, zero elsewhere).
    pub fn block_projection(&self, k: usize) -> Result<Element> {
        self.check_block(k)?;
        let values: Vec<Complex64> = (0..self.num_blocks())
            .map(|j| if j == k { ONE } else { ZERO })
            .collect();
        self.central(&values)
    }

    /// Matrix units `e_{ij}` of every block, block by block, row-major.
    pub fn canonical_basis(&self) -> Vec<Element> {
        let mut basis = Vec::with_capacity(self.dimension());
        for (k, &n) in self.block_dims.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let mut e = self.zero();
                    e.blocks[k][(i, j)] = ONE;
                    basis.push(e);
                }
            }
        }
        basis
    }

    /// Rebuilds an element from its coordinates in [`Self::canonical_basis`].
    pub fn from_coordinates(&self, coords: &[Complex64]) -> Result<Element> {
        if coords.len() != self.dimension() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coordinates, got {}",
                self.dimension(),
                coords.len()
            )));
        }
        let mut offset = 0;
        let blocks = self
            .block_dims
            .iter()
            .map(|&n| {
                let block = CMat::from_row_slice(n, n, &coords[offset..offset + n * n]);
                offset += n * n;
                block
            })
            .collect();
        Ok(Element { blocks })
    }

    pub fn check_element(&self, a: &Element) -> Result<()> {
        if a.dims() == self.block_dims {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: self.block_dims.clone(),
                found: a.dims(),
            })
        }
    }
}

/// A member of a finite-dimensional C*-algebra, stored block by block.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    blocks: Vec<CMat>,
}

impl Element {
    /// Wraps square blocks; the parent algebra is implied by their sizes.
    pub fn new(blocks: Vec<CMat>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidDims("element has no blocks".into()));
        }
        if let Some(b) = blocks.iter().find(|b| !b.is_square() || b.nrows() == 0) {
            return Err(Error::InvalidDims(format!(
                "block of shape {}x{} is not a nonempty square",
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(Self { blocks })
    }

    /// Wraps blocks, checking them against `algebra`.
    pub fn from_blocks(algebra: &FdAlgebra, blocks: Vec<CMat>) -> Result<Self> {
        let a = Self::new(blocks)?;
        algebra.check_element(&a)?;
        Ok(a)
    }

    pub(crate) fn from_blocks_unchecked(blocks: Vec<CMat>) -> Self {
        Self { blocks }
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMat {
        &self.blocks[k]
    }

    pub fn into_blocks(self) -> Vec<CMat> {
        self.blocks
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nrows()).collect()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// The algebra this element lives in, without size caps.
    pub fn algebra(&self) -> FdAlgebra {
        FdAlgebra {
            block_dims: self.dims(),
        }
    }

    pub fn same_shape(&self, other: &Element) -> Result<()> {
        if self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a.nrows() == b.nrows())
        {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: self.dims(),
                found: other.dims(),
            })
        }
    }

    fn zip_with(&self, other: &Element, f: impl Fn(&CMat, &CMat) -> CMat) -> Result<Element> {
        self.same_shape(other)?;
        Ok(Element {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: Complex64) -> Element {
        Element {
            blocks: self.blocks.iter().map(|b| b * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Element {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn adjoint(&self) -> Element {
        Element {
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    /// Operator norm: the largest block spectral norm.
    pub fn op_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::spectral_norm)
            .fold(0.0, f64::max)
    }

    /// `‖self - other‖` in operator norm.
    pub fn distance(&self, other: &Element) -> Result<f64> {
        Ok(self.sub(other)?.op_norm())
    }

    /// Unnormalized matrix trace of block `k`.
    pub fn block_trace(&self, k: usize) -> Complex64 {
        linalg::trace(&self.blocks[k])
    }

    /// Normalized trace `tr(aₖ)/nₖ` of every block; these are the values of
    /// the extreme tracial states.
    pub fn normalized_block_traces(&self) -> Vec<Complex64> {
        self.blocks
            .iter()
            .map(|b| linalg::trace(b) / b.nrows() as f64)
            .collect()
    }

    /// The center-valued trace `E`: block `k` becomes `(tr(aₖ)/nₖ)·I`.
    pub fn center_valued_trace(&self) -> Element {
        Element {
            blocks: self
                .blocks
                .iter()
                .map(|b| {
                    let n = b.nrows();
                    CMat::from_diagonal_element(n, n, linalg::trace(b) / n as f64)
                })
                .collect(),
        }
    }

    /// Whether every block trace satisfies `|tr(aₖ)| ≤ tol·nₖ`, i.e. the
    /// element lies in the closed span of commutators.
    pub fn in_commutator_closure(&self, tol: f64) -> bool {
        self.blocks
            .iter()
            .all(|b| linalg::trace(b).norm() <= tol * b.nrows() as f64)
    }

    /// Whether each block is a scalar multiple of the identity.
    pub fn is_central(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| {
            let n = b.nrows();
            let c = linalg::trace(b) / n as f64;
            linalg::max_abs_diff(b, &CMat::from_diagonal_element(n, n, c)) <= tol
        })
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn hermitian_deviation(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::hermitian_deviation)
            .fold(0.0, f64::max)
    }

    /// Whether each block is Hermitian with spectrum ≥ `-tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && self.blocks.iter().all(|b| linalg::eigh(b).0[0] >= -tol)
    }

    /// Largest entrywise deviation between two elements of the same shape.
    pub fn max_abs_diff(&self, other: &Element) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| linalg::max_abs_diff(a, b))
            .fold(0.0, f64::max))
    }

    /// Coordinates in the canonical matrix-unit basis.
    pub fn coordinates(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for b in &self.blocks {
            for i in 0..b.nrows() {
                for j in 0..b.ncols() {
                    out.push(b[(i, j)]);
                }
            }
        }
        out
    }

    /// `u a u*`, blockwise.
    pub fn conjugate_by(&self, u: &Element) -> Result<Element> {
        self.same_shape(u)?;
        Ok(Element {
            blocks: self
                .blocks
                .iter()
                .zip(&u.blocks)
                .map(|(a, u)| u * a * u.adjoint())
                .collect(),
        })
    }
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &Element, b: &Element) -> Result<Element> {
    a.mul(b)?.sub(&b.mul(a)?)
}

/// An `n`-tuple in `Aⁿ` with the maximum norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Tuple {
    entries: Vec<Element>,
}

impl Tuple {
    pub fn new(entries: Vec<Element>) -> Result<Self> {
        let first = entries.first().ok_or(Error::EmptyTuple)?;
        for e in &entries[1..] {
            first.same_shape(e)?;
        }
        Ok(Self { entries })
    }

    pub fn single(a: Element) -> Self {
        Self { entries: vec![a] }
    }

    pub fn entries(&self) -> &[Element] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Element> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.entries[0].dims()
    }

    pub fn algebra(&self) -> FdAlgebra {
        self.entries[0].algebra()
    }

    /// `max_j ‖a_j‖`.
    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(Element::op_norm)
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(&Element) -> Element) -> Tuple {
        Tuple {
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn try_map(&self, f: impl Fn(&Element) -> Result<Element>) -> Result<Tuple> {
        Ok(Tuple {
            entries: self.entries.iter().map(f).collect::<Result<_>>()?,
        })
    }

    pub fn zip_with(
        &self,
        other: &Tuple,
        f: impl Fn(&Element, &Element) -> Result<Element>,
    ) -> Result<Tuple> {
        if self.len() != other.len() {
            return Err(Error::InvalidArgument(format!(
                "tuple lengths differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(Tuple {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect::<Result<_>>()?,
        })
    }

    pub fn add(&self, other: &Tuple) -> Result<Tuple> {
        self.zip_with(other, Element::add)
    }

    pub fn sub(&self, other: &Tuple) -> Result<Tuple> {
        self.zip_with(other, Element::sub)
    }

    pub fn distance(&self, other: &Tuple) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    pub fn center_valued_trace(&self) -> Tuple {
        self.map(Element::center_valued_trace)
    }
}

/// The quotient of an algebra by the ideal of elements vanishing on the kept
/// blocks; the image is the algebra formed by those blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Quotient {
    parent: FdAlgebra,
    kept: Vec<usize>,
    image: FdAlgebra,
}

impl Quotient {
    /// `kept` lists (0-based) blocks that survive; order and duplicates are
    /// normalized away.
    pub fn new(parent: &FdAlgebra, kept: &[usize]) -> Result<Self> {
        let mut kept = kept.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if kept.is_empty() {
            return Err(Error::EmptyQuotient);
        }
        for &k in &kept {
            parent.check_block(k)?;
        }
        let image = FdAlgebra {
            block_dims: kept.iter().map(|&k| parent.block_dims[k]).collect(),
        };
        Ok(Self {
            parent: parent.clone(),
            kept,
            image,
        })
    }

    pub fn parent(&self) -> &FdAlgebra {
        &self.parent
    }

    pub fn image(&self) -> &FdAlgebra {
        &self.image
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn dropped(&self) -> Vec<usize> {
        (0..self.parent.num_blocks())
            .filter(|k| !self.kept.contains(k))
            .collect()
    }

    /// The quotient map `π`.
    pub fn project(&self, a: &Element) -> Result<Element> {
        self.parent.check_element(a)?;
        Ok(Element {
            blocks: self.kept.iter().map(|&k| a.blocks[k].clone()).collect(),
        })
    }

    pub fn project_tuple(&self, t: &Tuple) -> Result<Tuple> {
        t.try_map(|a| self.project(a))
    }

    /// Places an image element back into the parent, filling dropped blocks
    /// with `fill(n)`.
    pub fn embed_with(&self, b: &Element, fill: impl Fn(usize) -> CMat) -> Result<Element> {
        self.image.check_element(b)?;
        let mut blocks: Vec<CMat> = self.parent.block_dims.iter().map(|&n| fill(n)).collect();
        for (slot, &k) in self.kept.iter().enumerate() {
            blocks[k] = b.blocks[slot].clone();
        }
        Ok(Element { blocks })
    }

    /// Whether `a` lies in the kernel of `π`.
    pub fn kernel_contains(&self, a: &Element, tol: f64) -> Result<bool> {
        Ok(self.project(a)?.op_norm() <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn m2(entries: [f64; 4]) -> CMat {
        CMat::from_row_slice(2, 2, &entries.map(c))
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(FdAlgebra::new(vec![]).is_err());
        assert!(FdAlgebra::new(vec![2, 0]).is_err());
        assert!(FdAlgebra::new(vec![9]).is_err());
        assert!(FdAlgebra::new(vec![1; 7]).is_err());
        assert!(FdAlgebra::with_limits(vec![9], 10, 1).is_ok());
        assert_eq!(FdAlgebra::new(vec![2, 3]).unwrap().dimension(), 13);
    }

    #[test]
    fn unit_has_norm_one() {
        let alg = FdAlgebra::new(vec![2, 3]).unwrap();
        assert!((alg.unit().op_norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_norm() {
        let a = Element::new(vec![m2([3.0, 0.0, 0.0, -1.0])]).unwrap();
        assert!((a.op_norm() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn matrix_unit_commutator() {
        let e11 = Element::new(vec![m2([1.0, 0.0, 0.0, 0.0])]).unwrap();
        let e12 = Element::new(vec![m2([0.0, 1.0, 0.0, 0.0])]).unwrap();
        let comm = commutator(&e11, &e12).unwrap();
        assert_eq!(comm, e12);
        assert_eq!(commutator(&e11, &e11).unwrap().op_norm(), 0.0);
    }

    #[test]
    fn commutator_shape_mismatch() {
        let a = FdAlgebra::new(vec![2]).unwrap().unit();
        let b = FdAlgebra::new(vec![3]).unwrap().unit();
        assert!(matches!(
            commutator(&a, &b),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn commutator_closure_examples() {
        let d = Element::new(vec![m2([1.0, 0.0, 0.0, -1.0])]).unwrap();
        assert!(d.in_commutator_closure(1e-12));
        assert!(!FdAlgebra::new(vec![2])
            .unwrap()
            .unit()
            .in_commutator_closure(1e-12));
    }

    #[test]
    fn center_valued_trace_examples() {
        let alg = FdAlgebra::new(vec![2, 3]).unwrap();
        let z = alg.central(&[c(2.0), Complex64::new(0.0, -1.0)]).unwrap();
        assert!(z.center_valued_trace().max_abs_diff(&z).unwrap() < 1e-15);
        let d = Element::new(vec![m2([1.0, 0.0, 0.0, -1.0])]).unwrap();
        assert_eq!(d.center_valued_trace().op_norm(), 0.0);
    }

    #[test]
    fn quotient_coordinate_projection() {
        let alg = FdAlgebra::new(vec![2, 3]).unwrap();
        let x = m2([1.0, 2.0, 3.0, 4.0]);
        let y = CMat::from_fn(3, 3, |i, j| c((i * 3 + j) as f64));
        let a = Element::from_blocks(&alg, vec![x, y.clone()]).unwrap();
        let q = Quotient::new(&alg, &[1]).unwrap();
        assert_eq!(q.project(&a).unwrap(), Element::new(vec![y]).unwrap());
        assert_eq!(q.dropped(), vec![0]);
        let all = Quotient::new(&alg, &[1, 0]).unwrap();
        assert_eq!(all.project(&a).unwrap(), a);
        assert!(matches!(
            Quotient::new(&alg, &[]),
            Err(Error::EmptyQuotient)
        ));
        assert!(Quotient::new(&alg, &[2]).is_err());
    }

    #[test]
    fn coordinates_round_trip() {
        let alg = FdAlgebra::new(vec![2, 1]).unwrap();
        let basis = alg.canonical_basis();
        assert_eq!(basis.len(), 5);
        let coords: Vec<Complex64> = (0..5).map(|i| c(i as f64)).collect();
        let a = alg.from_coordinates(&coords).unwrap();
        assert_eq!(a.coordinates(), coords);
        assert_eq!(a.block(0)[(1, 0)], c(2.0));
    }

    #[test]
    fn tuple_norm_is_max() {
        let alg = FdAlgebra::new(vec![2]).unwrap();
        let t = Tuple::new(vec![alg.unit(), alg.unit().scale_real(-4.0)]).unwrap();
        assert!((t.norm() - 4.0).abs() < 1e-12);
        assert!(Tuple::new(vec![]).is_err());
    }
}
