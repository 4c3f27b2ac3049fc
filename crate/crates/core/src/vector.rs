//! Sparse, dense and hybrid vectors plus exact inner products.
//!
//! Values are stored as `f32`; every inner product accumulates in `f64`
//! in ascending coordinate order, so two routes that visit the same
//! coordinates in the same order produce bit-identical scores.

use crate::error::{check_dim, Error, Result};

/// A vector in `R^dim` stored as strictly increasing `(index, value)` pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    dim: u32,
    indices: Vec<u32>,
    values: Vec<f32>,
}

impl SparseVector {
    /// Builds a vector from entries already sorted by coordinate.
    ///
    /// Zero-valued entries are dropped. Out-of-range, repeated or
    /// decreasing coordinates are rejected.
    pub fn new(dim: u32, entries: impl IntoIterator<Item = (u32, f32)>) -> Result<Self> {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (index, value) in entries {
            if index >= dim {
                return Err(Error::invalid(format!(
                    "coordinate {index} out of range for dimension {dim}"
                )));
            }
            if let Some(&last) = indices.last() {
                if index <= last {
                    return Err(Error::invalid(format!(
                        "coordinates must be strictly increasing ({last} then {index})"
                    )));
                }
            }
            if !value.is_finite() {
                return Err(Error::invalid(format!("non-finite value at coordinate {index}")));
            }
            if value != 0.0 {
                indices.push(index);
                values.push(value);
            }
        }
        Ok(Self { dim, indices, values })
    }

    /// Sorts the entries first; duplicate coordinates are still an error.
    pub fn from_unsorted(dim: u32, mut entries: Vec<(u32, f32)>) -> Result<Self> {
        entries.sort_by_key(|&(i, _)| i);
        Self::new(dim, entries)
    }

    /// Keeps the nonzeros of a dense slice; the dimension is the slice length.
    pub fn from_dense(dense: &[f32]) -> Self {
        let (indices, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i as u32, *v))
            .unzip();
        Self { dim: dense.len() as u32, indices, values }
    }

    pub fn empty(dim: u32) -> Self {
        Self { dim, indices: Vec::new(), values: Vec::new() }
    }

    pub(crate) fn from_parts_unchecked(dim: u32, indices: Vec<u32>, values: Vec<f32>) -> Self {
        debug_assert_eq!(indices.len(), values.len());
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { dim, indices, values }
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f32)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// Value at coordinate `index`, zero when absent.
    pub fn get(&self, index: u32) -> f32 {
        match self.indices.binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|&v| f64::from(v) * f64::from(v)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.squared_norm().sqrt()
    }

    /// Multiplies every entry by `alpha`; entries that become zero are dropped.
    pub fn scaled(&self, alpha: f32) -> Self {
        let mut indices = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        for (i, v) in self.iter() {
            let scaled = v * alpha;
            if scaled != 0.0 {
                indices.push(i);
                values.push(scaled);
            }
        }
        Self { dim: self.dim, indices, values }
    }

    pub fn has_negative(&self) -> bool {
        self.values.iter().any(|&v| v < 0.0)
    }

    pub fn l2_normalize(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::invalid("cannot normalize a zero vector"));
        }
        let mut indices = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        for (i, v) in self.iter() {
            let scaled = (f64::from(v) / norm) as f32;
            if scaled != 0.0 {
                indices.push(i);
                values.push(scaled);
            }
        }
        Ok(Self { dim: self.dim, indices, values })
    }
}

/// Merge-based inner product of two sparse vectors.
pub fn dot_sparse(u: &SparseVector, v: &SparseVector) -> Result<f64> {
    check_dim(u.dim as usize, v.dim as usize)?;
    Ok(sparse_dot_unchecked(u, v))
}

/// Same as [`dot_sparse`] without the dimension check.
pub(crate) fn sparse_dot_unchecked(u: &SparseVector, v: &SparseVector) -> f64 {
    let (ui, uv) = (&u.indices, &u.values);
    let (vi, vv) = (&v.indices, &v.values);
    let (mut a, mut b) = (0, 0);
    let mut acc = 0.0f64;
    while a < ui.len() && b < vi.len() {
        match ui[a].cmp(&vi[b]) {
            std::cmp::Ordering::Less => a += 1,
            std::cmp::Ordering::Greater => b += 1,
            std::cmp::Ordering::Equal => {
                acc += f64::from(uv[a]) * f64::from(vv[b]);
                a += 1;
                b += 1;
            }
        }
    }
    acc
}

/// Sparse-by-dense inner product; `dense` must cover every stored coordinate.
pub(crate) fn sparse_dense_dot(sparse: &SparseVector, dense: &[f32]) -> f64 {
    sparse
        .iter()
        .map(|(i, v)| f64::from(v) * f64::from(dense[i as usize]))
        .sum()
}

pub(crate) fn dense_dot(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DenseVector(pub Vec<f32>);

impl DenseVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn dot(&self, other: &DenseVector) -> Result<f64> {
        check_dim(self.len(), other.len())?;
        Ok(dense_dot(&self.0, &other.0))
    }

    pub fn squared_norm(&self) -> f64 {
        dense_dot(&self.0, &self.0)
    }

    pub fn scaled(&self, alpha: f32) -> Self {
        DenseVector(self.0.iter().map(|v| v * alpha).collect())
    }

    pub fn l2_normalize(&self) -> Result<Self> {
        let norm = self.squared_norm().sqrt();
        if norm == 0.0 {
            return Err(Error::invalid("cannot normalize a zero vector"));
        }
        Ok(DenseVector(
            self.0.iter().map(|&v| (f64::from(v) / norm) as f32).collect(),
        ))
    }
}

/// `dense ⊕ sparse`; the inner product is the sum of the partwise products.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HybridVector {
    pub dense: DenseVector,
    pub sparse: SparseVector,
}

impl HybridVector {
    pub fn new(dense: DenseVector, sparse: SparseVector) -> Self {
        Self { dense, sparse }
    }

    pub fn sparse_only(sparse: SparseVector) -> Self {
        Self { dense: DenseVector::default(), sparse }
    }

    pub fn dense_only(dense: Vec<f32>) -> Self {
        Self { dense: DenseVector(dense), sparse: SparseVector::empty(0) }
    }

    pub fn dense_dim(&self) -> usize {
        self.dense.len()
    }

    pub fn sparse_dim(&self) -> u32 {
        self.sparse.dim
    }

    /// `w * dense ⊕ (1 - w) * sparse`, the weighting applied to hybrid queries.
    pub fn weighted(&self, w_dense: f32) -> Self {
        Self {
            dense: self.dense.scaled(w_dense),
            sparse: self.sparse.scaled(1.0 - w_dense),
        }
    }
}

pub fn dot_hybrid(x: &HybridVector, y: &HybridVector) -> Result<f64> {
    check_dim(x.dense_dim(), y.dense_dim())?;
    check_dim(x.sparse_dim() as usize, y.sparse_dim() as usize)?;
    Ok(hybrid_dot_unchecked(x, y))
}

pub(crate) fn hybrid_dot_unchecked(x: &HybridVector, y: &HybridVector) -> f64 {
    dense_dot(&x.dense.0, &y.dense.0) + sparse_dot_unchecked(&x.sparse, &y.sparse)
}

/// A collection of hybrid vectors sharing `(dense_dim, sparse_dim)`.
/// Document ids are the positions `0..len()`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VectorDataset {
    dense_dim: u32,
    sparse_dim: u32,
    vectors: Vec<HybridVector>,
}

impl VectorDataset {
    pub fn new(dense_dim: u32, sparse_dim: u32) -> Self {
        Self { dense_dim, sparse_dim, vectors: Vec::new() }
    }

    pub fn from_sparse(sparse_dim: u32, vectors: Vec<SparseVector>) -> Result<Self> {
        let mut ds = Self::new(0, sparse_dim);
        for v in vectors {
            ds.push(HybridVector::sparse_only(v))?;
        }
        Ok(ds)
    }

    pub fn push(&mut self, v: HybridVector) -> Result<()> {
        check_dim(self.dense_dim as usize, v.dense_dim())?;
        check_dim(self.sparse_dim as usize, v.sparse_dim() as usize)?;
        self.vectors.push(v);
        Ok(())
    }

    pub fn dense_dim(&self) -> u32 {
        self.dense_dim
    }

    pub fn sparse_dim(&self) -> u32 {
        self.sparse_dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: usize) -> &HybridVector {
        &self.vectors[id]
    }

    pub fn vectors(&self) -> &[HybridVector] {
        &self.vectors
    }

    pub fn iter(&self) -> std::slice::Iter<'_, HybridVector> {
        self.vectors.iter()
    }

    pub fn is_sparse_only(&self) -> bool {
        self.dense_dim == 0
    }

    /// Mean number of nonzero sparse coordinates per vector (ψ).
    pub fn mean_nnz(&self) -> f64 {
        if self.vectors.is_empty() {
            return 0.0;
        }
        let total: usize = self.vectors.iter().map(|v| v.sparse.nnz()).sum();
        total as f64 / self.vectors.len() as f64
    }

    pub fn has_negative_sparse(&self) -> bool {
        self.vectors.iter().any(|v| v.sparse.has_negative())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sv(dim: u32, entries: &[(u32, f32)]) -> SparseVector {
        SparseVector::new(dim, entries.iter().copied()).unwrap()
    }

    fn densify(v: &SparseVector) -> Vec<f64> {
        let mut out = vec![0.0; v.dim() as usize];
        for (i, x) in v.iter() {
            out[i as usize] = f64::from(x);
        }
        out
    }

    #[test]
    fn dot_examples() {
        assert_eq!(dot_sparse(&sv(3, &[]), &sv(3, &[(0, 5.0)])).unwrap(), 0.0);
        assert_eq!(
            dot_sparse(&sv(3, &[(0, 1.0), (2, 2.0)]), &sv(3, &[(2, 3.0)])).unwrap(),
            6.0
        );
        assert_eq!(
            dot_sparse(&sv(2, &[(0, 1.0), (1, -2.0)]), &sv(2, &[(0, 3.0), (1, 4.0)])).unwrap(),
            -5.0
        );
    }

    #[test]
    fn dot_rejects_dimension_mismatch() {
        let err = dot_sparse(&sv(3, &[]), &sv(4, &[])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, found: 4 }));
    }

    #[test]
    fn construction_invariants() {
        assert!(SparseVector::new(3, [(3, 1.0)]).is_err());
        assert!(SparseVector::new(5, [(2, 1.0), (2, 3.0)]).is_err());
        assert!(SparseVector::new(5, [(3, 1.0), (2, 3.0)]).is_err());
        let v = SparseVector::new(5, [(1, 0.0), (2, 3.0)]).unwrap();
        assert_eq!(v.indices(), &[2]);
        assert!(SparseVector::from_unsorted(5, vec![(4, 1.0), (1, 2.0)]).is_ok());
        assert!(SparseVector::from_unsorted(5, vec![(4, 1.0), (4, 2.0)]).is_err());
    }

    #[test]
    fn hybrid_examples() {
        let x = HybridVector::new(DenseVector(vec![1.0, 1.0]), SparseVector::empty(4));
        let y = HybridVector::new(DenseVector(vec![2.0, 3.0]), SparseVector::empty(4));
        assert_eq!(dot_hybrid(&x, &y).unwrap(), 5.0);

        let zero = HybridVector::new(DenseVector(vec![0.0, 0.0]), SparseVector::empty(4));
        assert_eq!(dot_hybrid(&zero, &y).unwrap(), 0.0);

        let a = sv(4, &[(0, 1.0), (3, 2.0)]);
        let b = sv(4, &[(3, 4.0)]);
        let ha = HybridVector::sparse_only(a.clone());
        let hb = HybridVector::sparse_only(b.clone());
        assert_eq!(dot_hybrid(&ha, &hb).unwrap(), dot_sparse(&a, &b).unwrap());

        let bad = HybridVector::new(DenseVector(vec![1.0]), SparseVector::empty(4));
        assert!(dot_hybrid(&bad, &y).is_err());
    }

    #[test]
    fn normalize_examples() {
        let d = DenseVector(vec![3.0, 4.0]).l2_normalize().unwrap();
        assert!((d.0[0] - 0.6).abs() < 1e-7 && (d.0[1] - 0.8).abs() < 1e-7);
        let unit = DenseVector(vec![0.0, 1.0]);
        assert_eq!(unit.l2_normalize().unwrap(), unit);
        assert_eq!(sv(8, &[(5, 2.0)]).l2_normalize().unwrap(), sv(8, &[(5, 1.0)]));
        assert!(sv(8, &[]).l2_normalize().is_err());
        assert!(DenseVector(vec![0.0; 3]).l2_normalize().is_err());
    }

    fn arb_pair(max_dim: u32) -> impl Strategy<Value = (SparseVector, SparseVector)> {
        (1..=max_dim).prop_flat_map(|dim| {
            let entries = proptest::collection::btree_map(0..dim, -10.0f32..10.0, 0..dim as usize);
            (Just(dim), entries.clone(), entries)
        })
        .prop_map(|(dim, a, b)| {
            (
                SparseVector::new(dim, a).unwrap(),
                SparseVector::new(dim, b).unwrap(),
            )
        })
    }

    proptest! {
        #[test]
        fn dot_is_symmetric_and_matches_dense((u, v) in arb_pair(32)) {
            let uv = dot_sparse(&u, &v).unwrap();
            prop_assert_eq!(uv.to_bits(), dot_sparse(&v, &u).unwrap().to_bits());
            let dense: f64 = densify(&u).iter().zip(densify(&v)).map(|(a, b)| a * b).sum();
            prop_assert!((uv - dense).abs() <= 1e-9 * (1.0 + dense.abs()));
            let uu = dot_sparse(&u, &u).unwrap();
            prop_assert!(uu >= 0.0);
            prop_assert!((uu - u.squared_norm()).abs() <= 1e-12 * (1.0 + uu));
        }

        #[test]
        fn hybrid_matches_concatenation(
            m in 0usize..=16,
            (u, v) in arb_pair(16),
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let da: Vec<f32> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let db: Vec<f32> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x = HybridVector::new(DenseVector(da.clone()), u.clone());
            let y = HybridVector::new(DenseVector(db.clone()), v.clone());
            let cat_x: Vec<f64> = da.iter().map(|&a| f64::from(a)).chain(densify(&u)).collect();
            let cat_y: Vec<f64> = db.iter().map(|&a| f64::from(a)).chain(densify(&v)).collect();
            let brute: f64 = cat_x.iter().zip(&cat_y).map(|(a, b)| a * b).sum();
            let got = dot_hybrid(&x, &y).unwrap();
            prop_assert!((got - brute).abs() <= 1e-9 * (1.0 + brute.abs()));
        }

        #[test]
        fn normalized_has_unit_norm(v in proptest::collection::vec(-100.0f32..100.0, 1..32)) {
            let d = DenseVector(v);
            prop_assume!(d.squared_norm() > 1e-6);
            let n = d.l2_normalize().unwrap().squared_norm().sqrt();
            prop_assert!((n - 1.0).abs() < 1e-6);
        }
    }
}
