//! IVF indexing and retrieval over sketches.
//!
//! Indexing sketches every document (for hybrid vectors, only the sparse
//! part, concatenated after the dense part) and clusters the sketches.
//! Retrieval scores the partition representatives against the sketched
//! query, takes the shortest prefix of partitions, in descending score
//! order, whose sizes add up to at least `ℓ` documents, and hands those
//! partitions to a [`SubAlgorithm`] that scores exactly over the original
//! vectors.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use crate::codec::{len_u32, put_u32, put_u32s, put_u64, put_u8, ByteReader};
use crate::error::{check_dim, Error, Result};
use crate::format::{decode_dataset, encode_dataset};
use crate::kmeans::{kmeans, ClusterModel, KMeansConfig, PointSet, Variant};
use crate::sketch::{Embedding, Transform};
use crate::topk::{TopK, TopKResult};
use crate::vector::{hybrid_dot_unchecked, HybridVector, SparseVector, VectorDataset};

pub const SIVF_MAGIC: &[u8; 4] = b"SIVF";
pub const SIVF_VERSION: u32 = 1;

/// `⌈4·√count⌉`, capped at `count`.
pub fn default_partitions(count: usize) -> usize {
    let p = (4.0 * (count as f64).sqrt()).ceil() as usize;
    p.clamp(1, count.max(1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IvfConfig {
    /// `None` selects [`default_partitions`].
    pub partitions: Option<usize>,
    pub variant: Variant,
    pub kmeans: KMeansConfig,
}

impl Default for IvfConfig {
    fn default() -> Self {
        Self { partitions: None, variant: Variant::Spherical, kmeans: KMeansConfig::default() }
    }
}

/// Number of documents to examine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ell {
    Absolute(usize),
    /// Fraction of the collection in `(0, 1]`, rounded up.
    Fraction(f64),
}

impl Ell {
    pub fn resolve(self, count: usize) -> Result<usize> {
        let ell = match self {
            Ell::Absolute(n) => n,
            Ell::Fraction(f) => {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(Error::invalid(format!("fractional ell must be in (0, 1], got {f}")));
                }
                ((f * count as f64).ceil() as usize).max(1)
            }
        };
        if ell == 0 || ell > count {
            return Err(Error::invalid(format!("ell must be in [1, {count}], got {ell}")));
        }
        Ok(ell)
    }
}

impl std::fmt::Display for Ell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Ell::Absolute(n) => write!(f, "{n}"),
            Ell::Fraction(x) if x.fract() == 0.0 => write!(f, "{x:.1}"),
            Ell::Fraction(x) => write!(f, "{x}"),
        }
    }
}

impl std::str::FromStr for Ell {
    type Err = Error;

    /// Integers are absolute counts; anything with a decimal point or
    /// exponent is a fraction of the collection.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains(['.', 'e', 'E']) {
            let f: f64 = s.parse().map_err(|_| Error::invalid(format!("bad ell '{s}'")))?;
            Ok(Ell::Fraction(f))
        } else {
            let n: usize = s.parse().map_err(|_| Error::invalid(format!("bad ell '{s}'")))?;
            Ok(Ell::Absolute(n))
        }
    }
}

/// Where the original vectors of an index come from when it is stored.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetStorage {
    Embedded,
    Path(PathBuf),
}

/// Scores the members of a set of partitions exactly.
pub trait SubAlgorithm {
    fn search(
        &self,
        index: &IvfIndex,
        query: &HybridVector,
        partitions: &[u32],
        k: usize,
    ) -> Result<SubResult>;
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubResult {
    pub top: TopKResult,
    /// Distinct documents that received a score.
    pub docs_evaluated: usize,
    /// Posting entries (or member vectors) visited.
    pub postings_visited: usize,
}

/// Scans every member of the selected partitions.
#[derive(Debug, Clone, Copy, Default)]
pub struct Exhaustive;

impl SubAlgorithm for Exhaustive {
    fn search(
        &self,
        index: &IvfIndex,
        query: &HybridVector,
        partitions: &[u32],
        k: usize,
    ) -> Result<SubResult> {
        let ds = index.dataset();
        check_dim(ds.dense_dim() as usize, query.dense_dim())?;
        check_dim(ds.sparse_dim() as usize, query.sparse_dim() as usize)?;
        let mut top = TopK::new(k);
        let mut visited = 0;
        for &p in partitions {
            for &id in index.members(p as usize) {
                top.push(id, hybrid_dot_unchecked(query, ds.get(id as usize)));
                visited += 1;
            }
        }
        Ok(SubResult { top: top.into_result(), docs_evaluated: visited, postings_visited: visited })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Retrieval {
    pub top: TopKResult,
    pub partitions: Vec<u32>,
    pub docs_evaluated: usize,
    pub postings_visited: usize,
}

#[derive(Debug, Clone)]
pub struct IvfIndex {
    transform: Transform,
    model: ClusterModel,
    members: Vec<Vec<u32>>,
    dataset: Arc<VectorDataset>,
    hybrid: bool,
    dense_dim: u32,
    storage: DatasetStorage,
}

impl PartialEq for IvfIndex {
    fn eq(&self, other: &Self) -> bool {
        self.transform == other.transform
            && self.model.centroid_bits() == other.model.centroid_bits()
            && self.model.assignments() == other.model.assignments()
            && self.members == other.members
            && self.hybrid == other.hybrid
            && self.dense_dim == other.dense_dim
            && *self.dataset == *other.dataset
    }
}

fn members_from(assignments: &[u32], partitions: usize) -> Vec<Vec<u32>> {
    let mut members = vec![Vec::new(); partitions];
    for (id, &p) in assignments.iter().enumerate() {
        members[p as usize].push(id as u32);
    }
    members
}

/// Builds the sparse IVF index (documents must have no dense part).
pub fn build_ivf(ds: Arc<VectorDataset>, transform: Transform, config: &IvfConfig) -> Result<IvfIndex> {
    if !ds.is_sparse_only() {
        return Err(Error::invalid("dataset has a dense part; use build_ivf_hybrid"));
    }
    build(ds, transform, config, false)
}

/// Builds the hybrid IVF index over `dense ‖ sketch(sparse)`.
pub fn build_ivf_hybrid(ds: Arc<VectorDataset>, transform: Transform, config: &IvfConfig) -> Result<IvfIndex> {
    build(ds, transform, config, true)
}

fn build(ds: Arc<VectorDataset>, transform: Transform, config: &IvfConfig, hybrid: bool) -> Result<IvfIndex> {
    if ds.is_empty() {
        return Err(Error::invalid("cannot index an empty dataset"));
    }
    if ds.sparse_dim() > 0 {
        check_dim(ds.sparse_dim() as usize, transform.input_dim() as usize)?;
    }
    let dense_dim = ds.dense_dim();
    let probe = IvfIndex {
        transform,
        model: ClusterModel::from_parts(Variant::Standard, 0, Vec::new(), Vec::new())?,
        members: Vec::new(),
        dataset: ds.clone(),
        hybrid,
        dense_dim,
        storage: DatasetStorage::Embedded,
    };
    let width = probe.embedding_width();
    let rows = ds
        .vectors()
        .par_iter()
        .map(|v| probe.embed(v, false))
        .collect::<Result<Vec<_>>>()?;
    let points = PointSet::from_embeddings(width, rows)?;
    let partitions = config.partitions.unwrap_or_else(|| default_partitions(ds.len()));
    let model = kmeans(&points, partitions, config.variant, &config.kmeans)?;
    let members = members_from(model.assignments(), partitions);
    Ok(IvfIndex { model, members, ..probe })
}

impl IvfIndex {
    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    pub fn model(&self) -> &ClusterModel {
        &self.model
    }

    pub fn dataset(&self) -> &VectorDataset {
        &self.dataset
    }

    pub fn dataset_arc(&self) -> Arc<VectorDataset> {
        self.dataset.clone()
    }

    pub fn is_hybrid(&self) -> bool {
        self.hybrid
    }

    pub fn num_partitions(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self, partition: usize) -> &[u32] {
        &self.members[partition]
    }

    pub fn partitions(&self) -> &[Vec<u32>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.dataset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dataset.is_empty()
    }

    pub fn set_storage(&mut self, storage: DatasetStorage) {
        self.storage = storage;
    }

    fn sketch_width(&self) -> usize {
        if self.dataset.sparse_dim() == 0 {
            0
        } else {
            self.transform.width() as usize
        }
    }

    fn embedding_width(&self) -> usize {
        if self.hybrid {
            self.dense_dim as usize + self.sketch_width()
        } else {
            self.sketch_width()
        }
    }

    fn embed(&self, v: &HybridVector, query: bool) -> Result<Embedding> {
        let sketch = if self.sketch_width() == 0 {
            None
        } else if query {
            Some(self.transform.embed_query(&v.sparse)?)
        } else {
            Some(self.transform.embed_doc(&v.sparse)?)
        };
        if !self.hybrid || self.dense_dim == 0 {
            return sketch.ok_or_else(|| Error::invalid("nothing to sketch: sparse dimension is 0"));
        }
        check_dim(self.dense_dim as usize, v.dense_dim())?;
        let mut row = v.dense.as_slice().to_vec();
        if let Some(s) = sketch {
            row.extend(s.to_dense());
        }
        Ok(Embedding::Dense(row))
    }

    /// Sketch of a query in the space the centroids live in.
    pub fn embed_query(&self, q: &HybridVector) -> Result<Embedding> {
        check_dim(self.dataset.sparse_dim() as usize, q.sparse_dim() as usize)?;
        self.embed(q, true)
    }

    pub fn select_partitions(&self, q: &SparseVector, ell: usize) -> Result<Vec<u32>> {
        self.select_partitions_hybrid(&HybridVector::sparse_only(q.clone()), ell)
    }

    pub fn select_partitions_hybrid(&self, q: &HybridVector, ell: usize) -> Result<Vec<u32>> {
        if ell == 0 || ell > self.len() {
            return Err(Error::invalid(format!("ell must be in [1, {}], got {ell}", self.len())));
        }
        let scores = self.model.centroid_scores(&self.embed_query(q)?)?;
        let sizes: Vec<usize> = self.members.iter().map(Vec::len).collect();
        Ok(select_by_scores(&scores, &sizes, ell))
    }

    pub fn retrieve(&self, q: &SparseVector, k: usize, ell: usize, r: &dyn SubAlgorithm) -> Result<Retrieval> {
        if self.dense_dim != 0 {
            return Err(Error::invalid("index is hybrid; use retrieve_hybrid"));
        }
        self.retrieve_hybrid(&HybridVector::sparse_only(q.clone()), k, ell, r)
    }

    pub fn retrieve_hybrid(&self, q: &HybridVector, k: usize, ell: usize, r: &dyn SubAlgorithm) -> Result<Retrieval> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        let partitions = self.select_partitions_hybrid(q, ell)?;
        let sub = r.search(self, q, &partitions, k)?;
        Ok(Retrieval {
            top: sub.top,
            partitions,
            docs_evaluated: sub.docs_evaluated,
            postings_visited: sub.postings_visited,
        })
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(SIVF_MAGIC);
        put_u32(&mut out, SIVF_VERSION);
        let blob = self.transform.header_blob();
        put_u32(&mut out, len_u32(blob.len(), "transform blob")?);
        out.extend_from_slice(&blob);
        put_u8(&mut out, self.hybrid as u8);
        put_u32(&mut out, self.dense_dim);
        let mut cluster = Vec::new();
        self.model.encode(&mut cluster)?;
        put_u64(&mut out, cluster.len() as u64);
        out.extend_from_slice(&cluster);
        put_u32(&mut out, len_u32(self.members.len(), "partition count")?);
        for m in &self.members {
            put_u32(&mut out, len_u32(m.len(), "partition size")?);
            put_u32s(&mut out, m);
        }
        match &self.storage {
            DatasetStorage::Embedded => {
                put_u8(&mut out, 0);
                let bytes = encode_dataset(&self.dataset)?;
                put_u64(&mut out, bytes.len() as u64);
                out.extend_from_slice(&bytes);
            }
            DatasetStorage::Path(p) => {
                put_u8(&mut out, 1);
                let s = p.to_string_lossy();
                put_u32(&mut out, len_u32(s.len(), "dataset path")?);
                out.extend_from_slice(s.as_bytes());
            }
        }
        Ok(out)
    }

    /// `base_dir` resolves relative dataset path references.
    pub fn decode(bytes: &[u8], base_dir: Option<&Path>) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        r.expect_magic(SIVF_MAGIC)?;
        let version = r.u32()?;
        if version != SIVF_VERSION {
            return Err(Error::format(format!("unsupported SIVF version {version}")));
        }
        let blob_len = r.u32()? as usize;
        let transform = Transform::from_header_blob(r.take(blob_len)?)?;
        let hybrid = r.u8()? != 0;
        let dense_dim = r.u32()?;
        let cluster_len = r.u64()? as usize;
        let mut cr = ByteReader::new(r.take(cluster_len)?);
        let model = ClusterModel::decode(&mut cr)?;
        let p = r.u32()? as usize;
        let mut members = Vec::with_capacity(p);
        for _ in 0..p {
            let n = r.u32()? as usize;
            members.push(r.u32_vec(n)?);
        }
        if p != model.num_partitions() {
            return Err(Error::format("partition count disagrees with cluster model"));
        }
        if members != members_from(model.assignments(), p) {
            return Err(Error::format("partition member lists disagree with assignments"));
        }
        let (dataset, storage) = match r.u8()? {
            0 => {
                let n = r.u64()? as usize;
                (decode_dataset(r.take(n)?)?, DatasetStorage::Embedded)
            }
            1 => {
                let n = r.u32()? as usize;
                let path = PathBuf::from(String::from_utf8_lossy(r.take(n)?).into_owned());
                let resolved = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(&path),
                    _ => path.clone(),
                };
                (crate::format::read_dataset(&resolved)?, DatasetStorage::Path(path))
            }
            other => return Err(Error::format(format!("unknown dataset storage tag {other}"))),
        };
        if !r.is_empty() {
            return Err(Error::format("trailing bytes in index file"));
        }
        if dataset.len() != model.assignments().len() {
            return Err(Error::format("dataset size disagrees with cluster assignments"));
        }
        Ok(Self { transform, model, members, dataset: Arc::new(dataset), hybrid, dense_dim, storage })
    }
}

/// Shortest prefix of partitions, by descending score (ties: lower id),
/// whose sizes sum to at least `ell`.
pub fn select_by_scores(scores: &[f64], sizes: &[usize], ell: usize) -> Vec<u32> {
    let mut order: Vec<u32> = (0..scores.len() as u32).collect();
    order.sort_by(|&a, &b| scores[b as usize].total_cmp(&scores[a as usize]).then(a.cmp(&b)));
    let mut total = 0;
    let mut out = Vec::new();
    for p in order {
        out.push(p);
        total += sizes[p as usize];
        if total >= ell {
            break;
        }
    }
    out
}

pub fn write_index(index: &IvfIndex, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, index.encode()?)?;
    Ok(())
}

pub fn read_index(path: impl AsRef<Path>) -> Result<IvfIndex> {
    let path = path.as_ref();
    IvfIndex::decode(&fs::read(path)?, path.parent())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::exact_topk;
    use crate::eval::synthetic::{gen_synthetic_sparse, SparseSyntheticSpec};
    use crate::sketch::TransformKind;
    use proptest::prelude::*;

    fn small_sparse(docs: usize, queries: usize) -> (Arc<VectorDataset>, VectorDataset) {
        let spec = SparseSyntheticSpec {
            docs,
            queries,
            dim: 2000,
            doc_terms: 24.0,
            query_terms: 8.0,
            topics: 8,
            topic_vocab: 60,
            ..Default::default()
        };
        let (d, q) = gen_synthetic_sparse(&spec).unwrap();
        (Arc::new(d), q)
    }

    fn ws(dim: u32, width: u32) -> Transform {
        Transform::build(TransformKind::WeakSinnamon, dim, width, 3, 1, true).unwrap()
    }

    fn config(p: usize) -> IvfConfig {
        IvfConfig { partitions: Some(p), ..Default::default() }
    }

    #[test]
    fn default_partition_count() {
        assert_eq!(default_partitions(10_000), 400);
        assert_eq!(default_partitions(100_000), 1265);
        assert_eq!(default_partitions(1), 1);
        assert_eq!(default_partitions(4), 4);
    }

    #[test]
    fn ell_parsing_and_resolution() {
        assert_eq!("0.1".parse::<Ell>().unwrap(), Ell::Fraction(0.1));
        assert_eq!("1.0".parse::<Ell>().unwrap(), Ell::Fraction(1.0));
        assert_eq!("250".parse::<Ell>().unwrap(), Ell::Absolute(250));
        assert_eq!(Ell::Fraction(0.1).resolve(1000).unwrap(), 100);
        assert_eq!(Ell::Fraction(1e-9).resolve(1000).unwrap(), 1);
        assert_eq!(Ell::Fraction(1.0).resolve(7).unwrap(), 7);
        assert!(Ell::Fraction(1.5).resolve(10).is_err());
        assert!(Ell::Absolute(0).resolve(10).is_err());
        assert!(Ell::Absolute(11).resolve(10).is_err());
        assert!("x".parse::<Ell>().is_err());
        assert_eq!(Ell::Fraction(1.0).to_string(), "1.0");
    }

    #[test]
    fn selection_hand_trace() {
        let sizes = [5, 3, 2];
        let scores = [0.9, 0.5, 0.8];
        assert_eq!(select_by_scores(&scores, &sizes, 6), vec![0, 2]);
        assert_eq!(select_by_scores(&scores, &sizes, 1), vec![0]);
        assert_eq!(select_by_scores(&scores, &sizes, 10), vec![0, 2, 1]);
        assert_eq!(select_by_scores(&[0.5, 0.5, 0.5], &sizes, 6), vec![0, 1]);
    }

    #[test]
    fn single_partition_is_exact() {
        let (ds, qs) = small_sparse(300, 10);
        let index = build_ivf(ds.clone(), ws(2000, 64), &config(1)).unwrap();
        for q in qs.iter() {
            for ell in [1, 150, 300] {
                let r = index.retrieve(&q.sparse, 10, ell, &Exhaustive).unwrap();
                assert_eq!(r.partitions, vec![0]);
                assert_eq!(r.top, exact_topk(&ds, q, 10).unwrap());
            }
        }
    }

    #[test]
    fn full_coverage_is_exact() {
        let (ds, qs) = small_sparse(500, 20);
        for kind in [TransformKind::Jl, TransformKind::WeakSinnamon] {
            let t = Transform::build(kind, 2000, 64, 1, 1, true).unwrap();
            let index = build_ivf(ds.clone(), t, &config(12)).unwrap();
            for q in qs.iter() {
                let r = index.retrieve(&q.sparse, 10, ds.len(), &Exhaustive).unwrap();
                assert_eq!(r.partitions.len(), 12);
                assert_eq!(r.top, exact_topk(&ds, q, 10).unwrap());
                assert_eq!(r.docs_evaluated, ds.len());
            }
        }
    }

    #[test]
    fn pool_smaller_than_k() {
        let (ds, qs) = small_sparse(200, 1);
        let index = build_ivf(ds, ws(2000, 64), &config(20)).unwrap();
        let r = index.retrieve(&qs.get(0).sparse, 50, 1, &Exhaustive).unwrap();
        assert!(r.top.len() < 50);
        assert_eq!(r.top.len(), r.docs_evaluated);
    }

    #[test]
    fn partitions_cover_ids_once() {
        let (ds, _) = small_sparse(400, 1);
        let index = build_ivf(ds.clone(), ws(2000, 64), &config(15)).unwrap();
        let mut all: Vec<u32> = index.partitions().iter().flatten().copied().collect();
        for m in index.partitions() {
            assert!(m.windows(2).all(|w| w[0] < w[1]));
        }
        all.sort_unstable();
        assert_eq!(all, (0..400).collect::<Vec<u32>>());
    }

    #[test]
    fn separable_blobs_become_partitions() {
        let mut docs = Vec::new();
        for i in 0..30u32 {
            let base = (i % 3) * 10;
            docs.push(SparseVector::new(30, (base..base + 5).map(|c| (c, 1.0 + ((i + c) % 4) as f32 * 0.1))).unwrap());
        }
        let ds = Arc::new(VectorDataset::from_sparse(30, docs).unwrap());
        let index = build_ivf(ds, ws(30, 64), &config(3)).unwrap();
        for p in index.partitions() {
            assert_eq!(p.len(), 10);
            assert!(p.iter().all(|&id| id % 3 == p[0] % 3));
        }
    }

    #[test]
    fn exact_when_true_partitions_selected() {
        let (ds, qs) = small_sparse(400, 30);
        let index = build_ivf(ds.clone(), ws(2000, 128), &config(16)).unwrap();
        for q in qs.iter() {
            let truth = exact_topk(&ds, q, 10).unwrap();
            let r = index.retrieve(&q.sparse, 10, 40, &Exhaustive).unwrap();
            let covered = truth.iter().all(|d| r.partitions.contains(&index.model().assignments()[d.id as usize]));
            if covered {
                assert_eq!(r.top, truth);
            }
        }
    }

    #[test]
    fn hybrid_degenerate_shapes() {
        let (ds, qs) = small_sparse(200, 5);
        let plain = build_ivf(ds.clone(), ws(2000, 64), &config(6)).unwrap();
        let hybrid = build_ivf_hybrid(ds.clone(), ws(2000, 64), &config(6)).unwrap();
        assert_eq!(plain.model().assignments(), hybrid.model().assignments());
        for q in qs.iter() {
            assert_eq!(plain.select_partitions(&q.sparse, 20).unwrap(), hybrid.select_partitions_hybrid(q, 20).unwrap());
        }

        let rows: Vec<Vec<f32>> = (0..60).map(|i| vec![(i % 3) as f32, ((i / 3) % 4) as f32 + 0.5, 1.0]).collect();
        let mut dense = VectorDataset::new(3, 0);
        for r in &rows {
            dense.push(HybridVector::dense_only(r.clone())).unwrap();
        }
        let idx = build_ivf_hybrid(Arc::new(dense), ws(1, 2), &config(4)).unwrap();
        let points = PointSet::dense(3, rows).unwrap();
        let direct = kmeans(&points, 4, Variant::Spherical, &KMeansConfig::default()).unwrap();
        assert_eq!(idx.model().assignments(), direct.assignments());
        assert!(build_ivf(idx.dataset_arc(), ws(1, 2), &config(4)).is_err());
    }

    #[test]
    fn rejects_bad_requests() {
        let (ds, qs) = small_sparse(100, 1);
        let index = build_ivf(ds, ws(2000, 64), &config(5)).unwrap();
        let q = &qs.get(0).sparse;
        assert!(index.retrieve(q, 0, 10, &Exhaustive).is_err());
        assert!(index.retrieve(q, 10, 0, &Exhaustive).is_err());
        assert!(index.retrieve(q, 10, 101, &Exhaustive).is_err());
        assert!(index.retrieve(&SparseVector::empty(5), 10, 10, &Exhaustive).is_err());
        assert!(build_ivf(Arc::new(VectorDataset::new(0, 10)), ws(10, 8), &config(1)).is_err());
    }

    #[test]
    fn encode_round_trip() {
        let (ds, _) = small_sparse(150, 1);
        let index = build_ivf(ds, ws(2000, 64), &config(7)).unwrap();
        let bytes = index.encode().unwrap();
        let back = IvfIndex::decode(&bytes, None).unwrap();
        assert_eq!(back, index);
        assert_eq!(back.encode().unwrap(), bytes);
        let mut bad = bytes.clone();
        bad.push(0);
        assert!(IvfIndex::decode(&bad, None).is_err());
        assert!(IvfIndex::decode(&bytes[..bytes.len() - 3], None).is_err());
        assert!(IvfIndex::decode(b"XIVF", None).is_err());
    }

    #[test]
    fn path_reference_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (ds, _) = small_sparse(120, 1);
        crate::format::write_dataset(&ds, dir.path().join("docs.svec")).unwrap();
        let mut index = build_ivf(ds, ws(2000, 64), &config(4)).unwrap();
        index.set_storage(DatasetStorage::Path(PathBuf::from("docs.svec")));
        let path = dir.path().join("index.sivf");
        write_index(&index, &path).unwrap();
        let back = read_index(&path).unwrap();
        assert_eq!(back, index);
        fs::remove_file(dir.path().join("docs.svec")).unwrap();
        assert!(read_index(&path).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn selection_is_minimal_prefix(
            parts in proptest::collection::vec((0usize..20, -1.0f64..1.0), 1..30),
            frac in 0.0f64..1.0,
        ) {
            let sizes: Vec<usize> = parts.iter().map(|p| p.0).collect();
            let scores: Vec<f64> = parts.iter().map(|p| p.1).collect();
            let total: usize = sizes.iter().sum();
            prop_assume!(total > 0);
            let ell = ((frac * total as f64).ceil() as usize).clamp(1, total);
            let sel = select_by_scores(&scores, &sizes, ell);
            let covered: usize = sel.iter().map(|&p| sizes[p as usize]).sum();
            prop_assert!(covered >= ell);
            let last = sizes[*sel.last().unwrap() as usize];
            prop_assert!(covered - last < ell);
            for w in sel.windows(2) {
                let (a, b) = (w[0] as usize, w[1] as usize);
                prop_assert!(scores[a] > scores[b] || (scores[a] == scores[b] && a < b));
            }
            for p in 0..scores.len() as u32 {
                if !sel.contains(&p) {
                    prop_assert!(sel.iter().all(|&s| scores[s as usize] >= scores[p as usize]));
                }
            }
        }
    }
}
