//! Synthetic workloads.
//!
//! [`SyntheticHybridSpec`] reproduces the hybrid collection of dense and
//! sparse parts with exponentially distributed values. [`SparseSyntheticSpec`]
//! is a topic-structured stand-in for learned sparse (SPLADE-style)
//! embeddings: every vector draws most of its terms from the vocabulary of
//! one topic and the rest from a Zipfian background vocabulary.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp, Poisson, Zipf};

use crate::error::{Error, Result};
use crate::vector::{DenseVector, HybridVector, SparseVector, VectorDataset};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticHybridSpec {
    pub docs: usize,
    pub queries: usize,
    /// Dense dimension `m`.
    pub dense_dim: u32,
    /// Sparse dimension `N`.
    pub sparse_dim: u32,
    /// Expected nonzeros per sparse part.
    pub psi: f64,
    /// Scale (mean) of the exponential value distribution.
    pub scale: f64,
    pub doc_seed: u64,
    pub query_seed: u64,
}

impl Default for SyntheticHybridSpec {
    fn default() -> Self {
        Self {
            docs: 10_000,
            queries: 1_000,
            dense_dim: 64,
            sparse_dim: 1_000,
            psi: 16.0,
            scale: 0.5,
            doc_seed: 1,
            query_seed: 2,
        }
    }
}

impl SyntheticHybridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dense_dim == 0 && self.sparse_dim == 0 {
            return Err(Error::invalid("at least one of the dense and sparse dimensions must be positive"));
        }
        if self.sparse_dim > 0 && !(self.psi > 0.0 && self.psi <= f64::from(self.sparse_dim)) {
            return Err(Error::invalid(format!("psi must be in (0, N = {}], got {}", self.sparse_dim, self.psi)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::invalid(format!("scale must be positive, got {}", self.scale)));
        }
        Ok(())
    }
}

fn exp_dist(scale: f64) -> Result<Exp<f64>> {
    Exp::new(1.0 / scale).map_err(|e| Error::invalid(format!("bad scale {scale}: {e}")))
}

fn hybrid_vector(spec: &SyntheticHybridSpec, rng: &mut ChaCha8Rng) -> Result<HybridVector> {
    let values = exp_dist(spec.scale)?;
    let dense: Vec<f32> = (0..spec.dense_dim).map(|_| values.sample(rng) as f32).collect();
    let dense = if dense.is_empty() { DenseVector(dense) } else { DenseVector(dense).l2_normalize()? };
    let sparse = if spec.sparse_dim == 0 {
        SparseVector::empty(0)
    } else {
        let n = spec.sparse_dim as u64;
        let nnz = Binomial::new(n, spec.psi / n as f64).map_err(|e| Error::invalid(e.to_string()))?;
        loop {
            let count = nnz.sample(rng) as usize;
            if count == 0 {
                continue;
            }
            let entries: Vec<(u32, f32)> = sample(rng, n as usize, count)
                .into_iter()
                .map(|i| (i as u32, values.sample(rng) as f32))
                .collect();
            let v = SparseVector::from_unsorted(spec.sparse_dim, entries)?;
            if !v.is_empty() {
                break v.l2_normalize()?;
            }
        }
    };
    Ok(HybridVector::new(dense, sparse))
}

fn hybrid_stream(spec: &SyntheticHybridSpec, count: usize, seed: u64) -> Result<VectorDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ds = VectorDataset::new(spec.dense_dim, spec.sparse_dim);
    for _ in 0..count {
        ds.push(hybrid_vector(spec, &mut rng)?)?;
    }
    Ok(ds)
}

/// `(documents, queries)`; both parts of every vector have unit norm.
/// Queries are unweighted; see [`weight_queries`].
pub fn gen_synthetic_hybrid(spec: &SyntheticHybridSpec) -> Result<(VectorDataset, VectorDataset)> {
    spec.validate()?;
    Ok((hybrid_stream(spec, spec.docs, spec.doc_seed)?, hybrid_stream(spec, spec.queries, spec.query_seed)?))
}

/// `w·q^d ⊕ (1−w)·q^s` for every query.
pub fn weight_queries(queries: &VectorDataset, w_dense: f32) -> Result<VectorDataset> {
    if !(0.0..=1.0).contains(&w_dense) {
        return Err(Error::invalid(format!("w_dense must be in [0, 1], got {w_dense}")));
    }
    let mut out = VectorDataset::new(queries.dense_dim(), queries.sparse_dim());
    for q in queries.iter() {
        out.push(q.weighted(w_dense))?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSyntheticSpec {
    pub docs: usize,
    pub queries: usize,
    pub dim: u32,
    /// Mean number of term draws per document (duplicates merge).
    pub doc_terms: f64,
    pub query_terms: f64,
    pub topics: u32,
    /// Terms per topic vocabulary.
    pub topic_vocab: u32,
    /// Probability a draw comes from the topic vocabulary.
    pub topic_share: f64,
    /// Zipf exponent of the topic and background term distributions.
    pub zipf: f64,
    /// Mean of the exponential term weights.
    pub scale: f64,
    /// Seeds the topic vocabularies, shared by documents and queries.
    pub world_seed: u64,
    pub doc_seed: u64,
    pub query_seed: u64,
}

impl Default for SparseSyntheticSpec {
    fn default() -> Self {
        Self {
            docs: 10_000,
            queries: 1_000,
            dim: 10_000,
            doc_terms: 64.0,
            query_terms: 16.0,
            topics: 64,
            topic_vocab: 200,
            topic_share: 0.6,
            zipf: 1.0,
            scale: 0.5,
            world_seed: 7,
            doc_seed: 1,
            query_seed: 2,
        }
    }
}

impl SparseSyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(m));
        if self.dim == 0 {
            return bad("dim must be positive".into());
        }
        if self.topics == 0 || self.topic_vocab == 0 || self.topic_vocab > self.dim {
            return bad(format!("need topics >= 1 and 1 <= topic_vocab <= dim, got {} / {}", self.topics, self.topic_vocab));
        }
        if !(self.doc_terms > 0.0 && self.query_terms > 0.0) {
            return bad("term counts must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.topic_share) {
            return bad(format!("topic_share must be in [0, 1], got {}", self.topic_share));
        }
        if !(self.zipf >= 0.0 && self.scale > 0.0) {
            return bad("zipf must be >= 0 and scale > 0".into());
        }
        Ok(())
    }
}

struct World {
    vocab: Vec<Vec<u32>>,
    background: Vec<u32>,
    topic_rank: Zipf<f64>,
    background_rank: Zipf<f64>,
    values: Exp<f64>,
}

impl World {
    fn new(spec: &SparseSyntheticSpec) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.world_seed);
        let vocab = (0..spec.topics)
            .map(|_| sample(&mut rng, spec.dim as usize, spec.topic_vocab as usize).into_iter().map(|i| i as u32).collect())
            .collect();
        let mut background: Vec<u32> = (0..spec.dim).collect();
        for i in (1..background.len()).rev() {
            background.swap(i, rng.random_range(0..=i));
        }
        let zipf = |n: u32| Zipf::new(f64::from(n), spec.zipf).map_err(|e| Error::invalid(e.to_string()));
        Ok(Self {
            vocab,
            background,
            topic_rank: zipf(spec.topic_vocab)?,
            background_rank: zipf(spec.dim)?,
            values: exp_dist(spec.scale)?,
        })
    }

    fn vector(&self, spec: &SparseSyntheticSpec, terms: f64, rng: &mut ChaCha8Rng) -> Result<SparseVector> {
        let count = Poisson::new(terms).map_err(|e| Error::invalid(e.to_string()))?;
        let topic = &self.vocab[rng.random_range(0..self.vocab.len())];
        let draws = (count.sample(rng) as usize).max(1);
        let mut entries: Vec<(u32, f32)> = Vec::with_capacity(draws);
        for _ in 0..draws {
            let term = if rng.random_bool(spec.topic_share) {
                topic[self.topic_rank.sample(rng) as usize - 1]
            } else {
                self.background[self.background_rank.sample(rng) as usize - 1]
            };
            let value = (self.values.sample(rng) as f32).max(f32::MIN_POSITIVE);
            entries.push((term, value));
        }
        entries.sort_by_key(|e| e.0);
        entries.dedup_by(|later, kept| {
            if later.0 == kept.0 {
                kept.1 = kept.1.max(later.1);
                true
            } else {
                false
            }
        });
        SparseVector::new(spec.dim, entries)
    }
}

/// `(documents, queries)` of non-negative sparse vectors.
pub fn gen_synthetic_sparse(spec: &SparseSyntheticSpec) -> Result<(VectorDataset, VectorDataset)> {
    spec.validate()?;
    let world = World::new(spec)?;
    let stream = |count: usize, terms: f64, seed: u64| -> Result<VectorDataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vectors = (0..count).map(|_| world.vector(spec, terms, &mut rng)).collect::<Result<Vec<_>>>()?;
        VectorDataset::from_sparse(spec.dim, vectors)
    };
    Ok((stream(spec.docs, spec.doc_terms, spec.doc_seed)?, stream(spec.queries, spec.query_terms, spec.query_seed)?))
}
