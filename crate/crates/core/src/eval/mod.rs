//! Ground truth, accuracy, synthetic workloads, baselines and validators.

pub mod bench;
pub mod synthetic;
pub mod theorems;
pub mod two_stage;

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::sketch::{Embedding, Transform};
use crate::topk::{ScoredDoc, TopK, TopKResult};
use crate::vector::{hybrid_dot_unchecked, HybridVector, SparseVector, VectorDataset};

fn check_query(ds: &VectorDataset, q: &HybridVector) -> Result<()> {
    check_dim(ds.dense_dim() as usize, q.dense_dim())?;
    check_dim(ds.sparse_dim() as usize, q.sparse_dim() as usize)
}

/// Brute-force top-k over every document, zero scores included.
pub fn exact_topk(ds: &VectorDataset, q: &HybridVector, k: usize) -> Result<TopKResult> {
    check_query(ds, q)?;
    let mut top = TopK::new(k);
    for (id, x) in ds.iter().enumerate() {
        top.push(id as u32, hybrid_dot_unchecked(q, x));
    }
    Ok(top.into_result())
}

pub fn exact_topk_sparse(ds: &VectorDataset, q: &SparseVector, k: usize) -> Result<TopKResult> {
    exact_topk(ds, &HybridVector::sparse_only(q.clone()), k)
}

/// `|approx@k ∩ truth@k| / min(k, |truth|)`; 1.0 when the truth is empty.
pub fn accuracy_at_k(approx: &TopKResult, truth: &TopKResult, k: usize) -> f64 {
    let denom = k.min(truth.len());
    if denom == 0 {
        return 1.0;
    }
    let want: HashSet<u32> = truth.0[..denom].iter().map(|d| d.id).collect();
    let hits = approx.0.iter().take(k).filter(|d| want.contains(&d.id)).count();
    hits as f64 / denom as f64
}

/// Exact top-k per query.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    pub k: usize,
    pub results: Vec<TopKResult>,
}

impl GroundTruth {
    pub fn compute(ds: &VectorDataset, queries: &VectorDataset, k: usize) -> Result<Self> {
        let results = queries
            .vectors()
            .par_iter()
            .map(|q| exact_topk(ds, q, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { k, results })
    }

    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }

    pub fn mean_accuracy(&self, approx: &[TopKResult]) -> f64 {
        mean_accuracy(approx, &self.results, self.k)
    }

    pub fn to_tsv(&self) -> String {
        results_to_tsv(&self.results)
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let results = results_from_tsv(text)?;
        let k = results.iter().map(TopKResult::len).max().unwrap_or(0);
        Ok(Self { k, results })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_tsv())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_tsv(&fs::read_to_string(path)?)
    }
}

pub fn mean_accuracy(approx: &[TopKResult], truth: &[TopKResult], k: usize) -> f64 {
    if truth.is_empty() {
        return 1.0;
    }
    let sum: f64 = approx.iter().zip(truth).map(|(a, t)| accuracy_at_k(a, t, k)).sum();
    sum / truth.len() as f64
}

/// One line per query: ids, then scores, all tab-separated.
pub fn results_to_tsv(results: &[TopKResult]) -> String {
    let mut out = String::new();
    for r in results {
        let mut first = true;
        for field in r.iter().map(|d| d.id.to_string()).chain(r.iter().map(|d| d.score.to_string())) {
            if !first {
                out.push('\t');
            }
            first = false;
            out.push_str(&field);
        }
        out.push('\n');
    }
    out
}

pub fn results_from_tsv(text: &str) -> Result<Vec<TopKResult>> {
    let mut results = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let bad = |m: &str| Error::format(format!("line {}: {m}", line_no + 1));
        if line.is_empty() {
            results.push(TopKResult::default());
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !fields.len().is_multiple_of(2) {
            return Err(bad("expected as many scores as ids"));
        }
        let half = fields.len() / 2;
        let mut docs = Vec::with_capacity(half);
        for i in 0..half {
            let id = fields[i].parse().map_err(|_| bad("bad document id"))?;
            let score = fields[half + i].parse().map_err(|_| bad("bad score"))?;
            docs.push(ScoredDoc { id, score });
        }
        results.push(TopKResult(docs));
    }
    Ok(results)
}

pub fn write_results(results: &[TopKResult], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, results_to_tsv(results))?;
    Ok(())
}

/// Exhaustive retrieval over sketches: the `k_prime` documents whose
/// sketches score highest are re-ranked by their exact inner product.
#[derive(Debug, Clone)]
pub struct SketchScan<'a> {
    ds: &'a VectorDataset,
    transform: &'a Transform,
    docs: Vec<Embedding>,
}

impl<'a> SketchScan<'a> {
    pub fn new(ds: &'a VectorDataset, transform: &'a Transform) -> Result<Self> {
        if !ds.is_sparse_only() {
            return Err(Error::invalid("sketch scan requires a sparse-only dataset"));
        }
        let docs = ds
            .vectors()
            .par_iter()
            .map(|v| transform.embed_doc(&v.sparse))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { ds, transform, docs })
    }

    pub fn search(&self, q: &SparseVector, k: usize, k_prime: usize) -> Result<TopKResult> {
        if k_prime < k {
            return Err(Error::invalid(format!("rerank depth {k_prime} is below k = {k}")));
        }
        check_dim(self.ds.sparse_dim() as usize, q.dim() as usize)?;
        let sq = self.transform.embed_query(q)?;
        let mut cand = TopK::new(k_prime);
        for (id, d) in self.docs.iter().enumerate() {
            cand.push(id as u32, sq.dot(d));
        }
        let hq = HybridVector::sparse_only(q.clone());
        let mut top = TopK::new(k);
        for c in cand.into_result().iter() {
            top.push(c.id, hybrid_dot_unchecked(&hq, self.ds.get(c.id as usize)));
        }
        Ok(top.into_result())
    }
}
