//! Two-stage hybrid baseline: separate exact dense and sparse retrieval,
//! union of the candidates, exact hybrid re-ranking.

use std::collections::HashSet;

use crate::error::{check_dim, Error, Result};
use crate::topk::{TopK, TopKResult};
use crate::vector::{dense_dot, hybrid_dot_unchecked, sparse_dot_unchecked, HybridVector, VectorDataset};

/// Exact top lists of the dense part and the sparse part alone.
pub fn partwise_topk(ds: &VectorDataset, q: &HybridVector, depth: usize) -> Result<(TopKResult, TopKResult)> {
    check_dim(ds.dense_dim() as usize, q.dense_dim())?;
    check_dim(ds.sparse_dim() as usize, q.sparse_dim() as usize)?;
    let mut dense = TopK::new(depth);
    let mut sparse = TopK::new(depth);
    for (id, x) in ds.iter().enumerate() {
        dense.push(id as u32, dense_dot(&q.dense.0, &x.dense.0));
        sparse.push(id as u32, sparse_dot_unchecked(&q.sparse, &x.sparse));
    }
    Ok((dense.into_result(), sparse.into_result()))
}

fn rerank(ds: &VectorDataset, q: &HybridVector, candidates: impl IntoIterator<Item = u32>, k: usize) -> TopKResult {
    let mut top = TopK::new(k);
    for id in candidates {
        top.push(id, hybrid_dot_unchecked(q, ds.get(id as usize)));
    }
    top.into_result()
}

/// Top-`k_prime` of each part, union re-ranked to top-`k`.
pub fn two_stage_retrieve(ds: &VectorDataset, q: &HybridVector, k: usize, k_prime: usize) -> Result<TopKResult> {
    if k_prime < k {
        return Err(Error::invalid(format!("k' = {k_prime} must be at least k = {k}")));
    }
    let (d, s) = partwise_topk(ds, q, k_prime)?;
    let union: HashSet<u32> = d.iter().chain(s.iter()).map(|x| x.id).collect();
    Ok(rerank(ds, q, union, k))
}

/// Takes one document from each part's ranking in turn (dense first),
/// skipping repeats, until `union_size` candidates are collected, then
/// re-ranks them. Returns the result and the candidate count.
pub fn two_stage_union(ds: &VectorDataset, q: &HybridVector, k: usize, union_size: usize) -> Result<(TopKResult, usize)> {
    let depth = union_size.min(ds.len());
    let (d, s) = partwise_topk(ds, q, depth)?;
    Ok(interleave_rerank(ds, q, &d, &s, k, union_size))
}

/// As [`two_stage_union`] on precomputed part rankings.
pub fn interleave_rerank(
    ds: &VectorDataset,
    q: &HybridVector,
    dense: &TopKResult,
    sparse: &TopKResult,
    k: usize,
    union_size: usize,
) -> (TopKResult, usize) {
    let mut seen = HashSet::new();
    let mut order = Vec::new();
    let longest = dense.len().max(sparse.len());
    'outer: for i in 0..longest {
        for list in [dense, sparse] {
            if order.len() >= union_size {
                break 'outer;
            }
            if let Some(doc) = list.0.get(i) {
                if seen.insert(doc.id) {
                    order.push(doc.id);
                }
            }
        }
    }
    let n = order.len();
    (rerank(ds, q, order, k), n)
}
