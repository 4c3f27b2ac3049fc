//! Bounded top-k selection under the crate-wide ordering: descending score,
//! ties broken by ascending document id.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredDoc {
    pub id: u32,
    pub score: f64,
}

impl ScoredDoc {
    /// `Less` when `self` ranks ahead of `other`.
    #[inline]
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        other.score.total_cmp(&self.score).then(self.id.cmp(&other.id))
    }
}

// Heap entries compare by rank so the heap's maximum is the worst kept doc.
#[derive(Debug, Clone, Copy)]
struct Entry(ScoredDoc);

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.rank_cmp(&other.0)
    }
}

#[derive(Debug, Clone)]
pub struct TopK {
    k: usize,
    heap: BinaryHeap<Entry>,
}

impl TopK {
    pub fn new(k: usize) -> Self {
        Self { k, heap: BinaryHeap::with_capacity(k + 1) }
    }

    #[inline]
    pub fn push(&mut self, id: u32, score: f64) {
        if self.k == 0 {
            return;
        }
        let cand = Entry(ScoredDoc { id, score });
        if self.heap.len() < self.k {
            self.heap.push(cand);
        } else if let Some(worst) = self.heap.peek() {
            if cand < *worst {
                self.heap.pop();
                self.heap.push(cand);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn into_result(self) -> TopKResult {
        let mut docs: Vec<ScoredDoc> = self.heap.into_iter().map(|e| e.0).collect();
        docs.sort_by(ScoredDoc::rank_cmp);
        TopKResult(docs)
    }
}

/// At most `k` documents, best first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TopKResult(pub Vec<ScoredDoc>);

impl TopKResult {
    pub fn from_scores(k: usize, scores: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut top = TopK::new(k);
        for (id, s) in scores {
            top.push(id, s);
        }
        top.into_result()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ids(&self) -> Vec<u32> {
        self.0.iter().map(|d| d.id).collect()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ScoredDoc> {
        self.0.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ties_prefer_lower_ids() {
        let r = TopKResult::from_scores(2, [(5, 1.0), (3, 1.0), (9, 1.0), (1, 0.5)]);
        assert_eq!(r.ids(), vec![3, 5]);
    }

    #[test]
    fn short_input_returns_everything() {
        let r = TopKResult::from_scores(10, [(2, -1.0), (1, 3.0)]);
        assert_eq!(r.ids(), vec![1, 2]);
        assert!(TopKResult::from_scores(0, [(1, 1.0)]).is_empty());
    }

    proptest! {
        #[test]
        fn matches_full_sort(scores in proptest::collection::vec(-3i32..3, 0..60), k in 0usize..12) {
            let pairs: Vec<(u32, f64)> = scores.iter().enumerate().map(|(i, &s)| (i as u32, f64::from(s))).collect();
            let got = TopKResult::from_scores(k, pairs.iter().copied());
            let mut all: Vec<ScoredDoc> = pairs.iter().map(|&(id, score)| ScoredDoc { id, score }).collect();
            all.sort_by(ScoredDoc::rank_cmp);
            all.truncate(k);
            prop_assert_eq!(got.0, all);
        }
    }
}
