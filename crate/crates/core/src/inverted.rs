//! Partition-organized inverted index and the LinScan baselines.
//!
//! Posting lists are laid out partition by partition (ascending partition
//! id, then ascending document id) and carry a skip list of
//! `(partition, offset)` pairs marking where each partition's segment
//! starts, so a query can visit only the segments of selected partitions.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use crate::codec::{len_u32, put_f32s, put_u32, put_u32s, put_u8, ByteReader};
use crate::error::{Error, Result};
use crate::ivf::{IvfIndex, SubAlgorithm, SubResult};
use crate::topk::{TopK, TopKResult};
use crate::vector::{HybridVector, SparseVector, VectorDataset};

pub const SPII_MAGIC: &[u8; 4] = b"SPII";
pub const SPII_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkipEntry {
    pub partition: u32,
    pub offset: u32,
}

#[derive(Debug, Clone, PartialEq, Default)]
struct PostingList {
    ids: Vec<u32>,
    values: Vec<f32>,
    skips: Vec<SkipEntry>,
}

/// Bijection between original ids and ids that make every partition a
/// contiguous range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocRemap {
    /// original id → new id
    pub forward: Vec<u32>,
    /// new id → original id
    pub inverse: Vec<u32>,
}

/// Partitions are laid out in id order, members ascending.
pub fn remap_doc_ids(partitions: &[Vec<u32>]) -> Result<DocRemap> {
    let n: usize = partitions.iter().map(Vec::len).sum();
    let mut forward = vec![u32::MAX; n];
    let mut inverse = Vec::with_capacity(n);
    for members in partitions {
        let mut sorted = members.clone();
        sorted.sort_unstable();
        for id in sorted {
            let slot = forward
                .get_mut(id as usize)
                .ok_or_else(|| Error::invalid(format!("document {id} outside the id space 0..{n}")))?;
            if *slot != u32::MAX {
                return Err(Error::invalid(format!("document {id} appears in more than one partition")));
            }
            *slot = inverse.len() as u32;
            inverse.push(id);
        }
    }
    Ok(DocRemap { forward, inverse })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedInvertedIndex {
    dim: u32,
    doc_count: u32,
    num_partitions: u32,
    lists: Vec<PostingList>,
    /// internal id → original id, when ids were remapped
    remap: Option<Vec<u32>>,
}

/// Builds the index; `remap` renumbers documents so partitions are contiguous.
pub fn build_partitioned_index(
    ds: &VectorDataset,
    partitions: &[Vec<u32>],
    remap: bool,
) -> Result<PartitionedInvertedIndex> {
    if !ds.is_sparse_only() {
        return Err(Error::invalid("inverted index requires a sparse-only dataset"));
    }
    let n = ds.len();
    let mut owner = vec![u32::MAX; n];
    for (p, members) in partitions.iter().enumerate() {
        for &id in members {
            let slot = owner
                .get_mut(id as usize)
                .ok_or_else(|| Error::invalid(format!("document {id} outside the dataset (size {n})")))?;
            if *slot != u32::MAX {
                return Err(Error::invalid(format!("document {id} appears in more than one partition")));
            }
            *slot = p as u32;
        }
    }
    if let Some(missing) = owner.iter().position(|&p| p == u32::MAX) {
        return Err(Error::invalid(format!("document {missing} is not in any partition")));
    }
    let map = if remap { Some(remap_doc_ids(partitions)?) } else { None };

    let dim = ds.sparse_dim();
    let mut lists = vec![PostingList::default(); dim as usize];
    for (p, members) in partitions.iter().enumerate() {
        let mut sorted = members.clone();
        sorted.sort_unstable();
        for id in sorted {
            let internal = map.as_ref().map_or(id, |m| m.forward[id as usize]);
            for (t, v) in ds.get(id as usize).sparse.iter() {
                let list = &mut lists[t as usize];
                if list.skips.last().map(|s| s.partition) != Some(p as u32) {
                    list.skips.push(SkipEntry { partition: p as u32, offset: list.ids.len() as u32 });
                }
                list.ids.push(internal);
                list.values.push(v);
            }
        }
    }
    Ok(PartitionedInvertedIndex {
        dim,
        doc_count: len_u32(n, "document count")?,
        num_partitions: len_u32(partitions.len(), "partition count")?,
        lists,
        remap: map.map(|m| m.inverse),
    })
}

/// Single-partition index without remapping, as LinScan uses.
pub fn build_plain_index(ds: &VectorDataset) -> Result<PartitionedInvertedIndex> {
    build_partitioned_index(ds, &[(0..ds.len() as u32).collect()], false)
}

/// Running scores of one query; absent documents score 0.
#[derive(Debug, Clone)]
pub struct ScoreAccumulator {
    scores: Vec<f64>,
    seen: Vec<bool>,
    touched: Vec<u32>,
    touches: usize,
}

impl ScoreAccumulator {
    pub fn new(doc_count: usize) -> Self {
        Self { scores: vec![0.0; doc_count], seen: vec![false; doc_count], touched: Vec::new(), touches: 0 }
    }

    #[inline]
    pub fn add(&mut self, id: u32, delta: f64) {
        let i = id as usize;
        if !self.seen[i] {
            self.seen[i] = true;
            self.touched.push(id);
        }
        self.scores[i] += delta;
        self.touches += 1;
    }

    pub fn get(&self, id: u32) -> f64 {
        self.scores[id as usize]
    }

    /// Distinct documents with a score.
    pub fn touched(&self) -> &[u32] {
        &self.touched
    }

    /// Number of `add` calls.
    pub fn touches(&self) -> usize {
        self.touches
    }

    pub fn clear(&mut self) {
        for &id in &self.touched {
            self.scores[id as usize] = 0.0;
            self.seen[id as usize] = false;
        }
        self.touched.clear();
        self.touches = 0;
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QueryStats {
    /// Distinct documents scored.
    pub docs_evaluated: usize,
    /// Posting entries visited.
    pub postings_visited: usize,
    /// Query coordinates at or beyond the index dimension, skipped.
    pub ignored_coordinates: usize,
    /// Query coordinates fully processed (budgeted LinScan).
    pub coordinates_processed: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InvertedResult {
    pub top: TopKResult,
    pub stats: QueryStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Unlimited,
    Time(Duration),
}

impl std::str::FromStr for Budget {
    type Err = Error;

    /// `inf` / `unlimited`, or a duration such as `250us`, `2ms`, `0.5s`;
    /// bare numbers are microseconds.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("unlimited") {
            return Ok(Budget::Unlimited);
        }
        let (num, unit) = match s.find(|c: char| c.is_ascii_alphabetic()) {
            Some(i) => s.split_at(i),
            None => (s, "us"),
        };
        let secs_per_unit = match unit {
            "ns" => 1e-9,
            "us" => 1e-6,
            "ms" => 1e-3,
            "s" => 1.0,
            _ => return Err(Error::invalid(format!("unknown budget unit in '{s}'"))),
        };
        let value: f64 = num.trim().parse().map_err(|_| Error::invalid(format!("bad budget '{s}'")))?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::invalid(format!("budget must be positive, got '{s}'")));
        }
        Ok(Budget::Time(Duration::from_secs_f64(value * secs_per_unit)))
    }
}

impl std::fmt::Display for Budget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Budget::Unlimited => f.write_str("inf"),
            Budget::Time(d) => write!(f, "{}us", d.as_secs_f64() * 1e6),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverheadReport {
    pub skip_integers: u64,
    pub centroid_floats: u64,
    pub posting_entries: u64,
    /// `2·N·P`
    pub skip_bound: u64,
}

impl OverheadReport {
    pub fn within_bound(&self) -> bool {
        self.skip_integers <= self.skip_bound
    }
}

impl PartitionedInvertedIndex {
    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn doc_count(&self) -> u32 {
        self.doc_count
    }

    pub fn num_partitions(&self) -> u32 {
        self.num_partitions
    }

    pub fn is_remapped(&self) -> bool {
        self.remap.is_some()
    }

    /// Posting list of coordinate `t` as `(original id, value)` pairs.
    pub fn postings(&self, t: u32) -> Vec<(u32, f32)> {
        let list = &self.lists[t as usize];
        list.ids.iter().map(|&i| self.original(i)).zip(list.values.iter().copied()).collect()
    }

    pub fn skips(&self, t: u32) -> &[SkipEntry] {
        &self.lists[t as usize].skips
    }

    #[inline]
    fn original(&self, internal: u32) -> u32 {
        match &self.remap {
            Some(inv) => inv[internal as usize],
            None => internal,
        }
    }

    fn finish(&self, acc: &ScoreAccumulator, k: usize, mut stats: QueryStats) -> InvertedResult {
        let mut top = TopK::new(k);
        for &id in acc.touched() {
            top.push(self.original(id), acc.get(id));
        }
        stats.docs_evaluated = acc.touched().len();
        stats.postings_visited = acc.touches();
        InvertedResult { top: top.into_result(), stats }
    }

    fn count_ignored(&self, q: &SparseVector) -> usize {
        let ignored = q.indices().iter().filter(|&&t| t >= self.dim).count();
        if ignored > 0 {
            log::warn!("{ignored} query coordinate(s) beyond index dimension {} ignored", self.dim);
        }
        ignored
    }

    /// Scores `q` over the members of `selected` only.
    pub fn query_partitioned(&self, q: &SparseVector, selected: &[u32], k: usize) -> InvertedResult {
        let mut acc = ScoreAccumulator::new(self.doc_count as usize);
        self.query_partitioned_with(&mut acc, q, selected, k)
    }

    /// As [`query_partitioned`](Self::query_partitioned), reusing `acc`.
    pub fn query_partitioned_with(
        &self,
        acc: &mut ScoreAccumulator,
        q: &SparseVector,
        selected: &[u32],
        k: usize,
    ) -> InvertedResult {
        acc.clear();
        let mut sel = selected.to_vec();
        sel.sort_unstable();
        sel.dedup();
        let stats = QueryStats { ignored_coordinates: self.count_ignored(q), ..Default::default() };
        for (t, qt) in q.iter() {
            if t >= self.dim {
                continue;
            }
            let qt = f64::from(qt);
            let list = &self.lists[t as usize];
            let mut pos = 0;
            for &p in &sel {
                while pos < list.skips.len() && list.skips[pos].partition < p {
                    pos += 1;
                }
                if pos == list.skips.len() {
                    break;
                }
                if list.skips[pos].partition != p {
                    continue;
                }
                let start = list.skips[pos].offset as usize;
                let end = list.skips.get(pos + 1).map_or(list.ids.len(), |s| s.offset as usize);
                for j in start..end {
                    acc.add(list.ids[j], qt * f64::from(list.values[j]));
                }
            }
        }
        self.finish(acc, k, stats)
    }

    /// Exhaustive coordinate-at-a-time scoring over every posting of `q`.
    pub fn linscan_exact(&self, q: &SparseVector, k: usize) -> InvertedResult {
        let mut acc = ScoreAccumulator::new(self.doc_count as usize);
        let stats = QueryStats { ignored_coordinates: self.count_ignored(q), ..Default::default() };
        let mut processed = 0;
        for (t, qt) in q.iter() {
            if t >= self.dim {
                continue;
            }
            self.scan_coordinate(&mut acc, t, f64::from(qt));
            processed += 1;
        }
        self.finish(&acc, k, QueryStats { coordinates_processed: processed, ..stats })
    }

    /// LinScan over coordinates in descending `|q_t|` order, stopping once
    /// `budget` has elapsed. The clock is checked between coordinates and at
    /// least one coordinate is always processed.
    pub fn linscan_budgeted(&self, q: &SparseVector, k: usize, budget: Budget) -> InvertedResult {
        let start = Instant::now();
        let mut acc = ScoreAccumulator::new(self.doc_count as usize);
        let stats = QueryStats { ignored_coordinates: self.count_ignored(q), ..Default::default() };
        let mut order: Vec<(u32, f32)> = q.iter().filter(|&(t, _)| t < self.dim).collect();
        order.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
        let mut processed = 0;
        for (t, qt) in order {
            if processed > 0 {
                if let Budget::Time(limit) = budget {
                    if start.elapsed() >= limit {
                        break;
                    }
                }
            }
            self.scan_coordinate(&mut acc, t, f64::from(qt));
            processed += 1;
        }
        self.finish(&acc, k, QueryStats { coordinates_processed: processed, ..stats })
    }

    fn scan_coordinate(&self, acc: &mut ScoreAccumulator, t: u32, qt: f64) {
        let list = &self.lists[t as usize];
        for (&id, &v) in list.ids.iter().zip(&list.values) {
            acc.add(id, qt * f64::from(v));
        }
    }

    /// Number of documents sharing at least one coordinate with `q`.
    pub fn qualified_count(&self, q: &SparseVector) -> usize {
        self.qualified_mask(q).iter().filter(|&&b| b).count()
    }

    /// Per original document id: does it share a coordinate with `q`?
    pub fn qualified_mask(&self, q: &SparseVector) -> Vec<bool> {
        let mut mask = vec![false; self.doc_count as usize];
        for &t in q.indices() {
            if t >= self.dim {
                continue;
            }
            for &id in &self.lists[t as usize].ids {
                mask[self.original(id) as usize] = true;
            }
        }
        mask
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(SPII_MAGIC);
        put_u32(&mut out, SPII_VERSION);
        put_u32(&mut out, self.dim);
        put_u32(&mut out, self.doc_count);
        put_u32(&mut out, self.num_partitions);
        put_u8(&mut out, self.remap.is_some() as u8);
        for list in &self.lists {
            put_u32(&mut out, len_u32(list.ids.len(), "posting list")?);
            put_u32s(&mut out, &list.ids);
            put_f32s(&mut out, &list.values);
            put_u32(&mut out, len_u32(list.skips.len(), "skip list")?);
            for s in &list.skips {
                put_u32(&mut out, s.partition);
                put_u32(&mut out, s.offset);
            }
        }
        if let Some(inv) = &self.remap {
            put_u32s(&mut out, inv);
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        r.expect_magic(SPII_MAGIC)?;
        let version = r.u32()?;
        if version != SPII_VERSION {
            return Err(Error::format(format!("unsupported SPII version {version}")));
        }
        let dim = r.u32()?;
        let doc_count = r.u32()?;
        let num_partitions = r.u32()?;
        let remapped = r.u8()? != 0;
        let mut lists = Vec::with_capacity(dim as usize);
        for _ in 0..dim {
            let n = r.u32()? as usize;
            let ids = r.u32_vec(n)?;
            let values = r.f32_vec(n)?;
            let s = r.u32()? as usize;
            let mut skips = Vec::with_capacity(s);
            for _ in 0..s {
                skips.push(SkipEntry { partition: r.u32()?, offset: r.u32()? });
            }
            lists.push(PostingList { ids, values, skips });
        }
        let remap = if remapped { Some(r.u32_vec(doc_count as usize)?) } else { None };
        if !r.is_empty() {
            return Err(Error::format("trailing bytes in inverted index file"));
        }
        let index = Self { dim, doc_count, num_partitions, lists, remap };
        index.validate()?;
        Ok(index)
    }

    /// Checks the structural invariants of every posting and skip list.
    pub fn validate(&self) -> Result<()> {
        for (t, list) in self.lists.iter().enumerate() {
            let bad = |what: &str| Error::format(format!("coordinate {t}: {what}"));
            if list.ids.len() != list.values.len() {
                return Err(bad("ids and values differ in length"));
            }
            if list.ids.is_empty() != list.skips.is_empty() {
                return Err(bad("skip list does not cover the posting list"));
            }
            if let Some(first) = list.skips.first() {
                if first.offset != 0 {
                    return Err(bad("first segment does not start at 0"));
                }
            }
            for w in list.skips.windows(2) {
                if w[0].partition >= w[1].partition || w[0].offset >= w[1].offset {
                    return Err(bad("skip list not strictly ascending"));
                }
            }
            for (i, s) in list.skips.iter().enumerate() {
                if s.partition >= self.num_partitions || s.offset as usize >= list.ids.len() {
                    return Err(bad("skip entry out of range"));
                }
                let end = list.skips.get(i + 1).map_or(list.ids.len(), |n| n.offset as usize);
                let seg = &list.ids[s.offset as usize..end];
                if seg.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(bad("document ids not ascending within a segment"));
                }
            }
            if list.ids.iter().any(|&id| id >= self.doc_count) {
                return Err(bad("document id out of range"));
            }
        }
        if let Some(inv) = &self.remap {
            let mut seen = vec![false; inv.len()];
            for &o in inv {
                if o as usize >= inv.len() || std::mem::replace(&mut seen[o as usize], true) {
                    return Err(Error::format("remap table is not a permutation"));
                }
            }
        }
        Ok(())
    }
}

/// Storage counts; `ivf` supplies the centroid count when available.
pub fn index_overhead_report(index: &PartitionedInvertedIndex, ivf: Option<&IvfIndex>) -> OverheadReport {
    let skip_integers: u64 = index.lists.iter().map(|l| 2 * l.skips.len() as u64).sum();
    let posting_entries = index.lists.iter().map(|l| l.ids.len() as u64).sum();
    let centroid_floats = ivf.map_or(0, |i| (i.model().num_partitions() * i.model().width()) as u64);
    let report = OverheadReport {
        skip_integers,
        centroid_floats,
        posting_entries,
        skip_bound: 2 * u64::from(index.dim) * u64::from(index.num_partitions),
    };
    debug_assert!(report.within_bound());
    report
}

impl SubAlgorithm for PartitionedInvertedIndex {
    fn search(&self, index: &IvfIndex, query: &HybridVector, partitions: &[u32], k: usize) -> Result<SubResult> {
        if query.dense_dim() != 0 {
            return Err(Error::invalid("the inverted-index sub-algorithm handles sparse queries only"));
        }
        if self.doc_count as usize != index.len() || self.num_partitions as usize != index.num_partitions() {
            return Err(Error::invalid("inverted index was not built from this IVF index"));
        }
        let r = self.query_partitioned(&query.sparse, partitions, k);
        Ok(SubResult {
            top: r.top,
            docs_evaluated: r.stats.docs_evaluated,
            postings_visited: r.stats.postings_visited,
        })
    }
}

pub fn write_inverted(index: &PartitionedInvertedIndex, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, index.encode()?)?;
    Ok(())
}

pub fn read_inverted(path: impl AsRef<Path>) -> Result<PartitionedInvertedIndex> {
    PartitionedInvertedIndex::decode(&fs::read(path)?)
}
