//! Sketching transforms that map sparse vectors in `R^N` to a small,
//! fixed-width space.
//!
//! * [`JlTransform`]: linear random projection with `±1/√n` entries.
//! * [`WeakSinnamonTransform`]: one random coordinate mapping, an
//!   upper-bound half (max of colliding values) and a lower-bound half
//!   (min). Documents and queries are sketched asymmetrically.
//! * [`SinnamonTransform`]: `h` mappings plus the document's nonzero
//!   indicator; kept as a reference estimator.
//!
//! Neither the projection matrix nor the mappings are materialized. Both
//! are pure functions of `(seed, indices)` through [`crate::hash`].
//!
//! Cells of a bound sketch whose preimage under the mapping contains a
//! coordinate absent from the document implicitly hold a zero. The
//! effective upper (lower) bound of such a cell is therefore clamped to be
//! at least (at most) zero, which keeps the sketch inner product an upper
//! bound on the exact inner product for vectors of either sign.

use crate::codec::{put_u32, put_u32s, put_u64, put_u8, ByteReader};
use crate::error::{check_dim, Error, Result};
use crate::hash::{bucket, keyed_hash};
use crate::vector::{dense_dot, sparse_dense_dot, sparse_dot_unchecked, SparseVector, VectorDataset};

pub const DEFAULT_SKETCH_DIM: u32 = 1024;

const MAP_SALT: u64 = 0xA076_1D64_78BD_642F;

/// Entry sign of the implicit JL matrix at `(row, col)`.
///
/// Each hash word carries 64 consecutive rows of one column.
#[inline]
pub fn jl_sign(seed: u64, row: u32, col: u32) -> i8 {
    let word = keyed_hash(seed, u64::from(row / 64), u64::from(col));
    if (word >> (row % 64)) & 1 == 1 {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JlTransform {
    input_dim: u32,
    sketch_dim: u32,
    seed: u64,
}

impl JlTransform {
    pub fn new(input_dim: u32, sketch_dim: u32, seed: u64) -> Result<Self> {
        if sketch_dim == 0 {
            return Err(Error::invalid("JL sketch dimension must be positive"));
        }
        Ok(Self { input_dim, sketch_dim, seed })
    }

    pub fn input_dim(&self) -> u32 {
        self.input_dim
    }

    pub fn sketch_dim(&self) -> u32 {
        self.sketch_dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `R u` accumulated in `f64`; costs `O(n · nnz(u))`.
    pub fn sketch_f64(&self, u: &SparseVector) -> Result<Vec<f64>> {
        check_dim(self.input_dim as usize, u.dim() as usize)?;
        let n = self.sketch_dim as usize;
        let mut out = vec![0.0f64; n];
        for (col, value) in u.iter() {
            let value = f64::from(value);
            for (block, chunk) in out.chunks_mut(64).enumerate() {
                let word = keyed_hash(self.seed, block as u64, u64::from(col));
                for (bit, slot) in chunk.iter_mut().enumerate() {
                    if (word >> bit) & 1 == 1 {
                        *slot += value;
                    } else {
                        *slot -= value;
                    }
                }
            }
        }
        let scale = 1.0 / (n as f64).sqrt();
        out.iter_mut().for_each(|x| *x *= scale);
        Ok(out)
    }

    pub fn sketch(&self, u: &SparseVector) -> Result<Vec<f32>> {
        Ok(self.sketch_f64(u)?.into_iter().map(|x| x as f32).collect())
    }
}

/// Random coordinate mapping(s) `π_o: [N] → [width]`.
#[derive(Debug, Clone, PartialEq)]
pub enum CoordinateMap {
    Hashed { seed: u64 },
    /// One table of length `N` per mapping; used to pin mappings in tests
    /// and small worked examples.
    Explicit(Vec<Vec<u32>>),
}

#[derive(Debug, Clone, PartialEq)]
struct Mapper {
    input_dim: u32,
    width: u32,
    mappings: u32,
    map: CoordinateMap,
    /// Number of distinct coordinates that land in each cell.
    preimage: Vec<u32>,
}

impl Mapper {
    fn new(input_dim: u32, width: u32, mappings: u32, map: CoordinateMap) -> Result<Self> {
        if width == 0 {
            return Err(Error::invalid("sketch width must be positive"));
        }
        if mappings == 0 {
            return Err(Error::invalid("at least one mapping is required"));
        }
        if let CoordinateMap::Explicit(tables) = &map {
            if tables.len() != mappings as usize {
                return Err(Error::invalid(format!(
                    "expected {mappings} mapping tables, got {}",
                    tables.len()
                )));
            }
            for t in tables {
                check_dim(input_dim as usize, t.len())?;
                if let Some(bad) = t.iter().find(|&&c| c >= width) {
                    return Err(Error::invalid(format!("mapping target {bad} >= width {width}")));
                }
            }
        }
        let mut mapper = Self { input_dim, width, mappings, map, preimage: Vec::new() };
        let mut preimage = vec![0u32; width as usize];
        let mut cells = Vec::with_capacity(mappings as usize);
        for coord in 0..input_dim {
            mapper.cells(coord, &mut cells);
            for &c in &cells {
                preimage[c as usize] += 1;
            }
        }
        mapper.preimage = preimage;
        Ok(mapper)
    }

    #[inline]
    fn cell(&self, mapping: u32, coord: u32) -> u32 {
        match &self.map {
            CoordinateMap::Hashed { seed } => bucket(
                keyed_hash(seed ^ MAP_SALT, u64::from(mapping), u64::from(coord)),
                self.width,
            ),
            CoordinateMap::Explicit(tables) => tables[mapping as usize][coord as usize],
        }
    }

    /// Distinct cells of `coord` across all mappings, in mapping order.
    fn cells(&self, coord: u32, out: &mut Vec<u32>) {
        out.clear();
        for o in 0..self.mappings {
            let c = self.cell(o, coord);
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }

    fn seed(&self) -> Option<u64> {
        match self.map {
            CoordinateMap::Hashed { seed } => Some(seed),
            CoordinateMap::Explicit(_) => None,
        }
    }
}

/// Upper/lower-bound document sketch.
///
/// `upper` and `lower` hold the raw extremes over the document's nonzero
/// coordinates (0 for cells no nonzero maps to). `lower` is empty in
/// non-negative mode.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSketch {
    pub upper: Vec<f32>,
    pub lower: Vec<f32>,
    occupied: Vec<bool>,
    /// Cell also receives a coordinate that is zero in the document.
    slack: Vec<bool>,
    /// Nonzero coordinates of the sketched vector (Sinnamon only).
    nz: Option<Vec<u32>>,
}

impl BoundSketch {
    pub fn width(&self) -> usize {
        self.upper.len() + self.lower.len()
    }

    pub fn is_empty_cell(&self, cell: usize) -> bool {
        !self.occupied[cell]
    }

    pub fn occupied_cells(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    /// Least upper bound known for any coordinate that maps to `cell`.
    #[inline]
    pub fn upper_bound(&self, cell: usize) -> f32 {
        let raw = self.upper[cell];
        if self.slack[cell] {
            raw.max(0.0)
        } else {
            raw
        }
    }

    /// Greatest lower bound known for any coordinate that maps to `cell`.
    /// Zero in non-negative mode.
    #[inline]
    pub fn lower_bound(&self, cell: usize) -> f32 {
        if self.lower.is_empty() {
            return 0.0;
        }
        let raw = self.lower[cell];
        if self.slack[cell] {
            raw.min(0.0)
        } else {
            raw
        }
    }

    pub fn nonzero_indicator(&self) -> Option<&[u32]> {
        self.nz.as_deref()
    }

    /// Effective bounds laid out as `upper ‖ lower`, zeros omitted.
    pub fn to_embedding(&self) -> SparseVector {
        let uw = self.upper.len();
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for k in 0..uw {
            let v = self.upper_bound(k);
            if v != 0.0 {
                indices.push(k as u32);
                values.push(v);
            }
        }
        for k in 0..self.lower.len() {
            let v = self.lower_bound(k);
            if v != 0.0 {
                indices.push((uw + k) as u32);
                values.push(v);
            }
        }
        SparseVector::from_parts_unchecked(self.width() as u32, indices, values)
    }

    /// Dense `upper ‖ lower` of effective bounds.
    pub fn to_dense(&self) -> Vec<f32> {
        let mut out: Vec<f32> = (0..self.upper.len()).map(|k| self.upper_bound(k)).collect();
        out.extend((0..self.lower.len()).map(|k| self.lower_bound(k)));
        out
    }
}

fn bound_sketch(
    mapper: &Mapper,
    non_negative: bool,
    keep_indicator: bool,
    u: &SparseVector,
) -> Result<BoundSketch> {
    check_dim(mapper.input_dim as usize, u.dim() as usize)?;
    let w = mapper.width as usize;
    let mut upper = vec![0.0f32; w];
    let mut lower = vec![0.0f32; if non_negative { 0 } else { w }];
    let mut occupied = vec![false; w];
    let mut covered = vec![0u32; w];
    let mut cells = Vec::with_capacity(mapper.mappings as usize);
    for (coord, value) in u.iter() {
        if non_negative && value < 0.0 {
            return Err(Error::invalid(format!(
                "negative value at coordinate {coord} in non-negative mode"
            )));
        }
        mapper.cells(coord, &mut cells);
        for &c in &cells {
            let c = c as usize;
            if occupied[c] {
                upper[c] = upper[c].max(value);
                if !non_negative {
                    lower[c] = lower[c].min(value);
                }
            } else {
                occupied[c] = true;
                upper[c] = value;
                if !non_negative {
                    lower[c] = value;
                }
            }
            covered[c] += 1;
        }
    }
    let slack = covered.iter().zip(&mapper.preimage).map(|(c, p)| c < p).collect();
    Ok(BoundSketch {
        upper,
        lower,
        occupied,
        slack,
        nz: keep_indicator.then(|| u.indices().to_vec()),
    })
}

/// Query-side bound sketch: per cell, the sum of positive (upper half) or
/// negative (lower half) query values mapped there. Stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryBoundSketch {
    upper_width: u32,
    lower_width: u32,
    pub upper: Vec<(u32, f64)>,
    pub lower: Vec<(u32, f64)>,
}

impl QueryBoundSketch {
    pub fn width(&self) -> usize {
        (self.upper_width + self.lower_width) as usize
    }

    pub fn to_embedding(&self) -> SparseVector {
        let mut indices = Vec::with_capacity(self.upper.len() + self.lower.len());
        let mut values = Vec::with_capacity(indices.capacity());
        for &(k, v) in &self.upper {
            indices.push(k);
            values.push(v as f32);
        }
        for &(k, v) in &self.lower {
            indices.push(self.upper_width + k);
            values.push(v as f32);
        }
        SparseVector::from_parts_unchecked(self.width() as u32, indices, values)
    }
}

fn merge_cells(mut cells: Vec<(u32, f64)>) -> Vec<(u32, f64)> {
    cells.sort_by_key(|&(k, _)| k);
    let mut out: Vec<(u32, f64)> = Vec::with_capacity(cells.len());
    for (k, v) in cells {
        match out.last_mut() {
            Some((last, acc)) if *last == k => *acc += v,
            _ => out.push((k, v)),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakSinnamonTransform {
    half_width: u32,
    non_negative: bool,
    mapper: Mapper,
}

impl WeakSinnamonTransform {
    /// `half_width` is `m`: the upper and lower halves each get `m` cells.
    /// In non-negative mode the upper half takes all `2m` cells.
    pub fn new(input_dim: u32, half_width: u32, seed: u64, non_negative: bool) -> Result<Self> {
        Self::with_map(input_dim, half_width, CoordinateMap::Hashed { seed }, non_negative)
    }

    pub fn with_mapping(
        input_dim: u32,
        half_width: u32,
        mapping: Vec<u32>,
        non_negative: bool,
    ) -> Result<Self> {
        Self::with_map(input_dim, half_width, CoordinateMap::Explicit(vec![mapping]), non_negative)
    }

    fn with_map(input_dim: u32, half_width: u32, map: CoordinateMap, non_negative: bool) -> Result<Self> {
        if half_width == 0 {
            return Err(Error::invalid("Weak Sinnamon half width must be positive"));
        }
        let width = if non_negative { 2 * half_width } else { half_width };
        Ok(Self { half_width, non_negative, mapper: Mapper::new(input_dim, width, 1, map)? })
    }

    pub fn input_dim(&self) -> u32 {
        self.mapper.input_dim
    }

    pub fn half_width(&self) -> u32 {
        self.half_width
    }

    pub fn non_negative(&self) -> bool {
        self.non_negative
    }

    pub fn upper_width(&self) -> u32 {
        self.mapper.width
    }

    pub fn lower_width(&self) -> u32 {
        if self.non_negative {
            0
        } else {
            self.half_width
        }
    }

    /// Total sketch budget, `2m`.
    pub fn width(&self) -> u32 {
        2 * self.half_width
    }

    pub fn map(&self, coord: u32) -> u32 {
        self.mapper.cell(0, coord)
    }

    pub fn sketch_doc(&self, u: &SparseVector) -> Result<BoundSketch> {
        bound_sketch(&self.mapper, self.non_negative, false, u)
    }

    pub fn sketch_query(&self, q: &SparseVector) -> Result<QueryBoundSketch> {
        check_dim(self.input_dim() as usize, q.dim() as usize)?;
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (coord, value) in q.iter() {
            let cell = self.map(coord);
            if value > 0.0 {
                pos.push((cell, f64::from(value)));
            } else if !self.non_negative {
                neg.push((cell, f64::from(value)));
            }
        }
        Ok(QueryBoundSketch {
            upper_width: self.upper_width(),
            lower_width: self.lower_width(),
            upper: merge_cells(pos),
            lower: merge_cells(neg),
        })
    }
}

/// `⟨q̄, ū⟩ + ⟨q̲, u̲⟩` over effective bounds; empty cells contribute 0.
pub fn ws_inner(query: &QueryBoundSketch, doc: &BoundSketch) -> Result<f64> {
    check_dim(query.upper_width as usize, doc.upper.len())?;
    check_dim(query.lower_width as usize, doc.lower.len())?;
    let up: f64 = query
        .upper
        .iter()
        .map(|&(k, v)| v * f64::from(doc.upper_bound(k as usize)))
        .sum();
    let low: f64 = query
        .lower
        .iter()
        .map(|&(k, v)| v * f64::from(doc.lower_bound(k as usize)))
        .sum();
    Ok(up + low)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinnamonTransform {
    half_width: u32,
    non_negative: bool,
    mapper: Mapper,
}

impl SinnamonTransform {
    pub fn new(input_dim: u32, half_width: u32, mappings: u32, seed: u64, non_negative: bool) -> Result<Self> {
        Self::with_map(input_dim, half_width, mappings, CoordinateMap::Hashed { seed }, non_negative)
    }

    pub fn with_mappings(
        input_dim: u32,
        half_width: u32,
        tables: Vec<Vec<u32>>,
        non_negative: bool,
    ) -> Result<Self> {
        let h = tables.len() as u32;
        Self::with_map(input_dim, half_width, h, CoordinateMap::Explicit(tables), non_negative)
    }

    fn with_map(
        input_dim: u32,
        half_width: u32,
        mappings: u32,
        map: CoordinateMap,
        non_negative: bool,
    ) -> Result<Self> {
        if half_width == 0 {
            return Err(Error::invalid("Sinnamon half width must be positive"));
        }
        let width = if non_negative { 2 * half_width } else { half_width };
        Ok(Self { half_width, non_negative, mapper: Mapper::new(input_dim, width, mappings, map)? })
    }

    pub fn input_dim(&self) -> u32 {
        self.mapper.input_dim
    }

    pub fn half_width(&self) -> u32 {
        self.half_width
    }

    pub fn mappings(&self) -> u32 {
        self.mapper.mappings
    }

    pub fn non_negative(&self) -> bool {
        self.non_negative
    }

    pub fn width(&self) -> u32 {
        2 * self.half_width
    }

    pub fn sketch_doc(&self, u: &SparseVector) -> Result<BoundSketch> {
        bound_sketch(&self.mapper, self.non_negative, true, u)
    }

    /// Positive query values take the least upper bound over their cells,
    /// negative ones the greatest lower bound. With `use_indicator`, terms
    /// for coordinates outside the document's support are zero and the raw
    /// (unclamped) extremes are used.
    pub fn inner(&self, q: &SparseVector, doc: &BoundSketch, use_indicator: bool) -> Result<f64> {
        check_dim(self.input_dim() as usize, q.dim() as usize)?;
        check_dim(self.mapper.width as usize, doc.upper.len())?;
        let nz = match (use_indicator, doc.nz.as_deref()) {
            (true, Some(nz)) => Some(nz),
            (true, None) => {
                return Err(Error::invalid("document sketch carries no nonzero indicator"))
            }
            (false, _) => None,
        };
        let mut cells = Vec::with_capacity(self.mapper.mappings as usize);
        let mut acc = 0.0f64;
        for (coord, qv) in q.iter() {
            if let Some(nz) = nz {
                if nz.binary_search(&coord).is_err() {
                    continue;
                }
            }
            self.mapper.cells(coord, &mut cells);
            let bound = if qv > 0.0 {
                cells
                    .iter()
                    .map(|&c| {
                        if nz.is_some() {
                            doc.upper[c as usize]
                        } else {
                            doc.upper_bound(c as usize)
                        }
                    })
                    .fold(f32::INFINITY, f32::min)
            } else if doc.lower.is_empty() {
                0.0
            } else {
                cells
                    .iter()
                    .map(|&c| {
                        if nz.is_some() {
                            doc.lower[c as usize]
                        } else {
                            doc.lower_bound(c as usize)
                        }
                    })
                    .fold(f32::NEG_INFINITY, f32::max)
            };
            acc += f64::from(qv) * f64::from(bound);
        }
        Ok(acc)
    }
}

/// Output of a transform applied to one document.
#[derive(Debug, Clone, PartialEq)]
pub enum Sketch {
    Dense(Vec<f32>),
    BoundPair(BoundSketch),
}

impl Sketch {
    pub fn width(&self) -> usize {
        match self {
            Sketch::Dense(v) => v.len(),
            Sketch::BoundPair(b) => b.width(),
        }
    }

    pub fn to_dense(&self) -> Vec<f32> {
        match self {
            Sketch::Dense(v) => v.clone(),
            Sketch::BoundPair(b) => b.to_dense(),
        }
    }
}

/// A sketch placed in the linear space the clustering and centroid scoring
/// operate in.
#[derive(Debug, Clone, PartialEq)]
pub enum Embedding {
    Dense(Vec<f32>),
    Sparse(SparseVector),
}

impl Embedding {
    pub fn width(&self) -> usize {
        match self {
            Embedding::Dense(v) => v.len(),
            Embedding::Sparse(s) => s.dim() as usize,
        }
    }

    pub fn dot_dense(&self, dense: &[f32]) -> f64 {
        match self {
            Embedding::Dense(v) => dense_dot(v, dense),
            Embedding::Sparse(s) => sparse_dense_dot(s, dense),
        }
    }

    pub fn dot(&self, other: &Embedding) -> f64 {
        match (self, other) {
            (Embedding::Dense(a), Embedding::Dense(b)) => dense_dot(a, b),
            (Embedding::Sparse(a), Embedding::Dense(b)) | (Embedding::Dense(b), Embedding::Sparse(a)) => {
                sparse_dense_dot(a, b)
            }
            (Embedding::Sparse(a), Embedding::Sparse(b)) => sparse_dot_unchecked(a, b),
        }
    }

    pub fn to_dense(&self) -> Vec<f32> {
        match self {
            Embedding::Dense(v) => v.clone(),
            Embedding::Sparse(s) => {
                let mut out = vec![0.0; s.dim() as usize];
                for (i, v) in s.iter() {
                    out[i as usize] = v;
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Jl,
    WeakSinnamon,
    Sinnamon,
}

impl TransformKind {
    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Jl => "jl",
            TransformKind::WeakSinnamon => "ws",
            TransformKind::Sinnamon => "sinnamon",
        }
    }
}

impl std::fmt::Display for TransformKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jl" => Ok(TransformKind::Jl),
            "ws" | "weak-sinnamon" => Ok(TransformKind::WeakSinnamon),
            "sinnamon" => Ok(TransformKind::Sinnamon),
            other => Err(Error::invalid(format!("unknown transform '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    Jl(JlTransform),
    WeakSinnamon(WeakSinnamonTransform),
    Sinnamon(SinnamonTransform),
}

impl Transform {
    /// Builds a transform with total sketch budget `width` (`n` for JL,
    /// `2m` for the Sinnamon family).
    pub fn build(
        kind: TransformKind,
        input_dim: u32,
        width: u32,
        seed: u64,
        mappings: u32,
        non_negative: bool,
    ) -> Result<Self> {
        match kind {
            TransformKind::Jl => Ok(Transform::Jl(JlTransform::new(input_dim, width, seed)?)),
            TransformKind::WeakSinnamon | TransformKind::Sinnamon => {
                if width < 2 || !width.is_multiple_of(2) {
                    return Err(Error::invalid(format!(
                        "Sinnamon-family sketch width must be even and >= 2, got {width}"
                    )));
                }
                if kind == TransformKind::WeakSinnamon {
                    Ok(Transform::WeakSinnamon(WeakSinnamonTransform::new(
                        input_dim,
                        width / 2,
                        seed,
                        non_negative,
                    )?))
                } else {
                    Ok(Transform::Sinnamon(SinnamonTransform::new(
                        input_dim,
                        width / 2,
                        mappings,
                        seed,
                        non_negative,
                    )?))
                }
            }
        }
    }

    pub fn kind(&self) -> TransformKind {
        match self {
            Transform::Jl(_) => TransformKind::Jl,
            Transform::WeakSinnamon(_) => TransformKind::WeakSinnamon,
            Transform::Sinnamon(_) => TransformKind::Sinnamon,
        }
    }

    pub fn input_dim(&self) -> u32 {
        match self {
            Transform::Jl(t) => t.input_dim(),
            Transform::WeakSinnamon(t) => t.input_dim(),
            Transform::Sinnamon(t) => t.input_dim(),
        }
    }

    /// Width of the sketch space.
    pub fn width(&self) -> u32 {
        match self {
            Transform::Jl(t) => t.sketch_dim(),
            Transform::WeakSinnamon(t) => t.width(),
            Transform::Sinnamon(t) => t.width(),
        }
    }

    pub fn sketch_doc(&self, u: &SparseVector) -> Result<Sketch> {
        match self {
            Transform::Jl(t) => Ok(Sketch::Dense(t.sketch(u)?)),
            Transform::WeakSinnamon(t) => Ok(Sketch::BoundPair(t.sketch_doc(u)?)),
            Transform::Sinnamon(t) => Ok(Sketch::BoundPair(t.sketch_doc(u)?)),
        }
    }

    pub fn embed_doc(&self, u: &SparseVector) -> Result<Embedding> {
        match self {
            Transform::Jl(t) => Ok(Embedding::Dense(t.sketch(u)?)),
            Transform::WeakSinnamon(t) => Ok(Embedding::Sparse(t.sketch_doc(u)?.to_embedding())),
            Transform::Sinnamon(_) => Err(Error::invalid(
                "Sinnamon sketches have no linear inner product; use jl or ws for indexing",
            )),
        }
    }

    pub fn embed_query(&self, q: &SparseVector) -> Result<Embedding> {
        match self {
            Transform::Jl(t) => Ok(Embedding::Dense(t.sketch(q)?)),
            Transform::WeakSinnamon(t) => Ok(Embedding::Sparse(t.sketch_query(q)?.to_embedding())),
            Transform::Sinnamon(_) => Err(Error::invalid(
                "Sinnamon sketches have no linear inner product; use jl or ws for indexing",
            )),
        }
    }

    pub(crate) fn encode(&self, out: &mut Vec<u8>) {
        let (kind, input_dim, width, seed, h, nn, map): (u8, u32, u32, u64, u32, bool, Option<&CoordinateMap>) =
            match self {
                Transform::Jl(t) => (0, t.input_dim, t.sketch_dim, t.seed, 0, false, None),
                Transform::WeakSinnamon(t) => (
                    1,
                    t.input_dim(),
                    t.half_width,
                    t.mapper.seed().unwrap_or(0),
                    1,
                    t.non_negative,
                    Some(&t.mapper.map),
                ),
                Transform::Sinnamon(t) => (
                    2,
                    t.input_dim(),
                    t.half_width,
                    t.mapper.seed().unwrap_or(0),
                    t.mapper.mappings,
                    t.non_negative,
                    Some(&t.mapper.map),
                ),
            };
        put_u8(out, kind);
        put_u32(out, input_dim);
        put_u32(out, width);
        put_u64(out, seed);
        put_u32(out, h);
        put_u8(out, nn as u8);
        match map {
            Some(CoordinateMap::Explicit(tables)) => {
                put_u8(out, 1);
                for t in tables {
                    put_u32s(out, t);
                }
            }
            _ => put_u8(out, 0),
        }
    }

    pub(crate) fn decode(r: &mut ByteReader<'_>) -> Result<Self> {
        let kind = r.u8()?;
        let input_dim = r.u32()?;
        let width = r.u32()?;
        let seed = r.u64()?;
        let h = r.u32()?;
        let nn = r.u8()? != 0;
        let explicit = r.u8()? != 0;
        let map = if explicit {
            let tables = (0..h)
                .map(|_| r.u32_vec(input_dim as usize))
                .collect::<Result<Vec<_>>>()?;
            CoordinateMap::Explicit(tables)
        } else {
            CoordinateMap::Hashed { seed }
        };
        match kind {
            0 => Ok(Transform::Jl(JlTransform::new(input_dim, width, seed)?)),
            1 => Ok(Transform::WeakSinnamon(WeakSinnamonTransform::with_map(input_dim, width, map, nn)?)),
            2 => Ok(Transform::Sinnamon(SinnamonTransform::with_map(input_dim, width, h, map, nn)?)),
            other => Err(Error::format(format!("unknown transform kind {other}"))),
        }
    }

    /// Serialized transform parameters.
    pub fn header_blob(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.encode(&mut out);
        out
    }

    pub fn from_header_blob(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        let t = Self::decode(&mut r)?;
        if !r.is_empty() {
            return Err(Error::format("trailing bytes in transform header"));
        }
        Ok(t)
    }
}

/// Sketches of every document's sparse part, as an `SVEC` dataset whose
/// dense part is the sketch (bound pairs as `upper ‖ lower`).
pub fn sketch_dataset(transform: &Transform, ds: &VectorDataset) -> Result<VectorDataset> {
    use crate::vector::{DenseVector, HybridVector};
    let mut out = VectorDataset::new(transform.width(), 0);
    for v in ds.iter() {
        let dense = transform.sketch_doc(&v.sparse)?.to_dense();
        out.push(HybridVector::new(DenseVector(dense), SparseVector::empty(0)))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::dot_sparse;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sv(dim: u32, entries: &[(u32, f32)]) -> SparseVector {
        SparseVector::new(dim, entries.iter().copied()).unwrap()
    }

    fn worked_ws() -> WeakSinnamonTransform {
        WeakSinnamonTransform::with_mapping(3, 2, vec![0, 0, 1], false).unwrap()
    }

    fn random_sparse(rng: &mut ChaCha8Rng, dim: u32, nnz: usize, mixed: bool) -> SparseVector {
        let entries = (0..nnz)
            .map(|_| {
                let v: f32 = rng.random_range(0.05..1.0);
                let v = if mixed && rng.random_bool(0.5) { -v } else { v };
                (rng.random_range(0..dim), v)
            })
            .collect();
        let mut entries: Vec<(u32, f32)> = entries;
        entries.sort_by_key(|e| e.0);
        entries.dedup_by_key(|e| e.0);
        SparseVector::new(dim, entries).unwrap()
    }

    #[test]
    fn jl_sign_is_deterministic() {
        assert_eq!(jl_sign(11, 3, 7), jl_sign(11, 3, 7));
    }

    #[test]
    fn jl_sign_is_balanced() {
        let n = 100_000u32;
        let mean = (0..n).map(|j| f64::from(jl_sign(5, 0, j))).sum::<f64>() / f64::from(n);
        assert!(mean.abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn jl_sign_differs_across_seeds() {
        let n = 100_000u32;
        let disagree = (0..n).filter(|&j| jl_sign(1, 0, j) != jl_sign(2, 0, j)).count();
        let frac = disagree as f64 / f64::from(n);
        assert!((frac - 0.5).abs() < 0.02, "disagreement {frac}");
    }

    #[test]
    fn jl_is_linear() {
        let t = JlTransform::new(20, 16, 3).unwrap();
        assert_eq!(t.sketch(&SparseVector::empty(20)).unwrap(), vec![0.0; 16]);
        let u = sv(20, &[(1, 0.5), (7, -1.25), (19, 2.0)]);
        let a = t.sketch_f64(&u).unwrap();
        let b = t.sketch_f64(&u.scaled(2.5)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((2.5 * x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn jl_single_row_with_positive_signs() {
        let seed = (0u64..).find(|&s| jl_sign(s, 0, 0) == 1 && jl_sign(s, 0, 1) == 1).unwrap();
        let t = JlTransform::new(2, 1, seed).unwrap();
        assert_eq!(t.sketch(&sv(2, &[(0, 3.0), (1, 4.0)])).unwrap(), vec![7.0]);
    }

    #[test]
    fn jl_rejects_wrong_dimension() {
        let t = JlTransform::new(10, 4, 0).unwrap();
        assert!(t.sketch(&SparseVector::empty(11)).is_err());
        assert!(JlTransform::new(10, 0, 0).is_err());
    }

    #[test]
    fn ws_doc_worked_example() {
        let s = worked_ws().sketch_doc(&sv(3, &[(0, 1.0), (1, 3.0), (2, 2.0)])).unwrap();
        assert_eq!(s.upper, vec![3.0, 2.0]);
        assert_eq!(s.lower, vec![1.0, 2.0]);
    }

    #[test]
    fn ws_empty_doc_has_empty_cells() {
        let s = worked_ws().sketch_doc(&SparseVector::empty(3)).unwrap();
        assert_eq!(s.occupied_cells(), 0);
        assert!(s.is_empty_cell(0) && s.is_empty_cell(1));
        assert_eq!(s.to_dense(), vec![0.0; 4]);
    }

    #[test]
    fn ws_singleton() {
        let t = WeakSinnamonTransform::new(10, 8, 4, false).unwrap();
        let k = t.map(5) as usize;
        let s = t.sketch_doc(&sv(10, &[(5, 7.0)])).unwrap();
        assert_eq!(s.upper[k], 7.0);
        assert_eq!(s.lower[k], 7.0);
    }

    #[test]
    fn ws_query_worked_example() {
        let t = worked_ws();
        let q = t.sketch_query(&sv(3, &[(0, 1.0), (2, -1.0)])).unwrap();
        assert_eq!(q.upper, vec![(0, 1.0)]);
        assert_eq!(q.lower, vec![(1, -1.0)]);
        let pos = t.sketch_query(&sv(3, &[(0, 1.0), (1, 2.0)])).unwrap();
        assert!(pos.lower.is_empty());
        assert_eq!(pos.upper, vec![(0, 3.0)]);
    }

    #[test]
    fn ws_inner_worked_example() {
        let t = worked_ws();
        let u = sv(3, &[(0, 1.0), (1, 3.0), (2, 2.0)]);
        let q = sv(3, &[(0, 1.0), (2, -1.0)]);
        let est = ws_inner(&t.sketch_query(&q).unwrap(), &t.sketch_doc(&u).unwrap()).unwrap();
        assert_eq!(est, 1.0);
        assert_eq!(dot_sparse(&q, &u).unwrap(), -1.0);
        let zero = t.sketch_query(&SparseVector::empty(3)).unwrap();
        assert_eq!(ws_inner(&zero, &t.sketch_doc(&u).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn ws_is_exact_without_collisions() {
        let mapping: Vec<u32> = (0..8).collect();
        for nn in [false, true] {
            let t = WeakSinnamonTransform::with_mapping(8, 8, mapping.clone(), nn).unwrap();
            let u = sv(8, &[(1, 0.5), (3, 2.0), (6, 1.5)]);
            let q = sv(8, &[(1, 2.0), (2, 1.0), (6, 0.25)]);
            let est = ws_inner(&t.sketch_query(&q).unwrap(), &t.sketch_doc(&u).unwrap()).unwrap();
            assert_eq!(est, dot_sparse(&q, &u).unwrap());
        }
    }

    #[test]
    fn ws_non_negative_mode_uses_full_width() {
        let t = WeakSinnamonTransform::new(100, 16, 1, true).unwrap();
        assert_eq!(t.upper_width(), 32);
        assert_eq!(t.lower_width(), 0);
        assert_eq!(t.width(), 32);
        assert!(t.sketch_doc(&sv(100, &[(3, -1.0)])).is_err());
    }

    #[test]
    fn ws_upper_bound_holds_for_mixed_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let t = WeakSinnamonTransform::new(200, 16, 9, false).unwrap();
        for _ in 0..2000 {
            let u = random_sparse(&mut rng, 200, 30, true);
            let q = random_sparse(&mut rng, 200, 10, true);
            let est = ws_inner(&t.sketch_query(&q).unwrap(), &t.sketch_doc(&u).unwrap()).unwrap();
            assert!(est >= dot_sparse(&q, &u).unwrap() - 1e-9);
        }
    }

    #[test]
    fn sinnamon_single_mapping_matches_ws() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ws = WeakSinnamonTransform::new(300, 24, 8, false).unwrap();
        let sn = SinnamonTransform::new(300, 24, 1, 8, false).unwrap();
        for _ in 0..100 {
            let u = random_sparse(&mut rng, 300, 40, true);
            let q = random_sparse(&mut rng, 300, 12, true);
            let a = ws_inner(&ws.sketch_query(&q).unwrap(), &ws.sketch_doc(&u).unwrap()).unwrap();
            let b = sn.inner(&q, &sn.sketch_doc(&u).unwrap(), false).unwrap();
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn sinnamon_indicator_zeroes_absent_coordinates() {
        let t = SinnamonTransform::new(50, 4, 2, 1, false).unwrap();
        let u = sv(50, &[(1, 5.0), (2, 3.0), (9, 4.0)]);
        let doc = t.sketch_doc(&u).unwrap();
        assert_eq!(doc.nonzero_indicator(), Some(&[1, 2, 9][..]));
        let absent = sv(50, &[(30, 1.0), (31, -2.0)]);
        assert_eq!(t.inner(&absent, &doc, true).unwrap(), 0.0);
    }

    #[test]
    fn sinnamon_more_mappings_tighten_on_non_negative_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h1 = SinnamonTransform::new(500, 64, 1, 2, true).unwrap();
        let h2 = SinnamonTransform::new(500, 64, 2, 2, true).unwrap();
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..100 {
            let u = random_sparse(&mut rng, 500, 30, false);
            let q = random_sparse(&mut rng, 500, 10, false);
            let e1 = h1.inner(&q, &h1.sketch_doc(&u).unwrap(), true).unwrap();
            let e2 = h2.inner(&q, &h2.sketch_doc(&u).unwrap(), true).unwrap();
            let exact = dot_sparse(&q, &u).unwrap();
            assert!(e1 >= exact - 1e-9 && e2 >= exact - 1e-9);
            s1 += e1;
            s2 += e2;
        }
        assert!(s2 <= s1, "h=2 total {s2} exceeds h=1 total {s1}");
    }

    #[test]
    fn transform_blob_round_trip() {
        for kind in [TransformKind::Jl, TransformKind::WeakSinnamon, TransformKind::Sinnamon] {
            let t = Transform::build(kind, 1000, 64, 42, 3, true).unwrap();
            let back = Transform::from_header_blob(&t.header_blob()).unwrap();
            assert_eq!(back, t);
        }
        assert!(Transform::from_header_blob(&[1, 2, 3]).is_err());
    }

    #[test]
    fn indexing_rejects_sinnamon() {
        let t = Transform::build(TransformKind::Sinnamon, 10, 8, 0, 2, false).unwrap();
        assert!(t.embed_doc(&SparseVector::empty(10)).is_err());
        assert!(t.embed_query(&SparseVector::empty(10)).is_err());
        assert!(Transform::build(TransformKind::WeakSinnamon, 10, 7, 0, 1, false).is_err());
    }

    #[test]
    fn embeddings_preserve_the_estimate() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = Transform::build(TransformKind::WeakSinnamon, 400, 64, 5, 1, false).unwrap();
        let Transform::WeakSinnamon(ws) = &t else { unreachable!() };
        for _ in 0..50 {
            let u = random_sparse(&mut rng, 400, 25, true);
            let q = random_sparse(&mut rng, 400, 8, true);
            let direct = ws_inner(&ws.sketch_query(&q).unwrap(), &ws.sketch_doc(&u).unwrap()).unwrap();
            let via = t.embed_query(&q).unwrap().dot(&t.embed_doc(&u).unwrap());
            assert!((direct - via).abs() < 1e-5 * (1.0 + direct.abs()));
        }
    }

    proptest! {
        #[test]
        fn ws_never_underestimates(
            u in proptest::collection::btree_map(0u32..64, -4.0f32..4.0, 0..20),
            q in proptest::collection::btree_map(0u32..64, -4.0f32..4.0, 0..12),
            seed in any::<u64>(),
            half in 1u32..12,
        ) {
            let u = SparseVector::new(64, u).unwrap();
            let q = SparseVector::new(64, q).unwrap();
            let t = WeakSinnamonTransform::new(64, half, seed, false).unwrap();
            let est = ws_inner(&t.sketch_query(&q).unwrap(), &t.sketch_doc(&u).unwrap()).unwrap();
            prop_assert!(est >= dot_sparse(&q, &u).unwrap() - 1e-9);
        }

        #[test]
        fn sketching_is_deterministic(
            u in proptest::collection::btree_map(0u32..128, -4.0f32..4.0, 0..20),
            seed in any::<u64>(),
        ) {
            let u = SparseVector::new(128, u).unwrap();
            let a = Transform::build(TransformKind::Jl, 128, 32, seed, 1, false).unwrap();
            let b = Transform::build(TransformKind::Jl, 128, 32, seed, 1, false).unwrap();
            prop_assert_eq!(a.embed_doc(&u).unwrap(), b.embed_doc(&u).unwrap());
            let w = Transform::build(TransformKind::WeakSinnamon, 128, 32, seed, 1, false).unwrap();
            prop_assert_eq!(w.embed_doc(&u).unwrap(), w.embed_doc(&u).unwrap());
        }
    }
}
