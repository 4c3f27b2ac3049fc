//! C ABI over the engine.
//!
//! Objects are opaque handles created by `sivf_*_read` / `sivf_*_build` and
//! released by the matching `sivf_*_free`. Every fallible function returns a
//! [`SivfStatus`]; on failure `sivf_last_error_message` describes the error
//! for the calling thread. Results are written into caller-owned buffers.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;

use sparse_ivf::hash::keyed_hash;
use sparse_ivf::inverted::{build_partitioned_index, PartitionedInvertedIndex};
use sparse_ivf::ivf::{build_ivf, read_index, write_index, Exhaustive, IvfConfig, IvfIndex};
use sparse_ivf::sketch::{Transform, TransformKind};
use sparse_ivf::{format, Error, SparseVector, TopKResult, VectorDataset};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SivfStatus {
    Ok = 0,
    InvalidArgument = 1,
    DimensionMismatch = 2,
    ParseError = 3,
    FormatError = 4,
    IoError = 5,
    NullPointer = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SivfTransform {
    Jl = 0,
    WeakSinnamon = 1,
}

pub struct SivfDataset(Arc<VectorDataset>);

pub struct SivfIndex(IvfIndex);

pub struct SivfInverted(PartitionedInvertedIndex);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(SivfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidInput(_) => SivfStatus::InvalidArgument,
            Error::DimensionMismatch { .. } => SivfStatus::DimensionMismatch,
            Error::ParseVector { .. } => SivfStatus::ParseError,
            Error::Format(_) => SivfStatus::FormatError,
            Error::Io(_) => SivfStatus::IoError,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SivfStatus::NullPointer, format!("{what} is null"))
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SivfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SivfStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SivfStatus::Panic
        }
    }
}

unsafe fn path_arg(path: *const c_char) -> Result<PathBuf, Failure> {
    if path.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(path)
        .to_str()
        .map_err(|_| Failure(SivfStatus::InvalidArgument, "path is not valid UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

unsafe fn out_arg<'a, T>(out: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    out.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice_arg<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn sparse_arg(dim: u32, indices: *const u32, values: *const f32, nnz: usize) -> Result<SparseVector, Failure> {
    let idx = slice_arg(indices, nnz, "indices")?;
    let val = slice_arg(values, nnz, "values")?;
    Ok(SparseVector::new(dim, idx.iter().copied().zip(val.iter().copied()))?)
}

unsafe fn write_results(
    top: &TopKResult,
    out_ids: *mut u32,
    out_scores: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> Result<(), Failure> {
    let len = out_arg(out_len, "out_len")?;
    let n = top.len().min(capacity);
    if n > 0 && (out_ids.is_null() || out_scores.is_null()) {
        return Err(null("result buffer"));
    }
    for (j, d) in top.iter().take(n).enumerate() {
        *out_ids.add(j) = d.id;
        *out_scores.add(j) = d.score;
    }
    *len = n;
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn sivf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Reads an SVEC file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sivf_dataset_read(path: *const c_char, out: *mut *mut SivfDataset) -> SivfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let ds = format::read_dataset(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(SivfDataset(Arc::new(ds))));
        Ok(())
    })
}

/// # Safety
/// `ds` must come from `sivf_dataset_read` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sivf_dataset_free(ds: *mut SivfDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Number of vectors, 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn sivf_dataset_count(ds: *const SivfDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn sivf_dataset_sparse_dim(ds: *const SivfDataset) -> u32 {
    ds.as_ref().map_or(0, |d| d.0.sparse_dim())
}

/// Builds a sparse IVF index over `ds` with spherical KMeans. `partitions`
/// of 0 selects the default count. The index keeps its own reference to the
/// dataset, so `ds` may be freed afterwards.
///
/// # Safety
/// `ds` must be a live dataset handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sivf_index_build(
    ds: *const SivfDataset,
    transform: SivfTransform,
    sketch_dim: u32,
    seed: u64,
    partitions: usize,
    out: *mut *mut SivfIndex,
) -> SivfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        let kind = match transform {
            SivfTransform::Jl => TransformKind::Jl,
            SivfTransform::WeakSinnamon => TransformKind::WeakSinnamon,
        };
        let non_negative = kind == TransformKind::WeakSinnamon && !ds.0.has_negative_sparse();
        let t = Transform::build(kind, ds.0.sparse_dim(), sketch_dim, seed, 1, non_negative)?;
        let mut config = IvfConfig { partitions: (partitions > 0).then_some(partitions), ..Default::default() };
        config.kmeans.seed = keyed_hash(seed, 3, 0);
        let index = build_ivf(ds.0.clone(), t, &config)?;
        *out = Box::into_raw(Box::new(SivfIndex(index)));
        Ok(())
    })
}

/// Reads a SIVF file; a referenced dataset resolves relative to the file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sivf_index_read(path: *const c_char, out: *mut *mut SivfIndex) -> SivfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let index = read_index(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(SivfIndex(index)));
        Ok(())
    })
}

/// Writes the index with its dataset embedded.
///
/// # Safety
/// `index` must be a live index handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sivf_index_write(index: *const SivfIndex, path: *const c_char) -> SivfStatus {
    guard(|| {
        let index = index.as_ref().ok_or_else(|| null("index"))?;
        write_index(&index.0, path_arg(path)?)?;
        Ok(())
    })
}

/// # Safety
/// `index` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sivf_index_free(index: *mut SivfIndex) {
    if !index.is_null() {
        drop(Box::from_raw(index));
    }
}

/// # Safety
/// `index` must be null or a live index handle.
#[no_mangle]
pub unsafe extern "C" fn sivf_index_num_partitions(index: *const SivfIndex) -> usize {
    index.as_ref().map_or(0, |i| i.0.num_partitions())
}

/// Approximate top-`k` for a sparse query, scanning the best partitions
/// until `ell` documents are covered. Writes at most `capacity` results,
/// best first, and their number to `out_len`.
///
/// # Safety
/// `indices` and `values` must hold `nnz` elements; `out_ids` and
/// `out_scores` must hold `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn sivf_index_search_sparse(
    index: *const SivfIndex,
    indices: *const u32,
    values: *const f32,
    nnz: usize,
    k: usize,
    ell: usize,
    out_ids: *mut u32,
    out_scores: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> SivfStatus {
    guard(|| {
        let index = index.as_ref().ok_or_else(|| null("index"))?;
        let q = sparse_arg(index.0.dataset().sparse_dim(), indices, values, nnz)?;
        let r = index.0.retrieve(&q, k, ell, &Exhaustive)?;
        write_results(&r.top, out_ids, out_scores, capacity, out_len)
    })
}

/// Builds the partition-organized inverted index for `index`.
///
/// # Safety
/// `index` must be a live index handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sivf_inverted_build(index: *const SivfIndex, out: *mut *mut SivfInverted) -> SivfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let index = index.as_ref().ok_or_else(|| null("index"))?;
        let inv = build_partitioned_index(index.0.dataset(), index.0.partitions(), true)?;
        *out = Box::into_raw(Box::new(SivfInverted(inv)));
        Ok(())
    })
}

/// # Safety
/// `inv` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sivf_inverted_free(inv: *mut SivfInverted) {
    if !inv.is_null() {
        drop(Box::from_raw(inv));
    }
}

/// As `sivf_index_search_sparse`, scoring the selected partitions through
/// `inv`, which must have been built from `index`. Only documents sharing a
/// coordinate with the query are returned.
///
/// # Safety
/// As `sivf_index_search_sparse`; `inv` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sivf_inverted_search_sparse(
    index: *const SivfIndex,
    inv: *const SivfInverted,
    indices: *const u32,
    values: *const f32,
    nnz: usize,
    k: usize,
    ell: usize,
    out_ids: *mut u32,
    out_scores: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> SivfStatus {
    guard(|| {
        let index = index.as_ref().ok_or_else(|| null("index"))?;
        let inv = inv.as_ref().ok_or_else(|| null("inverted index"))?;
        if inv.0.doc_count() as usize != index.0.len() || inv.0.num_partitions() as usize != index.0.num_partitions() {
            return Err(Failure(SivfStatus::InvalidArgument, "inverted index does not match the IVF index".into()));
        }
        let q = sparse_arg(index.0.dataset().sparse_dim(), indices, values, nnz)?;
        let sel = index.0.select_partitions(&q, ell)?;
        let r = inv.0.query_partitioned(&q, &sel, k);
        write_results(&r.top, out_ids, out_scores, capacity, out_len)
    })
}

/// Exact inner product of two sparse vectors of dimension `dim`, whose
/// indices must be strictly increasing.
///
/// # Safety
/// Each index/value pair of arrays must hold its stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn sivf_dot_sparse(
    dim: u32,
    a_indices: *const u32,
    a_values: *const f32,
    a_nnz: usize,
    b_indices: *const u32,
    b_values: *const f32,
    b_nnz: usize,
    out: *mut f64,
) -> SivfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let a = sparse_arg(dim, a_indices, a_values, a_nnz)?;
        let b = sparse_arg(dim, b_indices, b_values, b_nnz)?;
        *out = sparse_ivf::dot_sparse(&a, &b)?;
        Ok(())
    })
}
