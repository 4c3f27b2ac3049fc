//! The `SVEC` dataset container.
//!
//! ```text
//! "SVEC" | version u32 = 1 | count u64 | dense_dim u32 | sparse_dim u32
//! per vector: dense_dim x f32 | nnz u32 | nnz x u32 indices | nnz x f32 values
//! ```
//! All integers and floats little-endian. Indices must be strictly increasing
//! and below `sparse_dim`.

use std::fs;
use std::path::Path;

use crate::codec::{put_f32s, put_u32, put_u32s, put_u64, ByteReader};
use crate::error::{Error, Result};
use crate::vector::{DenseVector, HybridVector, SparseVector, VectorDataset};

pub const SVEC_MAGIC: &[u8; 4] = b"SVEC";
pub const SVEC_VERSION: u32 = 1;

pub fn encode_dataset(ds: &VectorDataset) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(SVEC_MAGIC);
    put_u32(&mut out, SVEC_VERSION);
    put_u64(&mut out, ds.len() as u64);
    put_u32(&mut out, ds.dense_dim());
    put_u32(&mut out, ds.sparse_dim());
    for v in ds.iter() {
        put_f32s(&mut out, v.dense.as_slice());
        put_u32(&mut out, crate::codec::len_u32(v.sparse.nnz(), "nnz")?);
        put_u32s(&mut out, v.sparse.indices());
        put_f32s(&mut out, v.sparse.values());
    }
    Ok(out)
}

pub fn decode_dataset(bytes: &[u8]) -> Result<VectorDataset> {
    let mut r = ByteReader::new(bytes);
    r.expect_magic(SVEC_MAGIC)?;
    let version = r.u32()?;
    if version != SVEC_VERSION {
        return Err(Error::format(format!("unsupported SVEC version {version}")));
    }
    let count = r.u64()?;
    let dense_dim = r.u32()?;
    let sparse_dim = r.u32()?;
    let mut ds = VectorDataset::new(dense_dim, sparse_dim);
    for ordinal in 0..count {
        let v = decode_vector(&mut r, dense_dim, sparse_dim)
            .map_err(|e| Error::ParseVector { ordinal, message: e.to_string() })?;
        ds.push(v)?;
    }
    if !r.is_empty() {
        return Err(Error::format(format!("{} trailing bytes after {count} vectors", r.remaining())));
    }
    Ok(ds)
}

fn decode_vector(r: &mut ByteReader<'_>, dense_dim: u32, sparse_dim: u32) -> Result<HybridVector> {
    let dense = r.f32_vec(dense_dim as usize)?;
    let nnz = r.u32()? as usize;
    if nnz > sparse_dim as usize {
        return Err(Error::format(format!("nnz {nnz} exceeds sparse_dim {sparse_dim}")));
    }
    let indices = r.u32_vec(nnz)?;
    let values = r.f32_vec(nnz)?;
    let sparse = SparseVector::new(sparse_dim, indices.into_iter().zip(values))?;
    Ok(HybridVector::new(DenseVector(dense), sparse))
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<VectorDataset> {
    decode_dataset(&fs::read(path)?)
}

pub fn write_dataset(ds: &VectorDataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_dataset(ds)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VectorDataset {
        let mut ds = VectorDataset::new(2, 10);
        for (i, entries) in [vec![(0u32, 1.5f32), (9, -2.0)], vec![], vec![(3, 0.25)]].into_iter().enumerate() {
            let dense = DenseVector(vec![i as f32, -(i as f32) * 0.5]);
            ds.push(HybridVector::new(dense, SparseVector::new(10, entries).unwrap())).unwrap();
        }
        ds
    }

    #[test]
    fn round_trip_is_identity() {
        let ds = sample();
        let bytes = encode_dataset(&ds).unwrap();
        let back = decode_dataset(&bytes).unwrap();
        assert_eq!(back, ds);
        assert_eq!(encode_dataset(&back).unwrap(), bytes);
    }

    #[test]
    fn empty_dataset_is_valid() {
        let ds = VectorDataset::new(0, 100);
        let back = decode_dataset(&encode_dataset(&ds).unwrap()).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.sparse_dim(), 100);
    }

    #[test]
    fn header_layout() {
        let bytes = encode_dataset(&sample()).unwrap();
        assert_eq!(&bytes[0..4], b"SVEC");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[20..24].try_into().unwrap()), 10);
        // header + 3 * (2 dense + nnz word) + 3 entries * (index + value)
        assert_eq!(bytes.len(), 24 + 3 * 12 + 3 * 8);
    }

    fn raw_sparse(entries: &[(u32, f32)]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"SVEC");
        put_u32(&mut out, 1);
        put_u64(&mut out, 2);
        put_u32(&mut out, 0);
        put_u32(&mut out, 4);
        // vector 0 is fine
        put_u32(&mut out, 1);
        put_u32(&mut out, 0);
        crate::codec::put_f32(&mut out, 1.0);
        put_u32(&mut out, entries.len() as u32);
        for (i, _) in entries {
            put_u32(&mut out, *i);
        }
        for (_, v) in entries {
            crate::codec::put_f32(&mut out, *v);
        }
        out
    }

    #[test]
    fn index_equal_to_dim_names_the_vector() {
        let err = decode_dataset(&raw_sparse(&[(4, 1.0)])).unwrap_err();
        assert!(matches!(err, Error::ParseVector { ordinal: 1, .. }), "{err}");
    }

    #[test]
    fn non_increasing_indices_rejected() {
        let err = decode_dataset(&raw_sparse(&[(2, 1.0), (2, 1.0)])).unwrap_err();
        assert!(matches!(err, Error::ParseVector { ordinal: 1, .. }), "{err}");
        let err = decode_dataset(&raw_sparse(&[(3, 1.0), (1, 1.0)])).unwrap_err();
        assert!(matches!(err, Error::ParseVector { ordinal: 1, .. }), "{err}");
    }

    #[test]
    fn truncation_and_magic() {
        let bytes = raw_sparse(&[(1, 1.0)]);
        let err = decode_dataset(&bytes[..bytes.len() - 2]).unwrap_err();
        assert!(matches!(err, Error::ParseVector { ordinal: 1, .. }), "{err}");
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_dataset(&bad).unwrap_err(), Error::Format(_)));
    }

    #[test]
    fn zero_values_are_stripped_on_ingest() {
        let ds = decode_dataset(&raw_sparse(&[(1, 0.0), (2, 3.0)])).unwrap();
        assert_eq!(ds.get(1).sparse.indices(), &[2]);
    }
}
