#ifndef SPARSE_IVF_H
#define SPARSE_IVF_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SivfStatus {
  SIVF_STATUS_OK = 0,
  SIVF_STATUS_INVALID_ARGUMENT = 1,
  SIVF_STATUS_DIMENSION_MISMATCH = 2,
  SIVF_STATUS_PARSE_ERROR = 3,
  SIVF_STATUS_FORMAT_ERROR = 4,
  SIVF_STATUS_IO_ERROR = 5,
  SIVF_STATUS_NULL_POINTER = 6,
  SIVF_STATUS_PANIC = 7,
} SivfStatus;

typedef enum SivfTransform {
  SIVF_TRANSFORM_JL = 0,
  SIVF_TRANSFORM_WEAK_SINNAMON = 1,
} SivfTransform;

typedef struct SivfDataset SivfDataset;

typedef struct SivfIndex SivfIndex;

typedef struct SivfInverted SivfInverted;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *sivf_last_error_message(void);

/**
 * Reads an SVEC file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SivfStatus sivf_dataset_read(const char *path, struct SivfDataset **out);

/**
 * # Safety
 * `ds` must come from `sivf_dataset_read` and not be freed twice.
 */
void sivf_dataset_free(struct SivfDataset *ds);

/**
 * Number of vectors, 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
uintptr_t sivf_dataset_count(const struct SivfDataset *ds);

/**
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
uint32_t sivf_dataset_sparse_dim(const struct SivfDataset *ds);

/**
 * Builds a sparse IVF index over `ds` with spherical KMeans. `partitions`
 * of 0 selects the default count. The index keeps its own reference to the
 * dataset, so `ds` may be freed afterwards.
 *
 * # Safety
 * `ds` must be a live dataset handle and `out` a valid pointer.
 */
enum SivfStatus sivf_index_build(const struct SivfDataset *ds,
                                 enum SivfTransform transform,
                                 uint32_t sketch_dim,
                                 uint64_t seed,
                                 uintptr_t partitions,
                                 struct SivfIndex **out);

/**
 * Reads a SIVF file; a referenced dataset resolves relative to the file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SivfStatus sivf_index_read(const char *path, struct SivfIndex **out);

/**
 * Writes the index with its dataset embedded.
 *
 * # Safety
 * `index` must be a live index handle and `path` a NUL-terminated string.
 */
enum SivfStatus sivf_index_write(const struct SivfIndex *index, const char *path);

/**
 * # Safety
 * `index` must come from this library and not be freed twice.
 */
void sivf_index_free(struct SivfIndex *index);

/**
 * # Safety
 * `index` must be null or a live index handle.
 */
uintptr_t sivf_index_num_partitions(const struct SivfIndex *index);

/**
 * Approximate top-`k` for a sparse query, scanning the best partitions
 * until `ell` documents are covered. Writes at most `capacity` results,
 * best first, and their number to `out_len`.
 *
 * # Safety
 * `indices` and `values` must hold `nnz` elements; `out_ids` and
 * `out_scores` must hold `capacity` elements.
 */
enum SivfStatus sivf_index_search_sparse(const struct SivfIndex *index,
                                         const uint32_t *indices,
                                         const float *values,
                                         uintptr_t nnz,
                                         uintptr_t k,
                                         uintptr_t ell,
                                         uint32_t *out_ids,
                                         double *out_scores,
                                         uintptr_t capacity,
                                         uintptr_t *out_len);

/**
 * Builds the partition-organized inverted index for `index`.
 *
 * # Safety
 * `index` must be a live index handle and `out` a valid pointer.
 */
enum SivfStatus sivf_inverted_build(const struct SivfIndex *index, struct SivfInverted **out);

/**
 * # Safety
 * `inv` must come from this library and not be freed twice.
 */
void sivf_inverted_free(struct SivfInverted *inv);

/**
 * As `sivf_index_search_sparse`, scoring the selected partitions through
 * `inv`, which must have been built from `index`. Only documents sharing a
 * coordinate with the query are returned.
 *
 * # Safety
 * As `sivf_index_search_sparse`; `inv` must be a live handle.
 */
enum SivfStatus sivf_inverted_search_sparse(const struct SivfIndex *index,
                                            const struct SivfInverted *inv,
                                            const uint32_t *indices,
                                            const float *values,
                                            uintptr_t nnz,
                                            uintptr_t k,
                                            uintptr_t ell,
                                            uint32_t *out_ids,
                                            double *out_scores,
                                            uintptr_t capacity,
                                            uintptr_t *out_len);

/**
 * Exact inner product of two sparse vectors of dimension `dim`, whose
 * indices must be strictly increasing.
 *
 * # Safety
 * Each index/value pair of arrays must hold its stated number of elements.
 */
enum SivfStatus sivf_dot_sparse(uint32_t dim,
                                const uint32_t *a_indices,
                                const float *a_values,
                                uintptr_t a_nnz,
                                const uint32_t *b_indices,
                                const float *b_values,
                                uintptr_t b_nnz,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPARSE_IVF_H */
