#ifndef KGE_H
#define KGE_H

/* Generated by cbindgen from kge-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum {
  KGE_STATUS_OK = 0,
  KGE_STATUS_NULL_POINTER = 1,
  KGE_STATUS_INVALID_UTF8 = 2,
  KGE_STATUS_IO_OR_PARSE = 3,
  KGE_STATUS_ID_OUT_OF_RANGE = 4,
  KGE_STATUS_MISMATCH = 5,
  KGE_STATUS_INVALID_ARGUMENT = 6,
  KGE_STATUS_PANIC = 7,
} KgeStatus;

/**
 * Opaque dictionary-encoded triple store.
 */
typedef struct KgeGraph KgeGraph;

/**
 * Opaque trained model checkpoint.
 */
typedef struct KgeModel KgeModel;

/**
 * Ranking metrics produced by `kge_evaluate_ranking`.
 */
typedef struct {
  uintptr_t test_size;
  double mrr;
  double mean_rank;
  double hits_at_1;
  double hits_at_3;
  double hits_at_10;
} KgeRankingMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent error on this thread, or NULL when the last
 * call succeeded. The pointer stays valid until the next failing call on
 * the same thread; do not free it.
 */
const char *kge_last_error_message(void);

/**
 * Open a persisted store directory (entities.tsv / relations.tsv /
 * triples.tsv and optional splits.tsv).
 *
 * # Safety
 * `dir` must be a NUL-terminated string and `out` a valid pointer; the
 * returned handle must be released with [`kge_graph_free`].
 */
KgeStatus kge_graph_open(const char *dir, KgeGraph **out);

/**
 * # Safety
 * `graph` must be a handle from [`kge_graph_open`] (or NULL), not yet freed.
 */
void kge_graph_free(KgeGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle.
 */
uintptr_t kge_graph_num_entities(const KgeGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle.
 */
uintptr_t kge_graph_num_relations(const KgeGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle.
 */
uintptr_t kge_graph_num_triples(const KgeGraph *graph);

/**
 * Membership test over every split. Writes 1 or 0 into `out`.
 *
 * # Safety
 * `graph` must be a live handle and `out` a valid pointer.
 */
KgeStatus kge_graph_contains(const KgeGraph *graph,
                             uintptr_t subject,
                             uintptr_t predicate,
                             uintptr_t object,
                             int32_t *out);

/**
 * Resolve an entity label to its id. Writes the id into `out`.
 *
 * # Safety
 * `graph` must be a live handle, `label` NUL-terminated, `out` valid.
 */
KgeStatus kge_graph_entity_id(const KgeGraph *graph, const char *label, uintptr_t *out);

/**
 * Open a checkpoint directory written by `kge train`.
 *
 * # Safety
 * `dir` must be a NUL-terminated string and `out` a valid pointer; release
 * the handle with [`kge_model_free`].
 */
KgeStatus kge_model_open(const char *dir, KgeModel **out);

/**
 * # Safety
 * `model` must be a handle from [`kge_model_open`] (or NULL), not yet freed.
 */
void kge_model_free(KgeModel *model);

/**
 * # Safety
 * `model` must be a live handle.
 */
uintptr_t kge_model_dimension(const KgeModel *model);

/**
 * Model kind as a static NUL-terminated name (transe, distmult, complex,
 * hole, convkb).
 *
 * # Safety
 * `model` must be a live handle.
 */
const char *kge_model_kind(const KgeModel *model);

/**
 * Check that a checkpoint belongs to a store (dictionary checksums).
 *
 * # Safety
 * Both handles must be live.
 */
KgeStatus kge_model_matches_graph(const KgeModel *model, const KgeGraph *graph);

/**
 * Score one triple; higher is more plausible. Writes the score into `out`.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
KgeStatus kge_model_score(const KgeModel *model,
                          uintptr_t subject,
                          uintptr_t predicate,
                          uintptr_t object,
                          double *out);

/**
 * Evaluate the store's test split under the ranking protocol
 * (`filtered` != 0 removes known positives) and fill `out`.
 *
 * # Safety
 * Both handles must be live and `out` a valid pointer.
 */
KgeStatus kge_evaluate_ranking(const KgeModel *model,
                               const KgeGraph *graph,
                               int32_t filtered,
                               KgeRankingMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KGE_H */
