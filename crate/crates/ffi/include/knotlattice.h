#ifndef KNOTLATTICE_H
#define KNOTLATTICE_H

/* Generated by cbindgen from the knotlattice-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KlStatus {
  KL_STATUS_OK = 0,
  /**
   * Malformed or unsupported input.
   */
  KL_STATUS_INPUT_ERROR = 1,
  /**
   * A computation failed (certificate, size limit, ...).
   */
  KL_STATUS_COMPUTATION_ERROR = 2,
  KL_STATUS_NULL_POINTER = 3,
  /**
   * A Rust panic was caught at the boundary.
   */
  KL_STATUS_INTERNAL = 4,
} KlStatus;

/**
 * Knot complexes for every Spin^c structure of the ambient manifold.
 */
typedef struct KlFamily KlFamily;

/**
 * A plumbing graph.
 */
typedef struct KlGraph KlGraph;

/**
 * A filtered line model of a knot.
 */
typedef struct KlLine KlLine;

/**
 * Exact rational number `num/den` with `den > 0`.
 */
typedef struct KlRational {
  int64_t num;
  int64_t den;
} KlRational;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *kl_last_error(void);

/**
 * Parses a graph in the text or JSON format.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum KlStatus kl_graph_parse(const char *text, struct KlGraph **out);

/**
 * # Safety
 * `g` must come from [`kl_graph_parse`] and not have been freed.
 */
void kl_graph_free(struct KlGraph *g);

/**
 * # Safety
 * `g` must be a live graph handle.
 */
size_t kl_graph_vertex_count(const struct KlGraph *g);

/**
 * Absolute determinant of the intersection form of the weighted vertices,
 * the order of the first homology of the boundary.
 *
 * # Safety
 * `g` must be a live graph handle and `out` a valid pointer.
 */
enum KlStatus kl_graph_determinant(const struct KlGraph *g, int64_t *out);

/**
 * Compares the surgery formula with the directly built filled graph for
 * graph framing `n`. `passed` receives 1 or 0.
 *
 * # Safety
 * `g` must be a live graph handle and `passed` a valid pointer.
 */
enum KlStatus kl_verify_surgery(const struct KlGraph *g, int64_t n, int32_t *passed);

/**
 * Filtered line of the regular fiber of the Brieskorn sphere `Σ(p_1, …, p_len)`.
 *
 * # Safety
 * `p` must point to `len` integers and `out` must be a valid pointer.
 */
enum KlStatus kl_line_brieskorn(const int64_t *p, size_t len, struct KlLine **out);

/**
 * Keeps only the joint local extrema of the line, in place.
 *
 * # Safety
 * `l` must be a live line handle.
 */
enum KlStatus kl_line_simplify(struct KlLine *l);

/**
 * # Safety
 * `l` must be a live line handle.
 */
size_t kl_line_len(const struct KlLine *l);

/**
 * Position and both heights of vertex `i`.
 *
 * # Safety
 * `l` must be a live line handle; the out pointers must be valid.
 */
enum KlStatus kl_line_vertex(const struct KlLine *l,
                             size_t i,
                             int64_t *position,
                             struct KlRational *h1,
                             struct KlRational *h2);

/**
 * # Safety
 * `l` must come from [`kl_line_brieskorn`] and not have been freed.
 */
void kl_line_free(struct KlLine *l);

/**
 * Family of the regular fiber of `Σ(p_1, …, p_len)`.
 *
 * # Safety
 * `p` must point to `len` integers and `out` must be a valid pointer.
 */
enum KlStatus kl_family_brieskorn(const int64_t *p, size_t len, struct KlFamily **out);

/**
 * Connected sum of two knots.
 *
 * # Safety
 * `a` and `b` must be live family handles and `out` a valid pointer.
 */
enum KlStatus kl_family_tensor(const struct KlFamily *a,
                               const struct KlFamily *b,
                               struct KlFamily **out);

/**
 * Surgery with Seifert framing `num/den < 0`; the result describes the dual knot.
 *
 * # Safety
 * `f` must be a live family handle and `out` a valid pointer.
 */
enum KlStatus kl_family_surgery(const struct KlFamily *f,
                                int64_t num,
                                int64_t den,
                                int64_t slack,
                                struct KlFamily **out);

/**
 * Number of Spin^c structures.
 *
 * # Safety
 * `f` must be a live family handle.
 */
size_t kl_family_len(const struct KlFamily *f);

/**
 * d-invariant and top Alexander grading (with its rank) of Spin^c structure `i`.
 *
 * # Safety
 * `f` must be a live family handle; the out pointers must be valid.
 */
enum KlStatus kl_family_invariants(const struct KlFamily *f,
                                   size_t i,
                                   struct KlRational *d,
                                   struct KlRational *top,
                                   size_t *top_rank);

/**
 * # Safety
 * `f` must come from a `kl_family_*` constructor and not have been freed.
 */
void kl_family_free(struct KlFamily *f);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KNOTLATTICE_H */
