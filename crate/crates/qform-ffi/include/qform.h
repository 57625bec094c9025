#ifndef QFORM_H
#define QFORM_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// A unitary ring (A, σ, u, Λ).
typedef struct QfRing QfRing;

// A quadratic space over a unitary ring.
typedef struct QfSpace QfSpace;

typedef int32_t QfStatus;

#define QF_OK 0

#define QF_NULL_POINTER 1

#define QF_INVALID_UTF8 2

#define QF_PARSE_ERROR 3

// The computation ran and reports a mathematical failure; a report is still returned.
#define QF_MATH_FAILURE 4

#define QF_BOUND_EXCEEDED 5

#define QF_INTERNAL 6

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failing call on this thread, or null. Valid until the next call.
const char *qf_last_error_message(void);

// Frees a string returned by this library.
//
// # Safety
// `s` must come from this library and not be freed twice.
void qf_string_free(char *s);

// Sets the cap on enumerated candidates for oracle computations.
void qf_set_enumeration_bound(uint64_t bound);

// Parses a unitary ring document.
//
// # Safety
// `json` must be a NUL-terminated string and `out` writable.
QfStatus qf_ring_from_json(const char *json, struct QfRing **out);

// Looks up a bundled ring by name.
//
// # Safety
// `name` must be a NUL-terminated string and `out` writable.
QfStatus qf_ring_from_catalog(const char *name, struct QfRing **out);

// # Safety
// `ring` must come from this library and not be freed twice.
void qf_ring_free(struct QfRing *ring);

// Number of elements of the ring, or 0 for a null handle.
//
// # Safety
// `ring` must be null or a live handle.
size_t qf_ring_size(const struct QfRing *ring);

// Parses a space document. A string `ring_ref` refers to `ring` when it is
// non-null, or to a bundled ring as `catalog:<name>`.
//
// # Safety
// `ring` must be null or a live handle; `json` NUL-terminated; `out` writable.
QfStatus qf_space_from_json(const struct QfRing *ring, const char *json, struct QfSpace **out);

// Looks up a bundled space by name.
//
// # Safety
// `name` must be a NUL-terminated string and `out` writable.
QfStatus qf_space_from_catalog(const char *name, struct QfSpace **out);

// # Safety
// `space` must come from this library and not be freed twice.
void qf_space_free(struct QfSpace *space);

// Rank k of the ambient free module A^k, or 0 for a null handle.
//
// # Safety
// `space` must be null or a live handle.
size_t qf_space_rank(const struct QfSpace *space);

// # Safety
// `space` must be a live handle and `out` writable.
QfStatus qf_space_is_unimodular(const struct QfSpace *space, bool *out);

// Axiom check of a ring or space document; writes a JSON report.
//
// # Safety
// `json` must be NUL-terminated and `out` writable.
QfStatus qf_validate_json(const char *json, char **out);

// Extends ψ: Q → S to an isometry. The request is
// `{"q": M, "s": M, "iso": M, "v": M?}` with matrix literals; writes
// `{"phi", "route", "factors"?}`.
//
// # Safety
// `space` must be a live handle, `request` NUL-terminated, `out` writable.
QfStatus qf_extend_json(const struct QfSpace *space, const char *request, char **out);

// Δ_I of the isometry `iso` (a matrix literal), or the reflection subgroup report when `iso` is null.
//
// # Safety
// `space` must be a live handle, `iso` null or NUL-terminated, `out` writable.
QfStatus qf_dickson_json(const struct QfSpace *space,
                         const char *iso,
                         char **out);

// Brute-force verification; `what` is "extension", "index", "dickson", "generation" or "all".
//
// # Safety
// `space` must be a live handle, `what` NUL-terminated, `out` writable.
QfStatus qf_oracle_verify_json(const struct QfSpace *space, const char *what, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QFORM_H */
