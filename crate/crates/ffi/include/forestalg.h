#ifndef FORESTALG_H
#define FORESTALG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum FaStatus {
  FA_STATUS_OK = 0,
  FA_STATUS_NULL_POINTER = 1,
  FA_STATUS_INVALID_UTF8 = 2,
  FA_STATUS_PARSE = 3,
  FA_STATUS_UNKNOWN = 4,
  FA_STATUS_EVAL = 5,
  FA_STATUS_PARAMS = 6,
} FaStatus;

/**
 * An algebra together with its letter assignment.
 */
typedef struct FaAlgebra FaAlgebra;

/**
 * A forest, context, or multicontext.
 */
typedef struct FaTerm FaTerm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread. Valid until the next call.
 */
const char *fa_last_error(void);

/**
 * Loads a built-in fixture by name.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FaStatus fa_algebra_fixture(const char *name, struct FaAlgebra **out);

/**
 * Parses an algebra in the `.fa` text format.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FaStatus fa_algebra_parse(const char *src, struct FaAlgebra **out);

/**
 * # Safety
 * `a` must come from this library and not be used afterwards. Null is ignored.
 */
void fa_algebra_free(struct FaAlgebra *a);

/**
 * Number of horizontal elements, or 0 for a null handle.
 *
 * # Safety
 * `a` must be null or a live handle.
 */
uintptr_t fa_algebra_size(const struct FaAlgebra *a);

/**
 * Name of element `h`, or null when out of range. Free with `fa_string_free`.
 *
 * # Safety
 * `a` must be null or a live handle.
 */
char *fa_element_name(const struct FaAlgebra *a, uintptr_t h);

/**
 * Parses a term. With a non-null `a`, labels are checked against its alphabet.
 *
 * # Safety
 * `src` must be a NUL-terminated string, `a` null or a live handle, `out` valid.
 */
enum FaStatus fa_term_parse(const char *src, const struct FaAlgebra *a, struct FaTerm **out);

/**
 * # Safety
 * `t` must come from this library and not be used afterwards. Null is ignored.
 */
void fa_term_free(struct FaTerm *t);

/**
 * Canonical text of a term, or null for a null handle. Free with `fa_string_free`.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
char *fa_term_to_string(const struct FaTerm *t);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void fa_string_free(char *s);

/**
 * Image of a forest as an element index.
 *
 * # Safety
 * `a` and `t` must be live handles and `out` valid.
 */
enum FaStatus fa_eval(const struct FaAlgebra *a, const struct FaTerm *t, uintptr_t *out);

/**
 * Whether the image of a forest is accepting.
 *
 * # Safety
 * `a` and `t` must be live handles and `out` valid.
 */
enum FaStatus fa_accepts(const struct FaAlgebra *a, const struct FaTerm *t, bool *out);

/**
 * Decides s ≈ⁿ_{τ,π} t.
 *
 * # Safety
 * `s` and `t` must be live handles and `out` valid.
 */
enum FaStatus fa_equiv(const struct FaTerm *s,
                       const struct FaTerm *t,
                       uintptr_t n,
                       uintptr_t tau,
                       uintptr_t pi,
                       bool *out);

/**
 * Checks a circuit and seed family given in the `.fc` and `.fs` formats.
 * `out` is set to whether every condition holds; a violation is not an
 * error, and its description is left in `fa_last_error`.
 *
 * # Safety
 * `a` must be a live handle, the strings NUL-terminated, and `out` valid.
 */
enum FaStatus fa_rc_verify(const struct FaAlgebra *a,
                           const char *circuit,
                           const char *seeds,
                           uintptr_t n,
                           uintptr_t tau,
                           uintptr_t pi,
                           bool *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FORESTALG_H */
