#ifndef ALGEFF_H
#define ALGEFF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by every entry point.
typedef enum AlgeffStatus {
  ALGEFF_STATUS_OK = 0,
  // Type error, violated law, inconclusive check, or evaluation failure.
  ALGEFF_STATUS_FAILURE = 1,
  // The program performed an operation the comodel cannot answer.
  ALGEFF_STATUS_STUCK = 2,
  // Syntax error or unresolvable reference.
  ALGEFF_STATUS_INVALID_INPUT = 3,
  ALGEFF_STATUS_NULL_ARGUMENT = 4,
  ALGEFF_STATUS_INVALID_UTF8 = 5,
  ALGEFF_STATUS_PANIC = 6,
} AlgeffStatus;

// Which kind of definition `algeff_check` validates.
typedef enum AlgeffCheckKind {
  ALGEFF_CHECK_KIND_MODEL = 0,
  ALGEFF_CHECK_KIND_COMODEL = 1,
  ALGEFF_CHECK_KIND_HANDLER = 2,
} AlgeffCheckKind;

// An equational theory.
typedef struct AlgeffTheory AlgeffTheory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Looks up a theory by built-in key (e.g. `single-state(fin 10)`), file
// path, or a sum `a + b`.
//
// # Safety
// `spec` must be a NUL-terminated string and `out` a valid pointer.
enum AlgeffStatus algeff_theory_new(const char *spec, struct AlgeffTheory **out);

// Parses a theory from definition text.
//
// # Safety
// `src` must be a NUL-terminated string and `out` a valid pointer.
enum AlgeffStatus algeff_theory_parse(const char *src, struct AlgeffTheory **out);

// Prints a theory in definition syntax.
//
// # Safety
// `theory` must come from this library and `out` be a valid pointer.
enum AlgeffStatus algeff_theory_describe(const struct AlgeffTheory *theory, char **out);

// Releases a theory. Null is ignored.
//
// # Safety
// `theory` must come from this library and not be used afterwards.
void algeff_theory_free(struct AlgeffTheory *theory);

// Evaluates `program` and runs it against `comodel` (`state`,
// `transcript`, `transcript:<k>` or a file) from `world`. `world` may be
// null for comodels with a default world. On `Stuck`, `out` still holds
// the rendered outcome.
//
// # Safety
// String arguments must be NUL-terminated; `out` must be a valid pointer.
enum AlgeffStatus algeff_run(const struct AlgeffTheory *theory,
                             const char *program,
                             const char *comodel,
                             const char *world,
                             char **out);

// Writes the canonical form of the program's tree.
//
// # Safety
// `program` must be NUL-terminated; `out` must be a valid pointer.
enum AlgeffStatus algeff_normalize(const struct AlgeffTheory *theory,
                                   const char *program,
                                   char **out);

// Writes the program's inferred type.
//
// # Safety
// `program` must be NUL-terminated; `out` must be a valid pointer.
enum AlgeffStatus algeff_typecheck(const struct AlgeffTheory *theory,
                                   const char *program,
                                   char **out);

// Validates a model table, comodel table, or handler against the theory.
// The verdict is written to `out`; a violation returns `Failure`.
// `budget` bounds the congruence search; 0 selects the default.
//
// # Safety
// `src` must be NUL-terminated; `out` must be a valid pointer.
enum AlgeffStatus algeff_check(const struct AlgeffTheory *theory,
                               enum AlgeffCheckKind kind,
                               const char *src,
                               uintptr_t budget,
                               char **out);

// Releases a string returned through an `out` parameter. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void algeff_string_free(char *s);

// The message for the last failed call on this thread, or null. The
// pointer stays valid until the next call into this library.
const char *algeff_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ALGEFF_H */
