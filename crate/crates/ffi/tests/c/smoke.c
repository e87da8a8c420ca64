#include <stdio.h>
#include <string.h>

#include "algeff.h"

static int expect(const char *got, const char *want) {
  if (got == NULL || strcmp(got, want) != 0) {
    fprintf(stderr, "expected \"%s\", got \"%s\"\n", want, got ? got : "(null)");
    return 1;
  }
  return 0;
}

int main(void) {
  int failures = 0;
  AlgeffTheory *t = NULL;
  char *out = NULL;

  if (algeff_theory_new("single-state(fin 10)", &t) != ALGEFF_STATUS_OK) return 1;
  if (algeff_run(t, "do x <- get!() in do _ <- put!(x+1) in return x", "state", "5", &out) !=
      ALGEFF_STATUS_OK)
    failures++;
  failures += expect(out, "5 @ 6");
  algeff_string_free(out);

  if (algeff_typecheck(t, "put!(true)", &out) != ALGEFF_STATUS_FAILURE) failures++;
  failures += expect(algeff_last_error(), "type error at 1:6: expected int(10), found bool");
  algeff_string_free(out);
  algeff_theory_free(t);

  if (algeff_theory_new("single-state(fin 10) + exception", &t) != ALGEFF_STATUS_OK) return 1;
  if (algeff_run(t, "do x <- get!() in do _ <- abort!() in return x", "state", "5", &out) !=
      ALGEFF_STATUS_STUCK)
    failures++;
  failures += expect(out, "unhandled toplevel operation: abort");
  algeff_string_free(out);
  algeff_theory_free(t);

  if (algeff_theory_new(NULL, &t) != ALGEFF_STATUS_NULL_ARGUMENT) failures++;

  printf("%d failures\n", failures);
  return failures != 0;
}
