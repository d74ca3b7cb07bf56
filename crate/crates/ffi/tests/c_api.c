#include <stdio.h>
#include <string.h>
#include "forestalg.h"

#define CHECK(x) do { if (!(x)) { fprintf(stderr, "failed: %s (%s)\n", #x, fa_last_error()); return 1; } } while (0)

int main(void) {
    FaAlgebra *a = NULL;
    CHECK(fa_algebra_fixture("boolean", &a) == FA_STATUS_OK);
    CHECK(fa_algebra_size(a) == 4);

    FaTerm *t = NULL;
    CHECK(fa_term_parse("∧(∧+∧)", a, &t) == FA_STATUS_OK);
    bool acc = false;
    CHECK(fa_accepts(a, t, &acc) == FA_STATUS_OK && acc);

    FaTerm *bad = NULL;
    CHECK(fa_term_parse("∧(", a, &bad) == FA_STATUS_PARSE && bad == NULL);
    CHECK(strlen(fa_last_error()) > 0);

    FaTerm *s = NULL, *u = NULL;
    CHECK(fa_term_parse("a+_", NULL, &s) == FA_STATUS_OK);
    CHECK(fa_term_parse("a(_)", NULL, &u) == FA_STATUS_OK);
    bool eq = false;
    CHECK(fa_equiv(s, u, 1, 1, 1, &eq) == FA_STATUS_OK && eq);
    CHECK(fa_equiv(s, u, 2, 1, 1, &eq) == FA_STATUS_OK && !eq);
    CHECK(fa_equiv(s, u, 1, 1, 0, &eq) == FA_STATUS_PARAMS);

    char *txt = fa_term_to_string(u);
    CHECK(txt && strcmp(txt, "a(_)") == 0);
    fa_string_free(txt);

    fa_term_free(s);
    fa_term_free(u);
    fa_term_free(t);
    fa_algebra_free(a);
    puts("ok");
    return 0;
}
