#include <math.h>
#include <stdio.h>

#include "spinc.h"

static int expect(int ok, const char *what) {
    if (!ok) {
        fprintf(stderr, "failed: %s\n", what);
    }
    return ok ? 0 : 1;
}

int main(void) {
    int failures = 0;
    SpincMultivector *e1 = NULL;
    SpincMultivector *sq = NULL;
    failures += expect(spinc_multivector_new(2, 1, &e1) == SPINC_STATUS_OK, "new");
    failures += expect(spinc_multivector_blade_count(e1) == 8, "blade count");
    failures += expect(spinc_multivector_set(e1, 1, 1.0, 0.0) == SPINC_STATUS_OK, "set");
    failures += expect(spinc_multivector_product(e1, e1, &sq) == SPINC_STATUS_OK, "product");
    double re = 0.0, im = 0.0;
    spinc_multivector_get(sq, 0, &re, &im);
    failures += expect(re == -1.0 && im == 0.0, "e1 e1 = -1");
    failures += expect(spinc_multivector_set(e1, 99, 1.0, 0.0) == SPINC_STATUS_INVALID_INPUT, "range check");
    char *msg = spinc_last_error_message();
    failures += expect(msg != NULL, "error message");
    spinc_string_free(msg);
    spinc_multivector_free(sq);
    spinc_multivector_free(e1);

    size_t extents[2] = {16, 16};
    SpincRunSummary *summary = NULL;
    failures += expect(spinc_verify_scenario("plane", extents, 2, "none", &summary) == SPINC_STATUS_OK, "plane run");
    failures += expect(spinc_summary_passed(summary), "plane passes");
    double residual = 1.0;
    spinc_summary_value(summary, "max_killing_residual", &residual);
    failures += expect(fabs(residual) <= 1e-12, "plane residual");
    char *json = spinc_summary_json(summary);
    failures += expect(json != NULL, "summary json");
    spinc_string_free(json);
    spinc_summary_free(summary);
    failures += expect(spinc_verify_scenario("klein", extents, 2, NULL, &summary) == SPINC_STATUS_INVALID_INPUT,
                       "unknown scenario");
    return failures;
}
