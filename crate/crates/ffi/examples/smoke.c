#include <stdio.h>
#include <string.h>

#include "tlswitch.h"

static const char *GRID =
    "{\"width\":4,\"height\":1,\"labels\":[{\"cell\":[3,0],\"prop\":\"A\"}],"
    "\"start\":[0,0],\"intended_probability\":0.9,\"epsilon_agent\":0.1}";

#define CHECK(call)                                                        \
    do {                                                                   \
        TlsStatus st_ = (call);                                            \
        if (st_ != TLS_STATUS_OK) {                                        \
            fprintf(stderr, "%s failed (%d): %s\n", #call, (int)st_,       \
                    tls_last_error_message());                             \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    TlsFsa *fsa = NULL;
    TlsModel *model = NULL;
    TlsAnalysis *analysis = NULL;
    uint64_t tb = 0;
    size_t p0 = 0;
    double lb = 0.0, low = 0.0, up = 0.0;

    CHECK(tls_fsa_from_formula("[H^1 A]^[0,6]", &fsa, &tb));
    CHECK(tls_model_from_json(GRID, &model));
    CHECK(tls_analysis_new(model, fsa, -1.0, 0, &analysis));
    CHECK(tls_analysis_initial_state(analysis, 0, 0, &p0));
    CHECK(tls_analysis_lb(analysis, TLS_BOUND_KIND_RECURSIVE, p0, tb, &lb));
    CHECK(tls_wilson_bounds(10, 0, 2.58, &low, &up));
    if (tls_fsa_from_formula("[H^1 A", &fsa, NULL) != TLS_STATUS_PARSE) {
        return 2;
    }
    printf("time_bound=%llu lb=%.6f wilson_low=%.5f\n", (unsigned long long)tb, lb, low);
    tls_analysis_free(analysis);
    tls_model_free(model);
    tls_fsa_free(fsa);
    return (lb > 0.0 && lb <= 1.0) ? 0 : 3;
}
