#include <math.h>
#include <stdio.h>
#include <string.h>

#include "povm_learn.h"

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            char msg[256];                                           \
            povm_last_error(msg, sizeof msg);                        \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__,  \
                    #cond, msg);                                     \
            return 1;                                                \
        }                                                            \
    } while (0)

int main(int argc, char **argv) {
    PovmBlochVec z = {0.0, 0.0, 1.0};
    PovmBlochVec mz = {0.0, 0.0, -1.0};
    PovmHelstrom h;
    CHECK(povm_helstrom(z, mz, &h) == POVM_STATUS_OK);
    CHECK(h.success == 1.0 && h.p0_axis.z == 1.0);
    CHECK(povm_helstrom(z, z, &h) == POVM_STATUS_DEGENERATE);

    double p;
    CHECK(povm_success_prob(0.6, M_PI / 2, sqrt(0.52), &p) == POVM_STATUS_OK);
    CHECK(fabs(p - (0.5 + 0.24 / sqrt(0.52))) < 1e-12);
    CHECK(povm_cos_theta(0.5, 1.5, &p) == POVM_STATUS_INVALID_PRIORS);

    PovmBlochVec n0, n1;
    PovmBlochVec n = {0.6, 0.0, 0.8};
    CHECK(povm_decompose(n, 0.0, 0.3, POVM_CASE_B, &n0, &n1) == POVM_STATUS_OK);
    CHECK(fabs(n0.x - 0.6) < 1e-15 && fabs(n1.z - 0.8) < 1e-15);
    CHECK(povm_decompose(n, 0.0, 0.3, 7, &n0, &n1) == POVM_STATUS_INVALID_ARGUMENT);

    PovmExperiment *exp = NULL;
    CHECK(povm_experiment_new("scenario = unequal-prior-xz\ntrials = 4\nseed = 3\n", false, &exp)
          == POVM_STATUS_OK);
    size_t rows;
    CHECK(povm_experiment_row_count(exp, &rows) == POVM_STATUS_NOT_RUN);
    CHECK(povm_experiment_run(exp) == POVM_STATUS_OK);
    CHECK(povm_experiment_row_count(exp, &rows) == POVM_STATUS_OK && rows == 4);
    PovmTrialRow row;
    CHECK(povm_experiment_get_row(exp, 3, &row) == POVM_STATUS_OK);
    CHECK(row.trial == 3 && row.status == POVM_STATUS_OK && row.has_axis);
    CHECK(row.case_tag == POVM_CASE_A || row.case_tag == POVM_CASE_B);
    if (argc > 1) {
        CHECK(povm_experiment_write(exp, argv[1], POVM_FORMAT_CSV) == POVM_STATUS_OK);
    }
    povm_experiment_free(exp);

    CHECK(povm_experiment_new("eta0 = 0.5, 0.6", false, &exp) == POVM_STATUS_CONFIG);
    char msg[8];
    size_t len = povm_last_error(msg, sizeof msg);
    CHECK(len > 7 && strlen(msg) == 7);
    printf("ok %s\n", povm_version());
    return 0;
}
