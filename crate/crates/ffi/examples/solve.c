/* Build: cargo build --release -p blockamc-ffi
 *        cc crates/ffi/examples/solve.c -Icrates/ffi/include \
 *           -Ltarget/release -lblockamc_ffi -o solve
 * Run:   LD_LIBRARY_PATH=target/release ./solve
 */
#include <stdio.h>
#include <stdlib.h>

#include "blockamc.h"

int main(void) {
    const size_t n = 64;
    BamcMatrix *a = NULL;
    BamcReport *report = NULL;
    double *b = malloc(n * sizeof *b);

    if (bamc_matrix_generate(BAMC_KIND_WISHART, n, 1, &a) != BAMC_STATUS_OK ||
        bamc_rhs_generate(n, 2, b) != BAMC_STATUS_OK) {
        fprintf(stderr, "setup failed: %s\n", bamc_last_error());
        return 1;
    }
    for (uint32_t depth = 0; depth <= 2; depth++) {
        BamcSolveOptions opts;
        bamc_solve_options_default(&opts);
        opts.depth = depth;
        opts.seed = 7;
        if (bamc_solve(a, b, n, &opts, &report) != BAMC_STATUS_OK) {
            fprintf(stderr, "solve failed: %s\n", bamc_last_error());
            return 1;
        }
        printf("depth %u: relative error %.4e\n", depth, bamc_report_relative_error(report));
        bamc_report_free(report);
    }
    bamc_matrix_free(a);
    free(b);
    return 0;
}
