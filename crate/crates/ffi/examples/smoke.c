#include <stdio.h>
#include "smoothing_lab.h"
int main(void) {
    SlDatum *d = NULL; SlWeight *w = NULL;
    double c[1] = {0.0}, v[1] = {0.0}, lhs = 0, rhs = 0;
    if (sl_datum_new(1, &d) != SL_STATUS_OK) return 1;
    sl_datum_add_packet(d, 1.0, 0.0, 1.0, c, v);
    sl_weight_psi_eps(1.0, &w);
    sl_morawetz_lhs(d, w, 0.5, &lhs);
    sl_boundary_term(d, w, 0.5, &rhs);
    printf("lhs %.15f rhs %.15f\n", lhs, rhs);
    SlWeight *bad = NULL;
    SlStatus s = sl_weight_psi_eps(-1.0, &bad);
    printf("status %d: %s\n", (int)s, sl_last_error_message());
    sl_weight_free(w); sl_datum_free(d);
    return 0;
}
