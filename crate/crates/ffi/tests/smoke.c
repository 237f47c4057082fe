#include <math.h>
#include <stdio.h>
#include "ipl.h"

int main(void) {
    size_t edges[] = {0, 1, 1, 2};
    int8_t signs[] = {1, -1};
    double me_rows[] = {2, 1, 1, 2};
    IplGraph *g = NULL;
    IplMatrix *me = NULL;
    IplSpectrum *s = NULL;
    double ev[3];
    if (ipl_graph_new(3, edges, 2, signs, &g) != IPL_STATUS_OK) return 1;
    if (ipl_matrix_new(me_rows, 2, &me) != IPL_STATUS_OK) return 2;
    if (ipl_graph_laplacian(g, NULL, me, &s) != IPL_STATUS_OK) return 3;
    if (ipl_spectrum_eigenvalues(s, ev, 3) != IPL_STATUS_OK) return 4;
    printf("%.0f %.0f %.0f\n", fabs(ev[0]), ev[1], ev[2]);
    ipl_spectrum_free(s);
    ipl_matrix_free(me);
    ipl_graph_free(g);
    return 0;
}
