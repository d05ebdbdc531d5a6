#include <math.h>
#include <stdio.h>
#include "stochgame.h"

int main(int argc, char **argv) {
    if (argc < 2) return 2;
    SgGame *g = NULL;
    if (sg_game_load(argv[1], &g) != SG_STATUS_OK) return 3;
    SgInformed *s = NULL;
    SgUninformed *u = NULL;
    if (sg_solve_informed(g, &s) != SG_STATUS_OK) return 4;
    if (sg_solve_uninformed(g, &u) != SG_STATUS_OK) return 5;
    double v = 0, w = 0;
    sg_informed_value(s, &v);
    sg_uninformed_value(u, &w);
    SgSimReport rep;
    if (sg_simulate(g, s, u, 200, 1, &rep) != SG_STATUS_OK) return 6;
    printf("%.6f %.6f %llu\n", v, w, (unsigned long long)rep.runs);

    SgGame *bad = NULL;
    SgStatus st = sg_game_from_json("[]", &bad);
    char msg[128];
    sg_last_error_message(msg, sizeof msg);
    printf("%d %s\n", (int)st, msg);

    sg_informed_free(s);
    sg_uninformed_free(u);
    sg_game_free(g);
    return fabs(v - w) < 1e-9 ? 0 : 7;
}
