#include <stdio.h>
#include <string.h>
#include "gfh.h"

static const char *SCENE =
    "weights = [1, 2]\n"
    "[hamiltonian]\n"
    "kind = \"rotation\"\n"
    "angles = [0.3333333333333333, 0.2]\n";

int main(void) {
    GfhScene *scene = NULL;
    GfhRun *run = NULL;
    GfhStatistics stats;
    char *json = NULL;
    double c0 = 0.0, c3 = 0.0;

    if (gfh_scene_parse(SCENE, &scene) != GFH_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", gfh_last_error());
        return 1;
    }
    if (gfh_run(scene, NULL, &run) != GFH_STATUS_OK) {
        fprintf(stderr, "run: %s\n", gfh_last_error());
        return 1;
    }
    if (gfh_run_statistics(run, &stats) != GFH_STATUS_OK || stats.homology_count != 3 || !stats.exact)
        return 2;
    if (gfh_run_spectral_invariant(run, 0, &c0) != GFH_STATUS_OK) return 3;
    if (gfh_run_spectral_invariant(run, 3, &c3) != GFH_STATUS_OK) return 3;
    if (c3 - c0 < 1.0 - 1e-12 || c3 - c0 > 1.0 + 1e-12) return 4;
    if (gfh_run_barcode_json(run, &json) != GFH_STATUS_OK || strstr(json, "barcode") == NULL) return 5;
    gfh_string_free(json);
    if (gfh_scene_parse(NULL, &scene) != GFH_STATUS_NULL_POINTER) return 6;
    gfh_run_free(run);
    gfh_scene_free(scene);
    printf("ok %s\n", gfh_version());
    return 0;
}
