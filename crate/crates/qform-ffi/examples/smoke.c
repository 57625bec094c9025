#include <stdio.h>
#include "qform.h"

int main(void) {
    QfSpace *space = NULL;
    if (qf_space_from_catalog("f3_plane", &space) != QF_OK) {
        fprintf(stderr, "%s\n", qf_last_error_message());
        return 1;
    }
    char *report = NULL;
    const char *req = "{\"q\": [[1,0],[0,0]], \"s\": [[0,0],[0,1]], \"iso\": [[0,0],[1,0]]}";
    QfStatus st = qf_extend_json(space, req, &report);
    if (st != QF_OK) {
        fprintf(stderr, "status %d: %s\n", st, qf_last_error_message());
        qf_space_free(space);
        return 1;
    }
    printf("%s\n", report);
    qf_string_free(report);
    qf_space_free(space);
    return 0;
}
