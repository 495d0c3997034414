/* Minimal C consumer of the offlang FFI.
 *
 * Build (from the workspace root, after `cargo build --release -p offlang-ffi`):
 *
 *   cc crates/ffi/examples/predict.c \
 *      -Icrates/ffi/include \
 *      -Ltarget/release -lofflang_ffi \
 *      -o predict
 *
 *   ./predict model.json "you are a pathetic clown"
 */
#include <stdio.h>

#include "offlang.h"

int main(int argc, char **argv) {
    if (argc != 3) {
        fprintf(stderr, "usage: %s <model.json> <tweet text>\n", argv[0]);
        return 2;
    }

    OfflangModel *model = NULL;
    OfflangStatus status = offlang_model_load(argv[1], &model);
    if (status != OFFLANG_STATUS_OK) {
        fprintf(stderr, "load failed (%d): %s\n", (int)status, offlang_last_error());
        return 1;
    }

    char label[8];
    double probs[8];
    size_t n_classes = offlang_model_num_classes(model);
    status = offlang_predict_proba(model, argv[2], label, sizeof label, probs, 8);
    if (status == OFFLANG_STATUS_NO_PROBABILITIES) {
        status = offlang_predict(model, argv[2], label, sizeof label);
    }
    if (status != OFFLANG_STATUS_OK) {
        fprintf(stderr, "predict failed (%d): %s\n", (int)status, offlang_last_error());
        offlang_model_free(model);
        return 1;
    }

    printf("label: %s\n", label);
    for (size_t i = 0; i < n_classes; i++) {
        printf("  P(%s) = %.4f\n", offlang_model_class_name(model, i), probs[i]);
    }
    offlang_model_free(model);
    return 0;
}
