#include <math.h>
#include <stdio.h>
#include "morrey_bilinear.h"

int main(void) {
    double ones[64];
    for (int i = 0; i < 64; i++) ones[i] = 1.0;
    MbFunction *f = NULL, *b = NULL;
    if (mb_function_new(1, 6, ones, 64, &f) != MB_STATUS_OK) return 1;
    if (mb_b_alpha(f, f, 0.5, &b) != MB_STATUS_OK) return 2;
    double v[64];
    if (mb_function_values(b, v, 64) != MB_STATUS_OK) return 3;
    double mid = 0.5 * (v[31] + v[32]);
    if (fabs(mid - sqrt(8.0)) > 0.05) return 4;
    mb_function_free(b);
    b = NULL;
    if (mb_function_new(1, 6, ones, 10, &b) != MB_STATUS_INVALID_PARAMETER) return 6;
    char msg[128];
    if (mb_last_error_message(msg, sizeof msg) == 0) return 7;
    printf("%s\n", msg);
    mb_function_free(f);
    return 0;
}
