/* Verifies the hot path allocates nothing: every allocation routine is
 * interposed via the linker's --wrap, and the counter must not move
 * between Init returning and Finished being called, across a parallel
 * burst of Generate calls. */

#include <stdio.h>
#include <stdlib.h>

#include <omp.h>

#include "heartbeat_openmp.h"

extern void *__real_malloc(size_t n);
extern void *__real_calloc(size_t n, size_t sz);
extern void *__real_realloc(void *p, size_t n);
extern void *__real_aligned_alloc(size_t a, size_t n);

static volatile long g_allocations = 0;

void *__wrap_malloc(size_t n) {
    __atomic_add_fetch(&g_allocations, 1, __ATOMIC_RELAXED);
    return __real_malloc(n);
}

void *__wrap_calloc(size_t n, size_t sz) {
    __atomic_add_fetch(&g_allocations, 1, __ATOMIC_RELAXED);
    return __real_calloc(n, sz);
}

void *__wrap_realloc(void *p, size_t n) {
    __atomic_add_fetch(&g_allocations, 1, __ATOMIC_RELAXED);
    return __real_realloc(p, n);
}

void *__wrap_aligned_alloc(size_t a, size_t n) {
    __atomic_add_fetch(&g_allocations, 1, __ATOMIC_RELAXED);
    return __real_aligned_alloc(a, n);
}

int main(int argc, char **argv) {
    const char *dir = argc > 1 ? argv[1] : ".";
    char path[4096];
    snprintf(path, sizeof path, "%s/no_alloc_log.csv", dir);

    int rc = Heartbeat_OpenMP_Init_Path(path);
    if (rc != HB_OK) {
        fprintf(stderr, "init failed: %d\n", rc);
        return 1;
    }
    long before = g_allocations;
    if (before == 0) {
        fprintf(stderr, "wrap not effective: init allocated nothing?\n");
        return 1;
    }

    const int threads = 4;
    const long beats = 100000;
#pragma omp parallel num_threads(threads)
    {
        int tn = omp_get_thread_num();
        for (long i = 0; i < beats; ++i) Heartbeat_OpenMP_Generate(tn, 1, i);
    }

    long during = g_allocations - before;
    rc = Heartbeat_OpenMP_Finished();
    if (rc != HB_OK) {
        fprintf(stderr, "finish failed: %d\n", rc);
        return 1;
    }
    if (during != 0) {
        fprintf(stderr, "hot path allocated %ld times\n", during);
        return 1;
    }
    printf("test_no_alloc: %ld beats, 0 hot-path allocations "
           "(%ld at init)\n", (long)threads * beats, before);
    return 0;
}
