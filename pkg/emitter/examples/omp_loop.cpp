// Instrumented example: every iteration of a parallel loop emits one beat.
//
//   omp_loop [threads] [iterations_per_thread]
//
// With the default static schedule each thread owns an equal chunk, so a
// run with T threads and N iterations/thread yields T sequences of N
// dense beats in the log (HEARTBEAT_LOG or heartbeat_log.csv).

#include <cstdio>
#include <cstdlib>

#include <omp.h>

#include "heartbeat_openmp.h"

int main(int argc, char **argv) {
    int threads = argc > 1 ? std::atoi(argv[1]) : 4;
    long per_thread = argc > 2 ? std::atol(argv[2]) : 1000;
    long total = threads * per_thread;

    int rc = L_Heartbeat_OpenMP_Init();
    if (rc != HB_OK) {
        std::fprintf(stderr, "heartbeat init failed: %d\n", rc);
        return 1;
    }

    double acc = 0.0;
#pragma omp parallel for num_threads(threads) schedule(static) reduction(+ : acc)
    for (long iter = 0; iter < total; ++iter) {
        int threadnum = omp_get_thread_num();
        // a little arithmetic so the loop body is not empty
        acc += 1.0 / (1.0 + iter % 97);
        L_Heartbeat_OpenMP_Generate(threadnum, 1, iter);
    }

    rc = Heartbeat_OpenMP_Finished();
    if (rc != HB_OK) {
        std::fprintf(stderr, "heartbeat flush failed: %d\n", rc);
        return 1;
    }
    std::printf("done: %ld iterations on %d threads (acc=%.3f, dropped=%ld)\n",
                total, threads, acc, Heartbeat_OpenMP_Dropped());
    return 0;
}
