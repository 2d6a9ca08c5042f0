// Overhead harness: runs the same fixed-work parallel loop with and
// without heartbeat emission and reports process CPU time for each.
//
//   overhead_harness [--seconds S] [--beat-every K] [--threads T]
//                    [--out-prefix PATH] [--disable-heartbeats]
//
// A short calibration pass sizes the iteration count so the baseline
// takes about S seconds; both modes then run the identical count.  Each
// mode writes "<prefix><mode>.json" with {"mode", "cpu_seconds", ...};
// feed the two files to `hbdiag overhead --with-file ... --without-file ...`.

#include <sys/resource.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <string>

#include <omp.h>

#include "heartbeat_openmp.h"

namespace {

double wall_seconds() {
    timespec ts;
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return ts.tv_sec + ts.tv_nsec * 1e-9;
}

double cpu_seconds() {
    rusage usage;
    getrusage(RUSAGE_SELF, &usage);
    return usage.ru_utime.tv_sec + usage.ru_utime.tv_usec * 1e-6 +
           usage.ru_stime.tv_sec + usage.ru_stime.tv_usec * 1e-6;
}

// One work iteration: a dependent FP chain, long enough that an
// iteration means real computation (tens of ns) rather than a single op.
inline double work_step(double x) {
    for (int k = 0; k < 16; ++k) x = x * 1.0000000931 + 1e-9;
    return x;
}

struct RunResult {
    double cpu;
    double wall;
    long beats;
};

// Both modes run the identical two-level loop: an inner block of
// beat_every work iterations, then at most one emission.  This mirrors
// how instrumented benchmarks throttle ("every N iterations, one beat")
// without paying a per-iteration counter check in either mode.
RunResult run_loop(long chunks, int threads, long beat_every, bool emit) {
    double cpu0 = cpu_seconds();
    double wall0 = wall_seconds();
    double sink = 0.0;
#pragma omp parallel num_threads(threads) reduction(+ : sink)
    {
        int tn = omp_get_thread_num();
        double x = 1.0 + tn;
        for (long chunk = 0; chunk < chunks; ++chunk) {
            for (long j = 0; j < beat_every; ++j) x = work_step(x);
            if (emit) Heartbeat_OpenMP_Generate(tn, 1, chunk);
        }
        sink += x;
    }
    RunResult r;
    r.cpu = cpu_seconds() - cpu0;
    r.wall = wall_seconds() - wall0;
    r.beats = emit ? chunks * threads : 0;
    if (sink == 42.0) std::printf("~");  // keep the loop observable
    return r;
}

long calibrate(int threads, double target_seconds, long beat_every) {
    // measure baseline throughput on a short fixed batch
    long probe_chunks = 200000 / beat_every + 16;
    double t0 = wall_seconds();
    run_loop(probe_chunks, threads, beat_every, false);
    double per_chunk = (wall_seconds() - t0) / probe_chunks;
    long chunks = static_cast<long>(target_seconds / per_chunk);
    return chunks > probe_chunks ? chunks : probe_chunks;
}

void write_json(const std::string &path, const char *mode, const RunResult &r,
                long per_thread, int threads, long beat_every) {
    FILE *out = std::fopen(path.c_str(), "w");
    if (!out) {
        std::fprintf(stderr, "cannot write %s\n", path.c_str());
        std::exit(1);
    }
    std::fprintf(out,
                 "{\"mode\": \"%s\", \"cpu_seconds\": %.6f, "
                 "\"wall_seconds\": %.6f, \"threads\": %d, "
                 "\"iterations_per_thread\": %ld, \"beat_every\": %ld, "
                 "\"beats\": %ld, \"dropped\": %ld}\n",
                 mode, r.cpu, r.wall, threads, per_thread, beat_every, r.beats,
                 Heartbeat_OpenMP_Dropped());
    std::fclose(out);
}

}  // namespace

int main(int argc, char **argv) {
    double seconds = 5.0;
    long beat_every = 1000;
    int threads = 4;
    std::string prefix = "overhead_";
    bool disable = false;

    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--seconds" && i + 1 < argc) seconds = std::atof(argv[++i]);
        else if (arg == "--beat-every" && i + 1 < argc) beat_every = std::atol(argv[++i]);
        else if (arg == "--threads" && i + 1 < argc) threads = std::atoi(argv[++i]);
        else if (arg == "--out-prefix" && i + 1 < argc) prefix = argv[++i];
        else if (arg == "--disable-heartbeats") disable = true;
        else {
            std::fprintf(stderr, "unknown argument '%s'\n", arg.c_str());
            return 2;
        }
    }
    if (seconds <= 0 || beat_every < 1 || threads < 1) {
        std::fprintf(stderr, "invalid parameters\n");
        return 2;
    }

    long chunks = calibrate(threads, seconds, beat_every);
    if (chunks < 100)
        std::fprintf(stderr,
                     "warning: only %ld beats per thread; timing resolution "
                     "may be too coarse\n",
                     chunks);

    // baseline first: identical loop, no emission
    RunResult plain = run_loop(chunks, threads, beat_every, false);
    write_json(prefix + "baseline.json", "baseline", plain,
               chunks * beat_every, threads, beat_every);

    std::string log = prefix + "heartbeats.csv";
    setenv("HEARTBEAT_LOG", log.c_str(), 1);
    int rc = Heartbeat_OpenMP_Init();
    if (rc != HB_OK) {
        std::fprintf(stderr, "heartbeat init failed: %d\n", rc);
        return 1;
    }
    RunResult hb = run_loop(chunks, threads, beat_every, !disable);
    rc = Heartbeat_OpenMP_Finished();
    if (rc != HB_OK) {
        std::fprintf(stderr, "heartbeat flush failed: %d\n", rc);
        return 1;
    }
    write_json(prefix + "heartbeat.json", "heartbeat", hb,
               chunks * beat_every, threads, beat_every);

    double overhead = (hb.cpu - plain.cpu) / plain.cpu;
    std::printf(
        "threads=%d iterations/thread=%ld beat_every=%ld\n"
        "cpu with heartbeats:    %.4f s\n"
        "cpu without heartbeats: %.4f s\n"
        "overhead: %.2f%%\n",
        threads, chunks * beat_every, beat_every, hb.cpu, plain.cpu,
        overhead * 100.0);
    return 0;
}
