// Lifecycle and edge-case tests for the emitter API (single process,
// scenario-ordered).  Exits non-zero on the first failed check.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include "heartbeat_openmp.h"

static int g_failures = 0;

#define CHECK(cond)                                                       \
    do {                                                                  \
        if (!(cond)) {                                                    \
            std::fprintf(stderr, "FAIL %s:%d: %s\n", __FILE__, __LINE__,  \
                         #cond);                                          \
            ++g_failures;                                                 \
        }                                                                 \
    } while (0)

static std::vector<std::string> read_lines(const std::string &path) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

int main(int argc, char **argv) {
    std::string dir = argc > 1 ? argv[1] : ".";

    // 1. generate before init: dropped, not fatal
    long dropped0 = Heartbeat_OpenMP_Dropped();
    Heartbeat_OpenMP_Generate(0, 1, 0);
    CHECK(Heartbeat_OpenMP_Dropped() == dropped0 + 1);

    // 2. unwritable path fails cleanly
    CHECK(Heartbeat_OpenMP_Init_Path("/nonexistent-dir/heartbeats.csv") ==
          HB_ERR_BAD_PATH);

    // 3. normal lifecycle with a double init in the middle
    std::string log = dir + "/api_log.csv";
    CHECK(Heartbeat_OpenMP_Init_Path(log.c_str()) == HB_OK);
    CHECK(Heartbeat_OpenMP_Init() == HB_ERR_ALREADY_INIT);

    const int threads = 4;
    const long beats = 50;
#pragma omp parallel num_threads(threads)
    {
        int tn = omp_get_thread_num();
        for (long i = 0; i < beats; ++i) Heartbeat_OpenMP_Generate(tn, 1, i);
    }
    CHECK(Heartbeat_OpenMP_Finished() == HB_OK);

    // 4. double finish
    CHECK(Heartbeat_OpenMP_Finished() == HB_ERR_NOT_INIT);

    // 5. log structure: comment, header, thread-major dense records, marker
    auto lines = read_lines(log);
    CHECK(lines.size() == 2 + threads * beats + 1);
    CHECK(lines[0].rfind("# started ", 0) == 0);
    CHECK(lines[1] == "thread_id,seq,timestamp_ns");
    CHECK(lines.back() == "# complete");
    long row = 0;
    long long prev_ts = -1;
    for (int tid = 0; tid < threads; ++tid) {
        prev_ts = -1;
        for (long seq = 0; seq < beats; ++seq, ++row) {
            int got_tid;
            long got_seq;
            long long got_ts;
            CHECK(std::sscanf(lines[2 + row].c_str(), "%d,%ld,%lld", &got_tid,
                              &got_seq, &got_ts) == 3);
            CHECK(got_tid == tid);
            CHECK(got_seq == seq);
            CHECK(got_ts >= prev_ts);
            prev_ts = got_ts;
        }
    }

    // 6. generate after finish: dropped, not fatal
    long dropped1 = Heartbeat_OpenMP_Dropped();
    Heartbeat_OpenMP_Generate(0, 1, 0);
    CHECK(Heartbeat_OpenMP_Dropped() == dropped1 + 1);

    // 7. alias spellings + env-driven path + finish without generate
    std::string empty_log = dir + "/api_empty.csv";
    setenv("HEARTBEAT_LOG", empty_log.c_str(), 1);
    CHECK(L_Heartbeat_OpenMP_Init() == HB_OK);
    L_Heartbeat_OpenMP_Generate(999999, 1, 0);  // out-of-range slot: dropped
    CHECK(L_Heartbeat_OpenMP_Finished() == HB_OK);
    auto empty_lines = read_lines(empty_log);
    CHECK(empty_lines.size() == 3);  // comment, header, end marker
    CHECK(empty_lines[1] == "thread_id,seq,timestamp_ns");
    CHECK(empty_lines[2] == "# complete");

    if (g_failures == 0) std::printf("test_api: all checks passed\n");
    return g_failures == 0 ? 0 : 1;
}
