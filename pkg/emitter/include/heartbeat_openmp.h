/* Heartbeat emitter API for OpenMP programs.
 *
 * Lifecycle: Init once from the main thread, Generate from each worker
 * thread inside the instrumented loop, Finished once from the main
 * thread.  Generate never blocks, allocates or aborts: records land in
 * a pre-sized per-thread buffer and are merged into one CSV log at
 * Finished.
 *
 * The log format is:  header "thread_id,seq,timestamp_ns", one record
 * per line, LF endings.  A "# started <walltime>" comment precedes the
 * header and a "# complete" marker ends a fully flushed log; ingestion
 * skips comment lines.  Timestamps come from the monotonic clock,
 * relative to Init.
 *
 * Environment:
 *   HEARTBEAT_LOG          output path (default heartbeat_log.csv)
 *   HEARTBEAT_CAPACITY     records per thread buffer (default 1<<20)
 *   HEARTBEAT_MAX_THREADS  thread slots to provision (default 64)
 */

#ifndef HEARTBEAT_OPENMP_H
#define HEARTBEAT_OPENMP_H

#ifdef __cplusplus
extern "C" {
#endif

enum {
    HB_OK = 0,
    HB_ERR_ALREADY_INIT = 1,
    HB_ERR_NOT_INIT = 2,
    HB_ERR_BAD_PATH = 3,
    HB_ERR_IO = 4,
};

/* Initialize buffers and capture the epoch; output path from the
 * environment.  Fails without side effects on double init or an
 * unwritable path. */
int Heartbeat_OpenMP_Init(void);

/* Same, with an explicit output path (overrides the environment). */
int Heartbeat_OpenMP_Init_Path(const char *path);

/* Append one beat to thread_num's buffer.  group_id and iter are
 * accepted for source compatibility with instrumented loops and carry
 * no semantics here.  Out-of-lifecycle or overflowing calls are
 * dropped and counted, never fatal. */
void Heartbeat_OpenMP_Generate(int thread_num, int group_id, long iter);

/* Merge all buffers into the log and release them. */
int Heartbeat_OpenMP_Finished(void);

/* Alternate spellings used by some instrumented code. */
int L_Heartbeat_OpenMP_Init(void);
void L_Heartbeat_OpenMP_Generate(int thread_num, int group_id, long iter);
int L_Heartbeat_OpenMP_Finished(void);

/* Beats dropped due to misuse or full buffers (diagnostic). */
long Heartbeat_OpenMP_Dropped(void);

#ifdef __cplusplus
}
#endif

#endif /* HEARTBEAT_OPENMP_H */
