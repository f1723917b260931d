#ifndef ISNEAK_H
#define ISNEAK_H

#include <stddef.h>
#include <stdint.h>

#if defined(ISNEAK_BUILDING_LIBRARY)
#define ISNEAK_API __attribute__((visibility("default")))
#else
#define ISNEAK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every function returning int returns one of these. */
enum {
  ISNEAK_OK = 0,
  ISNEAK_ERR_PARSE = 1,
  ISNEAK_ERR_CONTRACT = 2,
  ISNEAK_ERR_EMPTY_POOL = 3,
  ISNEAK_ERR_SCHEMA = 4,
  ISNEAK_ERR_UNSUPPORTED = 5,
  ISNEAK_ERR_GENERATION = 6,
  ISNEAK_ERR_OUT_OF_RANGE = 7,
  ISNEAK_ERR_IO = 8,
  ISNEAK_ERR_NOT_FOUND = 9,
  ISNEAK_ERR_CONFLICT = 10,
  ISNEAK_ERR_BAD_REQUEST = 11,
  ISNEAK_ERR_ORACLE = 12,
  ISNEAK_ERR_INTERNAL = 99
};

typedef struct isneak_model isneak_model;     /* constraint model + objectives */
typedef struct isneak_pool isneak_pool;       /* encoded, ranked candidate pool */
typedef struct isneak_session isneak_session; /* suspended interactive search */
typedef struct isneak_service isneak_service; /* HTTP-agnostic session API */

ISNEAK_API const char* isneak_version(void);

/* Message of the last failure on the calling thread; empty when none. */
ISNEAK_API const char* isneak_last_error_message(void);

/* Frees strings returned through char** out-parameters. */
ISNEAK_API void isneak_string_free(char* s);

/* ---- models ---- */
ISNEAK_API int isneak_model_generate(size_t features, double constraint_ratio, uint64_t seed,
                                     isneak_model** out);
/* features_path may be NULL (no per-feature goal table). */
ISNEAK_API int isneak_model_load(const char* dimacs_path, const char* objectives_path,
                                 const char* features_path, isneak_model** out);
ISNEAK_API int isneak_model_write(const isneak_model* model, const char* dimacs_path,
                                  const char* objectives_path, const char* features_path);
ISNEAK_API int isneak_model_num_vars(const isneak_model* model, size_t* out);
ISNEAK_API int isneak_model_num_clauses(const isneak_model* model, size_t* out);
ISNEAK_API void isneak_model_free(isneak_model* model);

/* ---- pools ---- */
ISNEAK_API int isneak_pool_enumerate(const isneak_model* model, size_t count, uint64_t seed,
                                     isneak_pool** out);
ISNEAK_API int isneak_pool_load_csv(const char* csv_path, const char* objectives_path, isneak_pool** out);
/* Opens a model file by path: DIMACS/CNF with sidecars is enumerated to
   pool_size candidates with seed; a CSV table is loaded whole. */
ISNEAK_API int isneak_pool_open(const char* path, size_t pool_size, uint64_t seed, isneak_pool** out);
ISNEAK_API int isneak_pool_write_csv(const isneak_pool* pool, const char* path);
ISNEAK_API int isneak_pool_size(const isneak_pool* pool, size_t* out);
ISNEAK_API int isneak_pool_attributes(const isneak_pool* pool, size_t* out);
ISNEAK_API void isneak_pool_free(isneak_pool* pool);

/* ---- runs ---- */
/* algorithm: "isneak", "flash" or "nga". question_cap 0 means the default.
   Result JSON; timing is included only when with_timing is nonzero. */
ISNEAK_API int isneak_run(const isneak_pool* pool, const char* algorithm, uint64_t seed,
                          size_t question_cap, int with_timing, char** json_out);
/* d2h of a result's best solution against the pool's full ranking. */
ISNEAK_API int isneak_pool_d2h(const isneak_pool* pool, const char* result_json, double* out);
ISNEAK_API int isneak_tree_json(const isneak_pool* pool, uint64_t seed, char** json_out);
ISNEAK_API int isneak_hamlet_samples(double confidence, double p, size_t* out);

/* ---- interactive sessions ---- */
ISNEAK_API int isneak_session_start(const isneak_pool* pool, uint64_t seed, size_t question_cap,
                                    isneak_session** out);
/* Pending question JSON, or "null" when none is pending. */
ISNEAK_API int isneak_session_question(const isneak_session* session, char** json_out);
/* choice is 'A' or 'B'. */
ISNEAK_API int isneak_session_answer(isneak_session* session, char choice);
ISNEAK_API int isneak_session_done(const isneak_session* session, int* out);
ISNEAK_API int isneak_session_result(const isneak_session* session, int with_timing, char** json_out);
ISNEAK_API void isneak_session_free(isneak_session* session);

/* ---- evaluation ---- */
/* algorithms: comma-separated list. out_dir receives report.csv, summary.csv
   and runs/<model>-<algorithm>-s<seed>.json; the report CSV is returned. */
ISNEAK_API int isneak_bench(const char* models_dir, const char* algorithms, size_t repeats, uint64_t seed0,
                            size_t pool_size, size_t workers, const char* out_dir, char** csv_out);
/* CSV "S,median_I,runs". */
ISNEAK_API int isneak_sweep(const isneak_pool* pool, const size_t* s_values, size_t count, size_t repeats,
                            uint64_t seed0, char** csv_out);

/* ---- session service ---- */
ISNEAK_API int isneak_service_create(const char* models_dir, unsigned ttl_seconds, const char* snapshot_dir,
                                     isneak_service** out);
ISNEAK_API int isneak_service_add_pool(isneak_service* service, const char* model_id, const isneak_pool* pool);
ISNEAK_API int isneak_service_handle(isneak_service* service, const char* method, const char* path,
                                     const char* body, int* status_out, char** body_out);
ISNEAK_API void isneak_service_free(isneak_service* service);

#ifdef __cplusplus
}
#endif

#endif
