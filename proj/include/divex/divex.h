/*
 * divex: interactive video exploration engine, C interface.
 *
 * Every function reports failures through a divex_status. The message and
 * machine-readable code of the most recent failure on the calling thread are
 * available from divex_last_error() and divex_last_error_code() until the
 * next failing call on that thread.
 *
 * Handles are opaque. A divex_service is immutable after opening and may be
 * queried from any number of threads at once.
 */
#ifndef DIVEX_H
#define DIVEX_H

#include <stddef.h>
#include <stdint.h>

#if defined(DIVEX_BUILDING_LIBRARY)
#define DIVEX_API __attribute__((visibility("default")))
#else
#define DIVEX_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum divex_status {
  DIVEX_OK = 0,
  DIVEX_E_INVALID_ARGUMENT = 1,
  DIVEX_E_IO = 2,
  DIVEX_E_PARSE = 3,
  DIVEX_E_VALIDATION = 4,
  DIVEX_E_NOT_FOUND = 5,
  DIVEX_E_CORRUPT_CATALOG = 6,
  DIVEX_E_BIND = 7,
  DIVEX_E_INTERNAL = 8
} divex_status;

typedef struct divex_service divex_service;
typedef struct divex_server divex_server;

typedef struct divex_ingest_options {
  const char* manifest_path;
  const char* const* concept_paths;
  size_t concept_path_count;
  const char* out_dir;
  uint64_t seed;
  int precompute_maps;
  double cut_threshold;     /* in (0, 2] */
  uint64_t min_shot_frames; /* >= 1 */
} divex_ingest_options;

typedef struct divex_ingest_summary {
  size_t videos;
  size_t shots;
  size_t samples;
  size_t detections;
  size_t sources;
  size_t featuremaps;
} divex_ingest_summary;

typedef struct divex_service_options {
  const char* catalog_dir;
  int thumb_max_edge;
  int has_som_seed; /* nonzero: use som_seed instead of the catalog's seed */
  uint64_t som_seed;
  size_t default_k;
  size_t default_top_n;
  double default_tau;
} divex_service_options;

DIVEX_API const char* divex_version(void);
DIVEX_API const char* divex_status_name(divex_status status);
DIVEX_API const char* divex_last_error(void);
DIVEX_API const char* divex_last_error_code(void);

/* Fills in defaults (threshold 0.5, 10 frames per shot minimum, seed 0). */
DIVEX_API void divex_ingest_options_init(divex_ingest_options* options);
/* Runs the offline pipeline and writes the catalog directory. `summary` may be NULL. */
DIVEX_API divex_status divex_ingest(const divex_ingest_options* options, divex_ingest_summary* summary);

DIVEX_API void divex_service_options_init(divex_service_options* options);
DIVEX_API divex_status divex_service_open(const divex_service_options* options, divex_service** out);
DIVEX_API void divex_service_close(divex_service* service);
DIVEX_API divex_status divex_service_counts(const divex_service* service, size_t* videos, size_t* shots, size_t* frames);

/*
 * Answers one GET request target such as "/search/concepts?q=car" without a
 * network round trip. The body is allocated by the library, NUL-terminated,
 * and released with divex_free(). API-level errors (404 and so on) are
 * returned as DIVEX_OK with the error status and JSON error body.
 */
DIVEX_API divex_status divex_service_query(const divex_service* service, const char* target, int* http_status,
                                           char** body, size_t* body_length);
DIVEX_API void divex_free(void* pointer);

/*
 * Binds `bind_address` ("host:port", port 0 for any free port) and serves on
 * a background thread. The server keeps the service alive.
 */
DIVEX_API divex_status divex_server_start(divex_service* service, const char* bind_address, divex_server** out);
DIVEX_API int divex_server_port(const divex_server* server);
/* Asks the server to stop; safe to call from any thread. */
DIVEX_API void divex_server_stop(divex_server* server);
/* Blocks until the server has stopped. */
DIVEX_API void divex_server_wait(divex_server* server);
DIVEX_API void divex_server_destroy(divex_server* server);

#ifdef __cplusplus
}
#endif

#endif /* DIVEX_H */
