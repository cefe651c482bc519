/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface of the contingent-CSA switching game engine.
 *
 * Strings returned through char** are owned by the caller and released with
 * csg_string_free. csg_last_error is per thread and stays valid until the
 * next call on that thread.
 */

#ifndef CSAGAME_CSAGAME_H
#define CSAGAME_CSAGAME_H

#if defined(_WIN32)
#  if defined(CSAGAME_BUILDING_LIBRARY)
#    define CSG_API __declspec(dllexport)
#  else
#    define CSG_API __declspec(dllimport)
#  endif
#else
#  define CSG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct csg_engine csg_engine;

typedef enum csg_status {
  CSG_OK = 0,
  CSG_ERR_CONFIG = 1,     /* config fails validation */
  CSG_ERR_PARSE = 2,      /* config text is not valid JSON */
  CSG_ERR_SIMULATION = 3, /* non-finite state while simulating */
  CSG_ERR_NUMERIC = 4,    /* ill-conditioned estimation */
  CSG_ERR_IO = 5,         /* output files could not be written */
  CSG_ERR_ARGUMENT = 6,   /* bad argument or unknown mode */
  CSG_ERR_STATE = 7,      /* nothing to report yet */
  CSG_ERR_INTERNAL = 8
} csg_status;

/* Outcome of a run, mirrored by the command-line exit codes. */
enum { CSG_OUTCOME_OK = 0, CSG_OUTCOME_NOT_CERTIFIED = 3 };

CSG_API const char* csg_version(void);
CSG_API const char* csg_last_error(void);
CSG_API void csg_string_free(char* s);

CSG_API csg_status csg_engine_create_from_file(const char* path, csg_engine** out);
CSG_API csg_status csg_engine_create_from_json(const char* json_text, csg_engine** out);
CSG_API void csg_engine_destroy(csg_engine* engine);

/* Sets a dotted key, e.g. ("model.seed", "42"). The value is parsed as JSON
 * and taken as a plain string when that fails. */
CSG_API csg_status csg_engine_set(csg_engine* engine, const char* dotted_key, const char* value);

/* Writes {"errors": [...], "warnings": [...], "ok": bool} to *diagnostics_json
 * and returns CSG_ERR_CONFIG when errors were found. mode may be NULL. */
CSG_API csg_status csg_engine_validate(csg_engine* engine, const char* mode, char** diagnostics_json);

/* Runs simulate | value | game | symmetric | oracle | residuals. out_dir may
 * be NULL to use outputs.dir. *outcome receives CSG_OUTCOME_*. */
CSG_API csg_status csg_engine_run(csg_engine* engine, const char* mode, const char* out_dir, int* outcome);

/* Summary of the last successful run as JSON. */
CSG_API csg_status csg_engine_result_json(const csg_engine* engine, char** json_out);

/* The resolved configuration (defaults merged with overrides) as JSON. */
CSG_API csg_status csg_engine_config_json(const csg_engine* engine, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* CSAGAME_CSAGAME_H */
