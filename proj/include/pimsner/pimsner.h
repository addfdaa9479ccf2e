/* C interface to the verification library: opaque handles, status codes
 * and a thread-local error message. Strings returned through char** are
 * owned by the caller and released with pimsner_string_free. */
#ifndef PIMSNER_H
#define PIMSNER_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pimsner_status {
  PIMSNER_OK = 0,
  PIMSNER_CHECK_FAILED = 1, /* report exit code only */
  PIMSNER_PRECONDITION = 2, /* schema error or operation outside its domain */
  PIMSNER_RESOURCE = 3,     /* dimension cap */
  PIMSNER_INVALID_ARGUMENT = 4,
  PIMSNER_INTERNAL = 5
} pimsner_status;

typedef enum pimsner_check_status {
  PIMSNER_CHECK_PASS = 0,
  PIMSNER_CHECK_FAIL = 1,
  PIMSNER_CHECK_PRECONDITION = 2,
  PIMSNER_CHECK_SKIPPED = 3
} pimsner_check_status;

typedef struct pimsner_instance pimsner_instance;
typedef struct pimsner_report pimsner_report;

/* Overrides of the instance parameters; fields left at the values set by
 * pimsner_options_init keep the instance values. */
typedef struct pimsner_options {
  int truncation;      /* <= 0: instance value */
  double tolerance;    /* <= 0: instance value */
  int has_seed;
  uint64_t seed;
  int max_word_length; /* <= 0: instance value */
} pimsner_options;

/* Borrowed views, valid until the report is freed. */
typedef struct pimsner_check_info {
  const char* name;
  const char* anchor;
  double residual;
  double threshold;
  pimsner_check_status status;
  const char* note;
} pimsner_check_info;

const char* pimsner_version(void);
/* Message of the last failing call on this thread, "" if none. */
const char* pimsner_last_error(void);

void pimsner_options_init(pimsner_options* opt);

int pimsner_instance_load(const char* path, pimsner_instance** out);
int pimsner_instance_parse(const char* json_text, pimsner_instance** out);
/* Number of schema errors recorded by the last failing load or parse on this thread. */
size_t pimsner_schema_error_count(void);
const char* pimsner_schema_error(size_t i);
void pimsner_instance_free(pimsner_instance* in);

int pimsner_generate_instance(uint64_t seed, char** json_out);

/* Comma-separated list of suite names. */
const char* pimsner_suite_names(void);
/* opt may be NULL. PIMSNER_OK means a report was produced; see pimsner_report_exit_code. */
int pimsner_run_suite(const pimsner_instance* in, const char* suite, const pimsner_options* opt,
                      pimsner_report** out);

/* 0 all pass, 1 a check failed, 2 a precondition marker, 3 a skip marker. */
int pimsner_report_exit_code(const pimsner_report* r);
size_t pimsner_report_check_count(const pimsner_report* r);
int pimsner_report_check(const pimsner_report* r, size_t i, pimsner_check_info* out);
/* format is "text" or "json" */
int pimsner_report_render(const pimsner_report* r, const char* format, char** out);
void pimsner_report_free(pimsner_report* r);

void pimsner_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
