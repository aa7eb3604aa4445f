#ifndef POLYCSP_H
#define POLYCSP_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PcspStatus {
  PCSP_STATUS_OK = 0,
  PCSP_STATUS_NULL_POINTER,
  PCSP_STATUS_UTF8,
  PCSP_STATUS_PARSE,
  PCSP_STATUS_BUDGET,
  PCSP_STATUS_PRECONDITION,
  PCSP_STATUS_INTERNAL,
} PcspStatus;

typedef struct PcspInstance PcspInstance;

typedef struct PcspLanguage PcspLanguage;

typedef struct PcspQcsp PcspQcsp;

/**
 * Message for the most recent failure on this thread, or null. Valid until
 * the next failing call on the same thread.
 */
const char *pcsp_last_error_message(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void pcsp_string_free(char *s);

/**
 * # Safety
 * `src` must be a nul-terminated string; `out` must be writable.
 */
enum PcspStatus pcsp_language_parse(const char *src, struct PcspLanguage **out);

/**
 * # Safety
 * `lang` must be null or a handle from `pcsp_language_parse`, freed once.
 */
void pcsp_language_free(struct PcspLanguage *lang);

/**
 * Bit `i` of `out_mask` is set when operation `i` of const0, const1, and,
 * or, majority, minority is a polymorphism. Zero means NP-complete.
 *
 * # Safety
 * `lang` must be a live handle; `out_mask` must be writable.
 */
enum PcspStatus pcsp_classify(const struct PcspLanguage *lang, uint32_t *out_mask);

/**
 * # Safety
 * `lang` must be a live handle, `src` a nul-terminated string and `out`
 * writable.
 */
enum PcspStatus pcsp_instance_parse(const struct PcspLanguage *lang,
                                    const char *src,
                                    struct PcspInstance **out);

/**
 * # Safety
 * `inst` must be null or a handle from `pcsp_instance_parse`, freed once.
 */
void pcsp_instance_free(struct PcspInstance *inst);

/**
 * Solve with the dispatched polynomial method. `out_json` receives
 * `{"satisfiable":…,"assignment":…,"method":…}`.
 *
 * # Safety
 * `inst` must be a live handle; `out_json` must be writable.
 */
enum PcspStatus pcsp_solve(const struct PcspInstance *inst, char **out_json);

/**
 * # Safety
 * As for `pcsp_instance_parse`; the source needs a `prefix` line.
 */
enum PcspStatus pcsp_qcsp_parse(const struct PcspLanguage *lang,
                                const char *src,
                                struct PcspQcsp **out);

/**
 * # Safety
 * `q` must be null or a handle from `pcsp_qcsp_parse`, freed once.
 */
void pcsp_qcsp_free(struct PcspQcsp *q);

/**
 * Truth of a quantified instance: the universal-family procedure where it
 * applies, exhaustive game search otherwise.
 *
 * # Safety
 * `q` must be a live handle; `out_truth` must be writable.
 */
enum PcspStatus pcsp_qsolve(const struct PcspQcsp *q, bool *out_truth);

/**
 * Truth of a quantified equality sentence such as `A x . E y . (x=y)`.
 *
 * # Safety
 * `src` must be a nul-terminated string; `out_truth` must be writable.
 */
enum PcspStatus pcsp_eq_decide(const char *src, bool *out_truth);

#endif  /* POLYCSP_H */
