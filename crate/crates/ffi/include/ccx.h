#ifndef CCX_H
#define CCX_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes for every fallible entry point.
 */
typedef enum {
  CcxStatus_Ok = 0,
  /**
   * Parse error, invalid UTF-8, or malformed arguments.
   */
  CcxStatus_Invalid = 1,
  /**
   * Checks ran and at least one failed.
   */
  CcxStatus_CheckFailed = 2,
  /**
   * An internal construction failed; see `ccx_last_error`.
   */
  CcxStatus_Error = 3,
} CcxStatus;

/**
 * Opaque parsed document.
 */
typedef struct CcxDoc CcxDoc;

/**
 * Returns the last error message for this thread, or null when none.
 * The pointer is valid until the next failing call on the same thread.
 */
const char *ccx_last_error(void);

/**
 * Parses CCX text into an opaque document. On success writes the handle
 * through `out` and returns `Ok`.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string; `out` must be a valid
 * pointer to receive the handle.
 */
CcxStatus ccx_doc_parse(const char *text, CcxDoc **out);

/**
 * Releases a document handle. Null is ignored.
 *
 * # Safety
 * `doc` must be a handle produced by this library, or null.
 */
void ccx_doc_free(CcxDoc *doc);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be a string produced by this library, or null.
 */
void ccx_string_free(char *s);

/**
 * Emits the canonical text form of a document.
 *
 * # Safety
 * `doc` must be a live handle; `out` must be valid.
 */
CcxStatus ccx_doc_emit(const CcxDoc *doc, char **out);

/**
 * Runs the structural checks on every block. Writes a report and returns
 * `Ok` when everything passes, `CheckFailed` otherwise.
 *
 * # Safety
 * `doc` must be a live handle; `report` must be valid.
 */
CcxStatus ccx_doc_check(const CcxDoc *doc, char **report);

/**
 * Replays every certificate with matrix arithmetic only.
 *
 * # Safety
 * `doc` must be a live handle; `report` must be valid.
 */
CcxStatus ccx_doc_replay(const CcxDoc *doc, char **report);

/**
 * Signature of a named point-controlled structure; writes the value
 * through `out`.
 *
 * # Safety
 * `doc` must be a live handle; `name` a valid string; `out` valid.
 */
CcxStatus ccx_signature(const CcxDoc *doc, const char *name, int64_t *out);

/**
 * Runs a named property campaign with the given seed and instance count;
 * writes the full report. Returns `Ok` when every instance passes.
 *
 * # Safety
 * `prop` must be a valid string; `report` valid.
 */
CcxStatus ccx_certify(const char *prop, uint64_t seed, uintptr_t instances, char **report);

#endif  /* CCX_H */
