#ifndef LETALONE_H
#define LETALONE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LaStatus {
  LA_STATUS_OK = 0,
  LA_STATUS_NULL_POINTER = 1,
  LA_STATUS_INVALID_UTF8 = 2,
  LA_STATUS_INVALID_ARGUMENT = 3,
  LA_STATUS_IO = 4,
  LA_STATUS_PARSE = 5,
  LA_STATUS_NON_FINITE = 6,
  LA_STATUS_OUT_OF_RANGE = 7,
  LA_STATUS_PANIC = 99,
} LaStatus;

typedef struct LaNGram LaNGram;

/**
 * A generated or loaded test suite.
 */
typedef struct LaSuite LaSuite;

typedef struct LaUnigram LaUnigram;

/**
 * Bytes owned by the library.
 */
typedef struct LaBuffer {
  uint8_t *data;
  size_t len;
} LaBuffer;

/**
 * Message for the most recent failure on this thread, or NULL. Valid until
 * the next failing call on the same thread.
 */
const char *la_last_error(void);

/**
 * Library version as a static string.
 */
const char *la_version(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void la_string_free(char *s);

/**
 * # Safety
 * `buf` must have been filled by this library and not have been freed.
 */
void la_buffer_free(struct LaBuffer buf);

/**
 * Per-token log odds of a sentence against its unigram baseline.
 *
 * # Safety
 * `unigram_logprobs` must point to `n` doubles; `out` must be writable.
 */
enum LaStatus la_slor(double lm_logprob_total,
                      const double *unigram_logprobs,
                      size_t n,
                      double *out);

/**
 * SLOR drop caused by the manipulation: `s_minus_manip - s_plus_manip`.
 *
 * # Safety
 * `out` must be writable.
 */
enum LaStatus la_delta_slor(double s_minus_manip, double s_plus_manip, double *out);

/**
 * Item correctness; ties count as correct unless `strict`.
 *
 * # Safety
 * `out` must be writable.
 */
enum LaStatus la_item_correct(double delta_ltaln, double delta_and, bool strict, bool *out);

/**
 * Generates a suite. `lexicon_json` may be NULL for the bundled lexicon.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
enum LaStatus la_suite_generate(const char *property,
                                const char *lexicon_json,
                                struct LaSuite **out);

/**
 * # Safety
 * `path` must be NUL-terminated; `out` must be writable.
 */
enum LaStatus la_suite_load(const char *path, struct LaSuite **out);

/**
 * # Safety
 * `suite` must be a live handle; `path` must be NUL-terminated.
 */
enum LaStatus la_suite_save(const struct LaSuite *suite, const char *path);

/**
 * Number of items (both orders). Returns 0 for NULL.
 *
 * # Safety
 * `suite` must be NULL or a live handle.
 */
size_t la_suite_len(const struct LaSuite *suite);

/**
 * # Safety
 * `suite` must be NULL or a live handle.
 */
size_t la_suite_pairs(const struct LaSuite *suite);

/**
 * Copies the sentence of item `index` under `condition` (`+m+l`, `-m+l`,
 * `+m-l` or `-m-l`). Free the result with [`la_string_free`].
 *
 * # Safety
 * `suite` must be a live handle; `condition` NUL-terminated; `out` writable.
 */
enum LaStatus la_suite_sentence(const struct LaSuite *suite,
                                size_t index,
                                const char *condition,
                                char **out);

/**
 * # Safety
 * `suite` must be NULL or a handle not yet freed.
 */
void la_suite_free(struct LaSuite *suite);

/**
 * Builds a unigram model from corpus text. `tokenizer` is e.g.
 * `whitespace` or `whitespace+lower`; `smoothing` is e.g. `floor` or `add-k:1`.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
enum LaStatus la_unigram_build(const char *corpus,
                               const char *tokenizer,
                               const char *smoothing,
                               struct LaUnigram **out);

/**
 * # Safety
 * `path` must be NUL-terminated; `out` must be writable.
 */
enum LaStatus la_unigram_load(const char *path, struct LaUnigram **out);

/**
 * Natural-log probability of one token.
 *
 * # Safety
 * `model` must be a live handle; `token` NUL-terminated; `out` writable.
 */
enum LaStatus la_unigram_logprob(const struct LaUnigram *model, const char *token, double *out);

/**
 * # Safety
 * `model` must be NULL or a handle not yet freed.
 */
void la_unigram_free(struct LaUnigram *model);

/**
 * Trains the reference n-gram model on line-oriented corpus text.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
enum LaStatus la_ngram_train(const char *corpus,
                             size_t order,
                             double discount,
                             const char *tokenizer,
                             struct LaNGram **out);

/**
 * Scores `target` after `context` and writes the summed natural-log
 * probability and the target token count.
 *
 * # Safety
 * `model` must be a live handle; strings NUL-terminated; outputs writable.
 */
enum LaStatus la_ngram_score(const struct LaNGram *model,
                             const char *context,
                             const char *target,
                             double *out_logprob,
                             size_t *out_tokens);

/**
 * # Safety
 * `model` must be NULL or a handle not yet freed.
 */
void la_ngram_free(struct LaNGram *model);

/**
 * Filters `len` bytes of UTF-8 text under a scenario (`NoLet`, ...) with
 * `line` or `sentence` removal units. The kept text is written to `out`
 * (free with [`la_buffer_free`]) and the number of removed units to
 * `removed`.
 *
 * # Safety
 * `data` must point to `len` readable bytes; `scenario` and `unit` must be
 * NUL-terminated; `out` and `removed` writable.
 */
enum LaStatus la_filter_text(const uint8_t *data,
                             size_t len,
                             const char *scenario,
                             const char *unit,
                             struct LaBuffer *out,
                             uint64_t *removed);

#endif  /* LETALONE_H */
