#ifndef TOPICIRT_H
#define TOPICIRT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

// Cell codes accepted by [`tirt_matrix_new`].
#define TIRT_CELL_INCORRECT 0

#define TIRT_CELL_CORRECT 1

#define TIRT_CELL_MISSING -1

typedef enum TirtStatus {
  TIRT_STATUS_OK = 0,
  TIRT_STATUS_NULL_POINTER = 1,
  TIRT_STATUS_INVALID_ARGUMENT = 2,
  TIRT_STATUS_INVALID_UTF8 = 3,
  TIRT_STATUS_OUT_OF_RANGE = 4,
  // The quantity is undefined for this input (for example reliability
  // when every ability estimate is equal).
  TIRT_STATUS_UNDEFINED = 5,
  TIRT_STATUS_FIT_FAILED = 6,
  TIRT_STATUS_PANIC = 7,
} TirtStatus;

// Item state after fitting.
typedef enum TirtItemStatus {
  TIRT_ITEM_STATUS_FITTED = 0,
  TIRT_ITEM_STATUS_EXCLUDED_ZERO_ACCURACY = 1,
  TIRT_ITEM_STATUS_EXCLUDED_PERFECT_ACCURACY = 2,
  TIRT_ITEM_STATUS_NOT_CONVERGED = 3,
} TirtItemStatus;

// Outcome of answer parsing. `Letter` comes with the letter itself.
typedef enum TirtAnswer {
  TIRT_ANSWER_LETTER = 0,
  TIRT_ANSWER_DEVIATION = 1,
  TIRT_ANSWER_NO_RESPONSE = 2,
} TirtAnswer;

// Opaque fitted topic.
typedef struct TirtFit TirtFit;

// Opaque response matrix.
typedef struct TirtMatrix TirtMatrix;

// Settings for [`tirt_fit_2pl`]. Start from [`tirt_fit_options_default`].
typedef struct TirtFitOptions {
  size_t grid_nodes;
  double grid_half_span;
  double tol;
  size_t max_cycles;
} TirtFitOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or null if the last call
// succeeded.
const char *tirt_last_error(void);

// Frees a string returned by this library. Null is ignored.
void tirt_string_free(char *s);

// P(correct) = 1 / (1 + exp(-a (theta - b))).
enum TirtStatus tirt_prob_correct(double a, double b, double theta, double *out_p);

// Builds a matrix from row-major cell codes (`n_models * n_items` of them).
// Ids are generated as `m0, m1, ...` and `i0, i1, ...`.
enum TirtStatus tirt_matrix_new(size_t n_models,
                                size_t n_items,
                                const int8_t *cells,
                                struct TirtMatrix **out_matrix);

// Parses a matrix document (`model_ids`, `item_ids`, `rows` of `1`/`0`/`.`).
enum TirtStatus tirt_matrix_from_json(const char *json, struct TirtMatrix **out_matrix);

void tirt_matrix_free(struct TirtMatrix *matrix);

struct TirtFitOptions tirt_fit_options_default(void);

// Fits a 2PL model. `options` may be null for the defaults.
enum TirtStatus tirt_fit_2pl(const struct TirtMatrix *matrix,
                             const struct TirtFitOptions *options,
                             struct TirtFit **out_fit);

void tirt_fit_free(struct TirtFit *fit);

// Number of items, excluded ones included. Zero for a null handle.
size_t tirt_fit_n_items(const struct TirtFit *fit);

// Number of models. Zero for a null handle.
size_t tirt_fit_n_models(const struct TirtFit *fit);

// Parameters of item `index`, in matrix column order. Excluded items
// report a = b = 0.
enum TirtStatus tirt_fit_item(const struct TirtFit *fit,
                              size_t index,
                              double *out_a,
                              double *out_b,
                              enum TirtItemStatus *out_status);

// EAP ability and posterior sd of model `index`, in matrix row order.
enum TirtStatus tirt_fit_ability(const struct TirtFit *fit,
                                 size_t index,
                                 double *out_theta,
                                 double *out_se);

// Marginal reliability; `Undefined` when the abilities have no spread.
enum TirtStatus tirt_fit_reliability(const struct TirtFit *fit, double *out_r);

// 1 if EM met its tolerance, 0 otherwise or for a null handle.
int32_t tirt_fit_converged(const struct TirtFit *fit);

// The whole fit as a JSON document. Free with [`tirt_string_free`].
enum TirtStatus tirt_fit_to_json(const struct TirtFit *fit, char **out_json);

// Strict answer parsing. `allowed` lists the option letters (`"ABCD"`).
// On `Letter`, `out_letter` receives it; otherwise it is set to 0.
enum TirtStatus tirt_parse_answer(const char *raw,
                                  const char *allowed,
                                  enum TirtAnswer *out_kind,
                                  char *out_letter);

// Renders the evaluation prompt for one question given as a JSON line
// (`id`, `source`, `question`, `options`, `answer`). Free the result with
// [`tirt_string_free`].
enum TirtStatus tirt_render_prompt(const char *question_json, char **out_prompt);

// Efficiency ratios and Pareto dominance for `n` models.
//
// Inputs are composite ability, total cost in USD and mean latency in
// seconds. Outputs (each `n` long) are ability per dollar, ability per
// second and 1 for dominated models, 0 for frontier members. Objectives
// are maximized jointly over (theta, theta/$, theta/s).
enum TirtStatus tirt_pareto(size_t n,
                            const double *theta,
                            const double *cost_usd,
                            const double *latency_secs,
                            double *out_per_dollar,
                            double *out_per_second,
                            uint8_t *out_dominated);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOPICIRT_H */
