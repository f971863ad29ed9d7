#ifndef TROPEDWARDS_H
#define TROPEDWARDS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Success.
 */
#define TE_OK 0

/**
 * Unexpected internal failure (null argument, invalid UTF-8, panic).
 */
#define TE_ERR_INTERNAL 1

/**
 * A truncation did not determine the requested quantity.
 */
#define TE_ERR_PRECISION 2

/**
 * Degenerate or refused input (non-smooth curve, undefined delta, ...).
 */
#define TE_ERR_REFUSED 3

/**
 * Expression or JSON input failed to parse.
 */
#define TE_ERR_PARSE 4

/**
 * Opaque run configuration.
 */
typedef struct TeConfig TeConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create a configuration with the default horizon (24), sampling step
 * (1/16) and fit order (8).
 */
struct TeConfig *te_config_new(void);

/**
 * Release a configuration. Passing NULL is a no-op.
 *
 * # Safety
 * `cfg` must be NULL or a pointer returned by [`te_config_new`] that
 * has not been freed yet.
 */
void te_config_free(struct TeConfig *cfg);

/**
 * Set the truncation horizon as a rational num/den in q-exponent units.
 *
 * # Safety
 * `cfg` must be a live pointer from [`te_config_new`].
 */
int32_t te_config_set_horizon(struct TeConfig *cfg, int64_t num, int64_t den);

/**
 * Set the cycle sampling step 1/den.
 *
 * # Safety
 * `cfg` must be a live pointer from [`te_config_new`].
 */
int32_t te_config_set_step(struct TeConfig *cfg, int64_t den);

/**
 * Set the number of fitted theta-factor coefficients.
 *
 * # Safety
 * `cfg` must be a live pointer from [`te_config_new`].
 */
int32_t te_config_set_fit_order(struct TeConfig *cfg, int64_t order);

/**
 * Family coefficients, valuations and delta, as JSON.
 *
 * # Safety
 * `r_expr` and `s_expr` must be NUL-terminated strings; `out` must be a
 * valid pointer slot. `cfg` may be NULL for defaults.
 */
int32_t te_family_json(const struct TeConfig *cfg,
                       const char *r_expr,
                       const char *s_expr,
                       char **out);

/**
 * Full classification report, as JSON.
 *
 * # Safety
 * As for [`te_family_json`].
 */
int32_t te_classify_json(const struct TeConfig *cfg,
                         const char *r_expr,
                         const char *s_expr,
                         char **out);

/**
 * Cycle parametrization samples and reconstruction, as JSON.
 *
 * # Safety
 * As for [`te_family_json`].
 */
int32_t te_cycle_json(const struct TeConfig *cfg,
                      const char *r_expr,
                      const char *s_expr,
                      char **out);

/**
 * Exact identity suite, as JSON.
 *
 * # Safety
 * `out` must be a valid pointer slot; `cfg` may be NULL.
 */
int32_t te_verify_json(const struct TeConfig *cfg, char **out);

/**
 * Bruhat-Tits pipeline report, as JSON.
 *
 * # Safety
 * As for [`te_family_json`].
 */
int32_t te_bt_json(const struct TeConfig *cfg, const char *r_expr, const char *s_expr, char **out);

/**
 * Render a report JSON (classify, cycle, bt, or {"panels": [...]})
 * into an SVG document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` a valid pointer slot.
 */
int32_t te_render_svg(const char *json, char **out);

/**
 * Release a string returned by any command. Passing NULL is a no-op.
 *
 * # Safety
 * `s` must be NULL or a pointer previously handed out by this library.
 */
void te_string_free(char *s);

/**
 * The last error message on this thread, as a fresh string (release
 * with [`te_string_free`]); NULL when no error has been recorded.
 */
char *te_last_error(void);

/**
 * Static library version string; do not free.
 */
const char *te_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TROPEDWARDS_H */
