/* C interface to the architecture-optimization library.
 *
 * All inputs and outputs are JSON (or CSV for training records) encoded as
 * NUL-terminated UTF-8 strings. Output strings are heap-allocated; release
 * them with archopt_string_free. Every call returns a status code; on
 * failure, archopt_last_error(session) holds a human-readable message.
 *
 * Sessions are cheap and not thread-safe; use one per thread.
 */
#ifndef ARCHOPT_H
#define ARCHOPT_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct archopt_session archopt_session;

typedef enum archopt_status {
  ARCHOPT_OK = 0,
  ARCHOPT_INTERNAL = 1,
  ARCHOPT_PARSE_ERROR = 2,
  ARCHOPT_VALIDATION_ERROR = 3,
  ARCHOPT_INFEASIBLE = 4,
  ARCHOPT_NON_CONVERGENCE = 5
} archopt_status;

archopt_session* archopt_session_new(void);
void archopt_session_free(archopt_session* session);

/* Message describing the most recent failure on this session, or "". */
const char* archopt_last_error(const archopt_session* session);

const char* archopt_version(void);
void archopt_string_free(char* str);

/* Loss prediction.
 * arch_json: architecture object.
 * coeffs_json: coefficient object, or "\"reference\"" for the built-in preset,
 *              or NULL for the same.
 * Output: {"loss", "terms": {...}}. */
archopt_status archopt_predict_loss(archopt_session* session, const char* arch_json,
                                    const char* coeffs_json, char** out_json);

/* Roofline latency/memory report.
 * options_json (optional): {"mode": "dominant"|"full"}.
 * Output: latency totals, memory footprint, per-operator breakdowns. */
archopt_status archopt_predict_latency(archopt_session* session, const char* arch_json,
                                       const char* hardware_json, const char* workload_json,
                                       const char* options_json, char** out_json);

/* Constraint-regime classification and closed-form optimal architectures.
 * request_json: {
 *   "coeffs": object or "reference",
 *   "hardware": object, "workload": object,
 *   "targets": {"t_prefill"?: s, "t_decode"?: s, "t_total"?: s},
 *   "case": "auto"|"d1"|"d2"|"d3"|"p1"|"p2"|"p3",
 *   "rho_min"?: number,
 *   "width"?: {"mode": "sweep"|"fixed"|"continuous", "value"?: n, "grid"?: [...]},
 *   "verify"?: bool   // run the brute-force oracle and report the loss gap
 * }
 * Output: solution JSON with regime report; "oracle" block when verified. */
archopt_status archopt_solve(archopt_session* session, const char* request_json,
                             char** out_json);

/* Loss-latency Pareto frontier.
 * request_json: {
 *   "coeffs": object or "reference",
 *   "hardware": object, "workload": object,
 *   "space"?: search-space object (default grid when absent),
 *   "objective": "prefill"|"decode"|"total",
 *   "precision": "fp16"|"int8",
 *   "options"?: {"seed", "initial", "gap_k", "max_rounds", "enumerate", "mode"}
 * } */
archopt_status archopt_pareto(archopt_session* session, const char* request_json,
                              char** out_json);

/* Scaling-law fit.
 * records_csv: header layers,width,ffn_ratio,activation_rate,gqa,loss.
 * options_json (optional): {"seed", "holdout_fraction", "multistarts"}.
 * Output: {"coeffs": {...}, "report": {...}}. */
archopt_status archopt_fit(archopt_session* session, const char* records_csv,
                           const char* options_json, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* ARCHOPT_H */
