#ifndef STOCHGAME_H
#define STOCHGAME_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. `SG_STATUS_OK` is zero.
typedef enum {
  SG_STATUS_OK = 0,
  SG_STATUS_NULL_POINTER = 1,
  SG_STATUS_INVALID_UTF8 = 2,
  SG_STATUS_IO = 3,
  SG_STATUS_PARSE = 4,
  SG_STATUS_VALIDATION = 5,
  SG_STATUS_INDEX_OUT_OF_RANGE = 6,
  SG_STATUS_STRATEGY = 7,
  SG_STATUS_NUMERICAL = 8,
  SG_STATUS_BUFFER_TOO_SMALL = 9,
  SG_STATUS_PANIC = 10,
} SgStatus;

// An immutable game loaded from JSON.
typedef struct SgGame SgGame;

// Informed player's security strategy with the game value.
typedef struct SgInformed SgInformed;

// Uninformed player's security strategy with value and initial regret.
typedef struct SgUninformed SgUninformed;

// Summary of a Monte Carlo run.
typedef struct {
  uint64_t runs;
  double mean;
  double std_error;
  // Exact expected payoff of the strategy pair.
  double game_value;
} SgSimReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` as a
// NUL-terminated string, truncating to `len - 1` bytes. Returns the full
// message length in bytes, excluding the terminator.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t sg_last_error_message(char *buf, size_t len);

// Parses a game from a NUL-terminated JSON document.
//
// # Safety
// `json` must be a valid C string; `out` must be writable.
SgStatus sg_game_from_json(const char *json, SgGame **out);

// Loads a game from a JSON file.
//
// # Safety
// `path` must be a valid C string; `out` must be writable.
SgStatus sg_game_load(const char *path, SgGame **out);

// Returns a copy of `game` with a different horizon.
//
// # Safety
// `game` must be a live handle; `out` must be writable.
SgStatus sg_game_with_horizon(const SgGame *game, size_t horizon, SgGame **out);

// Returns a copy of `game` with a different initial distribution.
//
// # Safety
// `game` must be a live handle; `probs` must point to `len` values.
SgStatus sg_game_with_initial(const SgGame *game, const double *probs, size_t len, SgGame **out);

// Releases a game. Null is ignored.
//
// # Safety
// `game` must be null or a handle not yet freed.
void sg_game_free(SgGame *game);

// Writes the number of states, actions of each player and the horizon.
// Any output pointer may be null.
//
// # Safety
// `game` must be a live handle.
SgStatus sg_game_dims(const SgGame *game,
                      size_t *num_states,
                      size_t *num_actions_p1,
                      size_t *num_actions_p2,
                      size_t *horizon);

// Solves the informed player's LP.
//
// # Safety
// `game` must be a live handle; `out` must be writable.
SgStatus sg_solve_informed(const SgGame *game, SgInformed **out);

// # Safety
// `sol` must be a live handle; `out` must be writable.
SgStatus sg_informed_value(const SgInformed *sol, double *out);

// Copies `sigma_stage(state, history)` into `out`. `stage` is 1-based and
// `history` is the ordinal of the informed player's past actions.
//
// # Safety
// `sol` must be a live handle; `out` must point to `len` writable values.
SgStatus sg_informed_mix(const SgInformed *sol,
                         size_t stage,
                         size_t history,
                         size_t state,
                         double *out,
                         size_t len);

// Releases an informed solution. Null is ignored.
//
// # Safety
// `sol` must be null or a handle not yet freed.
void sg_informed_free(SgInformed *sol);

// Solves the uninformed player's LP.
//
// # Safety
// `game` must be a live handle; `out` must be writable.
SgStatus sg_solve_uninformed(const SgGame *game, SgUninformed **out);

// # Safety
// `sol` must be a live handle; `out` must be writable.
SgStatus sg_uninformed_value(const SgUninformed *sol, double *out);

// Copies `tau_stage(history)` into `out`. `stage` is 1-based.
//
// # Safety
// `sol` must be a live handle; `out` must point to `len` writable values.
SgStatus sg_uninformed_mix(const SgUninformed *sol,
                           size_t stage,
                           size_t history,
                           double *out,
                           size_t len);

// Copies the initial regret vector, one entry per state, into `out`.
//
// # Safety
// `sol` must be a live handle; `out` must point to `len` writable values.
SgStatus sg_uninformed_initial_regret(const SgUninformed *sol, double *out, size_t len);

// Releases an uninformed solution. Null is ignored.
//
// # Safety
// `sol` must be null or a handle not yet freed.
void sg_uninformed_free(SgUninformed *sol);

// Value of the dual game with initial vector payoff `alpha` over
// `horizon` stages.
//
// # Safety
// `game` must be a live handle; `alpha` must point to `len` values.
SgStatus sg_dual_value(const SgGame *game,
                       size_t horizon,
                       const double *alpha,
                       size_t len,
                       double *out);

// Plays `runs` independent games between the two solutions. Results are
// a pure function of `(game, strategies, runs, seed)`.
//
// # Safety
// All handles must be live; `out` must be writable.
SgStatus sg_simulate(const SgGame *game,
                     const SgInformed *informed,
                     const SgUninformed *uninformed,
                     uint64_t runs,
                     uint64_t seed,
                     SgSimReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STOCHGAME_H */
