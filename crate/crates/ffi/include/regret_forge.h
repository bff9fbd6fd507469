#ifndef REGRET_FORGE_H
#define REGRET_FORGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RfStatus {
  RF_STATUS_OK = 0,
  RF_STATUS_NULL_POINTER = 1,
  RF_STATUS_INVALID_ARGUMENT = 2,
  RF_STATUS_IO = 3,
  RF_STATUS_SOLVER = 4,
  RF_STATUS_PANIC = 5,
} RfStatus;

typedef struct RfDeep RfDeep;

typedef struct RfGame RfGame;

typedef struct RfTabular RfTabular;

// Exact tree sizes of a game.
typedef struct RfGameStats {
  uint64_t histories;
  uint64_t infosets;
  uint64_t terminals;
  uint64_t depth;
  uint64_t max_infoset_size;
} RfGameStats;

// Mean normalized reward of the first player with its 95% half-width.
typedef struct RfMatchResult {
  double mean;
  double half_width;
  uint64_t matches;
} RfMatchResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or an empty string. The
// pointer stays valid until the next failing call on the same thread.
const char *rf_last_error(void);

// Creates a game from its name, e.g. `"leduc"` or `"liars_dice:5"`.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a writable pointer.
enum RfStatus rf_game_new(const char *name, struct RfGame **out);

// # Safety
// `game` must come from [`rf_game_new`] and not be used afterwards. Null is ignored.
void rf_game_free(struct RfGame *game);

// Enumerates the whole tree. Slow for the largest games.
//
// # Safety
// `game` must be a live handle and `out` writable.
enum RfStatus rf_game_stats(const struct RfGame *game, struct RfGameStats *out);

// Creates an exact solver, `algo` being one of `cfr`, `cfr+`, `linear`,
// `dcfr`, `dcfr+`, `pcfr+`, `pdcfr+`.
//
// # Safety
// `game` must be a live handle, `algo` a NUL-terminated string, `out` writable.
enum RfStatus rf_tabular_new(const struct RfGame *game, const char *algo, struct RfTabular **out);

// # Safety
// `solver` must be a live handle.
enum RfStatus rf_tabular_iterate(struct RfTabular *solver, uint64_t iterations);

// Exploitability of the average strategy.
//
// # Safety
// `solver` must be a live handle and `out` writable.
enum RfStatus rf_tabular_exploitability(const struct RfTabular *solver, double *out);

// Writes the average strategy in the tabular text format.
//
// # Safety
// `solver` must be a live handle and `path` a NUL-terminated string.
enum RfStatus rf_tabular_save_policy(const struct RfTabular *solver, const char *path);

// # Safety
// `solver` must come from [`rf_tabular_new`] and not be used afterwards. Null is ignored.
void rf_tabular_free(struct RfTabular *solver);

// Creates a neural solver. `config` is TOML hyperparameter text or null for
// the defaults.
//
// # Safety
// `game` and `algo` must be NUL-terminated strings, `config` one or null,
// and `out` writable.
enum RfStatus rf_deep_new(const char *game,
                          const char *algo,
                          const char *config,
                          uint64_t seed,
                          struct RfDeep **out);

// # Safety
// `solver` must be a live handle.
enum RfStatus rf_deep_iterate(struct RfDeep *solver, uint64_t iterations);

// Fits the average-strategy network on the samples so far and reports its
// exploitability. Needs at least one completed iteration.
//
// # Safety
// `solver` must be a live handle and `out` writable.
enum RfStatus rf_deep_exploitability(const struct RfDeep *solver, double *out);

// # Safety
// `solver` must come from [`rf_deep_new`] and not be used afterwards. Null is ignored.
void rf_deep_free(struct RfDeep *solver);

// Exploitability of a saved tabular or network policy.
//
// # Safety
// `game` must be a live handle, `path` a NUL-terminated string, `out` writable.
enum RfStatus rf_policy_exploitability(const struct RfGame *game, const char *path, double *out);

// Plays `n` seat-alternating hands. Contenders are `policy:FILE`,
// `rule:STYLE` or `uniform`.
//
// # Safety
// `game` must be a live handle, `a` and `b` NUL-terminated strings, `out` writable.
enum RfStatus rf_head2head(const struct RfGame *game,
                           const char *a,
                           const char *b,
                           uint64_t n,
                           uint64_t seed,
                           struct RfMatchResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REGRET_FORGE_H */
