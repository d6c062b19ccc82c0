/* C interface to the congestexp library.
 *
 * Every call returns a cx_status; on failure cx_last_error() returns a
 * thread-local message. Handles are opaque and owned by the caller. Output
 * strings use a (buf, cap, needed) convention: `needed` receives the size
 * including the terminating NUL, and the text is written only if it fits. */
#ifndef CONGESTEXP_H
#define CONGESTEXP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CX_API __declspec(dllexport)
#else
#define CX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cx_status {
  CX_OK = 0,
  CX_ERR_VALIDATION = 1,
  CX_ERR_BUDGET = 2,
  CX_ERR_IO = 3,
  CX_ERR_INVARIANT = 4,
  CX_ERR_INVALID_ARGUMENT = 5,
  CX_ERR_INTERNAL = 6
} cx_status;

typedef struct cx_game cx_game;
typedef struct cx_policy cx_policy;
typedef struct cx_rng cx_rng;
typedef struct cx_nash_list cx_nash_list;

CX_API const char* cx_version(void);
CX_API const char* cx_last_error(void);

/* Games */
CX_API cx_status cx_game_load(const char* path, cx_game** out);
CX_API cx_status cx_game_from_json(const char* text, cx_game** out);
CX_API void cx_game_free(cx_game* game);
CX_API cx_status cx_game_dims(const cx_game* game, size_t* num_players, size_t* num_facilities,
                              size_t* k);
CX_API cx_status cx_game_to_json(const cx_game* game, char* buf, size_t cap, size_t* needed);
/* actions[i] is player i's facility bitmask. */
CX_API cx_status cx_game_player_reward(const cx_game* game, size_t player,
                                       const uint64_t* actions, size_t num_players,
                                       double* out);
/* marginals is row-major [player][facility]. */
CX_API cx_status cx_game_expected_welfare(const cx_game* game, const double* marginals,
                                          size_t len, double* out);

/* Pure Nash equilibria by enumeration (budget 0 selects the default). */
CX_API cx_status cx_find_nash(const cx_game* game, uint64_t budget, cx_nash_list** out);
CX_API void cx_nash_list_free(cx_nash_list* list);
CX_API size_t cx_nash_list_size(const cx_nash_list* list);
CX_API cx_status cx_nash_list_get(const cx_nash_list* list, size_t index, uint64_t* actions,
                                  size_t num_players, int* strict, double* gap);
CX_API cx_status cx_nash_list_to_json(const cx_nash_list* list, char* buf, size_t cap,
                                      size_t* needed);

/* Random streams */
CX_API cx_status cx_rng_create(uint64_t master_seed, uint64_t stream_index, cx_rng** out);
CX_API void cx_rng_free(cx_rng* rng);

/* Factored policies over all k-subsets. */
CX_API cx_status cx_policy_create(const double* scores, size_t num_facilities, size_t k,
                                  cx_policy** out);
CX_API void cx_policy_free(cx_policy* policy);
CX_API cx_status cx_policy_marginals(const cx_policy* policy, double* out, size_t len);
CX_API cx_status cx_policy_log_normalizer(const cx_policy* policy, double* out);
CX_API cx_status cx_policy_action_probability(const cx_policy* policy, uint64_t action,
                                              double* out);
CX_API cx_status cx_policy_sample(const cx_policy* policy, cx_rng* rng, uint64_t* out);

/* Harness entry points. They write their artifacts under out_dir. */
CX_API cx_status cx_simulate(const char* config_path, uint64_t seed, const char* out_dir);
/* threads = 0 keeps the grid file's setting. */
CX_API cx_status cx_sweep(const char* config_path, const char* grid_path, const char* out_dir,
                          size_t threads);
/* game_path may be NULL to use game.json next to the trace. out_path may be
 * NULL to write report.json next to the trace. */
CX_API cx_status cx_analyze(const char* trace_path, const char* game_path, double lambda,
                            double mu, int has_smoothness, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif
