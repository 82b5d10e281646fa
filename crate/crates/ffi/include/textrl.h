#ifndef TEXTRL_H
#define TEXTRL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TrlStatus {
  TRL_STATUS_OK = 0,
  TRL_STATUS_NULL_POINTER = 1,
  TRL_STATUS_INVALID_UTF8 = 2,
  TRL_STATUS_INVALID_ARGUMENT = 3,
  TRL_STATUS_INVALID_WORLD = 4,
  TRL_STATUS_PARSE_ERROR = 5,
  TRL_STATUS_EPISODE_OVER = 6,
  TRL_STATUS_INVALID_CHECKPOINT = 7,
  TRL_STATUS_ALPHABET_MISMATCH = 8,
  TRL_STATUS_INTERNAL = 9,
} TrlStatus;

// A trained policy acting greedily.
typedef struct TrlAgent TrlAgent;

// A world and its current episode.
typedef struct TrlWorld TrlWorld;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Loads a world from a JSON document, or by bundled name such as
// `"fetch-quest-3"`. The episode starts reset.
//
// # Safety
// `source` must be a NUL-terminated string; `out` must be writable.
enum TrlStatus trl_world_load(const char *source, struct TrlWorld **out);

// Starts a new episode; writes the initial observation as JSON.
//
// # Safety
// `world` must come from [`trl_world_load`]; `obs_json` may be null.
enum TrlStatus trl_world_reset(struct TrlWorld *world, char **obs_json);

// Parses `input` and applies it. Unparseable input returns
// `ParseError` and does not advance the episode.
//
// # Safety
// `world` must come from [`trl_world_load`]; `input` must be a
// NUL-terminated string; `obs_json` may be null.
enum TrlStatus trl_world_step_text(struct TrlWorld *world, const char *input, char **obs_json);

// Applies the command at `action` in the world's action alphabet.
//
// # Safety
// `world` must come from [`trl_world_load`]; `obs_json` may be null.
enum TrlStatus trl_world_step_action(struct TrlWorld *world, uint32_t action, char **obs_json);

// Writes the current observation as JSON.
//
// # Safety
// `world` must come from [`trl_world_load`]; `obs_json` must be writable.
enum TrlStatus trl_world_observation(struct TrlWorld *world, char **obs_json);

// Writes the admissible commands as a JSON array of input strings.
//
// # Safety
// `world` must come from [`trl_world_load`]; `out_json` must be writable.
enum TrlStatus trl_world_admissible(struct TrlWorld *world, char **out_json);

// Number of commands in the world's action alphabet.
//
// # Safety
// `world` must come from [`trl_world_load`]; `out` must be writable.
enum TrlStatus trl_world_action_count(struct TrlWorld *world, uint32_t *out);

// # Safety
// `world` must come from [`trl_world_load`] and not be used afterwards.
void trl_world_free(struct TrlWorld *world);

// Loads a trained agent from checkpoint JSON text.
//
// # Safety
// `checkpoint_json` must be a NUL-terminated string; `out` must be writable.
enum TrlStatus trl_agent_load(const char *checkpoint_json, struct TrlAgent **out);

// Chooses a command for the world's current observation and writes its
// input string. The world is not stepped.
//
// # Safety
// `agent` and `world` must be live handles; `command_out` must be writable.
enum TrlStatus trl_agent_act(struct TrlAgent *agent, struct TrlWorld *world, char **command_out);

// # Safety
// `agent` must come from [`trl_agent_load`] and not be used afterwards.
void trl_agent_free(struct TrlAgent *agent);

// Evaluates the uniform random agent for `n_episodes` on fresh episodes of
// the world; writes the evaluation report as JSON. The world's own episode
// is untouched.
//
// # Safety
// `world` must be a live handle; `report_json` must be writable.
enum TrlStatus trl_evaluate_random(struct TrlWorld *world,
                                   uint32_t n_episodes,
                                   uint64_t seed,
                                   char **report_json);

// Evaluates a trained agent greedily, as [`trl_evaluate_random`].
//
// # Safety
// `agent` and `world` must be live handles; `report_json` must be writable.
enum TrlStatus trl_evaluate_agent(struct TrlAgent *agent,
                                  struct TrlWorld *world,
                                  uint32_t n_episodes,
                                  uint64_t seed,
                                  char **report_json);

// Message for the last failed call on this thread; empty after a success.
// Valid until the next call on this thread. Never null.
const char *trl_last_error(void);

// # Safety
// `s` must be null or a string returned by this library, freed once.
void trl_string_free(char *s);

// Library version string. Static; do not free.
const char *trl_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TEXTRL_H */
