#ifndef ENGINE_H
#define ENGINE_H

#include <stddef.h>
#include <stdint.h>

#define ENGINE_OK 0

#define ENGINE_ERR_UNSUPPORTED_PAIR 1

#define ENGINE_ERR_INVALID_ACTION 2

#define ENGINE_ERR_DIVERGED 3

#define ENGINE_ERR_MODE_CONFLICT 4

#define ENGINE_ERR_INTERACTION_REFUSED 5

#define ENGINE_ERR_NOT_FOUND 6

#define ENGINE_ERR_INVALID_GEOMETRY 7

#define ENGINE_ERR_CONFIG 8

#define ENGINE_ERR_EPISODE_FINISHED 9

#define ENGINE_ERR_NOT_RESET 10

#define ENGINE_ERR_PROTOCOL 11

#define ENGINE_ERR_IO 12

#define ENGINE_ERR_JSON 13

#define ENGINE_ERR_NULL -1

#define ENGINE_ERR_UTF8 -2

#define ENGINE_ERR_BUFFER_TOO_SMALL -3

#define ENGINE_ERR_PANIC -4

// Returned by [`engine_frame_decode`] when more bytes are needed.
#define ENGINE_INCOMPLETE 100

// Opaque environment handle.
typedef struct EngineEnv EngineEnv;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread, NUL-terminated, into
// `buf`. Returns the message length without the terminator.
//
// # Safety
// `buf` must be null or point to `cap` writable bytes.
size_t engine_last_error(char *buf, size_t cap);

// Library version as a static NUL-terminated string.
const char *engine_version(void);

// Creates an environment from a JSON config document; an empty string
// selects all defaults.
//
// # Safety
// `config_json` must be a NUL-terminated string and `out` a valid pointer.
int32_t engine_env_new(const char *config_json, struct EngineEnv **out);

// # Safety
// `env` must be null or a handle from [`engine_env_new`] not yet freed.
void engine_env_free(struct EngineEnv *env);

// # Safety
// `env` must be a live handle.
int32_t engine_env_reset(struct EngineEnv *env, uint64_t seed);

// Number of agents in the environment, or 0 for a null handle.
//
// # Safety
// `env` must be null or a live handle.
uint32_t engine_env_num_agents(const struct EngineEnv *env);

// Steps every agent. Agent `i` uses action kind `kinds[i]` with
// `lens[i]` values taken in order from the concatenated `values`.
// `rewards_out` receives one total reward per agent.
//
// # Safety
// Arrays must hold `n_agents` entries (`values` the sum of `lens`);
// `rewards_out` must hold `n_agents` floats and `done_out` may be null.
int32_t engine_env_step(struct EngineEnv *env,
                        const uint8_t *kinds,
                        const float *values,
                        const size_t *lens,
                        size_t n_agents,
                        float *rewards_out,
                        uint8_t *done_out);

// Copies the latest observation tensor `key` of `agent` into `buf`.
//
// # Safety
// `key` must be NUL-terminated; `buf` must hold `cap` floats.
int32_t engine_env_observation(const struct EngineEnv *env,
                               uint32_t agent,
                               const char *key,
                               float *buf,
                               size_t cap,
                               size_t *len_out);

// Copies the shape of observation `key` of `agent` into `dims`.
//
// # Safety
// `key` must be NUL-terminated; `dims` must hold `cap` values.
int32_t engine_env_observation_shape(const struct EngineEnv *env,
                                     uint32_t agent,
                                     const char *key,
                                     uint32_t *dims,
                                     size_t cap,
                                     size_t *ndim_out);

// Copies the info JSON of the last step (`{}` after reset), without a
// terminator.
//
// # Safety
// `buf` must hold `cap` bytes.
int32_t engine_env_info(const struct EngineEnv *env, char *buf, size_t cap, size_t *len_out);

// Copies the observation and action spec as JSON, without a terminator.
//
// # Safety
// `buf` must hold `cap` bytes.
int32_t engine_env_spec_json(const struct EngineEnv *env, char *buf, size_t cap, size_t *len_out);

// Encodes one wire frame into `out`.
//
// # Safety
// `payload` must hold `payload_len` bytes and `out` `cap` bytes.
int32_t engine_frame_encode(uint16_t env_id,
                            uint8_t msg_type,
                            const uint8_t *payload,
                            size_t payload_len,
                            uint8_t *out,
                            size_t cap,
                            size_t *len_out);

// Decodes the frame at the front of `buf`. On success the payload is
// `buf[payload_offset .. payload_offset + payload_len]` and `consumed`
// bytes belong to the frame. Returns `ENGINE_INCOMPLETE` when more bytes
// are needed.
//
// # Safety
// `buf` must hold `len` bytes; the output pointers must be valid.
int32_t engine_frame_decode(const uint8_t *buf,
                            size_t len,
                            uint16_t *env_id,
                            uint8_t *msg_type,
                            size_t *payload_offset,
                            size_t *payload_len,
                            size_t *consumed);

// Generates a dataset (`image`, `bbox`, `distance`, `sound` or `tactile`)
// into `out_dir`.
//
// # Safety
// `kind` and `out_dir` must be NUL-terminated strings.
int32_t engine_dataset_generate(const char *kind, size_t n, uint64_t seed, const char *out_dir);

// Tactile response of one taxel for displacement `d`.
double engine_tactile_response(double d, double d_max);

// Spherical-head interaural time difference in seconds.
double engine_woodworth_itd(double head_radius, double speed_of_sound, double theta);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENGINE_H */
