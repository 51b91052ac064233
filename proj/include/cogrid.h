#ifndef COGRID_H
#define COGRID_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Error codes double as process exit codes. */
#define CG_OK 0
#define CG_ERR_CONFIG 2
#define CG_ERR_IO 3
#define CG_ERR_RUNTIME 4

typedef struct cg_space cg_space;
typedef struct cg_episode cg_episode;

/* Library version string; storage owned by the library. */
const char* cg_version(void);

/* Frees a string returned by any cg_* function. NULL is a no-op. */
void cg_string_free(char* s);

/* Ground-truth key/query embeddings for S variables. Returns NULL on error
 * (details in *error if non-NULL; free with cg_string_free). */
cg_space* cg_space_create(uint64_t seed, int S, int d_o, int d_E, char** error);
void cg_space_free(cg_space* space);

/* JSON document with the full embedding matrices. */
char* cg_space_to_json(const cg_space* space, char** error);

/* Samples one episode. config_json carries the environment settings
 * ({"S","C","R","T","d_o","d_E","lambda","seed"}, all optional). */
cg_episode* cg_episode_sample(const cg_space* space, const char* config_json,
                              uint64_t episode_index, char** error);
void cg_episode_free(cg_episode* episode);

/* Episode as JSON: context, realizations, goal, observations. */
char* cg_episode_to_json(const cg_episode* episode, char** error);

/* Likelihood tensor of the episode as JSON. */
char* cg_episode_likelihood_json(const cg_episode* episode, char** error);

/* Belief trajectory for "joint" or "naive" as JSON:
 * {"goal": [[...]], "marginals": [[[...]]]}, T+1 snapshots. */
char* cg_episode_beliefs_json(const cg_episode* episode, const char* observer, char** error);

/* Runs one experiment subcommand ("generate", "observe", "fig2",
 * "hallucinate", "esn", "control") with a JSON config document, writing
 * output files plus manifest.json under out_dir. On success *files_json
 * (if non-NULL) receives a JSON array of written file names. Returns an
 * error code; *error carries the message. */
int cg_run(const char* command, const char* config_json, const char* out_dir, char** files_json,
           char** error);

#ifdef __cplusplus
}
#endif

#endif /* COGRID_H */
