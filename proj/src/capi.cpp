#include "cogrid.h"

#include <cstring>
#include <new>
#include <string>

#include "core/experiments.hpp"
#include "core/observers.hpp"

using namespace cogrid;

struct cg_space {
  EmbeddingSpace space;
};

struct cg_episode {
  Episode episode;
};

namespace {

char* dup_string(const std::string& s) {
  char* out = new (std::nothrow) char[s.size() + 1];
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_error(char** error, const std::string& message) {
  if (error) *error = dup_string(message);
}

int classify(const std::exception& e, char** error) {
  set_error(error, e.what());
  if (dynamic_cast<const ConfigError*>(&e)) return CG_ERR_CONFIG;
  if (dynamic_cast<const IoError*>(&e)) return CG_ERR_IO;
  if (dynamic_cast<const json::exception*>(&e)) return CG_ERR_CONFIG;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return CG_ERR_CONFIG;
  return CG_ERR_RUNTIME;
}

EnvConfig env_from_config_string(const char* config_json) {
  json doc = config_json && *config_json ? json::parse(config_json) : json::object();
  json wrapped = json::object();
  wrapped["env"] = doc;
  return ExperimentConfig::from_json(wrapped).env;
}

}  // namespace

extern "C" {

const char* cg_version(void) { return kToolVersion; }

void cg_string_free(char* s) { delete[] s; }

cg_space* cg_space_create(uint64_t seed, int S, int d_o, int d_E, char** error) {
  try {
    if (S < 1 || d_o < 1 || d_E < d_o) throw ConfigError("require S >= 1, d_o >= 1, d_E >= d_o");
    auto* out = new cg_space{create_embeddings(seed, S, d_o, d_E)};
    return out;
  } catch (const std::exception& e) {
    set_error(error, e.what());
    return nullptr;
  }
}

void cg_space_free(cg_space* space) { delete space; }

char* cg_space_to_json(const cg_space* space, char** error) {
  try {
    if (!space) throw ConfigError("null space");
    return dup_string(embedding_space_to_json(space->space).dump());
  } catch (const std::exception& e) {
    set_error(error, e.what());
    return nullptr;
  }
}

cg_episode* cg_episode_sample(const cg_space* space, const char* config_json,
                              uint64_t episode_index, char** error) {
  try {
    if (!space) throw ConfigError("null space");
    EnvConfig env = env_from_config_string(config_json);
    if (env.S != space->space.S || env.d_o != space->space.d_o || env.d_E != space->space.d_E)
      throw ConfigError("episode config dimensions do not match the embedding space");
    return new cg_episode{sample_episode(space->space, env, episode_index)};
  } catch (const std::exception& e) {
    set_error(error, e.what());
    return nullptr;
  }
}

void cg_episode_free(cg_episode* episode) { delete episode; }

char* cg_episode_to_json(const cg_episode* episode, char** error) {
  try {
    if (!episode) throw ConfigError("null episode");
    return dup_string(episode_to_json(episode->episode).dump());
  } catch (const std::exception& e) {
    set_error(error, e.what());
    return nullptr;
  }
}

char* cg_episode_likelihood_json(const cg_episode* episode, char** error) {
  try {
    if (!episode) throw ConfigError("null episode");
    const Episode& ep = episode->episode;
    return dup_string(likelihood_to_json(ep.likelihood, ep.context, ep.lambda).dump());
  } catch (const std::exception& e) {
    set_error(error, e.what());
    return nullptr;
  }
}

char* cg_episode_beliefs_json(const cg_episode* episode, const char* observer, char** error) {
  try {
    if (!episode) throw ConfigError("null episode");
    std::string name = observer ? observer : "";
    ObserverKind kind;
    if (name == "joint") kind = ObserverKind::Joint;
    else if (name == "naive") kind = ObserverKind::Naive;
    else throw ConfigError("observer must be joint or naive");
    BeliefTrajectory traj = run_trajectory(episode->episode, kind);
    json marginals = json::array();
    for (const auto& m : traj.marginals) marginals.push_back(real_matrix(m));
    json out{{"observer", name}, {"goal", real_matrix(traj.goal)}, {"marginals", marginals}};
    return dup_string(out.dump());
  } catch (const std::exception& e) {
    set_error(error, e.what());
    return nullptr;
  }
}

int cg_run(const char* command, const char* config_json, const char* out_dir, char** files_json,
           char** error) {
  try {
    if (!command || !*command) throw ConfigError("null command");
    if (!out_dir || !*out_dir) throw ConfigError("null output directory");
    json doc;
    try {
      doc = config_json && *config_json ? json::parse(config_json) : json::object();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig cfg = ExperimentConfig::from_json(doc);
    ExperimentRunner runner(cfg, out_dir);
    std::vector<std::string> files = runner.run(command);
    if (files_json) {
      json arr = json::array();
      for (const auto& f : files) arr.push_back(f);
      *files_json = dup_string(arr.dump());
    }
    return CG_OK;
  } catch (const std::exception& e) {
    return classify(e, error);
  }
}

}  // extern "C"
