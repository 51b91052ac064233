#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cogrid.h"

namespace {

using nlohmann::json;

struct GlobalOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out_dir = ".";
};

struct CommonOverrides {
  std::optional<int> episodes;
  std::optional<int> context_size;
  std::optional<std::string> episodes_out;
  std::optional<std::string> beliefs_out;
  std::optional<std::string> metrics_out;
};

struct EsnOverrides {
  std::optional<int> n_hidden;
  std::optional<double> spectral_radius;
  std::optional<double> ridge;
  std::optional<int> train_episodes;
  std::optional<int> test_episodes;
};

struct ControlOverrides {
  std::optional<std::string> condition;
  std::optional<std::uint64_t> omega_seed;
  std::optional<int> episodes;
  std::optional<int> batch;
  std::optional<double> lr;
  std::optional<double> beta;
  std::optional<double> beta_decay;
};

int fail(int code, const std::string& message) {
  std::fprintf(stderr, "error: %s\n", message.c_str());
  return code;
}

int load_config(const GlobalOpts& opts, json& doc) {
  doc = json::object();
  if (opts.config_path.empty()) return CG_OK;
  std::ifstream in(opts.config_path, std::ios::binary);
  if (!in) return fail(CG_ERR_IO, "cannot read config file: " + opts.config_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    doc = json::parse(buf.str());
  } catch (const std::exception& e) {
    return fail(CG_ERR_CONFIG, "config parse error: " + std::string(e.what()));
  }
  if (!doc.is_object()) return fail(CG_ERR_CONFIG, "config root must be a JSON object");
  return CG_OK;
}

void apply_overrides(json& doc, const GlobalOpts& g, const CommonOverrides& c, const EsnOverrides& e,
                     const ControlOverrides& ctl) {
  if (g.seed) doc["seed"] = *g.seed;
  if (g.workers) doc["workers"] = *g.workers;
  if (c.episodes) doc["episodes"] = *c.episodes;
  if (c.context_size) doc["env"]["C"] = *c.context_size;
  if (c.episodes_out) doc["outputs"]["episodes"] = *c.episodes_out;
  if (c.beliefs_out) doc["outputs"]["beliefs"] = *c.beliefs_out;
  if (c.metrics_out) doc["outputs"]["metrics"] = *c.metrics_out;
  if (e.n_hidden) doc["esn"]["n_hidden"] = *e.n_hidden;
  if (e.spectral_radius) doc["esn"]["spectral_radius"] = *e.spectral_radius;
  if (e.ridge) doc["esn"]["ridge"] = *e.ridge;
  if (e.train_episodes) doc["esn"]["train_episodes"] = *e.train_episodes;
  if (e.test_episodes) doc["esn"]["test_episodes"] = *e.test_episodes;
  if (ctl.condition) doc["control"]["condition"] = *ctl.condition;
  if (ctl.omega_seed) doc["control"]["omega_seed"] = *ctl.omega_seed;
  if (ctl.episodes) doc["control"]["episodes"] = *ctl.episodes;
  if (ctl.batch) doc["control"]["batch"] = *ctl.batch;
  if (ctl.lr) doc["control"]["lr"] = *ctl.lr;
  if (ctl.beta) doc["control"]["beta"] = *ctl.beta;
  if (ctl.beta_decay) doc["control"]["beta_decay"] = *ctl.beta_decay;
}

int dispatch(const std::string& command, const GlobalOpts& g, const CommonOverrides& c,
             const EsnOverrides& e, const ControlOverrides& ctl) {
  json doc;
  int rc = load_config(g, doc);
  if (rc != CG_OK) return rc;
  apply_overrides(doc, g, c, e, ctl);

  char* files = nullptr;
  char* error = nullptr;
  rc = cg_run(command.c_str(), doc.dump().c_str(), g.out_dir.c_str(), &files, &error);
  if (rc != CG_OK) {
    std::string message = error ? error : "unknown error";
    cg_string_free(error);
    cg_string_free(files);
    return fail(rc, message);
  }
  if (files) {
    try {
      json arr = json::parse(files);
      for (const auto& f : arr)
        std::printf("wrote %s/%s\n", g.out_dir.c_str(), f.get<std::string>().c_str());
    } catch (...) {
    }
    cg_string_free(files);
  }
  return CG_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cognitive gridworld experiment runner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cg_version()));

  GlobalOpts g;
  CommonOverrides c;
  EsnOverrides e;
  ControlOverrides ctl;

  app.add_option("--config", g.config_path, "JSON config file; flags override its fields");
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--workers", g.workers, "Worker thread count");
  app.add_option("--out", g.out_dir, "Output directory");

  auto add_common = [&](CLI::App* sub, bool with_beliefs) {
    sub->fallthrough();
    sub->add_option("--episodes", c.episodes, "Episode count");
    sub->add_option("--context-size", c.context_size, "Context size C");
    if (with_beliefs) {
      sub->add_option("--beliefs-out", c.beliefs_out, "Belief trajectory CSV file name");
      sub->add_option("--metrics-out", c.metrics_out, "Metric CSV file name");
    }
  };

  CLI::App* generate = app.add_subcommand("generate", "Sample episodes to JSON lines");
  add_common(generate, false);
  generate->add_option("--episodes-out", c.episodes_out, "Episode JSONL file name");

  CLI::App* observe = app.add_subcommand("observe", "Run observers and export beliefs and metrics");
  add_common(observe, true);

  CLI::App* fig2 = app.add_subcommand("fig2", "Accuracy and factorization-regret sweep over context sizes");
  add_common(fig2, false);

  CLI::App* hallucinate = app.add_subcommand("hallucinate", "Per-step hit distributions");
  add_common(hallucinate, false);

  CLI::App* esn = app.add_subcommand("esn", "Train and evaluate the echo state network");
  esn->fallthrough();
  esn->add_option("--n-hidden", e.n_hidden, "Reservoir size");
  esn->add_option("--spectral-radius", e.spectral_radius, "Recurrent spectral radius");
  esn->add_option("--ridge", e.ridge, "Readout ridge penalty");
  esn->add_option("--train-episodes", e.train_episodes, "Training episode count");
  esn->add_option("--test-episodes", e.test_episodes, "Test episode count");

  CLI::App* control = app.add_subcommand("control", "Train the intrinsic-reward controller");
  control->fallthrough();
  control->add_option("--condition", ctl.condition, "online or offline-oracle")
      ->check(CLI::IsMember({"online", "offline-oracle"}));
  control->add_option("--omega-seed", ctl.omega_seed, "Preference seed base");
  control->add_option("--episodes", ctl.episodes, "Policy updates per run");
  control->add_option("--batch", ctl.batch, "Samples per update");
  control->add_option("--lr", ctl.lr, "Learning rate");
  control->add_option("--beta", ctl.beta, "Initial entropy bonus");
  control->add_option("--beta-decay", ctl.beta_decay, "Entropy bonus decay per update");

  CLI11_PARSE(app, argc, argv);

  for (CLI::App* sub : app.get_subcommands()) return dispatch(sub->get_name(), g, c, e, ctl);
  return CG_ERR_CONFIG;
}
