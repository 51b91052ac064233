#include "core/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>

#include "core/metrics.hpp"
#include "core/parallel.hpp"

namespace cogrid {

const char* kToolVersion = "0.1.0";
const char* kRngAlgorithm = "splitmix64-counter; stream = hash(seed, name, index)";

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad value for \"") + key + "\": " + e.what());
    }
  }
}

EnvConfig env_from_json(const json& j) {
  check_keys(j, {"S", "C", "R", "T", "d_o", "d_E", "lambda", "seed"}, "env");
  EnvConfig env;
  read_field(j, "S", env.S);
  read_field(j, "C", env.C);
  read_field(j, "R", env.R);
  read_field(j, "T", env.T);
  read_field(j, "d_o", env.d_o);
  read_field(j, "d_E", env.d_E);
  read_field(j, "lambda", env.lambda);
  read_field(j, "seed", env.seed);
  return env;
}

EsnSettings esn_from_json(const json& j) {
  check_keys(j, {"n_hidden", "spectral_radius", "ridge", "train_episodes", "test_episodes", "sweep"},
             "esn");
  EsnSettings s;
  read_field(j, "n_hidden", s.n_hidden);
  read_field(j, "spectral_radius", s.spectral_radius);
  read_field(j, "ridge", s.ridge);
  read_field(j, "train_episodes", s.train_episodes);
  read_field(j, "test_episodes", s.test_episodes);
  read_field(j, "sweep", s.sweep);
  return s;
}

ControlSettings control_from_json(const json& j) {
  check_keys(j,
             {"condition", "omega_seed", "omega_count", "episodes", "batch", "lr", "beta",
              "beta_decay", "empirical_draws", "optimizer", "omega_support"},
             "control");
  ControlSettings s;
  read_field(j, "condition", s.condition);
  read_field(j, "omega_seed", s.omega_seed);
  read_field(j, "omega_count", s.omega_count);
  read_field(j, "episodes", s.episodes);
  read_field(j, "batch", s.batch);
  read_field(j, "lr", s.lr);
  read_field(j, "beta", s.beta);
  read_field(j, "beta_decay", s.beta_decay);
  read_field(j, "empirical_draws", s.empirical_draws);
  if (j.contains("optimizer")) {
    std::string opt = j.at("optimizer").get<std::string>();
    if (opt != "sgd" && opt != "adam") throw ConfigError("control.optimizer must be sgd or adam");
    s.adam = (opt == "adam");
  }
  if (j.contains("omega_support")) {
    std::string sup = j.at("omega_support").get<std::string>();
    if (sup != "binary" && sup != "uniform")
      throw ConfigError("control.omega_support must be binary or uniform");
    s.binary_omega = (sup == "binary");
  }
  return s;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

double standard_error(double sum, double sumsq, int n) {
  if (n < 2) return 0.0;
  double mean = sum / n;
  double var = (sumsq - n * mean * mean) / (n - 1);
  return std::sqrt(std::max(var, 0.0) / n);
}

double binomial_se(double p, int n) { return n > 0 ? std::sqrt(std::max(p * (1.0 - p), 0.0) / n) : 0.0; }

// Per-episode observation statistics shared by observe/fig2/hallucinate.
struct EpisodeStats {
  std::vector<char> joint_hit;   // length T+1
  std::vector<char> naive_hit;   // length T+1
  Eigen::VectorXd fr;            // length T+1
  Eigen::VectorXd joint_at_opt;  // B_tg(a*), length T+1
  Eigen::VectorXd naive_at_opt;  // length T+1
  Eigen::VectorXd disent;        // length T-1
};

EpisodeStats episode_stats(const Episode& ep) {
  BeliefTrajectory joint = run_trajectory(ep, ObserverKind::Joint);
  BeliefTrajectory naive = run_trajectory(ep, ObserverKind::Naive);
  const int T = static_cast<int>(joint.goal.rows()) - 1;
  const int opt = ep.optimal_action();

  EpisodeStats st;
  st.joint_hit.resize(T + 1);
  st.naive_hit.resize(T + 1);
  st.fr.resize(T + 1);
  st.joint_at_opt.resize(T + 1);
  st.naive_at_opt.resize(T + 1);
  for (int t = 0; t <= T; ++t) {
    Eigen::VectorXd jg = joint.goal.row(t);
    Eigen::VectorXd ng = naive.goal.row(t);
    st.joint_hit[t] = map_action(jg) == opt;
    st.naive_hit[t] = map_action(ng) == opt;
    st.fr(t) = factorization_regret(jg, ng);
    st.joint_at_opt(t) = jg(opt);
    st.naive_at_opt(t) = ng(opt);
  }
  std::vector<Eigen::MatrixXd> naive_ell(ep.likelihood.C);
  for (int c = 0; c < ep.likelihood.C; ++c) naive_ell[c] = marginal_likelihood(ep.likelihood, c);
  st.disent = disentanglement(joint, naive_ell, ep);
  return st;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  check_keys(doc,
             {"env", "sweep", "episodes", "observers", "outputs", "workers", "seed", "esn",
              "control", "histogram_bins"},
             "config");
  ExperimentConfig cfg;
  read_field(doc, "seed", cfg.master_seed);
  if (doc.contains("env")) cfg.env = env_from_json(doc.at("env"));
  if (!doc.contains("env") || !doc.at("env").contains("seed")) cfg.env.seed = cfg.master_seed;
  read_field(doc, "sweep", cfg.sweep);
  read_field(doc, "episodes", cfg.episodes);
  read_field(doc, "observers", cfg.observers);
  read_field(doc, "workers", cfg.workers);
  read_field(doc, "histogram_bins", cfg.histogram_bins);
  if (doc.contains("esn")) cfg.esn = esn_from_json(doc.at("esn"));
  if (doc.contains("control")) cfg.control = control_from_json(doc.at("control"));
  if (doc.contains("outputs")) {
    check_keys(doc.at("outputs"),
               {"episodes", "beliefs", "metrics", "summary", "fig2", "hallucination", "esn_curves",
                "esn_models", "control_curves", "control_detail"},
               "outputs");
    for (auto it = doc.at("outputs").begin(); it != doc.at("outputs").end(); ++it)
      cfg.outputs[it.key()] = it.value().get<std::string>();
  }

  require(cfg.env.S >= 1, "env.S must be >= 1");
  require(cfg.env.R >= 1, "env.R must be >= 1");
  require(cfg.env.T >= 1, "env.T must be >= 1");
  require(cfg.env.d_o >= 1, "env.d_o must be >= 1");
  require(cfg.env.d_E >= cfg.env.d_o, "env.d_E must be >= env.d_o");
  require(cfg.env.C >= 1 && cfg.env.C <= cfg.env.S, "env.C must be in [1, env.S]");
  require(std::isfinite(cfg.env.lambda), "env.lambda must be finite");
  require(cfg.episodes >= 1, "episodes must be >= 1");
  require(cfg.workers >= 1, "workers must be >= 1");
  require(cfg.histogram_bins >= 1, "histogram_bins must be >= 1");
  require(!cfg.sweep.empty(), "sweep must be non-empty");
  for (int c : cfg.sweep) require(c >= 1 && c <= cfg.env.S, "sweep entries must be in [1, env.S]");
  require(!cfg.observers.empty(), "observers must be non-empty");
  std::set<std::string> seen;
  for (const auto& o : cfg.observers) {
    require(o == "joint" || o == "naive", "observers entries must be joint or naive");
    require(seen.insert(o).second, "duplicate observer: " + o);
  }
  require(cfg.esn.n_hidden >= 1, "esn.n_hidden must be >= 1");
  require(cfg.esn.spectral_radius >= 0.0, "esn.spectral_radius must be >= 0");
  require(cfg.esn.ridge >= 0.0, "esn.ridge must be >= 0");
  require(cfg.esn.train_episodes >= 1, "esn.train_episodes must be >= 1");
  require(cfg.esn.test_episodes >= 1, "esn.test_episodes must be >= 1");
  require(!cfg.esn.sweep.empty(), "esn.sweep must be non-empty");
  for (int c : cfg.esn.sweep) require(c >= 1 && c <= cfg.env.S, "esn.sweep entries must be in [1, env.S]");
  require(cfg.control.condition == "online" || cfg.control.condition == "offline-oracle",
          "control.condition must be online or offline-oracle");
  require(cfg.control.omega_count >= 1, "control.omega_count must be >= 1");
  require(cfg.control.episodes >= 1, "control.episodes must be >= 1");
  require(cfg.control.batch >= 1, "control.batch must be >= 1");
  require(cfg.control.lr > 0.0, "control.lr must be > 0");
  require(cfg.control.beta >= 0.0, "control.beta must be >= 0");
  require(cfg.control.beta_decay > 0.0 && cfg.control.beta_decay <= 1.0,
          "control.beta_decay must be in (0, 1]");
  require(cfg.control.empirical_draws >= 1, "control.empirical_draws must be >= 1");
  return cfg;
}

json ExperimentConfig::to_json() const {
  json out_map = json::object();
  for (const auto& [k, v] : this->outputs) out_map[k] = v;
  return json{
      {"env",
       {{"S", env.S},
        {"C", env.C},
        {"R", env.R},
        {"T", env.T},
        {"d_o", env.d_o},
        {"d_E", env.d_E},
        {"lambda", env.lambda},
        {"seed", env.seed}}},
      {"sweep", sweep},
      {"episodes", episodes},
      {"observers", observers},
      {"outputs", out_map},
      {"workers", workers},
      {"seed", master_seed},
      {"histogram_bins", histogram_bins},
      {"esn",
       {{"n_hidden", esn.n_hidden},
        {"spectral_radius", esn.spectral_radius},
        {"ridge", esn.ridge},
        {"train_episodes", esn.train_episodes},
        {"test_episodes", esn.test_episodes},
        {"sweep", esn.sweep}}},
      {"control",
       {{"condition", control.condition},
        {"omega_seed", control.omega_seed},
        {"omega_count", control.omega_count},
        {"episodes", control.episodes},
        {"batch", control.batch},
        {"lr", control.lr},
        {"beta", control.beta},
        {"beta_decay", control.beta_decay},
        {"empirical_draws", control.empirical_draws},
        {"optimizer", control.adam ? "adam" : "sgd"},
        {"omega_support", control.binary_omega ? "binary" : "uniform"}}}};
}

ExperimentRunner::ExperimentRunner(ExperimentConfig config, std::filesystem::path out_dir)
    : cfg_(std::move(config)), out_dir_(std::move(out_dir)) {
  space_ = create_embeddings(cfg_.env.seed, cfg_.env.S, cfg_.env.d_o, cfg_.env.d_E);
  extra_manifest_ = json::object();
}

EnvConfig ExperimentRunner::env_for(const std::string& experiment, int C) const {
  EnvConfig env = cfg_.env;
  env.C = C;
  if (!experiment.empty()) env.seed = hash_combine(env.seed, hash_str(experiment));
  return env;
}

std::string ExperimentRunner::output_name(const std::string& logical, const std::string& fallback) const {
  auto it = cfg_.outputs.find(logical);
  return it != cfg_.outputs.end() ? it->second : fallback;
}

void ExperimentRunner::emit(const std::string& logical, const std::string& fallback,
                            const std::string& contents) {
  const std::string name = output_name(logical, fallback);
  try {
    write_file_atomic(out_dir_ / name, contents);
  } catch (const std::exception& e) {
    throw IoError(std::string("writing ") + (out_dir_ / name).string() + ": " + e.what());
  }
  checksums_[name] = fnv1a_checksum(contents);
  written_.push_back(name);
}

void ExperimentRunner::write_manifest(const std::string& command) {
  using clock = std::chrono::system_clock;
  json outputs = json::object();
  for (const auto& [name, sum] : checksums_) {
    char hex[20];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(sum));
    outputs[name] = std::string("fnv1a64:") + hex;
  }
  const json config = cfg_.to_json();
  char hash_hex[20];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(fnv1a_checksum(config.dump())));
  json manifest{{"command", command},
                {"tool_version", kToolVersion},
                {"rng_algorithm", kRngAlgorithm},
                {"config", config},
                {"config_hash", std::string("fnv1a64:") + hash_hex},
                {"wall_clock", static_cast<std::int64_t>(clock::to_time_t(clock::now()))},
                {"outputs", outputs}};
  for (auto it = extra_manifest_.begin(); it != extra_manifest_.end(); ++it)
    manifest[it.key()] = it.value();
  try {
    write_file_atomic(out_dir_ / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    throw IoError(std::string("writing manifest: ") + e.what());
  }
  written_.push_back("manifest.json");
}

std::vector<std::string> ExperimentRunner::run(const std::string& command) {
  if (command == "generate") return run_generate();
  if (command == "observe") return run_observe();
  if (command == "fig2") return run_fig2();
  if (command == "hallucinate") return run_hallucination();
  if (command == "esn") return run_esn();
  if (command == "control") return run_control();
  throw ConfigError("unknown command: " + command);
}

std::vector<std::string> ExperimentRunner::run_generate() {
  const int n = cfg_.episodes;
  std::vector<std::string> lines(n);
  const EnvConfig env = cfg_.env;
  parallel_for(n, cfg_.workers, [&](std::size_t i) {
    Episode ep = sample_episode(space_, env, i);
    lines[i] = episode_to_json(ep).dump() + "\n";
  });
  std::string body;
  for (const auto& line : lines) body += line;
  emit("episodes", "episodes.jsonl", body);
  write_manifest("generate");
  return written_;
}

std::vector<std::string> ExperimentRunner::run_observe() {
  const int n = cfg_.episodes;
  const EnvConfig env = cfg_.env;
  const int T = env.T;

  struct PerEpisode {
    EpisodeStats stats;
    std::string belief_rows;
  };
  std::vector<PerEpisode> results(n);
  const bool want_joint = std::count(cfg_.observers.begin(), cfg_.observers.end(), "joint") > 0;
  const bool want_naive = std::count(cfg_.observers.begin(), cfg_.observers.end(), "naive") > 0;

  parallel_for(n, cfg_.workers, [&](std::size_t i) {
    Episode ep = sample_episode(space_, env, i);
    PerEpisode out;
    out.stats = episode_stats(ep);
    std::string rows;
    auto dump_observer = [&](const char* name, const BeliefTrajectory& traj) {
      for (int t = 0; t <= T; ++t)
        for (int c = 0; c < env.C; ++c)
          for (int r = 0; r < env.R; ++r)
            rows += std::to_string(i) + "," + std::to_string(t) + "," + name + "," +
                    std::to_string(c) + "," + std::to_string(r) + "," +
                    format_real(traj.marginals[t](c, r)) + "\n";
    };
    if (want_joint) dump_observer("joint", run_trajectory(ep, ObserverKind::Joint));
    if (want_naive) dump_observer("naive", run_trajectory(ep, ObserverKind::Naive));
    out.belief_rows = std::move(rows);
    results[i] = std::move(out);
  });

  CsvWriter beliefs({"episode_id", "t", "observer", "variable", "realization", "belief"});
  std::string belief_body = beliefs.str();
  for (const auto& res : results) belief_body += res.belief_rows;
  emit("beliefs", "beliefs.csv", belief_body);

  CsvWriter metrics({"metric", "episode_id", "t", "value"});
  Eigen::VectorXd fr_sum = Eigen::VectorXd::Zero(T + 1), fr_sq = Eigen::VectorXd::Zero(T + 1);
  Eigen::VectorXd dis_sum = Eigen::VectorXd::Zero(std::max(T - 1, 0));
  Eigen::VectorXd dis_sq = dis_sum;
  Eigen::VectorXd joint_hits = Eigen::VectorXd::Zero(T + 1), naive_hits = Eigen::VectorXd::Zero(T + 1);
  for (int i = 0; i < n; ++i) {
    const EpisodeStats& st = results[i].stats;
    for (int t = 0; t <= T; ++t) {
      metrics.row({"fr", std::to_string(i), std::to_string(t), format_real(st.fr(t))});
      fr_sum(t) += st.fr(t);
      fr_sq(t) += st.fr(t) * st.fr(t);
      joint_hits(t) += st.joint_hit[t];
      naive_hits(t) += st.naive_hit[t];
    }
    for (int t = 0; t < st.disent.size(); ++t) {
      metrics.row({"disentanglement", std::to_string(i), std::to_string(t + 1), format_real(st.disent(t))});
      dis_sum(t) += st.disent(t);
      dis_sq(t) += st.disent(t) * st.disent(t);
    }
  }
  for (int t = 0; t <= T; ++t)
    metrics.row({"fr", "mean", std::to_string(t), format_real(fr_sum(t) / n)});
  for (int t = 0; t < dis_sum.size(); ++t)
    metrics.row({"disentanglement", "mean", std::to_string(t + 1), format_real(dis_sum(t) / n)});
  emit("metrics", "metrics.csv", metrics.str());

  json summary;
  summary["episodes"] = n;
  summary["T"] = T;
  json fr_mean = json::array(), fr_se = json::array();
  json acc_j = json::array(), acc_j_se = json::array(), acc_n = json::array(), acc_n_se = json::array();
  json rel = json::array();
  Eigen::VectorXd jcurve = joint_hits / n, ncurve = naive_hits / n;
  Eigen::VectorXd relacc = relative_accuracy(jcurve, ncurve, env.R);
  for (int t = 0; t <= T; ++t) {
    fr_mean.push_back(fr_sum(t) / n);
    fr_se.push_back(standard_error(fr_sum(t), fr_sq(t), n));
    acc_j.push_back(jcurve(t));
    acc_j_se.push_back(binomial_se(jcurve(t), n));
    acc_n.push_back(ncurve(t));
    acc_n_se.push_back(binomial_se(ncurve(t), n));
    rel.push_back(relacc(t));
  }
  json dis_mean = json::array(), dis_se = json::array();
  for (int t = 0; t < dis_sum.size(); ++t) {
    dis_mean.push_back(dis_sum(t) / n);
    dis_se.push_back(standard_error(dis_sum(t), dis_sq(t), n));
  }
  summary["fr"] = {{"mean", fr_mean}, {"se", fr_se}};
  summary["accuracy"] = {{"joint", {{"mean", acc_j}, {"se", acc_j_se}}},
                         {"naive", {{"mean", acc_n}, {"se", acc_n_se}}}};
  summary["relative_accuracy"] = rel;
  summary["disentanglement"] = {{"mean", dis_mean}, {"se", dis_se}};
  emit("summary", "summary.json", summary.dump(2) + "\n");

  write_manifest("observe");
  return written_;
}

std::vector<std::string> ExperimentRunner::run_fig2() {
  const int n = cfg_.episodes;
  const int T = cfg_.env.T;
  CsvWriter csv({"C", "t", "observer", "accuracy", "accuracy_se", "relative_accuracy", "fr_mean",
                 "fr_se"});
  for (int C : cfg_.sweep) {
    const EnvConfig env = env_for("", C);
    std::vector<EpisodeStats> stats(n);
    parallel_for(n, cfg_.workers, [&](std::size_t i) {
      stats[i] = episode_stats(sample_episode(space_, env, i));
    });
    Eigen::VectorXd fr_sum = Eigen::VectorXd::Zero(T + 1), fr_sq = Eigen::VectorXd::Zero(T + 1);
    Eigen::VectorXd jhits = Eigen::VectorXd::Zero(T + 1), nhits = Eigen::VectorXd::Zero(T + 1);
    for (const auto& st : stats)
      for (int t = 0; t <= T; ++t) {
        fr_sum(t) += st.fr(t);
        fr_sq(t) += st.fr(t) * st.fr(t);
        jhits(t) += st.joint_hit[t];
        nhits(t) += st.naive_hit[t];
      }
    Eigen::VectorXd jcurve = jhits / n, ncurve = nhits / n;
    Eigen::VectorXd relacc = relative_accuracy(jcurve, ncurve, env.R);
    for (int t = 0; t <= T; ++t) {
      double fr_mean = fr_sum(t) / n;
      double fr_se = standard_error(fr_sum(t), fr_sq(t), n);
      for (const auto& obs : cfg_.observers) {
        double acc = obs == "joint" ? jcurve(t) : ncurve(t);
        csv.row({std::to_string(C), std::to_string(t), obs, format_real(acc),
                 format_real(binomial_se(acc, n)), format_real(relacc(t)), format_real(fr_mean),
                 format_real(fr_se)});
      }
    }
  }
  emit("fig2", "fig2.csv", csv.str());
  write_manifest("fig2");
  return written_;
}

std::vector<std::string> ExperimentRunner::run_hallucination() {
  const int n = cfg_.episodes;
  const EnvConfig env = cfg_.env;
  const int T = env.T;
  const int bins = cfg_.histogram_bins;

  std::vector<EpisodeStats> stats(n);
  parallel_for(n, cfg_.workers, [&](std::size_t i) {
    stats[i] = episode_stats(sample_episode(space_, env, i));
  });

  CsvWriter csv({"observer", "t", "bin", "bin_lo", "bin_hi", "density", "below_chance_mass"});
  const double chance = 1.0 / env.R;
  auto dump_hist = [&](const char* name, bool joint) {
    for (int t = 0; t <= T; ++t) {
      Histogram h;
      h.bins = bins;
      h.density = Eigen::VectorXd::Zero(bins);
      for (const auto& st : stats) {
        double v = joint ? st.joint_at_opt(t) : st.naive_at_opt(t);
        int b = std::min(static_cast<int>(v * bins), bins - 1);
        h.density(b) += 1.0;
      }
      h.density *= static_cast<double>(bins) / n;  // counts to density on [0, 1]
      const double below = h.mass_below(chance);
      const double width = h.bin_width();
      for (int b = 0; b < bins; ++b)
        csv.row({name, std::to_string(t), std::to_string(b), format_real(b * width),
                 format_real((b + 1) * width), format_real(h.density(b)), format_real(below)});
    }
  };
  for (const auto& obs : cfg_.observers) {
    if (obs == "joint") dump_hist("joint", true);
    if (obs == "naive") dump_hist("naive", false);
  }
  emit("hallucination", "hallucination.csv", csv.str());
  write_manifest("hallucinate");
  return written_;
}

std::vector<std::string> ExperimentRunner::run_esn() {
  const int T = cfg_.env.T;
  CsvWriter csv({"C", "t", "model", "accuracy", "accuracy_se"});
  json reservoir_seeds = json::object();
  json models = json::object();

  for (int C : cfg_.esn.sweep) {
    const std::uint64_t res_seed = hash_combine(cfg_.env.seed, hash_combine(hash_str("reservoir"), C));
    Reservoir res = init_reservoir(res_seed, cfg_.esn.n_hidden, esn_input_dim(cfg_.env.d_o, C),
                                   cfg_.esn.spectral_radius);
    reservoir_seeds[std::to_string(C)] = res_seed;

    const EnvConfig train_env = env_for("esn-train", C);
    const int n_train = cfg_.esn.train_episodes;
    ReadoutFitter fitter(res.size(), C * cfg_.env.R);
    const int block = 512;
    std::vector<Eigen::MatrixXd> states(block), targets(block);
    for (int start = 0; start < n_train; start += block) {
      const int count = std::min(block, n_train - start);
      parallel_for(count, cfg_.workers, [&](std::size_t j) {
        Episode ep = sample_episode(space_, train_env, start + j);
        states[j] = drive(res, ep);
        targets[j] = joint_log_increment_targets(ep);
      });
      for (int j = 0; j < count; ++j) fitter.add(states[j], targets[j]);
    }
    Readout readout = fitter.solve(cfg_.esn.ridge);

    const EnvConfig test_env = env_for("", C);
    const int n_test = cfg_.esn.test_episodes;
    struct Hits {
      std::vector<char> esn, joint, naive;
    };
    std::vector<Hits> hits(n_test);
    parallel_for(n_test, cfg_.workers, [&](std::size_t i) {
      Episode ep = sample_episode(space_, test_env, i);
      EsnEvaluation ev = evaluate_esn(res, readout, {ep});
      EpisodeStats st = episode_stats(ep);
      Hits h;
      h.esn.resize(T + 1);
      const int opt = ep.optimal_action();
      for (int t = 0; t <= T; ++t)
        h.esn[t] = map_action(ev.trajectories[0].goal.row(t)) == opt;
      h.joint = st.joint_hit;
      h.naive = st.naive_hit;
      hits[i] = std::move(h);
    });
    Eigen::VectorXd esn_acc = Eigen::VectorXd::Zero(T + 1), j_acc = esn_acc, n_acc = esn_acc;
    for (const auto& h : hits)
      for (int t = 0; t <= T; ++t) {
        esn_acc(t) += h.esn[t];
        j_acc(t) += h.joint[t];
        n_acc(t) += h.naive[t];
      }
    esn_acc /= n_test;
    j_acc /= n_test;
    n_acc /= n_test;
    for (int t = 0; t <= T; ++t) {
      csv.row({std::to_string(C), std::to_string(t), "esn", format_real(esn_acc(t)),
               format_real(binomial_se(esn_acc(t), n_test))});
      csv.row({std::to_string(C), std::to_string(t), "joint", format_real(j_acc(t)),
               format_real(binomial_se(j_acc(t), n_test))});
      csv.row({std::to_string(C), std::to_string(t), "naive", format_real(n_acc(t)),
               format_real(binomial_se(n_acc(t), n_test))});
    }
    models[std::to_string(C)] =
        json{{"reservoir", reservoir_to_json(res)}, {"readout", readout_to_json(readout)}};
  }

  emit("esn_curves", "esn_curves.csv", csv.str());
  emit("esn_models", "esn_models.json", models.dump() + "\n");
  extra_manifest_["reservoir_seeds"] = reservoir_seeds;
  write_manifest("esn");
  return written_;
}

std::vector<std::string> ExperimentRunner::run_control() {
  const ControlSettings& ctl = cfg_.control;
  const EnvConfig env = cfg_.env;
  const bool online = ctl.condition == "online";

  struct RunResult {
    TrainingResult training;
    PreferenceSpec omega;
    Eigen::VectorXd true_reward;
    int optimal_action = 0;
  };
  std::vector<RunResult> runs(ctl.omega_count);
  parallel_for(ctl.omega_count, cfg_.workers, [&](std::size_t k) {
    Episode ep = sample_episode(space_, env, k);
    RunResult run;
    run.omega = sample_preferences(hash_combine(ctl.omega_seed, k), env.d_o, ctl.binary_omega);
    PreferenceLandscape truth = build_landscape(run.omega, ep.likelihood, LandscapeSource::Oracle);
    PreferenceLandscape train_on =
        online ? build_landscape(run.omega, ep.likelihood, LandscapeSource::Empirical,
                                 ctl.empirical_draws, hash_combine(cfg_.master_seed, k))
               : truth;
    A2cConfig a2c;
    a2c.lr = ctl.lr;
    a2c.beta = ctl.beta;
    a2c.beta_decay = ctl.beta_decay;
    a2c.episodes = ctl.episodes;
    a2c.batch = ctl.batch;
    a2c.adam = ctl.adam;
    a2c.seed = hash_combine(cfg_.master_seed, hash_combine(hash_str("control"), k));
    run.training = train_controller(a2c, train_on, truth);
    run.true_reward = truth.reward;
    run.optimal_action = truth.argmax();
    runs[k] = std::move(run);
  });

  CsvWriter csv({"condition", "omega_seed", "episode", "normalized_performance", "entropy"});
  for (int k = 0; k < ctl.omega_count; ++k)
    for (int e = 0; e < ctl.episodes; ++e)
      csv.row({ctl.condition, std::to_string(k), std::to_string(e),
               format_real(runs[k].training.performance(e)), format_real(runs[k].training.entropy(e))});
  for (int e = 0; e < ctl.episodes; ++e) {
    double sum = 0.0, sumsq = 0.0;
    double hsum = 0.0;
    for (const auto& run : runs) {
      sum += run.training.performance(e);
      sumsq += run.training.performance(e) * run.training.performance(e);
      hsum += run.training.entropy(e);
    }
    csv.row({ctl.condition, "mean", std::to_string(e), format_real(sum / ctl.omega_count),
             format_real(hsum / ctl.omega_count)});
    csv.row({ctl.condition, "sem", std::to_string(e),
             format_real(standard_error(sum, sumsq, ctl.omega_count)), format_real(0.0)});
  }
  emit("control_curves", "control_curves.csv", csv.str());

  json detail;
  detail["condition"] = ctl.condition;
  json jruns = json::array();
  for (int k = 0; k < ctl.omega_count; ++k) {
    const RunResult& run = runs[k];
    const int last = ctl.episodes - 1;
    jruns.push_back(json{{"omega_seed", k},
                         {"omega", real_array(run.omega.omega)},
                         {"greedy_log", run.training.greedy_log},
                         {"final_action", run.training.policy.greedy_action()},
                         {"optimal_action", run.optimal_action},
                         {"final_performance", run.training.performance(last)},
                         {"landscape", real_array(run.true_reward)}});
  }
  detail["runs"] = jruns;
  emit("control_detail", "control_detail.json", detail.dump() + "\n");
  write_manifest("control");
  return written_;
}

}  // namespace cogrid
