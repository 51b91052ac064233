#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "core/controller.hpp"
#include "core/serialize.hpp"

namespace cogrid {

struct EsnSettings {
  int n_hidden = 500;
  double spectral_radius = 0.9;
  double ridge = 1e-4;
  int train_episodes = 20000;
  int test_episodes = 5000;
  std::vector<int> sweep = {1, 2};
};

struct ControlSettings {
  std::string condition = "offline-oracle";  // or "online"
  std::uint64_t omega_seed = 0;
  int omega_count = 20;
  int episodes = 2000;
  int batch = 1024;
  double lr = 0.005;
  double beta = 0.05;
  double beta_decay = 0.999;
  int empirical_draws = 3000;
  bool adam = false;
  bool binary_omega = true;
};

struct ExperimentConfig {
  EnvConfig env;
  std::vector<int> sweep = {1, 2, 3};
  int episodes = 5000;
  std::vector<std::string> observers = {"joint", "naive"};
  std::map<std::string, std::string> outputs;  // logical name -> filename override
  int workers = 1;
  std::uint64_t master_seed = 0;
  EsnSettings esn;
  ControlSettings control;
  int histogram_bins = 50;

  // Parses and validates a config document; unknown keys are rejected.
  static ExperimentConfig from_json(const json& doc);
  json to_json() const;
};

// Error category carried to the C API / CLI exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writes output files plus a manifest.json (config hash, tool version, RNG
// algorithm, wall clock, per-output checksum). Returns written file names.
class ExperimentRunner {
 public:
  ExperimentRunner(ExperimentConfig config, std::filesystem::path out_dir);

  std::vector<std::string> run(const std::string& command);

  std::vector<std::string> run_generate();
  std::vector<std::string> run_observe();
  std::vector<std::string> run_fig2();
  std::vector<std::string> run_hallucination();
  std::vector<std::string> run_esn();
  std::vector<std::string> run_control();

 private:
  EnvConfig env_for(const std::string& experiment, int C) const;
  std::string output_name(const std::string& logical, const std::string& fallback) const;
  void emit(const std::string& logical, const std::string& fallback, const std::string& contents);
  void write_manifest(const std::string& command);

  ExperimentConfig cfg_;
  std::filesystem::path out_dir_;
  EmbeddingSpace space_;
  std::map<std::string, std::uint64_t> checksums_;
  json extra_manifest_;
  std::vector<std::string> written_;
};

extern const char* kToolVersion;
extern const char* kRngAlgorithm;

}  // namespace cogrid
