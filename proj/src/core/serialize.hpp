#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "core/environment.hpp"
#include "core/reservoir.hpp"

namespace cogrid {

using json = nlohmann::json;

// All reals in external files are written with 17 significant digits.
std::string format_real(double v);

json real_array(const Eigen::VectorXd& v);
json real_matrix(const Eigen::MatrixXd& m);

json embedding_space_to_json(const EmbeddingSpace& space);
EmbeddingSpace embedding_space_from_json(const json& j);

json likelihood_to_json(const LikelihoodTensor& ell, const std::vector<int>& context, double lambda);
LikelihoodTensor likelihood_from_json(const json& j);

json episode_to_json(const Episode& ep);

json reservoir_to_json(const Reservoir& res);
Reservoir reservoir_from_json(const json& j);
json readout_to_json(const Readout& readout);
Readout readout_from_json(const json& j);

// Temp-file-then-rename atomic write.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::uint64_t fnv1a_checksum(const std::string& bytes);

// Serializes a JSON document with stable key order and 17-significant-digit
// reals (nlohmann already round-trips doubles exactly; this pins the style).
std::string dump_json(const json& j);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  const std::string& str() const { return out_; }

  static std::string cell(double v) { return format_real(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::uint64_t v) { return std::to_string(v); }

 private:
  std::string out_;
  std::size_t columns_;
};

}  // namespace cogrid
