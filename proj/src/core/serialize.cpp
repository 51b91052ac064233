#include "core/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace cogrid {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json real_array(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json real_matrix(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(real_array(m.row(i)));
  return rows;
}

namespace {
Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return v;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  if (rows.empty()) return {};
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
  return m;
}
}  // namespace

json embedding_space_to_json(const EmbeddingSpace& space) {
  return json{{"seed", space.seed}, {"S", space.S},           {"d_o", space.d_o},
              {"d_E", space.d_E},   {"keys", real_matrix(space.keys)}, {"queries", real_matrix(space.queries)}};
}

EmbeddingSpace embedding_space_from_json(const json& j) {
  EmbeddingSpace space;
  space.seed = j.at("seed").get<std::uint64_t>();
  space.S = j.at("S").get<int>();
  space.d_o = j.at("d_o").get<int>();
  space.d_E = j.at("d_E").get<int>();
  space.keys = matrix_from_json(j.at("keys"));
  space.queries = matrix_from_json(j.at("queries"));
  return space;
}

json likelihood_to_json(const LikelihoodTensor& ell, const std::vector<int>& context, double lambda) {
  json arrays = json::array();
  for (const auto& e : ell.ell) arrays.push_back(real_array(e));
  return json{{"R", ell.R}, {"C", ell.C}, {"context", context}, {"lambda", lambda}, {"ell", arrays}};
}

LikelihoodTensor likelihood_from_json(const json& j) {
  LikelihoodTensor ell;
  ell.R = j.at("R").get<int>();
  ell.C = j.at("C").get<int>();
  const json& arrays = j.at("ell");
  ell.d_o = static_cast<int>(arrays.size());
  for (const auto& a : arrays) ell.ell.push_back(vector_from_json(a));
  return ell;
}

json episode_to_json(const Episode& ep) {
  json obs = json::array();
  for (Eigen::Index t = 0; t < ep.observations.rows(); ++t) {
    json row = json::array();
    for (Eigen::Index i = 0; i < ep.observations.cols(); ++i) row.push_back(ep.observations(t, i));
    obs.push_back(row);
  }
  return json{{"context", ep.context}, {"realizations", ep.realizations}, {"goal", ep.goal},
              {"observations", obs}};
}

json reservoir_to_json(const Reservoir& res) {
  return json{{"seed", res.seed},
              {"n_hidden", res.size()},
              {"input_dim", res.input_dim()},
              {"spectral_radius", res.spectral_radius},
              {"recurrent", real_matrix(res.recurrent)},
              {"input", real_matrix(res.input)}};
}

Reservoir reservoir_from_json(const json& j) {
  Reservoir res;
  res.seed = j.at("seed").get<std::uint64_t>();
  res.spectral_radius = j.at("spectral_radius").get<double>();
  res.recurrent = matrix_from_json(j.at("recurrent"));
  res.input = matrix_from_json(j.at("input"));
  res.initial_state = Eigen::VectorXd::Zero(res.recurrent.rows());
  return res;
}

json readout_to_json(const Readout& readout) {
  return json{{"ridge", readout.ridge}, {"weights", real_matrix(readout.weights)},
              {"bias", real_array(readout.bias)}};
}

Readout readout_from_json(const json& j) {
  Readout out;
  out.ridge = j.at("ridge").get<double>();
  out.weights = matrix_from_json(j.at("weights"));
  out.bias = vector_from_json(j.at("bias"));
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("rename failed: " + path.string() + ": " + ec.message());
}

std::uint64_t fnv1a_checksum(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string dump_json(const json& j) { return j.dump(); }

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row(header); }

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw std::logic_error("CsvWriter: column count mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ += ',';
    out_ += cells[i];
  }
  out_ += '\n';
}

}  // namespace cogrid
