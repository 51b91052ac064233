#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "core/experiments.hpp"
#include "core/metrics.hpp"

using namespace cogrid;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_file(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

json tiny_config() {
  return json{{"seed", 11},
              {"episodes", 30},
              {"sweep", {1, 2}},
              {"workers", 2},
              {"env", {{"S", 30}, {"C", 2}, {"R", 4}, {"T", 5}, {"d_o", 3}, {"d_E", 8}}}};
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("cogrid_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("unknown configuration keys are rejected at every level") {
  json bad = tiny_config();
  bad["episods"] = 5;
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);

  json bad_env = tiny_config();
  bad_env["env"]["Q"] = 1;
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad_env), ConfigError);

  json bad_esn = tiny_config();
  bad_esn["esn"] = {{"hidden", 10}};
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad_esn), ConfigError);

  json bad_ctl = tiny_config();
  bad_ctl["control"] = {{"optimizer", "sgdm"}};
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad_ctl), ConfigError);
}

TEST_CASE("invalid configuration values are rejected") {
  json bad = tiny_config();
  bad["episodes"] = 0;
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);

  bad = tiny_config();
  bad["observers"] = {"joint", "joint"};
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);

  bad = tiny_config();
  bad["observers"] = {"exact"};
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);

  bad = tiny_config();
  bad["env"]["d_E"] = 2;  // below d_o
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);

  bad = tiny_config();
  bad["control"] = {{"condition", "offline"}};
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);
}

TEST_CASE("defaults match the documented configuration") {
  ExperimentConfig cfg = ExperimentConfig::from_json(json::object());
  CHECK(cfg.env.S == 500);
  CHECK(cfg.env.R == 10);
  CHECK(cfg.env.T == 30);
  CHECK(cfg.env.d_o == 5);
  CHECK(cfg.env.d_E == 30);
  CHECK(cfg.env.lambda == 2.0);
  CHECK(cfg.episodes == 5000);
  CHECK(cfg.sweep == std::vector<int>{1, 2, 3});
  CHECK(cfg.esn.n_hidden == 500);
  CHECK(cfg.esn.ridge == 1e-4);
  CHECK(cfg.control.lr == 0.005);
  CHECK(cfg.control.beta == 0.05);
  CHECK(cfg.control.episodes == 2000);
  CHECK(cfg.control.batch == 1024);
  CHECK(cfg.histogram_bins == 50);
}

TEST_CASE("master seed flows into the environment seed unless overridden") {
  json doc = {{"seed", 42}};
  CHECK(ExperimentConfig::from_json(doc).env.seed == 42);
  json doc2 = {{"seed", 42}, {"env", {{"seed", 7}}}};
  CHECK(ExperimentConfig::from_json(doc2).env.seed == 7);
}

TEST_CASE("generate writes one valid JSON line per episode plus a manifest") {
  fs::path dir = fresh_dir("generate");
  ExperimentConfig cfg = ExperimentConfig::from_json(tiny_config());
  ExperimentRunner runner(cfg, dir);
  runner.run("generate");

  std::string body = read_file(dir / "episodes.jsonl");
  int lines = 0;
  std::istringstream in(body);
  std::string line;
  while (std::getline(in, line)) {
    json ep = json::parse(line);
    CHECK(ep.contains("context"));
    CHECK(ep.contains("realizations"));
    CHECK(ep.contains("goal"));
    CHECK(ep.at("observations").size() == 5);
    ++lines;
  }
  CHECK(lines == 30);

  json manifest = json::parse(read_file(dir / "manifest.json"));
  CHECK(manifest.at("command") == "generate");
  CHECK(manifest.at("rng_algorithm").get<std::string>().find("splitmix64") != std::string::npos);
  char hex[32];
  std::snprintf(hex, sizeof(hex), "fnv1a64:%016llx",
                (unsigned long long)fnv1a_checksum(body));
  CHECK(manifest.at("outputs").at("episodes.jsonl") == std::string(hex));
}

TEST_CASE("fig2 row count and single-variable observer equality") {
  fs::path dir = fresh_dir("fig2");
  ExperimentConfig cfg = ExperimentConfig::from_json(tiny_config());
  ExperimentRunner runner(cfg, dir);
  runner.run("fig2");

  auto rows = read_csv(dir / "fig2.csv");
  const int T = 5;
  CHECK(int(rows.size()) == 1 + 2 * (T + 1) * 2);  // header + |sweep| * (T+1) * observers

  // C=1 rows: joint and naive accuracy identical.
  for (std::size_t i = 1; i < rows.size(); i += 2) {
    if (rows[i][0] != "1") continue;
    CHECK(rows[i][2] == "joint");
    CHECK(rows[i + 1][2] == "naive");
    CHECK(std::stod(rows[i][3]) == doctest::Approx(std::stod(rows[i + 1][3])).epsilon(1e-12));
    CHECK(std::stod(rows[i][6]) <= 1e-10);  // mean FR at C=1
  }
}

TEST_CASE("experiment outputs are byte-identical across reruns and worker counts") {
  for (const std::string cmd : {"fig2", "observe", "hallucinate"}) {
    fs::path d1 = fresh_dir(cmd + "_w1");
    fs::path d2 = fresh_dir(cmd + "_w4");
    json c1 = tiny_config();
    c1["workers"] = 1;
    json c2 = tiny_config();
    c2["workers"] = 4;
    ExperimentRunner(ExperimentConfig::from_json(c1), d1).run(cmd);
    ExperimentRunner(ExperimentConfig::from_json(c2), d2).run(cmd);
    for (const auto& entry : fs::directory_iterator(d1)) {
      if (entry.path().filename() == "manifest.json") continue;  // carries wall-clock time
      CAPTURE(entry.path().string());
      CHECK(read_file(entry.path()) == read_file(d2 / entry.path().filename()));
    }
  }
}

TEST_CASE("observe emits beliefs, metrics, and a summary") {
  fs::path dir = fresh_dir("observe");
  json doc = tiny_config();
  doc["episodes"] = 8;
  ExperimentConfig cfg = ExperimentConfig::from_json(doc);
  ExperimentRunner runner(cfg, dir);
  runner.run("observe");

  auto beliefs = read_csv(dir / "beliefs.csv");
  // header + episodes * (T+1) * observers * C * R
  CHECK(int(beliefs.size()) == 1 + 8 * 6 * 2 * 2 * 4);
  // Per-variable belief rows sum to one at every (episode, t, observer).
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) sum += std::stod(beliefs[1 + k][5]);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

  auto metrics = read_csv(dir / "metrics.csv");
  CHECK(metrics[0] == std::vector<std::string>{"metric", "episode_id", "t", "value"});
  int mean_rows = 0;
  for (const auto& row : metrics)
    if (row.size() > 1 && row[1] == "mean") ++mean_rows;
  CHECK(mean_rows == 6 + 4);  // fr over T+1 steps, disentanglement over T-1

  json summary = json::parse(read_file(dir / "summary.json"));
  CHECK(summary.at("fr").at("mean").size() == 6);
  CHECK(summary.at("accuracy").at("joint").at("mean").size() == 6);
  CHECK(summary.at("disentanglement").at("mean").size() == 4);
}

TEST_CASE("hallucination histograms integrate to one per observer and step") {
  fs::path dir = fresh_dir("hallucinate");
  json doc = tiny_config();
  doc["histogram_bins"] = 20;
  ExperimentConfig cfg = ExperimentConfig::from_json(doc);
  ExperimentRunner runner(cfg, dir);
  runner.run("hallucinate");

  auto rows = read_csv(dir / "hallucination.csv");
  CHECK(int(rows.size()) == 1 + 2 * 6 * 20);
  std::map<std::string, double> mass;
  for (std::size_t i = 1; i < rows.size(); ++i)
    mass[rows[i][0] + ":" + rows[i][1]] += std::stod(rows[i][5]) * (1.0 / 20);
  CHECK(mass.size() == 12);
  for (const auto& [key, m] : mass) CHECK(m == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("esn run reports reference curves matching fig2 and records the reservoir seed") {
  json doc = tiny_config();
  doc["esn"] = {{"n_hidden", 25}, {"spectral_radius", 0.8}, {"ridge", 1e-4},
                {"train_episodes", 60}, {"test_episodes", 30}, {"sweep", {2}}};
  fs::path dir = fresh_dir("esn");
  ExperimentConfig cfg = ExperimentConfig::from_json(doc);
  ExperimentRunner(cfg, dir).run("esn");

  fs::path fig_dir = fresh_dir("esn_fig2ref");
  json fig_doc = tiny_config();
  fig_doc["sweep"] = {2};
  fig_doc["episodes"] = 30;  // same count as the esn test set
  ExperimentRunner(ExperimentConfig::from_json(fig_doc), fig_dir).run("fig2");

  auto esn_rows = read_csv(dir / "esn_curves.csv");
  auto fig_rows = read_csv(fig_dir / "fig2.csv");
  std::map<std::string, std::string> esn_acc, fig_acc;
  for (std::size_t i = 1; i < esn_rows.size(); ++i)
    if (esn_rows[i][2] == "joint" || esn_rows[i][2] == "naive")
      esn_acc[esn_rows[i][1] + ":" + esn_rows[i][2]] = esn_rows[i][3];
  for (std::size_t i = 1; i < fig_rows.size(); ++i)
    fig_acc[fig_rows[i][1] + ":" + fig_rows[i][2]] = fig_rows[i][3];
  CHECK(esn_acc == fig_acc);

  json manifest = json::parse(read_file(dir / "manifest.json"));
  CHECK(manifest.contains("reservoir_seeds"));
  CHECK(manifest.at("reservoir_seeds").contains("2"));

  json models = json::parse(read_file(dir / "esn_models.json"));
  CHECK(models.at("2").at("reservoir").at("n_hidden") == 25);
  CHECK(models.at("2").at("readout").at("ridge") == 1e-4);
}

TEST_CASE("control run emits per-seed curves with mean and sem rows") {
  json doc = tiny_config();
  doc["control"] = {{"omega_count", 4}, {"episodes", 40}, {"batch", 32}};
  fs::path dir = fresh_dir("control");
  ExperimentConfig cfg = ExperimentConfig::from_json(doc);
  ExperimentRunner(cfg, dir).run("control");

  auto rows = read_csv(dir / "control_curves.csv");
  CHECK(int(rows.size()) == 1 + 4 * 40 + 2 * 40);
  // Mean at the final episode lies inside the per-seed envelope.
  double lo = 1e300, hi = -1e300, mean = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][2] != "39") continue;
    double v = std::stod(rows[i][3]);
    if (rows[i][1] == "mean") mean = v;
    else if (rows[i][1] != "sem") {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  CHECK(mean >= lo - 1e-12);
  CHECK(mean <= hi + 1e-12);

  json detail = json::parse(read_file(dir / "control_detail.json"));
  CHECK(detail.at("runs").size() == 4);
  CHECK(detail.at("runs")[0].contains("greedy_log"));
  CHECK(detail.at("runs")[0].at("landscape").size() == 16);
}

TEST_CASE("output name overrides are honored") {
  fs::path dir = fresh_dir("overrides");
  json doc = tiny_config();
  doc["outputs"] = {{"fig2", "curves.csv"}};
  ExperimentRunner(ExperimentConfig::from_json(doc), dir).run("fig2");
  CHECK(fs::exists(dir / "curves.csv"));
  CHECK(!fs::exists(dir / "fig2.csv"));
}

TEST_CASE("unknown command is a configuration error") {
  fs::path dir = fresh_dir("badcmd");
  ExperimentRunner runner(ExperimentConfig::from_json(tiny_config()), dir);
  CHECK_THROWS_AS(runner.run("figure2"), ConfigError);
}
