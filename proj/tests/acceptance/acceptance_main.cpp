// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Usage: ccf_acceptance <work_dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../cca_oracle.hpp"
#include "ccf/cca.hpp"
#include "ccf/cli.hpp"
#include "ccf/errors.hpp"
#include "ccf/evalmap.hpp"
#include "ccf/forest.hpp"
#include "ccf/geodata.hpp"
#include "ccf/pipeline.hpp"
#include "ccf/png.hpp"
#include "ccf/synth.hpp"

#ifndef CCF_FIXTURE_DIR
#error "CCF_FIXTURE_DIR must be defined"
#endif
#ifndef CCF_DATA_DIR
#error "CCF_DATA_DIR must be defined"
#endif

namespace fs = std::filesystem;
using namespace ccf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

fs::path g_work;

std::vector<double> padded(const CcaResult& r, std::size_t n) {
  std::vector<double> out(r.correlations.data(), r.correlations.data() + r.correlations.size());
  out.resize(n, 0.0);
  return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// 1
Outcome cca_oracle() {
  std::mt19937_64 rng(20240101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd x = testing::random_matrix(rng, 30, 5);
    const Eigen::MatrixXd y = testing::random_one_hot(rng, 30, 3);
    const auto oracle = testing::oracle_correlations(x, y, 1e-6);
    worst = std::max(worst, max_abs_diff(padded(canonical_correlation(x, y, 1e-6), oracle.size()), oracle));
  }
  return {worst <= 1e-8, "100 instances, max |diff| " + sci(worst)};
}

// 2
Outcome cca_invariance() {
  std::mt19937_64 rng(20240202);
  double rotation = 0.0, scaling = 0.0, permutation = 0.0;
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd x = testing::random_matrix(rng, 30, 5);
    const Eigen::MatrixXd y = testing::random_matrix(rng, 30, 3);
    const auto base = padded(canonical_correlation(x, y, 1e-6), 3);
    const Eigen::MatrixXd q = testing::random_orthogonal(rng, 5);
    rotation = std::max(rotation, max_abs_diff(base, padded(canonical_correlation(x * q, y, 1e-6), 3)));

    const auto base0 = padded(canonical_correlation(x, y, 0.0), 3);
    Eigen::MatrixXd xs = x;
    xs.col(static_cast<Eigen::Index>(rng() % 5)) *= scale(rng);
    scaling = std::max(scaling, max_abs_diff(base0, padded(canonical_correlation(xs, y, 0.0), 3)));
  }
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd x = testing::random_matrix(rng, 30, 5);
    const Eigen::MatrixXd y = testing::random_one_hot(rng, 30, 3);
    std::vector<int> perm(30);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd xp(30, 5), yp(30, 3);
    for (int i = 0; i < 30; ++i) {
      xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
      yp.row(i) = y.row(perm[static_cast<std::size_t>(i)]);
    }
    permutation = std::max(permutation, max_abs_diff(padded(canonical_correlation(x, y, 1e-6), 3),
                                                     padded(canonical_correlation(xp, yp, 1e-6), 3)));
  }
  const bool pass = rotation <= 1e-8 && scaling <= 1e-8 && permutation <= 1e-8;
  return {pass, "50 each, max |diff| rotation " + sci(rotation) + ", column scaling " + sci(scaling) +
                    ", row permutation " + sci(permutation)};
}

double accuracy_on(const Forest& forest, const TrainingSet& test) {
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < test.features.rows(); ++i) {
    const std::vector<double> row(test.features.row(i).begin(), test.features.row(i).end());
    correct += predict_class(forest, row) == test.labels[static_cast<std::size_t>(i)];
  }
  return static_cast<double>(correct) / static_cast<double>(test.features.rows());
}

// 3
Outcome four_class_regime() {
  const auto prototypes = load_prototypes(std::string(CCF_DATA_DIR) + "/prototypes.json");
  double sum = 0.0, worst = 1.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TrainingSet train = to_training_set(generate_samples(prototypes, 11, seed));
    const TrainingSet test = to_training_set(generate_samples(prototypes, 250, derive_seed(seed, 1000)));
    ForestParams params;
    params.n_trees = 10;
    params.seed = seed;
    const double acc = accuracy_on(train_forest(train, params), test);
    sum += acc;
    worst = std::min(worst, acc);
  }
  const double mean = sum / 20.0;
  return {worst >= 0.90 && mean >= 0.95, "44 train / 1000 test, 20 seeds: min " + fmt(worst) + ", mean " + fmt(mean)};
}

// 4
Outcome oblique_advantage() {
  double ccf15 = 0.0, axis15 = 0.0, axis100 = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TrainingSet train = rotated_two_class(50, 45.0, seed);
    const TrainingSet test = rotated_two_class(500, 45.0, derive_seed(seed, 1000));
    ForestParams params;
    params.seed = seed;
    params.n_trees = 15;
    ccf15 += accuracy_on(train_forest(train, params), test) / 20.0;
    params.mode = SplitMode::kAxisAligned;
    axis15 += accuracy_on(train_forest(train, params), test) / 20.0;
    params.n_trees = 100;
    axis100 += accuracy_on(train_forest(train, params), test) / 20.0;
  }
  const bool pass = ccf15 >= axis15 && ccf15 >= axis100 - 0.02;
  return {pass, "mean accuracy ccf15 " + fmt(ccf15) + ", axis15 " + fmt(axis15) + ", axis100 " + fmt(axis100)};
}

int cli(std::vector<std::string> args, std::string* error = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (error) *error = err.str();
  if (code != 0 && !error) std::cerr << err.str();
  return code;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct PipelineRun {
  bool ok = false;
  double recall = 0.0;
  double specificity = 0.0;
  fs::path dir;
};

PipelineRun run_pipeline(const fs::path& dir, const std::string& seed, const std::string& threads) {
  PipelineRun run;
  run.dir = dir;
  const std::string data = (dir / "data").string();
  const std::string model = (dir / "model").string();
  const std::string map = (dir / "map").string();
  const std::string eval = (dir / "eval").string();
  if (cli({"synth", "--out", data, "--width", "64", "--height", "64", "--unknown", "0.3", "--seed", seed}) != 0) {
    return run;
  }
  if (cli({"train", "--scene", data + "/scene.json", "--points", data + "/points.csv", "--env-points",
           data + "/env_points.csv", "--out", model, "--seed", seed, "--threads", threads}) != 0) {
    return run;
  }
  if (cli({"classify", "--model", model + "/model.ccf", "--scene", data + "/scene.json", "--out", map}) != 0) {
    return run;
  }
  if (cli({"evaluate", "--grid", map + "/classmap.cgrid", "--mask", data + "/mask.png", "--out", eval}) != 0) {
    return run;
  }
  const auto report = nlohmann::json::parse(slurp(fs::path(eval) / "eval_report.json"));
  run.recall = report.at("settlement_recall").get<double>();
  run.specificity = report.at("environment_specificity").get<double>();
  run.ok = true;
  return run;
}

// 5
Outcome end_to_end() {
  const PipelineRun run = run_pipeline(g_work / "e2e_a", "11", "0");
  if (!run.ok) return {false, "a pipeline step failed"};
  return {run.recall >= 0.90 && run.specificity >= 0.90,
          "64x64, 30% unknown: recall " + fmt(run.recall) + ", specificity " + fmt(run.specificity)};
}

// 6
Outcome determinism() {
  const PipelineRun again = run_pipeline(g_work / "e2e_b", "11", "1");
  if (!again.ok) return {false, "a pipeline step failed"};
  const fs::path a = g_work / "e2e_a";
  const fs::path b = g_work / "e2e_b";
  std::vector<std::string> differing;
  for (const char* f : {"model/model.ccf", "map/classmap.cgrid", "map/classmap.png"}) {
    const std::string x = slurp(a / f);
    if (x.empty() || x != slurp(b / f)) differing.push_back(f);
  }

  const TrainingSet set = to_training_set(generate_samples(default_prototypes(), 11, 3));
  ForestParams params;
  params.n_trees = 15;
  params.seed = 3;
  const std::string serial = serialize(train_forest(set, params, 1));
  const bool threads_equal = serial == serialize(train_forest(set, params, 4)) &&
                             serial == serialize(train_forest(set, params, 15));
  if (!threads_equal) differing.push_back("serial vs concurrent training");

  std::string detail = "repeat run (serial training) vs first run, 1 vs 4 vs 15 training threads: ";
  if (differing.empty()) {
    detail += "byte-identical";
  } else {
    for (const auto& d : differing) detail += d + " differs; ";
  }
  return {differing.empty(), detail};
}

// 7
Outcome forest_invariants() {
  double worst_sum = 0.0;
  std::size_t leaf_mismatch = 0, roundtrip_mismatch = 0, leaves = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TrainingSet set = to_training_set(generate_samples(default_prototypes(), 11, seed + 100));
    ForestParams params;
    params.seed = seed;
    params.n_trees = 10;
    params.impurity = seed % 2 ? Impurity::kEntropy : Impurity::kGini;
    const Forest forest = train_forest(set, params);

    for (const Tree& tree : forest.trees) {
      std::vector<std::vector<double>> counts(tree.nodes.size(), std::vector<double>(4, 0.0));
      std::vector<double> totals(tree.nodes.size(), 0.0);
      for (Eigen::Index i = 0; i < set.features.rows(); ++i) {
        const std::vector<double> row(set.features.row(i).begin(), set.features.row(i).end());
        const auto index = static_cast<std::size_t>(&tree.leaf_for(row) - tree.nodes.data());
        counts[index][static_cast<std::size_t>(set.labels[static_cast<std::size_t>(i)])] += 1.0;
        totals[index] += 1.0;
      }
      for (std::size_t n = 0; n < tree.nodes.size(); ++n) {
        if (!tree.nodes[n].is_leaf()) continue;
        ++leaves;
        bool same = totals[n] > 0.0;
        for (std::size_t c = 0; same && c < 4; ++c) same = tree.nodes[n].distribution[c] == counts[n][c] / totals[n];
        leaf_mismatch += !same;
      }
    }

    const Forest copy = deserialize(serialize(forest));
    for (const auto& s : generate_samples(default_prototypes(), 50, seed + 200)) {
      const auto p = predict_proba(forest, s.features);
      worst_sum = std::max(worst_sum, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
      roundtrip_mismatch += p != predict_proba(copy, s.features);
    }
  }
  const bool pass = leaf_mismatch == 0 && worst_sum <= 1e-9 && roundtrip_mismatch == 0;
  return {pass, "10 forests: " + std::to_string(leaf_mismatch) + "/" + std::to_string(leaves) +
                    " leaves not reconstructed, max |sum-1| " + sci(worst_sum) + ", " +
                    std::to_string(roundtrip_mismatch) + " round-trip prediction mismatches"};
}

template <typename Expected>
bool throws(const std::function<void()>& f, std::string& message) {
  try {
    f();
  } catch (const Expected& e) {
    message = e.what();
    return true;
  } catch (const std::exception& e) {
    message = std::string("wrong error type: ") + e.what();
    return false;
  }
  message = "no error";
  return false;
}

// 8
Outcome format_robustness() {
  const std::string fx = CCF_FIXTURE_DIR;
  std::vector<std::string> failures;
  std::string msg;

  if (!throws<LoadError>([&] { load_scene(fx + "/truncated_scene.json", fx + "/truncated_scene.bsq"); }, msg) ||
      msg.find("expected 416 bytes") == std::string::npos) {
    failures.push_back("truncated scene: " + msg);
  }
  if (!throws<ParseError>([&] { load_points(fx + "/malformed_points.csv"); }, msg) ||
      msg.find("row 4") == std::string::npos) {
    failures.push_back("malformed csv: " + msg);
  }
  if (!throws<LoadError>([&] { load_mask(fx + "/mask_bad_value.png"); }, msg) ||
      msg.find("77") == std::string::npos) {
    failures.push_back("mask value: " + msg);
  }
  if (!throws<UnsupportedVersionError>([&] { load_forest(fx + "/model_v999.ccf"); }, msg) ||
      msg.find("999") == std::string::npos) {
    failures.push_back("model version: " + msg);
  }

  // Through the CLI the same files give exit code 2.
  const std::string out = (g_work / "robustness").string();
  const std::string good = (g_work / "e2e_a" / "data").string();
  const std::string model = (g_work / "e2e_a" / "model" / "model.ccf").string();
  std::string err;
  if (cli({"classify", "--model", model, "--scene", fx + "/truncated_scene.json", "--out", out}, &err) != 2) {
    failures.push_back("cli truncated scene");
  }
  if (cli({"train", "--scene", good + "/scene.json", "--points", fx + "/malformed_points.csv", "--out", out}, &err) !=
      2) {
    failures.push_back("cli malformed csv");
  }
  const std::string grid = (g_work / "e2e_a" / "map" / "classmap.cgrid").string();
  if (cli({"evaluate", "--grid", grid, "--mask", fx + "/mask_bad_value.png", "--out", out}, &err) != 2) {
    failures.push_back("cli mask value");
  }
  if (cli({"classify", "--model", fx + "/model_v999.ccf", "--scene", good + "/scene.json", "--out", out}, &err) != 2) {
    failures.push_back("cli model version");
  }

  std::string detail = "4 fixtures, library errors and CLI exit code 2";
  for (const auto& f : failures) detail += "; FAILED " + f;
  return {failures.empty(), detail};
}

struct Criterion {
  int id;
  const char* name;
  double time_limit;  // seconds, 0 = none
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  g_work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "ccf_acceptance";
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  const std::vector<Criterion> criteria = {
      {1, "cca-oracle", 5.0, cca_oracle},
      {2, "cca-invariance", 0.0, cca_invariance},
      {3, "four-class-accuracy", 10.0, four_class_regime},
      {4, "oblique-advantage", 60.0, oblique_advantage},
      {5, "end-to-end", 30.0, end_to_end},
      {6, "determinism", 0.0, determinism},
      {7, "forest-invariants", 0.0, forest_invariants},
      {8, "format-robustness", 0.0, format_robustness},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0.0 && seconds >= c.time_limit) {
      outcome.pass = false;
      outcome.detail += "; over time limit " + fmt(c.time_limit, 0) + " s";
    }
    failed += !outcome.pass;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << "  " << c.id << " " << c.name << "  (" << fmt(seconds, 2)
              << " s)  " << outcome.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " acceptance criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
