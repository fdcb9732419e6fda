#include "ccf/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccf/errors.hpp"
#include "ccf/evalmap.hpp"
#include "ccf/forest.hpp"
#include "ccf/geodata.hpp"
#include "ccf/pipeline.hpp"
#include "ccf/png.hpp"
#include "ccf/synth.hpp"

namespace ccf::cli {
namespace {

namespace fs = std::filesystem;

struct SynthOptions {
  std::string out_dir;
  std::size_t width = 64;
  std::size_t height = 64;
  std::string layout = "blocks";
  std::size_t block = 8;
  double environment_share = 0.5;
  double unknown_fraction = 0.3;
  std::uint64_t seed = 0;
  std::string prototypes;
  SurveyOptions survey;
};

struct TrainOptions {
  std::string scene;
  std::string scene_data;
  std::string points;
  std::string env_points;
  std::string out_dir;
  std::size_t trees = 10;
  std::size_t per_class = 11;
  std::uint64_t seed = 0;
  std::string impurity = "gini";
  std::string mode = "ccf";
  double gamma = 1e-6;
  std::size_t feature_subsample = 0;
  std::size_t min_node_size = 2;
  std::optional<std::size_t> max_depth;
  unsigned threads = 0;
};

struct ClassifyOptions {
  std::string model;
  std::string scene;
  std::string scene_data;
  std::string out_dir;
  unsigned threads = 0;
};

struct EvaluateOptions {
  std::string grid;
  std::string mask;
  std::string out_dir;
};

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw LoadError(std::string("no ") + what + " given");
  if (!fs::is_regular_file(path)) throw LoadError(std::string(what) + " '" + path + "' does not exist");
}

std::string default_data_path(const std::string& header, const std::string& data) {
  if (!data.empty()) return data;
  return fs::path(header).replace_extension(".bsq").string();
}

fs::path prepare_out_dir(const std::string& dir) {
  if (dir.empty()) throw InputError("no output directory given");
  fs::create_directories(dir);
  return fs::path(dir);
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path.string(), {text.begin(), text.end()});
}

int cmd_synth(const SynthOptions& o, std::ostream& out) {
  if (!o.prototypes.empty()) require_file(o.prototypes, "prototypes file");
  const auto prototypes = o.prototypes.empty() ? default_prototypes() : load_prototypes(o.prototypes);
  if (o.width == 0 || o.height == 0) throw InputError("synth: width and height must be >= 1");

  Layout layout;
  if (o.layout == "blocks") {
    layout = block_layout(o.width, o.height, o.block, o.environment_share, o.seed);
  } else if (o.layout == "quadrants") {
    layout = quadrant_layout(o.width, o.height);
  } else {
    throw InputError("synth: unknown layout '" + o.layout + "' (expected blocks or quadrants)");
  }

  SceneOptions scene_options;
  scene_options.unknown_fraction = o.unknown_fraction;
  const SyntheticScene synthetic = generate_scene(layout, prototypes, o.seed, scene_options);
  const SyntheticSurvey survey = generate_survey(synthetic, o.survey, o.seed);

  const fs::path dir = prepare_out_dir(o.out_dir);
  write_scene(synthetic.scene, (dir / "scene.json").string(), (dir / "scene.bsq").string());
  write_points(survey.survey_points, (dir / "points.csv").string());
  write_points(survey.environment_points, (dir / "env_points.csv").string());
  write_mask(synthetic.mask, (dir / "mask.png").string());

  ClassMap truth{layout.width, layout.height, std::vector<std::uint8_t>(layout.classes.size()),
                 std::vector<std::uint8_t>(layout.classes.size(), 1)};
  std::transform(layout.classes.begin(), layout.classes.end(), truth.classes.begin(),
                 [](MaterialClass c) { return static_cast<std::uint8_t>(c); });
  write_class_grid(truth, (dir / "truth.cgrid").string());
  write_file_bytes((dir / "truth.png").string(), render_png(truth));

  nlohmann::ordered_json manifest;
  manifest["width"] = o.width;
  manifest["height"] = o.height;
  manifest["layout"] = o.layout;
  manifest["unknown_fraction"] = o.unknown_fraction;
  manifest["seed"] = o.seed;
  manifest["expected_rejections"] = nlohmann::ordered_json::parse(survey.expected.to_json());
  write_text(dir / "synth_manifest.json", manifest.dump(2) + "\n");

  out << "wrote synthetic scene " << o.width << "x" << o.height << " with " << survey.survey_points.size()
      << " survey points and " << survey.environment_points.size() << " environment points to " << dir.string()
      << "\n";
  return kExitOk;
}

int cmd_train(const TrainOptions& o, std::ostream& out) {
  const std::string data_path = default_data_path(o.scene, o.scene_data);
  require_file(o.scene, "scene header");
  require_file(data_path, "scene data");
  require_file(o.points, "points CSV");
  if (!o.env_points.empty()) require_file(o.env_points, "environment points CSV");

  ForestParams params;
  params.n_trees = o.trees;
  params.impurity = parse_impurity(o.impurity);
  params.mode = parse_split_mode(o.mode);
  params.gamma = o.gamma;
  params.feature_subsample = o.feature_subsample;
  params.min_node_size = o.min_node_size;
  params.max_depth = o.max_depth;
  params.seed = o.seed;

  const Scene scene = load_scene(o.scene, data_path);
  ExtractionResult extraction = extract_samples(scene, load_points(o.points));
  if (!o.env_points.empty()) {
    ExtractionResult env = extract_samples(scene, load_points(o.env_points));
    extraction.samples.insert(extraction.samples.end(), env.samples.begin(), env.samples.end());
    extraction.report.merge(env.report);
  }

  const fs::path dir = prepare_out_dir(o.out_dir);
  write_text(dir / "rejection_report.txt", extraction.report.to_text());
  write_text(dir / "rejection_report.json", extraction.report.to_json());

  const std::vector<SpectralSample> balanced = balance(extraction.samples, o.per_class, o.seed);
  const Forest forest = train_forest(to_training_set(balanced), params, o.threads);
  save_forest(forest, (dir / "model.ccf").string());

  out << extraction.report.to_text();
  out << "trained " << forest.trees.size() << " " << to_string(params.mode) << " trees on " << balanced.size()
      << " samples; model written to " << (dir / "model.ccf").string() << "\n";
  return kExitOk;
}

int cmd_classify(const ClassifyOptions& o, std::ostream& out) {
  const std::string data_path = default_data_path(o.scene, o.scene_data);
  require_file(o.model, "model file");
  require_file(o.scene, "scene header");
  require_file(data_path, "scene data");

  const Forest forest = load_forest(o.model);
  const Scene scene = load_scene(o.scene, data_path);
  const ClassMap map = classify_scene(forest, scene, o.threads);

  const fs::path dir = prepare_out_dir(o.out_dir);
  write_file_bytes((dir / "classmap.png").string(), render_png(map));
  write_class_grid(map, (dir / "classmap.cgrid").string());

  std::array<std::size_t, kMaterialCount> counts{};
  std::size_t invalid = 0;
  for (std::size_t i = 0; i < map.classes.size(); ++i) {
    if (map.valid[i]) {
      ++counts[map.classes[i]];
    } else {
      ++invalid;
    }
  }
  out << "classified " << map.classes.size() << " pixels:";
  for (MaterialClass c : kAllMaterials) out << " " << material_name(c) << "=" << counts[static_cast<std::size_t>(c)];
  out << " invalid=" << invalid << "\n";
  return kExitOk;
}

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out) {
  require_file(o.grid, "class grid");
  require_file(o.mask, "mask");
  const ClassMap map = load_class_grid(o.grid);
  const GroundTruthMask mask = load_mask(o.mask);
  const EvalReport report = evaluate_against_mask(map, mask);

  const fs::path dir = prepare_out_dir(o.out_dir);
  write_text(dir / "eval_report.txt", report.to_text());
  write_text(dir / "eval_report.json", report.to_json());
  out << report.to_text();
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Canonical correlation forest material mapping for multispectral scenes", "ccf"};
  app.require_subcommand(1);

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic scene, survey points and partial mask");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--width", synth.width, "Scene width in pixels")->capture_default_str();
  synth_cmd->add_option("--height", synth.height, "Scene height in pixels")->capture_default_str();
  synth_cmd->add_option("--layout", synth.layout, "blocks or quadrants")->capture_default_str();
  synth_cmd->add_option("--block", synth.block, "Tile size for the blocks layout")->capture_default_str();
  synth_cmd->add_option("--env-share", synth.environment_share, "Share of environment tiles")->capture_default_str();
  synth_cmd->add_option("--unknown", synth.unknown_fraction, "Fraction of mask pixels marked unknown")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--prototypes", synth.prototypes, "Prototype spectra JSON (default: built-in)");
  synth_cmd->add_option("--metal", synth.survey.metal, "Metal survey points")->capture_default_str();
  synth_cmd->add_option("--shingles", synth.survey.shingles, "Shingles survey points")->capture_default_str();
  synth_cmd->add_option("--thatch", synth.survey.thatch, "Thatch survey points")->capture_default_str();
  synth_cmd->add_option("--environment", synth.survey.environment, "Environment points")->capture_default_str();
  synth_cmd->add_option("--excluded", synth.survey.excluded_answers, "Points with excluded survey answers")
      ->capture_default_str();
  synth_cmd->add_option("--off-raster", synth.survey.off_raster, "Points placed outside the raster")
      ->capture_default_str();

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Extract, balance and train a forest");
  train_cmd->add_option("--scene", train.scene, "Scene header (JSON)")->required();
  train_cmd->add_option("--scene-data", train.scene_data, "Raw band-sequential data (default: header with .bsq)");
  train_cmd->add_option("--points", train.points, "Survey points CSV")->required();
  train_cmd->add_option("--env-points", train.env_points, "Environment points CSV");
  train_cmd->add_option("--out", train.out_dir, "Output directory")->required();
  train_cmd->add_option("--trees", train.trees, "Number of trees (15 recommended for accuracy)")
      ->capture_default_str();
  train_cmd->add_option("--per-class", train.per_class, "Training samples per class")->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--impurity", train.impurity, "gini or entropy")->capture_default_str();
  train_cmd->add_option("--mode", train.mode, "ccf or axis")->capture_default_str();
  train_cmd->add_option("--gamma", train.gamma, "Relative CCA ridge")->capture_default_str();
  train_cmd->add_option("--feature-subsample", train.feature_subsample, "Features per node (0 = ceil(sqrt(d)))")
      ->capture_default_str();
  train_cmd->add_option("--min-node-size", train.min_node_size, "Smallest node that may split")
      ->capture_default_str();
  train_cmd->add_option("--max-depth", train.max_depth, "Depth limit (default unlimited)");
  train_cmd->add_option("--threads", train.threads, "Training threads (0 = all cores)")->capture_default_str();

  ClassifyOptions classify;
  auto* classify_cmd = app.add_subcommand("classify", "Classify every pixel of a scene");
  classify_cmd->add_option("--model", classify.model, "Model file (.ccf)")->required();
  classify_cmd->add_option("--scene", classify.scene, "Scene header (JSON)")->required();
  classify_cmd->add_option("--scene-data", classify.scene_data, "Raw data (default: header with .bsq)");
  classify_cmd->add_option("--out", classify.out_dir, "Output directory")->required();
  classify_cmd->add_option("--threads", classify.threads, "Worker threads (0 = all cores)")->capture_default_str();

  EvaluateOptions evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a class grid against a partial mask");
  evaluate_cmd->add_option("--grid", evaluate.grid, "Class grid (.cgrid)")->required();
  evaluate_cmd->add_option("--mask", evaluate.mask, "Ground-truth mask PNG")->required();
  evaluate_cmd->add_option("--out", evaluate.out_dir, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitData;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth, out);
    if (train_cmd->parsed()) return cmd_train(train, out);
    if (classify_cmd->parsed()) return cmd_classify(classify, out);
    if (evaluate_cmd->parsed()) return cmd_evaluate(evaluate, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace ccf::cli
