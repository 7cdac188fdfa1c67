// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: explain, detect, synth and metrics.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "anopack/anopack.hpp"

namespace {

using anopack::Json;

constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;
constexpr int kExitSchema = 4;

struct ExplainArgs {
  std::string input;
  std::string label_column = "label";
  std::string anomaly_value = "1";
  std::string out_dir = ".";
  std::string config_path;
  std::string lattice_path;
  std::vector<double> quantiles, alphas, lambdas;
  std::size_t ms = 0, mu = 0, level_cap = 0, k_cap = 0, workers = 0;
  double log2_f = 0.0, margin = 0.0;
  std::uint64_t seed = 0;
  std::string solver;
  bool full_shape_cost = false;
};

int run_explain_command(const ExplainArgs& args, const CLI::App& cmd) {
  anopack::PipelineConfig config;
  if (!args.config_path.empty())
    anopack::apply_config(Json::parse(anopack::read_file(args.config_path), nullptr, true, true),
                          config);
  auto given = [&](const char* flag) { return cmd.count(flag) > 0; };
  if (given("--quantiles")) config.quantiles = args.quantiles;
  if (given("--alphas")) config.alphas = args.alphas;
  if (given("--lambdas")) config.lambdas = args.lambdas;
  if (given("--ms")) config.ms = args.ms;
  if (given("--mu")) config.mu = args.mu;
  if (given("--log2-f")) config.log2_f = args.log2_f;
  if (given("--full-shape-cost")) config.full_shape_cost = args.full_shape_cost;
  if (given("--margin")) config.margin = args.margin;
  if (given("--level-cap")) config.level_cap = args.level_cap;
  if (given("--k-cap")) config.k_cap = args.k_cap;
  if (given("--seed")) config.seed = args.seed;
  if (given("--workers")) config.workers = std::max<std::size_t>(1, args.workers);
  if (given("--solver")) anopack::apply_config(Json{{"solver", args.solver}}, config);

  const auto raw = anopack::load_csv(args.input, args.label_column, args.anomaly_value);
  const auto data = anopack::normalize(raw);
  const auto result = anopack::run_explain(data, config);
  const auto doc = anopack::make_document(result, data, config.seed);

  namespace fs = std::filesystem;
  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  anopack::write_file((dir / "packing.json").string(), anopack::serialize(doc));
  anopack::write_file((dir / "cost.csv").string(), anopack::cost_csv(result.selection.trace));
  anopack::write_file((dir / "report.txt").string(), anopack::report_text(doc));
  if (!args.lattice_path.empty())
    anopack::write_file(args.lattice_path,
                        anopack::lattice_json(result, data.feature_names()).dump(2) + "\n");

  Json summary = {{"seed", config.seed},
                  {"seeds", result.seeds.size()},
                  {"ms", result.thresholds.ms},
                  {"mu", result.thresholds.mu},
                  {"rectangles", result.lattice.rectangles.size()},
                  {"level_cap_hit", result.lattice.level_cap_hit},
                  {"pool", result.pool.size()},
                  {"solver_failures", result.refine_stats.solver_failures},
                  {"best_k", result.selection.best_k},
                  {"k_cap_hit", result.selection.k_cap_hit},
                  {"total_bits", result.cost.total_bits},
                  {"naive_bits", result.cost.naive_bits},
                  {"savings_percent", result.cost.savings_percent},
                  {"seconds",
                   {{"density", result.times.density},
                    {"lattice", result.times.lattice},
                    {"refine", result.times.refine},
                    {"select", result.times.select}}}};
  if (result.selection.best_k == 0) summary["note"] = "no compressive pattern found";
  std::cout << summary.dump(2) << "\n";
  return 0;
}

struct DetectArgs {
  std::string packing, input, output = "scores.csv", label_column, anomaly_value = "1";
};

int run_detect_command(const DetectArgs& args) {
  const auto doc = anopack::read_packing(args.packing);
  const auto table = anopack::csv::read_table(args.input);
  std::optional<std::string> label;
  if (!args.label_column.empty()) label = args.label_column;
  const auto result = anopack::run_detect(doc, table, label, args.anomaly_value);
  anopack::write_file(args.output, anopack::scores_csv(result));
  std::cout << "AUPRC: " << (result.auprc ? anopack::format_real(*result.auprc) : "NA") << "\n";
  return 0;
}

struct SynthArgs {
  anopack::SynthConfig config;
  std::string output = "synthetic.csv";
  std::string truth;
};

int run_synth_command(const SynthArgs& args) {
  const auto synth = anopack::generate_synthetic(args.config);
  const auto& data = synth.dataset;
  std::string out;
  for (const auto& name : data.feature_names()) out += name + ",";
  out += "label\n";
  for (anopack::PointId i = 0; i < data.size(); ++i) {
    for (std::size_t f = 0; f < data.dims(); ++f) out += anopack::format_real(data.value(i, f)) + ",";
    out += data.is_anomaly(i) ? "1\n" : "0\n";
  }
  anopack::write_file(args.output, out);
  if (!args.truth.empty()) {
    Json packs = Json::array();
    for (const auto& p : synth.planted) {
      Json sides = Json::array();
      for (const auto& s : p.sides)
        sides.push_back({{"feature", data.feature_names()[s.feature]},
                         {"interval", {s.interval.lb, s.interval.ub}}});
      packs.push_back({{"sides", std::move(sides)}, {"anomaly_ids", p.anomaly_ids}});
    }
    anopack::write_file(args.truth,
                        Json{{"seed", args.config.seed}, {"packs", std::move(packs)}}.dump(2) + "\n");
  }
  return 0;
}

struct MetricsArgs {
  std::string packing, input, label_column = "label", anomaly_value = "1", scores;
};

int run_metrics_command(const MetricsArgs& args) {
  const auto doc = anopack::read_packing(args.packing);
  const auto raw = anopack::load_csv(args.input, args.label_column, args.anomaly_value);
  if (raw.feature_names() != doc.feature_names)
    throw anopack::SchemaError("input feature columns differ from the packing");
  const auto data = anopack::apply_normalization(raw, doc.normalization);

  std::size_t violations = 0;
  for (const auto& p : doc.packs) {
    for (anopack::PointId id : p.covered_anomalies)
      if (id >= data.size() || !data.is_anomaly(id) || !p.contains(data.point(id))) ++violations;
  }
  const auto encoding = anopack::make_encoding(data, {}, doc.log2_f);
  const auto cost = anopack::description_length(doc.packs, data, encoding);
  Json out = {{"interpretability",
               anopack::interpretability_json(anopack::interpretability_report(doc.packs, data))},
              {"total_bits", cost.total_bits},
              {"naive_bits", cost.naive_bits},
              {"savings_percent", cost.savings_percent},
              {"membership_violations", violations}};
  if (!args.scores.empty()) {
    const auto s = anopack::read_scores(args.scores);
    out["auprc"] = anopack::auprc(s.scores, s.labels);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explain labeled anomalies with compact ellipsoidal packs"};
  app.require_subcommand(1);

  ExplainArgs ex;
  auto* explain = app.add_subcommand("explain", "Learn a packing from a labeled CSV");
  explain->add_option("--input", ex.input, "Labeled CSV")->required()->check(CLI::ExistingFile);
  explain->add_option("--label-column", ex.label_column, "Label column name")->capture_default_str();
  explain->add_option("--anomaly-value", ex.anomaly_value, "Label value marking anomalies")
      ->capture_default_str();
  explain->add_option("--out-dir", ex.out_dir, "Directory for packing.json, cost.csv, report.txt")
      ->capture_default_str();
  explain->add_option("--config", ex.config_path, "JSON config file")->check(CLI::ExistingFile);
  explain->add_option("--dump-lattice", ex.lattice_path, "Write the lattice search as JSON");
  explain->add_option("--quantiles", ex.quantiles, "Density quantiles in percent");
  explain->add_option("--ms", ex.ms, "Minimum rectangle mass");
  explain->add_option("--mu", ex.mu, "Maximum rectangle impurity");
  explain->add_option("--alphas", ex.alphas, "Weights for nearby anomalies");
  explain->add_option("--lambdas", ex.lambdas, "Weights for normals");
  explain->add_option("--log2-f", ex.log2_f, "Bits per coordinate");
  explain->add_flag("--full-shape-cost", ex.full_shape_cost, "Price full shape matrices");
  explain->add_option("--margin", ex.margin, "Vicinity margin per side width");
  explain->add_option("--level-cap", ex.level_cap, "Maximum lattice level");
  explain->add_option("--k-cap", ex.k_cap, "Largest K in the selection sweep");
  explain->add_option("--seed", ex.seed, "Random seed");
  explain->add_option("--workers", ex.workers, "Worker threads");
  explain->add_option("--solver", ex.solver, "interior-point or simplex");

  DetectArgs dt;
  auto* detect = app.add_subcommand("detect", "Score a CSV against a packing");
  detect->add_option("--packing", dt.packing, "packing.json")->required()->check(CLI::ExistingFile);
  detect->add_option("--input", dt.input, "CSV to score")->required()->check(CLI::ExistingFile);
  detect->add_option("--output", dt.output, "Scores CSV")->capture_default_str();
  detect->add_option("--label-column", dt.label_column, "Optional label column for AUPRC");
  detect->add_option("--anomaly-value", dt.anomaly_value, "Label value marking anomalies")
      ->capture_default_str();

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Generate a planted-pattern dataset");
  synth->add_option("--m", sy.config.m, "Number of points")->capture_default_str();
  synth->add_option("--d", sy.config.d, "Number of features")->capture_default_str();
  synth->add_option("--num-packs", sy.config.num_packs, "Planted packs")->capture_default_str();
  synth->add_option("--max-pack-dim", sy.config.max_pack_dim, "Largest pack dimension")
      ->capture_default_str();
  synth->add_option("--anomaly-fraction", sy.config.anomaly_fraction, "Fraction of anomalies")
      ->capture_default_str();
  synth->add_option("--range-width", sy.config.range_width, "Planted interval width")
      ->capture_default_str();
  synth->add_option("--seed", sy.config.seed, "Random seed")->capture_default_str();
  synth->add_option("--output", sy.output, "Output CSV")->capture_default_str();
  synth->add_option("--truth", sy.truth, "Planted ground truth JSON");

  MetricsArgs mt;
  auto* metrics = app.add_subcommand("metrics", "Interpretability and cost of a packing");
  metrics->add_option("--packing", mt.packing, "packing.json")->required()->check(CLI::ExistingFile);
  metrics->add_option("--input", mt.input, "Labeled training CSV")->required()->check(CLI::ExistingFile);
  metrics->add_option("--label-column", mt.label_column, "Label column name")->capture_default_str();
  metrics->add_option("--anomaly-value", mt.anomaly_value, "Label value marking anomalies")
      ->capture_default_str();
  metrics->add_option("--scores", mt.scores, "Scores CSV with labels, for AUPRC");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*explain) return run_explain_command(ex, *explain);
    if (*detect) return run_detect_command(dt);
    if (*synth) return run_synth_command(sy);
    if (*metrics) return run_metrics_command(mt);
  } catch (const anopack::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const anopack::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const anopack::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
