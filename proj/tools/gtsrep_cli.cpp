// Experiment driver: reconstruct | predict | gen-data.

#include "gtsrep/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

namespace {

using namespace gtsrep;

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--out", args.out, "output directory (overrides output_dir)");
}

ExperimentConfig resolve(const CommonArgs& args) {
  auto cfg = load_config(args.config);
  if (args.seed) cfg.seed = *args.seed;
  if (!args.out.empty()) cfg.output_dir = args.out;
  if (cfg.output_dir.empty()) cfg.output_dir = "out";
  return cfg;
}

void print_table(const Report& r) {
  std::cout << report_csv(r);
  std::cout << "wall time: " << r.wall_time_seconds << " s\n";
}

int reconstruct(const CommonArgs& args) {
  const auto cfg = resolve(args);
  Artifacts artifacts;
  const auto report = run_reconstruction_experiment(cfg, &artifacts);
  emit_report(report, cfg.output_dir);
  save_artifacts(artifacts, cfg.output_dir);

  std::map<std::string, PlotSeries> curves;
  for (const auto& c : report.cells) {
    auto& s = curves[c.method];
    s.name = c.method;
    s.points.emplace_back(static_cast<double>(c.m), c.recon_mse);
  }
  std::vector<PlotSeries> series;
  for (auto& [_, s] : curves)
    if (s.points.size() >= 2) series.push_back(std::move(s));
  if (!series.empty()) emit_plot(series, std::filesystem::path(cfg.output_dir) / "reconstruction.svg");
  print_table(report);
  return 0;
}

int predict(const CommonArgs& args) {
  const auto cfg = resolve(args);
  Artifacts artifacts;
  const auto report = run_prediction_experiment(cfg, &artifacts);
  emit_report(report, cfg.output_dir);
  save_artifacts(artifacts, cfg.output_dir);
  print_table(report);
  return 0;
}

void save_dataset(const SequenceDataset& ds, const std::filesystem::path& path) {
  std::vector<float> values;
  for (const auto& s : ds.sequences) {
    const auto v = to_row_major_floats(s);
    values.insert(values.end(), v.begin(), v.end());
  }
  std::vector<std::uint32_t> dims{static_cast<std::uint32_t>(ds.size()),
                                  static_cast<std::uint32_t>(ds.frames_per_sequence)};
  if (ds.grid_shaped()) {
    dims.push_back(static_cast<std::uint32_t>(ds.frame_height));
    dims.push_back(static_cast<std::uint32_t>(ds.frame_width));
  } else {
    dims.push_back(static_cast<std::uint32_t>(ds.frame_dim));
  }
  save_tensor(path, dims, values);
}

int gen_data(const CommonArgs& args) {
  const auto cfg = resolve(args);
  const auto data = prepare_data(cfg);
  const std::filesystem::path dir = cfg.output_dir;
  std::filesystem::create_directories(dir);
  save_dataset(data.train, dir / "train.gts");
  save_dataset(data.test, dir / "test.gts");
  std::cout << "train: " << data.train.size() << " sequences, test: " << data.test.size() << " sequences of "
            << data.train.frames_per_sequence << " x " << data.train.frame_dim << " -> " << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear latent representations for graph-supported time series"};
  app.require_subcommand(1);

  CommonArgs rec_args, pred_args, gen_args;
  auto* rec = app.add_subcommand("reconstruct", "reconstruction MSE of each representation vs latent dimension");
  add_common(rec, rec_args);
  auto* pred = app.add_subcommand("predict", "FC-LSTM free-run prediction MSE on top of each representation");
  add_common(pred, pred_args);
  auto* gen = app.add_subcommand("gen-data", "generate and split the configured dataset as GTS1 tensors");
  add_common(gen, gen_args);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*rec) return reconstruct(rec_args);
    if (*pred) return predict(pred_args);
    if (*gen) return gen_data(gen_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
