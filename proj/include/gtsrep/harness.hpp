#pragma once

#include "gtsrep/autoencoder.hpp"
#include "gtsrep/data.hpp"
#include "gtsrep/lstm.hpp"
#include "gtsrep/optim.hpp"
#include "gtsrep/spectral.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gtsrep {

enum class Method { gft_grid, gft_geo, gft_corr, ae, raw };

std::string method_name(Method m);
Method parse_method(const std::string& name);
bool needs_grid(Method m);

/// Where sequences come from.
///  - "texture-crop": crops random-walking over generated smooth textures
///  - "stl10-crop":   the same over STL-10 images read from `stl10_path`
///  - "moving-sprite": bouncing blob on a dark canvas
///  - "csv":          node series files, cut into windows of `frames`
struct DatasetSpec {
  std::string kind = "texture-crop";
  Index sequences = 35;
  Index frames = 20;
  Index image_size = 32;
  Index crop = 16;
  Index canvas = 16;
  Index sprite = 6;
  std::string stl10_path;
  std::vector<std::string> csv_train;
  std::vector<std::string> csv_test;
  double train_fraction = 0.72;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  std::vector<Method> methods = {Method::gft_grid, Method::gft_geo, Method::ae};
  std::vector<Index> latent_dims = {16, 32, 64};
  TrainSchedule ae_schedule{100, 20, 1e-2, {{60, 10.0}}, 0.0, {}};
  TrainSchedule lstm_schedule{60, 6, 1e-2, {{20, 2.0}, {40, 2.0}}, 0.0, {}};
  Index warmup = 10;
  double correlation_keep_fraction = 0.05;
  EigenBackend eigen_backend = EigenBackend::jacobi;
  std::uint64_t seed = 1;
  std::string output_dir;
  /// When set, AE codecs are read from <dir>/codec_ae_m<m>.gts instead of
  /// trained (reuse of a previous reconstruction run).
  std::string ae_codec_dir;
  /// Scale latents into [-1, 1] by their largest training magnitude before
  /// the LSTM.
  bool latent_normalization = false;
  /// Global gradient-norm clip for LSTM training; 0 disables.
  double lstm_clip_norm = 0.0;

  /// Checks ranges and method/dataset compatibility.
  void validate(Index frame_dim, bool grid_shaped) const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ReportCell {
  std::string method;
  Index m = 0;
  double recon_mse = 0;
  std::optional<double> pred_mse;
  std::vector<double> ae_loss_history;
  std::vector<double> lstm_loss_history;
};

struct Report {
  std::string experiment;  ///< "reconstruction" or "prediction"
  std::uint64_t seed = 0;
  std::string config_hash;
  double wall_time_seconds = 0;
  nlohmann::json config;
  std::vector<ReportCell> cells;
};

nlohmann::json report_to_json(const Report& r);
Report report_from_json(const nlohmann::json& j);

/// CSV table with columns method,m,recon_mse,pred_mse. Numbers use the
/// shortest round-trip representation, so equal reports give equal bytes.
std::string report_csv(const Report& r);

/// Writes report.json and <experiment>.csv into `dir` (created if needed);
/// returns the written paths.
std::vector<std::filesystem::path> emit_report(const Report& r, const std::filesystem::path& dir);

/// Train/test sequences for a config, split deterministically by its seed.
struct PreparedData {
  SequenceDataset train;
  SequenceDataset test;
};
PreparedData prepare_data(const ExperimentConfig& config);

/// A fitted linear representation: spectral basis, autoencoder, or identity.
struct FittedCodec {
  Method method = Method::raw;
  Index m = 0;
  std::optional<SpectralBasis<double>> spectral;
  std::optional<LinearCodec<double>> autoencoder;
  std::vector<double> loss_history;
  double latent_scale = 1.0;

  MatrixXd encode_rows(const MatrixXd& frames) const;
  MatrixXd decode_rows(const MatrixXd& latents) const;
};

/// Models and sample predictions kept from a run, for persistence.
struct Artifacts {
  std::vector<FittedCodec> codecs;
  std::vector<std::pair<std::string, LstmCell<double>>> cells;  ///< keyed "<method>_m<m>"
  std::vector<std::pair<std::string, MatrixXd>> predictions;    ///< decoded, first test sequence
  Index frame_height = 0;
  Index frame_width = 0;
};

Report run_reconstruction_experiment(const ExperimentConfig& config, Artifacts* artifacts = nullptr);
Report run_prediction_experiment(const ExperimentConfig& config, Artifacts* artifacts = nullptr);

/// GTS1 files: codec_<method>_m<m>.gts, lstm_<key>/<param>.gts,
/// prediction_<key>.gts.
void save_artifacts(const Artifacts& a, const std::filesystem::path& dir);

void save_lstm(const LstmCell<double>& cell, const std::filesystem::path& dir);
LstmCell<double> load_lstm(const std::filesystem::path& dir);

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

/// Standalone SVG line chart, one polyline per series.
void emit_plot(const std::vector<PlotSeries>& series, const std::filesystem::path& path,
               const std::string& x_label = "latent dimension m", const std::string& y_label = "MSE");
std::string render_plot(const std::vector<PlotSeries>& series, const std::string& x_label,
                        const std::string& y_label);

}  // namespace gtsrep
