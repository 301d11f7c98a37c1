#include "gtsrep/harness.hpp"

#include "gtsrep/graphs.hpp"
#include "gtsrep/random.hpp"

#include <chrono>
#include <fstream>
#include <set>

namespace gtsrep {

namespace {

using nlohmann::json;

// Seed streams; every random consumer derives its own seed from the config
// seed, so results do not depend on the order cells are processed in.
constexpr std::uint64_t kStreamImages = 1;
constexpr std::uint64_t kStreamWalks = 2;
constexpr std::uint64_t kStreamSplit = 3;
constexpr std::uint64_t kStreamAeInit = 1'000;
constexpr std::uint64_t kStreamAeTrain = 2'000;
constexpr std::uint64_t kStreamLstm = 100'000;

std::uint64_t cell_stream(Method method, Index m) {
  return static_cast<std::uint64_t>(method) * 10'000 + static_cast<std::uint64_t>(m);
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(where + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw Error(where + ": unknown key \"" + key + "\"");
}

std::vector<Milestone> milestones_from_json(const json& j) {
  std::vector<Milestone> out;
  for (const auto& item : j) {
    if (!item.is_array() || item.size() != 2) throw Error("schedule: milestones are [epoch, divisor] pairs");
    out.push_back({item[0].get<int>(), item[1].get<double>()});
  }
  return out;
}

json milestones_to_json(const std::vector<Milestone>& ms) {
  json out = json::array();
  for (const auto& m : ms) out.push_back({m.epoch, m.divisor});
  return out;
}

TrainSchedule schedule_from_json(const json& j, const std::string& where) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "autoencoder-images") return schedules::autoencoder_images();
    if (name == "autoencoder-series") return schedules::autoencoder_series();
    if (name == "lstm") return schedules::lstm();
    throw Error(where + ": unknown schedule preset \"" + name + "\"");
  }
  reject_unknown_keys(j, {"epochs", "batch_size", "lr", "lr_milestones", "weight_decay", "wd_milestones"}, where);
  TrainSchedule s;
  s.epochs = j.at("epochs").get<int>();
  s.batch_size = j.at("batch_size").get<int>();
  s.lr0 = j.at("lr").get<double>();
  s.lr_milestones = milestones_from_json(j.value("lr_milestones", json::array()));
  s.wd0 = j.value("weight_decay", 0.0);
  s.wd_milestones = milestones_from_json(j.value("wd_milestones", json::array()));
  s.validate();
  return s;
}

json schedule_to_json(const TrainSchedule& s) {
  return {{"epochs", s.epochs},
          {"batch_size", s.batch_size},
          {"lr", s.lr0},
          {"lr_milestones", milestones_to_json(s.lr_milestones)},
          {"weight_decay", s.wd0},
          {"wd_milestones", milestones_to_json(s.wd_milestones)}};
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string cell_key(Method method, Index m) { return method_name(method) + "_m" + std::to_string(m); }

/// Eigendecomposition of the Laplacian each graph method uses, fit on
/// training frames only.
SymEig<double> graph_eigensystem(Method method, const ExperimentConfig& cfg, const SequenceDataset& train,
                                 const MatrixXd& train_frames) {
  switch (method) {
    case Method::gft_grid:
      return decompose_laplacian(laplacian(build_grid_graph(train.frame_height, train.frame_width)),
                                 cfg.eigen_backend);
    case Method::gft_geo:
      return decompose_laplacian(
          laplacian(build_semi_geometric_graph(train_frames, train.frame_height, train.frame_width)),
          cfg.eigen_backend);
    case Method::gft_corr:
      return decompose_laplacian(laplacian(build_correlation_graph(train_frames, cfg.correlation_keep_fraction)),
                                 cfg.eigen_backend);
    default:
      throw Error("graph_eigensystem: " + method_name(method) + " is not a graph method");
  }
}

/// Fits every configured (method, m) codec on the training frames.
std::vector<FittedCodec> fit_codecs(const ExperimentConfig& cfg, const SequenceDataset& train) {
  const MatrixXd train_frames = train.stacked_frames();
  const Index n = train.frame_dim;
  std::vector<FittedCodec> out;
  for (Method method : cfg.methods) {
    if (method == Method::raw) {
      FittedCodec c;
      c.method = method;
      c.m = n;
      out.push_back(std::move(c));
      continue;
    }
    if (method == Method::ae) {
      for (Index m : cfg.latent_dims) {
        FittedCodec c;
        c.method = method;
        c.m = m;
        if (!cfg.ae_codec_dir.empty()) {
          const auto path = std::filesystem::path(cfg.ae_codec_dir) / ("codec_ae_m" + std::to_string(m) + ".gts");
          MatrixXd a = matrix_from_tensor(load_tensor(path));
          if (a.rows() != n || a.cols() != m)
            throw Error("codec " + path.string() + " has shape " + shape_str(a.rows(), a.cols()) + ", expected " +
                        shape_str(n, m));
          c.autoencoder = LinearCodec<double>{std::move(a)};
        } else {
          auto init = init_codec(n, m, derive_seed(cfg.seed, kStreamAeInit + static_cast<std::uint64_t>(m)));
          auto trained = train_autoencoder(std::move(init), train_frames, cfg.ae_schedule,
                                           derive_seed(cfg.seed, kStreamAeTrain + static_cast<std::uint64_t>(m)));
          c.autoencoder = std::move(trained.codec);
          c.loss_history = std::move(trained.loss_history);
        }
        out.push_back(std::move(c));
      }
      continue;
    }
    const auto eig = graph_eigensystem(method, cfg, train, train_frames);
    for (Index m : cfg.latent_dims) {
      FittedCodec c;
      c.method = method;
      c.m = m;
      c.spectral = compute_basis(eig, m);
      out.push_back(std::move(c));
    }
  }
  return out;
}

double reconstruction_mse(const FittedCodec& c, const MatrixXd& frames) {
  if (c.spectral) return mse(gft_decode_rows(*c.spectral, gft_encode_rows(*c.spectral, frames)), frames);
  if (c.autoencoder) return mse(ae_decode_rows(*c.autoencoder, ae_encode_rows(*c.autoencoder, frames)), frames);
  return 0.0;
}

struct Prepared {
  PreparedData data;
  Index n;
};

Prepared prepare_and_validate(const ExperimentConfig& config) {
  auto data = prepare_data(config);
  const Index n = data.train.frame_dim;
  config.validate(n, data.train.grid_shaped());
  return {std::move(data), n};
}

Report make_report(const std::string& experiment, const ExperimentConfig& config) {
  Report r;
  r.experiment = experiment;
  r.seed = config.seed;
  r.config = config_to_json(config);
  r.config_hash = fnv1a_hex(r.config.dump());
  return r;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::gft_grid: return "gft-grid";
    case Method::gft_geo: return "gft-geo";
    case Method::gft_corr: return "gft-corr";
    case Method::ae: return "ae";
    case Method::raw: return "raw";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::gft_grid, Method::gft_geo, Method::gft_corr, Method::ae, Method::raw})
    if (method_name(m) == name) return m;
  throw Error("unknown method \"" + name + "\" (expected gft-grid, gft-geo, gft-corr, ae or raw)");
}

bool needs_grid(Method m) { return m == Method::gft_grid || m == Method::gft_geo; }

void ExperimentConfig::validate(Index frame_dim, bool grid_shaped) const {
  if (methods.empty()) throw Error("config: no methods");
  bool needs_dims = false;
  for (Method m : methods) {
    if (needs_grid(m) && !grid_shaped)
      throw Error("config: method " + method_name(m) + " needs grid-shaped frames, dataset \"" + dataset.kind +
                  "\" has none");
    needs_dims |= m != Method::raw;
  }
  if (needs_dims && latent_dims.empty()) throw Error("config: latent_dims is empty");
  for (Index m : latent_dims)
    if (m < 1 || m > frame_dim)
      throw Error("config: latent dimension " + std::to_string(m) + " outside [1, " + std::to_string(frame_dim) +
                  "]");
  if (!(correlation_keep_fraction > 0 && correlation_keep_fraction <= 1))
    throw Error("config: correlation_keep_fraction must lie in (0, 1]");
  if (warmup < 1 || warmup > dataset.frames - 1)
    throw Error("config: warmup " + std::to_string(warmup) + " outside [1, frames - 1]");
  if (lstm_clip_norm < 0) throw Error("config: lstm_clip_norm must be >= 0");
  ae_schedule.validate();
  lstm_schedule.validate();
}

ExperimentConfig config_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"dataset", "methods", "latent_dims", "ae_schedule", "lstm_schedule", "warmup",
                       "correlation_keep_fraction", "eigen_backend", "seed", "output_dir", "ae_codec_dir",
                       "latent_normalization", "lstm_clip_norm"},
                      "config");
  ExperimentConfig c;
  if (j.contains("dataset")) {
    const auto& d = j["dataset"];
    reject_unknown_keys(d,
                        {"kind", "sequences", "frames", "image_size", "crop", "canvas", "sprite", "stl10_path",
                         "csv_train", "csv_test", "train_fraction"},
                        "config.dataset");
    auto& ds = c.dataset;
    ds.kind = d.value("kind", ds.kind);
    ds.sequences = d.value("sequences", ds.sequences);
    ds.frames = d.value("frames", ds.frames);
    ds.image_size = d.value("image_size", ds.image_size);
    ds.crop = d.value("crop", ds.crop);
    ds.canvas = d.value("canvas", ds.canvas);
    ds.sprite = d.value("sprite", ds.sprite);
    ds.stl10_path = d.value("stl10_path", ds.stl10_path);
    ds.csv_train = d.value("csv_train", ds.csv_train);
    ds.csv_test = d.value("csv_test", ds.csv_test);
    ds.train_fraction = d.value("train_fraction", ds.train_fraction);
  }
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : j["methods"]) c.methods.push_back(parse_method(m.get<std::string>()));
  }
  if (j.contains("latent_dims")) c.latent_dims = j["latent_dims"].get<std::vector<Index>>();
  if (j.contains("ae_schedule")) c.ae_schedule = schedule_from_json(j["ae_schedule"], "config.ae_schedule");
  if (j.contains("lstm_schedule")) c.lstm_schedule = schedule_from_json(j["lstm_schedule"], "config.lstm_schedule");
  c.warmup = j.value("warmup", c.warmup);
  c.correlation_keep_fraction = j.value("correlation_keep_fraction", c.correlation_keep_fraction);
  if (j.contains("eigen_backend")) {
    const auto b = j["eigen_backend"].get<std::string>();
    if (b == "jacobi")
      c.eigen_backend = EigenBackend::jacobi;
    else if (b == "tridiagonal")
      c.eigen_backend = EigenBackend::tridiagonal;
    else
      throw Error("config: eigen_backend must be \"jacobi\" or \"tridiagonal\"");
  }
  c.seed = j.value("seed", c.seed);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.ae_codec_dir = j.value("ae_codec_dir", c.ae_codec_dir);
  c.latent_normalization = j.value("latent_normalization", c.latent_normalization);
  c.lstm_clip_norm = j.value("lstm_clip_norm", c.lstm_clip_norm);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(method_name(m));
  const auto& d = c.dataset;
  return {{"dataset",
           {{"kind", d.kind},
            {"sequences", d.sequences},
            {"frames", d.frames},
            {"image_size", d.image_size},
            {"crop", d.crop},
            {"canvas", d.canvas},
            {"sprite", d.sprite},
            {"stl10_path", d.stl10_path},
            {"csv_train", d.csv_train},
            {"csv_test", d.csv_test},
            {"train_fraction", d.train_fraction}}},
          {"methods", methods},
          {"latent_dims", c.latent_dims},
          {"ae_schedule", schedule_to_json(c.ae_schedule)},
          {"lstm_schedule", schedule_to_json(c.lstm_schedule)},
          {"warmup", c.warmup},
          {"correlation_keep_fraction", c.correlation_keep_fraction},
          {"eigen_backend", c.eigen_backend == EigenBackend::jacobi ? "jacobi" : "tridiagonal"},
          {"seed", c.seed},
          {"output_dir", c.output_dir},
          {"ae_codec_dir", c.ae_codec_dir},
          {"latent_normalization", c.latent_normalization},
          {"lstm_clip_norm", c.lstm_clip_norm}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw Error("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

PreparedData prepare_data(const ExperimentConfig& config) {
  const auto& d = config.dataset;
  if (d.kind == "csv") {
    if (d.csv_train.empty() || d.csv_test.empty()) throw Error("config: csv dataset needs csv_train and csv_test");
    auto gather = [&](const std::vector<std::string>& files, Split tag) {
      SequenceDataset all;
      for (const auto& f : files) {
        auto part = windows_from_series(load_csv_series(f), d.frames);
        if (all.sequences.empty()) {
          all = std::move(part);
        } else {
          if (part.frame_dim != all.frame_dim) throw Error("csv series " + f + " has a different node count");
          for (auto& s : part.sequences) all.sequences.push_back(std::move(s));
        }
      }
      all.split = tag;
      return all;
    };
    return {gather(d.csv_train, Split::train), gather(d.csv_test, Split::test)};
  }

  SequenceDataset all;
  if (d.kind == "texture-crop") {
    const auto images = generate_texture_images(d.sequences, d.image_size, d.image_size,
                                                derive_seed(config.seed, kStreamImages));
    all = generate_moving_crop_dataset(images, d.crop, d.frames, d.sequences, derive_seed(config.seed, kStreamWalks));
  } else if (d.kind == "stl10-crop") {
    if (d.stl10_path.empty()) throw Error("config: stl10-crop dataset needs stl10_path");
    const auto images = load_stl10(d.stl10_path);
    all = generate_moving_crop_dataset(images, d.crop, d.frames, d.sequences, derive_seed(config.seed, kStreamWalks));
  } else if (d.kind == "moving-sprite") {
    all = generate_moving_sprite_dataset(d.canvas, d.sprite, d.frames, d.sequences,
                                         derive_seed(config.seed, kStreamWalks));
  } else {
    throw Error("config: unknown dataset kind \"" + d.kind + "\"");
  }
  auto [train, test] = split(all, d.train_fraction, derive_seed(config.seed, kStreamSplit));
  return {std::move(train), std::move(test)};
}

MatrixXd FittedCodec::encode_rows(const MatrixXd& frames) const {
  MatrixXd z;
  if (spectral)
    z = gft_encode_rows(*spectral, frames);
  else if (autoencoder)
    z = ae_encode_rows(*autoencoder, frames);
  else
    z = frames;
  if (latent_scale != 1.0) z /= latent_scale;
  return z;
}

MatrixXd FittedCodec::decode_rows(const MatrixXd& latents) const {
  const MatrixXd z = latent_scale != 1.0 ? MatrixXd(latents * latent_scale) : latents;
  if (spectral) return gft_decode_rows(*spectral, z);
  if (autoencoder) return ae_decode_rows(*autoencoder, z);
  return z;
}

Report run_reconstruction_experiment(const ExperimentConfig& config, Artifacts* artifacts) {
  const auto start = std::chrono::steady_clock::now();
  auto [data, n] = prepare_and_validate(config);
  (void)n;
  Report report = make_report("reconstruction", config);

  const MatrixXd test_frames = data.test.stacked_frames();
  auto codecs = fit_codecs(config, data.train);
  for (const auto& c : codecs) {
    ReportCell cell;
    cell.method = method_name(c.method);
    cell.m = c.m;
    cell.recon_mse = reconstruction_mse(c, test_frames);
    cell.ae_loss_history = c.loss_history;
    report.cells.push_back(std::move(cell));
  }
  if (artifacts) {
    artifacts->codecs = std::move(codecs);
    artifacts->frame_height = data.train.frame_height;
    artifacts->frame_width = data.train.frame_width;
  }
  report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

Report run_prediction_experiment(const ExperimentConfig& config, Artifacts* artifacts) {
  const auto start = std::chrono::steady_clock::now();
  auto [data, n] = prepare_and_validate(config);
  (void)n;
  Report report = make_report("prediction", config);

  const MatrixXd test_frames = data.test.stacked_frames();
  auto codecs = fit_codecs(config, data.train);
  for (auto& codec : codecs) {
    std::vector<MatrixXd> train_latent;
    std::vector<MatrixXd> test_latent;
    for (const auto& s : data.train.sequences) train_latent.push_back(codec.encode_rows(s));
    if (config.latent_normalization) {
      double peak = 0;
      for (const auto& z : train_latent) peak = std::max(peak, z.cwiseAbs().maxCoeff());
      if (peak > 0) {
        codec.latent_scale = peak;
        for (auto& z : train_latent) z /= peak;
      }
    }
    for (const auto& s : data.test.sequences) test_latent.push_back(codec.encode_rows(s));

    const auto stream = kStreamLstm + 2 * cell_stream(codec.method, codec.m);
    auto cell0 = lstm_init(codec.m, derive_seed(config.seed, stream));
    auto trained = train_lstm(std::move(cell0), std::span<const MatrixXd>(train_latent), config.lstm_schedule,
                              config.warmup, derive_seed(config.seed, stream + 1), config.lstm_clip_norm);

    ReportCell cell;
    cell.method = method_name(codec.method);
    cell.m = codec.m;
    cell.recon_mse = reconstruction_mse(codec, test_frames);
    cell.pred_mse = evaluate_prediction(trained.cell, std::span<const MatrixXd>(test_latent),
                                        std::span<const MatrixXd>(data.test.sequences), config.warmup,
                                        [&](const MatrixXd& z) { return codec.decode_rows(z); });
    cell.ae_loss_history = codec.loss_history;
    cell.lstm_loss_history = std::move(trained.loss_history);
    report.cells.push_back(std::move(cell));

    if (artifacts) {
      const auto key = cell_key(codec.method, codec.m);
      const MatrixXd pred = run_sequence(trained.cell, test_latent.front(), config.warmup);
      artifacts->predictions.emplace_back(key, codec.decode_rows(pred));
      artifacts->cells.emplace_back(key, std::move(trained.cell));
    }
  }
  if (artifacts) {
    artifacts->codecs = std::move(codecs);
    artifacts->frame_height = data.train.frame_height;
    artifacts->frame_width = data.train.frame_width;
  }
  report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void save_lstm(const LstmCell<double>& cell, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for_each_parameter(
      [&](const char* name, const auto& t) {
        const MatrixXd m = t;
        const auto dims = t.cols() == 1 ? std::vector<std::uint32_t>{static_cast<std::uint32_t>(t.rows())}
                                        : std::vector<std::uint32_t>{static_cast<std::uint32_t>(t.rows()),
                                                                     static_cast<std::uint32_t>(t.cols())};
        save_tensor(dir / (std::string(name) + ".gts"), dims, to_row_major_floats(m));
      },
      cell);
}

LstmCell<double> load_lstm(const std::filesystem::path& dir) {
  LstmCell<double> cell;
  for_each_parameter(
      [&](const char* name, auto& t) {
        const auto tensor = load_tensor(dir / (std::string(name) + ".gts"));
        using Plain = std::decay_t<decltype(t)>;
        if constexpr (Plain::ColsAtCompileTime == 1) {
          if (tensor.dims.size() != 1) throw Error(std::string("load_lstm: ") + name + " must be rank 1");
          t.resize(tensor.dims[0]);
          for (std::size_t k = 0; k < tensor.values.size(); ++k) t(static_cast<Index>(k)) = tensor.values[k];
        } else {
          t = matrix_from_tensor(tensor);
        }
      },
      cell);
  validate_cell(cell);
  return cell;
}

void save_artifacts(const Artifacts& a, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& c : a.codecs) {
    const auto path = dir / ("codec_" + cell_key(c.method, c.m) + ".gts");
    const auto dims = [&](const MatrixXd& m) {
      return std::vector<std::uint32_t>{static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
    };
    if (c.autoencoder) save_tensor(path, dims(c.autoencoder->a), to_row_major_floats(c.autoencoder->a));
    if (c.spectral) save_tensor(path, dims(c.spectral->basis), to_row_major_floats(c.spectral->basis));
  }
  for (const auto& [key, cell] : a.cells) save_lstm(cell, dir / ("lstm_" + key));
  for (const auto& [key, frames] : a.predictions) {
    std::vector<std::uint32_t> dims{static_cast<std::uint32_t>(frames.rows())};
    if (a.frame_height > 0) {
      dims.push_back(static_cast<std::uint32_t>(a.frame_height));
      dims.push_back(static_cast<std::uint32_t>(a.frame_width));
    } else {
      dims.push_back(static_cast<std::uint32_t>(frames.cols()));
    }
    save_tensor(dir / ("prediction_" + key + ".gts"), dims, to_row_major_floats(frames));
  }
}

}  // namespace gtsrep
