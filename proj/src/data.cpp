#include "gtsrep/data.hpp"

#include "gtsrep/random.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <sstream>

namespace gtsrep {

MatrixXd SequenceDataset::stacked_frames() const {
  MatrixXd out(size() * frames_per_sequence, frame_dim);
  for (Index s = 0; s < size(); ++s)
    out.middleRows(s * frames_per_sequence, frames_per_sequence) = sequences[static_cast<std::size_t>(s)];
  return out;
}

void SequenceDataset::validate() const {
  if (grid_shaped() && frame_height * frame_width != frame_dim)
    throw Error("SequenceDataset: grid shape does not match frame dimension");
  for (const auto& s : sequences) {
    if (s.rows() != frames_per_sequence || s.cols() != frame_dim)
      throw Error("SequenceDataset: sequence of shape " + shape_str(s.rows(), s.cols()) + ", expected " +
                  shape_str(frames_per_sequence, frame_dim));
    require_finite(s, "SequenceDataset");
  }
}

ImageSet load_stl10(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("load_stl10: cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() % kStl10ImageBytes != 0)
    throw Error("load_stl10: file size " + std::to_string(bytes.size()) + " is not a multiple of " +
                std::to_string(kStl10ImageBytes));

  constexpr std::size_t plane = kStl10Side * kStl10Side;
  ImageSet set{kStl10Side, kStl10Side, {}};
  const std::size_t count = bytes.size() / kStl10ImageBytes;
  set.images.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const unsigned char* img = bytes.data() + k * kStl10ImageBytes;
    MatrixXd grey(kStl10Side, kStl10Side);
    for (Index c = 0; c < kStl10Side; ++c) {
      for (Index r = 0; r < kStl10Side; ++r) {
        const std::size_t at = static_cast<std::size_t>(c * kStl10Side + r);
        const double luma = 0.299 * img[at] + 0.587 * img[plane + at] + 0.114 * img[2 * plane + at];
        grey(r, c) = std::clamp(luma / 127.5 - 1.0, -1.0, 1.0);
      }
    }
    set.images.push_back(std::move(grey));
  }
  return set;
}

ImageSet generate_texture_images(Index count, Index height, Index width, std::uint64_t seed,
                                 const TextureParams& params) {
  if (count < 0 || height < 1 || width < 1) throw Error("generate_texture_images: bad dimensions");
  if (!(params.anisotropy >= 1.0) || !(params.spectral_exponent > 0.0))
    throw Error("generate_texture_images: need anisotropy >= 1 and spectral_exponent > 0");
  using Complex = std::complex<double>;
  using CMat = Eigen::MatrixXcd;
  const double two_pi = 2.0 * std::numbers::pi;

  // Signed DFT frequency in cycles per image side.
  auto freq = [](Index k, Index n) { return static_cast<double>(2 * k < n ? k : k - n); };
  auto synthesis = [&](Index n) {
    CMat e(n, n);
    for (Index k = 0; k < n; ++k)
      for (Index x = 0; x < n; ++x)
        e(x, k) = std::polar(1.0, two_pi * static_cast<double>(k * x % n) / static_cast<double>(n));
    return e;
  };
  const CMat ey = synthesis(height);
  const CMat ex = synthesis(width);

  Eigen::MatrixXd amplitude(height, width);
  for (Index ky = 0; ky < height; ++ky) {
    for (Index kx = 0; kx < width; ++kx) {
      const double fy = freq(ky, height);
      const double fx = params.anisotropy * freq(kx, width);
      const double f = std::sqrt(fy * fy + fx * fx);
      amplitude(ky, kx) = f > 0 ? std::pow(f, -params.spectral_exponent / 2) : 0.0;
    }
  }

  ImageSet set{height, width, {}};
  set.images.reserve(static_cast<std::size_t>(count));
  CMat coeffs(height, width);
  for (Index k = 0; k < count; ++k) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    for (Index kx = 0; kx < width; ++kx)
      for (Index ky = 0; ky < height; ++ky) {
        const double re = rng.normal();
        const double im = rng.normal();
        coeffs(ky, kx) = Complex(re, im) * amplitude(ky, kx);
      }
    MatrixXd img = (ey * coeffs * ex.transpose()).real();
    const double lo = img.minCoeff();
    const double hi = img.maxCoeff();
    if (hi > lo)
      img = ((img.array() - lo) * (2.0 / (hi - lo)) - 1.0).cwiseMax(-1.0).cwiseMin(1.0).matrix();
    else
      img.setZero();
    set.images.push_back(std::move(img));
  }
  return set;
}

std::vector<Offset> crop_walk(Index image_height, Index image_width, Index crop, Index frames, std::uint64_t seed) {
  if (crop < 1 || crop > image_height || crop > image_width)
    throw Error("crop_walk: crop " + std::to_string(crop) + " does not fit in " + shape_str(image_height, image_width));
  if (frames < 1) throw Error("crop_walk: need at least one frame");
  const Index max_row = image_height - crop;
  const Index max_col = image_width - crop;
  Rng rng(seed);
  std::vector<Offset> walk;
  walk.reserve(static_cast<std::size_t>(frames));
  walk.push_back({static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_row + 1))),
                  static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_col + 1)))});

  constexpr std::array<Offset, 4> kMoves = {{{0, -1}, {0, 1}, {-1, 0}, {1, 0}}};  // left right up down
  std::array<Offset, 4> legal{};
  for (Index t = 1; t < frames; ++t) {
    const Offset cur = walk.back();
    std::size_t n_legal = 0;
    for (const auto& mv : kMoves) {
      const Offset next{cur.row + mv.row, cur.col + mv.col};
      if (next.row >= 0 && next.row <= max_row && next.col >= 0 && next.col <= max_col) legal[n_legal++] = next;
    }
    walk.push_back(n_legal == 0 ? cur : legal[rng.below(n_legal)]);
  }
  return walk;
}

namespace {

void flatten_into(const MatrixXd& img, Index row, Index col, Index h, Index w, MatrixXd& seq, Index t) {
  for (Index r = 0; r < h; ++r)
    for (Index c = 0; c < w; ++c) seq(t, r * w + c) = img(row + r, col + c);
}

}  // namespace

SequenceDataset generate_moving_crop_dataset(const ImageSet& images, Index crop, Index frames, Index count,
                                             std::uint64_t seed) {
  if (crop < 1 || crop > images.height || crop > images.width)
    throw Error("generate_moving_crop_dataset: crop " + std::to_string(crop) + " larger than images " +
                shape_str(images.height, images.width));
  if (count < 0 || count > images.count())
    throw Error("generate_moving_crop_dataset: " + std::to_string(count) + " sequences requested from " +
                std::to_string(images.count()) + " images");
  if (frames < 2) throw Error("generate_moving_crop_dataset: need at least 2 frames");

  SequenceDataset ds;
  ds.frames_per_sequence = frames;
  ds.frame_dim = crop * crop;
  ds.frame_height = crop;
  ds.frame_width = crop;
  ds.sequences.reserve(static_cast<std::size_t>(count));
  for (Index k = 0; k < count; ++k) {
    const auto walk = crop_walk(images.height, images.width, crop, frames, derive_seed(seed, static_cast<std::uint64_t>(k)));
    MatrixXd seq(frames, crop * crop);
    for (Index t = 0; t < frames; ++t) {
      const auto& o = walk[static_cast<std::size_t>(t)];
      flatten_into(images.images[static_cast<std::size_t>(k)], o.row, o.col, crop, crop, seq, t);
    }
    ds.sequences.push_back(std::move(seq));
  }
  return ds;
}

SequenceDataset generate_moving_sprite_dataset(Index canvas, Index sprite, Index frames, Index count,
                                               std::uint64_t seed) {
  if (sprite < 1 || sprite > canvas)
    throw Error("generate_moving_sprite_dataset: sprite " + std::to_string(sprite) + " larger than canvas " +
                std::to_string(canvas));
  if (frames < 2 || count < 0) throw Error("generate_moving_sprite_dataset: bad frame or sequence count");

  const Index max_pos = canvas - sprite;
  auto bounce = [max_pos](Index& pos, Index& vel) {
    pos += vel;
    if (max_pos == 0) {
      pos = 0;
      return;
    }
    while (pos < 0 || pos > max_pos) {
      if (pos < 0) pos = -pos;
      if (pos > max_pos) pos = 2 * max_pos - pos;
      vel = -vel;
    }
  };

  SequenceDataset ds;
  ds.frames_per_sequence = frames;
  ds.frame_dim = canvas * canvas;
  ds.frame_height = canvas;
  ds.frame_width = canvas;
  for (Index k = 0; k < count; ++k) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));

    // Blob: sum of a few Gaussians, mapped so that faint tails vanish into
    // the -1 background.
    MatrixXd intensity = MatrixXd::Zero(sprite, sprite);
    const double s = static_cast<double>(sprite);
    for (int g = 0; g < 3; ++g) {
      const double cy = rng.uniform(0.25 * s, 0.75 * s);
      const double cx = rng.uniform(0.25 * s, 0.75 * s);
      const double sigma = rng.uniform(0.1 * s, 0.25 * s);
      for (Index c = 0; c < sprite; ++c)
        for (Index r = 0; r < sprite; ++r) {
          const double dy = static_cast<double>(r) + 0.5 - cy;
          const double dx = static_cast<double>(c) + 0.5 - cx;
          intensity(r, c) += std::exp(-(dy * dy + dx * dx) / (2 * sigma * sigma));
        }
    }
    const MatrixXd patch = (2.0 * ((intensity.array() - 0.2) / 0.6).cwiseMax(0.0).cwiseMin(1.0) - 1.0).matrix();

    constexpr std::array<Index, 4> kSpeeds = {-2, -1, 1, 2};
    Index py = static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_pos + 1)));
    Index px = static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_pos + 1)));
    Index vy = kSpeeds[rng.below(4)];
    Index vx = kSpeeds[rng.below(4)];

    MatrixXd seq = MatrixXd::Constant(frames, canvas * canvas, -1.0);
    for (Index t = 0; t < frames; ++t) {
      for (Index c = 0; c < sprite; ++c)
        for (Index r = 0; r < sprite; ++r) seq(t, (py + r) * canvas + (px + c)) = patch(r, c);
      bounce(py, vy);
      bounce(px, vx);
    }
    ds.sequences.push_back(std::move(seq));
  }
  return ds;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

MatrixXd load_csv_series(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("load_csv_series: cannot open " + path.string());

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_cells(line);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t k = 0; k < cells.size() && numeric; ++k) numeric = parse_double(cells[k], row[k]);
    if (!numeric) {
      if (rows.empty() && width == 0) {
        width = cells.size();  // header
        continue;
      }
      throw Error("load_csv_series: non-numeric cell on row " + std::to_string(line_no) + " of " + path.string());
    }
    if (width == 0) width = cells.size();
    if (row.size() != width)
      throw Error("load_csv_series: row " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                  " cells, expected " + std::to_string(width));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error("load_csv_series: no data rows in " + path.string());

  MatrixXd out(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) out(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return out;
}

void save_csv_series(const std::filesystem::path& path, const MatrixXd& series) {
  std::ofstream os(path);
  if (!os) throw Error("save_csv_series: cannot open " + path.string());
  std::array<char, 32> buf{};
  for (Index i = 0; i < series.rows(); ++i) {
    for (Index j = 0; j < series.cols(); ++j) {
      if (j) os << ',';
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), series(i, j));
      os.write(buf.data(), res.ptr - buf.data());
    }
    os << '\n';
  }
  if (!os) throw Error("save_csv_series: write failed for " + path.string());
}

SequenceDataset windows_from_series(const MatrixXd& series, Index frames_per_sequence) {
  if (frames_per_sequence < 2 || frames_per_sequence > series.rows())
    throw Error("windows_from_series: window of " + std::to_string(frames_per_sequence) + " frames over a series of " +
                std::to_string(series.rows()));
  SequenceDataset ds;
  ds.frames_per_sequence = frames_per_sequence;
  ds.frame_dim = series.cols();
  for (Index start = 0; start + frames_per_sequence <= series.rows(); start += frames_per_sequence)
    ds.sequences.push_back(series.middleRows(start, frames_per_sequence));
  return ds;
}

std::pair<SequenceDataset, SequenceDataset> split(const SequenceDataset& dataset, double train_fraction,
                                                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw Error("split: train_fraction must lie in (0, 1)");
  const std::size_t total = dataset.sequences.size();
  // Tolerance so that e.g. 0.7 * 5000 lands on 3500.
  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(total) + 1e-9));
  if (n_train == 0 || n_train == total)
    throw Error("split: fraction " + std::to_string(train_fraction) + " of " + std::to_string(total) +
                " sequences leaves an empty side");

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  SequenceDataset train = dataset;
  SequenceDataset test = dataset;
  train.sequences.clear();
  test.sequences.clear();
  train.split = Split::train;
  test.split = Split::test;
  for (std::size_t k = 0; k < total; ++k)
    (k < n_train ? train : test).sequences.push_back(dataset.sequences[order[k]]);
  return {std::move(train), std::move(test)};
}

}  // namespace gtsrep
