#pragma once

#include "gtsrep/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace gtsrep {

/// Grey images with pixels in [-1, 1].
struct ImageSet {
  Index height = 0;
  Index width = 0;
  std::vector<MatrixXd> images;  ///< each height x width

  Index count() const { return static_cast<Index>(images.size()); }
};

enum class Split { all, train, test };

/// Fixed-length frame sequences. Each sequence is T x n with one frame per
/// row; grid-shaped frames are flattened row-major (node = r * width + c).
struct SequenceDataset {
  std::vector<MatrixXd> sequences;
  Index frames_per_sequence = 0;
  Index frame_dim = 0;
  Index frame_height = 0;  ///< 0 when frames are not grid-shaped
  Index frame_width = 0;
  Split split = Split::all;

  bool grid_shaped() const { return frame_height > 0 && frame_width > 0; }
  Index size() const { return static_cast<Index>(sequences.size()); }

  /// All frames of all sequences stacked as rows.
  MatrixXd stacked_frames() const;

  /// Throws unless every sequence is T x n with finite values.
  void validate() const;
};

// STL-10 binary: per image 3 channels, each 96 x 96 stored column-major.
inline constexpr Index kStl10Side = 96;
inline constexpr std::size_t kStl10ImageBytes = 3 * 96 * 96;

/// BT.601 luma, then v / 127.5 - 1.
ImageSet load_stl10(const std::filesystem::path& path);

struct TextureParams {
  /// Power spectrum falls off as f^-spectral_exponent.
  double spectral_exponent = 2.5;
  /// Horizontal frequencies are stretched by this factor, so textures are
  /// this many times smoother along rows than along columns.
  double anisotropy = 6.0;
};

/// Smooth random textures standing in for natural images: Gaussian random
/// fields with an anisotropic power-law spectrum, rescaled to [-1, 1].
ImageSet generate_texture_images(Index count, Index height, Index width, std::uint64_t seed,
                                 const TextureParams& params = {});

struct Offset {
  Index row = 0;
  Index col = 0;
};

/// Random walk of a crop window: uniform start, then T-1 one-pixel moves
/// chosen uniformly among the in-bounds directions (no move when none).
std::vector<Offset> crop_walk(Index image_height, Index image_width, Index crop, Index frames, std::uint64_t seed);

/// One sequence per image (the first `count` images): a crop x crop window
/// random-walking one pixel per frame.
SequenceDataset generate_moving_crop_dataset(const ImageSet& images, Index crop, Index frames, Index count,
                                             std::uint64_t seed);

/// A bright random blob on a -1 background moving at constant integer
/// velocity and bouncing off the canvas edges.
SequenceDataset generate_moving_sprite_dataset(Index canvas, Index sprite, Index frames, Index count,
                                               std::uint64_t seed);

/// Rows are time points, columns nodes. A single non-numeric first row is
/// taken as a header.
MatrixXd load_csv_series(const std::filesystem::path& path);
void save_csv_series(const std::filesystem::path& path, const MatrixXd& series);

/// Cuts a T_total x n series into consecutive non-overlapping windows.
SequenceDataset windows_from_series(const MatrixXd& series, Index frames_per_sequence);

/// Deterministic shuffled split into floor(fraction * N) and the rest.
std::pair<SequenceDataset, SequenceDataset> split(const SequenceDataset& dataset, double train_fraction,
                                                  std::uint64_t seed);

/// GTS1 tensor: "GTS1", u32 LE rank, rank x u32 LE dims, then f32 LE values
/// in row-major order.
struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

void save_tensor(const std::filesystem::path& path, const std::vector<std::uint32_t>& dims,
                 const std::vector<float>& values);
Tensor load_tensor(const std::filesystem::path& path);

/// Row-major float copy of a matrix, for save_tensor.
std::vector<float> to_row_major_floats(const MatrixXd& m);
MatrixXd matrix_from_tensor(const Tensor& t);

}  // namespace gtsrep
