#include "gtsrep/data.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <fstream>
#include <set>

using namespace gtsrep;
using gtsrep::test::random_matrix;
using gtsrep::test::scratch_dir;

namespace {

void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream os(p, std::ios::binary);
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

SequenceDataset labelled(Index count) {
  SequenceDataset ds;
  ds.frames_per_sequence = 2;
  ds.frame_dim = 1;
  for (Index k = 0; k < count; ++k) ds.sequences.push_back(MatrixXd::Constant(2, 1, static_cast<double>(k)));
  return ds;
}

}  // namespace

TEST_CASE("load_stl10") {
  const auto dir = scratch_dir("stl10");
  SUBCASE("white") {
    write_bytes(dir / "w.bin", std::vector<unsigned char>(kStl10ImageBytes, 255));
    const auto set = load_stl10(dir / "w.bin");
    REQUIRE(set.count() == 1);
    CHECK(set.height == 96);
    CHECK(set.width == 96);
    CHECK((set.images[0].array() - 1.0).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("black, several images") {
    write_bytes(dir / "b.bin", std::vector<unsigned char>(3 * kStl10ImageBytes, 0));
    const auto set = load_stl10(dir / "b.bin");
    CHECK(set.count() == 3);
    for (const auto& img : set.images) CHECK(img == MatrixXd::Constant(96, 96, -1.0));
  }
  SUBCASE("channel planes are column-major") {
    std::vector<unsigned char> bytes(kStl10ImageBytes, 0);
    bytes[96] = 255;                    // red, row 0, column 1
    bytes[2 * 96 * 96 + 5] = 255;       // blue, row 5, column 0
    write_bytes(dir / "p.bin", bytes);
    const auto img = load_stl10(dir / "p.bin").images[0];
    CHECK(img(0, 1) == doctest::Approx(0.299 * 255 / 127.5 - 1));
    CHECK(img(5, 0) == doctest::Approx(0.114 * 255 / 127.5 - 1));
    CHECK(img(1, 0) == -1.0);
  }
  SUBCASE("bad size") {
    write_bytes(dir / "x.bin", std::vector<unsigned char>(kStl10ImageBytes + 7, 0));
    try {
      load_stl10(dir / "x.bin");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("27648") != std::string::npos);
    }
    CHECK_THROWS_AS(load_stl10(dir / "missing.bin"), Error);
  }
}

TEST_CASE("generate_texture_images") {
  const auto a = generate_texture_images(4, 32, 32, 7);
  const auto b = generate_texture_images(4, 32, 32, 7);
  REQUIRE(a.count() == 4);
  for (Index k = 0; k < 4; ++k) {
    CHECK(a.images[static_cast<std::size_t>(k)] == b.images[static_cast<std::size_t>(k)]);
    CHECK(a.images[static_cast<std::size_t>(k)].maxCoeff() == doctest::Approx(1.0));
    CHECK(a.images[static_cast<std::size_t>(k)].minCoeff() == doctest::Approx(-1.0));
  }
  CHECK(a.images[0] != a.images[1]);
  CHECK(generate_texture_images(1, 32, 32, 8).images[0] != a.images[0]);
  // Rows vary more slowly than columns.
  const MatrixXd& img = a.images[0];
  const double along_rows = (img.rightCols(31) - img.leftCols(31)).squaredNorm();
  const double along_cols = (img.bottomRows(31) - img.topRows(31)).squaredNorm();
  CHECK(along_rows < along_cols);
  CHECK_THROWS_AS(generate_texture_images(1, 0, 4, 1), Error);
  CHECK_THROWS_AS(generate_texture_images(1, 4, 4, 1, TextureParams{2.5, 0.5}), Error);
}

TEST_CASE("crop_walk") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto walk = crop_walk(12, 9, 5, 30, seed);
    REQUIRE(walk.size() == 30);
    for (std::size_t t = 0; t < walk.size(); ++t) {
      CHECK(walk[t].row >= 0);
      CHECK(walk[t].row <= 7);
      CHECK(walk[t].col >= 0);
      CHECK(walk[t].col <= 4);
      if (t > 0) {
        const Index d = std::abs(walk[t].row - walk[t - 1].row) + std::abs(walk[t].col - walk[t - 1].col);
        CHECK(d == 1);
      }
    }
  }
  for (const auto& o : crop_walk(6, 6, 6, 5, 3)) {
    CHECK(o.row == 0);
    CHECK(o.col == 0);
  }
  // A 1-pixel-wide corridor only allows vertical moves.
  for (const auto& o : crop_walk(10, 4, 4, 15, 1)) CHECK(o.col == 0);
  CHECK_THROWS_AS(crop_walk(5, 5, 6, 3, 1), Error);
}

TEST_CASE("generate_moving_crop_dataset") {
  SUBCASE("image-sized shapes") {
    ImageSet images{96, 96, {}};
    Rng rng(61);
    for (int k = 0; k < 6; ++k) images.images.push_back(random_matrix(96, 96, rng));
    const auto ds = generate_moving_crop_dataset(images, 45, 20, 6, 1);
    CHECK(ds.size() == 6);
    CHECK(ds.frames_per_sequence == 20);
    CHECK(ds.frame_dim == 2025);
    CHECK(ds.grid_shaped());
    CHECK_NOTHROW(ds.validate());
  }
  SUBCASE("frames are the walked crops") {
    ImageSet images{10, 12, {}};
    MatrixXd img(10, 12);
    for (Index r = 0; r < 10; ++r)
      for (Index c = 0; c < 12; ++c) img(r, c) = 0.01 * static_cast<double>(r * 12 + c) - 0.6;
    images.images.push_back(img);
    const auto ds = generate_moving_crop_dataset(images, 4, 8, 1, 5);
    const MatrixXd& seq = ds.sequences[0];
    // Pixel (0, 0) of each frame identifies the offset; consecutive offsets
    // differ by one pixel.
    for (Index t = 1; t < 8; ++t) {
      const double step = std::abs(seq(t, 0) - seq(t - 1, 0));
      CHECK((std::abs(step - 0.01) < 1e-12 || std::abs(step - 0.12) < 1e-12));
    }
    const Index offset = static_cast<Index>(std::lround((seq(0, 0) + 0.6) / 0.01));
    const Index r0 = offset / 12, c0 = offset % 12;
    for (Index r = 0; r < 4; ++r)
      for (Index c = 0; c < 4; ++c) CHECK(seq(0, r * 4 + c) == img(r0 + r, c0 + c));
  }
  SUBCASE("pinned window") {
    ImageSet images{8, 8, {}};
    Rng rng(62);
    images.images.push_back(random_matrix(8, 8, rng));
    const auto ds = generate_moving_crop_dataset(images, 8, 6, 1, 2);
    for (Index t = 1; t < 6; ++t) CHECK(ds.sequences[0].row(t) == ds.sequences[0].row(0));
  }
  SUBCASE("determinism and errors") {
    const auto images = generate_texture_images(3, 16, 16, 1);
    const auto a = generate_moving_crop_dataset(images, 8, 5, 3, 9);
    const auto b = generate_moving_crop_dataset(images, 8, 5, 3, 9);
    for (std::size_t k = 0; k < 3; ++k) CHECK(a.sequences[k] == b.sequences[k]);
    CHECK_THROWS_AS(generate_moving_crop_dataset(images, 17, 5, 3, 9), Error);
    CHECK_THROWS_AS(generate_moving_crop_dataset(images, 8, 5, 4, 9), Error);
  }
}

TEST_CASE("generate_moving_sprite_dataset") {
  const auto ds = generate_moving_sprite_dataset(16, 5, 20, 10, 4);
  CHECK(ds.size() == 10);
  CHECK(ds.frame_dim == 256);
  for (const auto& seq : ds.sequences) {
    CHECK(seq.maxCoeff() <= 1.0);
    CHECK(seq.minCoeff() >= -1.0);
    CHECK(seq.maxCoeff() > 0.5);
    const double mass = (seq.row(0).array() + 1).sum();
    for (Index t = 0; t < 20; ++t) {
      CHECK((seq.row(t).array() + 1).sum() == doctest::Approx(mass));
      CHECK((seq.row(t).array() != -1.0).count() <= 25);
    }
  }
  const auto again = generate_moving_sprite_dataset(16, 5, 20, 10, 4);
  for (std::size_t k = 0; k < 10; ++k) CHECK(again.sequences[k] == ds.sequences[k]);

  // The sprite moves.
  bool moved = false;
  for (const auto& seq : ds.sequences) moved |= seq.row(1) != seq.row(0);
  CHECK(moved);

  // Canvas-sized sprite: pinned, constant frames.
  const auto pinned = generate_moving_sprite_dataset(6, 6, 4, 1, 1);
  for (Index t = 1; t < 4; ++t) CHECK(pinned.sequences[0].row(t) == pinned.sequences[0].row(0));
  CHECK_THROWS_AS(generate_moving_sprite_dataset(4, 5, 4, 1, 1), Error);
}

TEST_CASE("csv series") {
  const auto dir = scratch_dir("csv");
  SUBCASE("plain") {
    write_text(dir / "a.csv", "1,2\n3,4\n");
    MatrixXd want(2, 2);
    want << 1, 2, 3, 4;
    CHECK(load_csv_series(dir / "a.csv") == want);
    write_text(dir / "b.csv", "1,2\n3,4");
    CHECK(load_csv_series(dir / "b.csv") == want);
  }
  SUBCASE("header") {
    write_text(dir / "h.csv", "roi_a,roi_b,roi_c\n0.5,-1e-3,+2\n");
    const MatrixXd m = load_csv_series(dir / "h.csv");
    CHECK(m.rows() == 1);
    CHECK(m(0, 1) == -1e-3);
    CHECK(m(0, 2) == 2);
  }
  SUBCASE("ragged") {
    write_text(dir / "r.csv", "1,2\n3,4\n5\n");
    try {
      load_csv_series(dir / "r.csv");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
  }
  SUBCASE("non-numeric body") {
    write_text(dir / "n.csv", "1,2\n3,x\n");
    try {
      load_csv_series(dir / "n.csv");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
    write_text(dir / "e.csv", "a,b\n");
    CHECK_THROWS_AS(load_csv_series(dir / "e.csv"), Error);
  }
  SUBCASE("round trip") {
    Rng rng(63);
    const MatrixXd m = random_matrix(7, 5, rng, -100, 100);
    save_csv_series(dir / "rt.csv", m);
    CHECK(load_csv_series(dir / "rt.csv") == m);
  }
}

TEST_CASE("windows_from_series") {
  const MatrixXd s = MatrixXd(VectorXd::LinSpaced(11, 0, 10)).replicate(1, 2);
  const auto ds = windows_from_series(s, 3);
  CHECK(ds.size() == 3);
  CHECK(ds.sequences[2](0, 0) == 6);
  CHECK(ds.frame_dim == 2);
  CHECK_FALSE(ds.grid_shaped());
  CHECK_THROWS_AS(windows_from_series(s, 12), Error);
  CHECK_THROWS_AS(windows_from_series(s, 1), Error);
}

TEST_CASE("split") {
  SUBCASE("sizes") {
    const auto [train, test] = split(labelled(5000), 0.7, 1);
    CHECK(train.size() == 3500);
    CHECK(test.size() == 1500);
    CHECK(train.split == Split::train);
    CHECK(test.split == Split::test);
    const auto [a, b] = split(labelled(35), 0.72, 3);
    CHECK(a.size() == 25);
    CHECK(b.size() == 10);
  }
  SUBCASE("partition") {
    const auto [train, test] = split(labelled(50), 0.6, 2);
    std::set<double> seen;
    for (const auto* part : {&train, &test})
      for (const auto& s : part->sequences) CHECK(seen.insert(s(0, 0)).second);
    CHECK(seen.size() == 50);
  }
  SUBCASE("deterministic") {
    const auto a = split(labelled(40), 0.5, 9);
    const auto b = split(labelled(40), 0.5, 9);
    const auto c = split(labelled(40), 0.5, 10);
    bool same = true, differs = false;
    for (std::size_t k = 0; k < 20; ++k) {
      same &= a.first.sequences[k] == b.first.sequences[k];
      differs |= a.first.sequences[k] != c.first.sequences[k];
    }
    CHECK(same);
    CHECK(differs);
  }
  SUBCASE("degenerate") {
    CHECK_THROWS_AS(split(labelled(3), 0.2, 1), Error);
    CHECK_THROWS_AS(split(labelled(3), 0.0, 1), Error);
    CHECK_THROWS_AS(split(labelled(3), 1.0, 1), Error);
  }
}

TEST_CASE("GTS1 tensors") {
  const auto dir = scratch_dir("gts");
  Rng rng(64);
  SUBCASE("round trip and length") {
    const MatrixXd m = random_matrix(3, 4, rng);
    save_tensor(dir / "t.gts", {3, 4}, to_row_major_floats(m));
    CHECK(std::filesystem::file_size(dir / "t.gts") == 4 + 4 + 4 * 2 + 4 * 12);
    const auto t = load_tensor(dir / "t.gts");
    CHECK(t.dims == std::vector<std::uint32_t>{3, 4});
    CHECK(matrix_from_tensor(t) == m.cast<float>().cast<double>());
    CHECK(t.values[1] == static_cast<float>(m(0, 1)));
  }
  SUBCASE("byte layout") {
    save_tensor(dir / "b.gts", {2}, {1.0f, -2.0f});
    const auto bytes = read_bytes(dir / "b.gts");
    const std::vector<unsigned char> want = {'G', 'T', 'S', '1', 1, 0, 0, 0, 2, 0, 0, 0,
                                             0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xc0};
    CHECK(bytes == want);
  }
  SUBCASE("rank 3") {
    std::vector<float> v(24);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<float>(k) * 0.5f;
    save_tensor(dir / "r3.gts", {2, 3, 4}, v);
    const auto t = load_tensor(dir / "r3.gts");
    CHECK(t.values == v);
    CHECK(std::filesystem::file_size(dir / "r3.gts") == 4 + 4 + 12 + 96);
    CHECK_THROWS_AS(matrix_from_tensor(t), Error);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(save_tensor(dir / "e.gts", {}, {}), Error);
    CHECK_THROWS_AS(save_tensor(dir / "e.gts", {2, 2}, {1.0f}), Error);
    write_bytes(dir / "magic.gts", {'G', 'T', 'S', '2', 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0});
    CHECK_THROWS_AS(load_tensor(dir / "magic.gts"), Error);
    save_tensor(dir / "ok.gts", {4}, {1, 2, 3, 4});
    auto bytes = read_bytes(dir / "ok.gts");
    bytes.resize(bytes.size() - 2);
    write_bytes(dir / "short.gts", bytes);
    CHECK_THROWS_AS(load_tensor(dir / "short.gts"), Error);
    bytes = read_bytes(dir / "ok.gts");
    bytes.push_back(0);
    write_bytes(dir / "long.gts", bytes);
    CHECK_THROWS_AS(load_tensor(dir / "long.gts"), Error);
    write_bytes(dir / "tiny.gts", {'G', 'T'});
    CHECK_THROWS_AS(load_tensor(dir / "tiny.gts"), Error);
  }
}
