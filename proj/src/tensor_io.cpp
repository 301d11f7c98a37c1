#include "gtsrep/data.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace gtsrep {

namespace {

constexpr std::array<char, 4> kMagic = {'G', 'T', 'S', '1'};

void put_u32(std::vector<char>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xffu));
}

std::uint32_t get_u32(const std::vector<char>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + k])) << (8 * k);
  return v;
}

}  // namespace

void save_tensor(const std::filesystem::path& path, const std::vector<std::uint32_t>& dims,
                 const std::vector<float>& values) {
  if (dims.empty()) throw Error("save_tensor: empty dims list");
  std::uint64_t count = 1;
  for (auto d : dims) count *= d;
  if (count != values.size())
    throw Error("save_tensor: dims describe " + std::to_string(count) + " values, got " +
                std::to_string(values.size()));

  std::vector<char> buf(kMagic.begin(), kMagic.end());
  buf.reserve(8 + 4 * dims.size() + 4 * values.size());
  put_u32(buf, static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) put_u32(buf, d);
  for (float f : values) put_u32(buf, std::bit_cast<std::uint32_t>(f));

  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("save_tensor: cannot open " + path.string());
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw Error("save_tensor: write failed for " + path.string());
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("load_tensor: cannot open " + path.string());
  const std::vector<char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (buf.size() < 8 || std::memcmp(buf.data(), kMagic.data(), 4) != 0)
    throw Error("load_tensor: bad magic in " + path.string());
  const std::uint32_t rank = get_u32(buf, 4);
  if (rank == 0) throw Error("load_tensor: rank 0 in " + path.string());
  if (buf.size() < 8 + 4 * static_cast<std::size_t>(rank)) throw Error("load_tensor: truncated header in " + path.string());

  Tensor t;
  std::uint64_t count = 1;
  for (std::uint32_t k = 0; k < rank; ++k) {
    t.dims.push_back(get_u32(buf, 8 + 4 * k));
    count *= t.dims.back();
  }
  const std::size_t data_at = 8 + 4 * static_cast<std::size_t>(rank);
  if (buf.size() != data_at + 4 * count)
    throw Error("load_tensor: expected " + std::to_string(data_at + 4 * count) + " bytes, file has " +
                std::to_string(buf.size()) + " (" + path.string() + ")");
  t.values.resize(count);
  for (std::size_t k = 0; k < count; ++k) t.values[k] = std::bit_cast<float>(get_u32(buf, data_at + 4 * k));
  return t;
}

std::vector<float> to_row_major_floats(const MatrixXd& m) {
  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) out.push_back(static_cast<float>(m(i, j)));
  return out;
}

MatrixXd matrix_from_tensor(const Tensor& t) {
  if (t.dims.size() != 2) throw Error("matrix_from_tensor: expected rank 2, got " + std::to_string(t.dims.size()));
  MatrixXd m(t.dims[0], t.dims[1]);
  std::size_t k = 0;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = t.values[k++];
  return m;
}

}  // namespace gtsrep
