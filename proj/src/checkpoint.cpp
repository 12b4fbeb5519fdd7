#include "taf/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace taf {

namespace {

constexpr char kMagic[6] = {'T', 'A', 'F', 'v', '1', '\0'};

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms unsupported");

template <typename T>
void put_le(std::string& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(std::begin(bytes), std::end(bytes));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(const std::string& in, std::size_t offset) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, in.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(std::begin(bytes), std::end(bytes));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void save_checkpoint(const ModelState& state, const std::string& path) {
  const RealField& f = state.f();
  if (f.grid.dims != 3)
    throw CheckpointError("save_checkpoint: state must live on the 3-D grid");

  std::string buf;
  buf.reserve(34 + 8 * f.data.size());
  buf.append(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(f.grid.n[0]));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(f.grid.n[1]));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(f.grid.n[2]));
  put_le<double>(buf, state.time());
  put_le<std::uint64_t>(buf, static_cast<std::uint64_t>(state.step()));
  for (double v : f.data) put_le<double>(buf, v);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("save_checkpoint: cannot open '" + path + "'");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw CheckpointError("save_checkpoint: short write to '" + path + "'");
}

ModelState load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("load_checkpoint: cannot open '" + path + "'");
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (buf.size() < 34) throw CheckpointError("load_checkpoint: truncated header in '" + path +
                                             "': expected >= 34 bytes, got " +
                                             std::to_string(buf.size()));
  if (std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0)
    throw CheckpointError("load_checkpoint: magic mismatch in '" + path + "'");

  const auto nx = get_le<std::uint32_t>(buf, 6);
  const auto ny = get_le<std::uint32_t>(buf, 10);
  const auto ntheta = get_le<std::uint32_t>(buf, 14);
  const double time = get_le<double>(buf, 18);
  const auto step = get_le<std::uint64_t>(buf, 26);

  TorusGrid grid = TorusGrid::upsilon(static_cast<int>(nx), static_cast<int>(ny),
                                      static_cast<int>(ntheta));
  const std::size_t expected = 34 + 8 * grid.point_count();
  if (buf.size() != expected)
    throw CheckpointError("load_checkpoint: '" + path + "' has " +
                          std::to_string(buf.size()) + " bytes, expected " +
                          std::to_string(expected) + " for a " + std::to_string(nx) + "x" +
                          std::to_string(ny) + "x" + std::to_string(ntheta) + " grid");

  RealField f(grid, 0);
  for (std::size_t p = 0; p < f.data.size(); ++p)
    f.data[p] = get_le<double>(buf, 34 + 8 * p);
  return ModelState(std::move(f), time, static_cast<long>(step));
}

}  // namespace taf
