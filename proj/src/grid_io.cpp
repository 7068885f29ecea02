#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>

#include "boltzinv/velocity_grid.hpp"

namespace boltzinv {

namespace {

constexpr char kMagic[8] = {'B', 'L', 'T', 'Z', 'G', 'R', 'I', 'D'};

template <class T>
void put_le(std::ostream& os, T value) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!is) throw InvalidArgument("binary read: truncated input");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

// Header layout (32 bytes): magic[8] | uint32 n | float32 R | float32 center[3] | uint32 kind.
void write_header(std::ostream& os, const VelocityGrid& g, PayloadKind kind) {
  os.write(kMagic, 8);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.n()));
  put_le<float>(os, static_cast<float>(g.half_width()));
  for (int a = 0; a < 3; ++a) put_le<float>(os, static_cast<float>(g.center()[a]));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(kind));
}

GridHeader read_header(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) throw InvalidArgument("binary read: bad magic");
  GridHeader h;
  h.n = static_cast<int>(get_le<std::uint32_t>(is));
  h.R = get_le<float>(is);
  for (int a = 0; a < 3; ++a) h.center[a] = get_le<float>(is);
  h.kind = static_cast<PayloadKind>(get_le<std::uint32_t>(is));
  return h;
}

void write_reals(std::ostream& os, std::span<const double> v) {
  for (double x : v) put_le<double>(os, x);
}

std::vector<double> read_reals(std::istream& is, std::size_t count) {
  std::vector<double> v(count);
  for (auto& x : v) x = get_le<double>(is);
  return v;
}

void save_grid_function(const GridFunction& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot open " + path + " for writing");
  write_header(os, f.grid(), PayloadKind::GridFunction);
  write_reals(os, f.values());
  if (!os) throw InvalidArgument("write failed: " + path);
}

GridFunction load_grid_function(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open " + path);
  const GridHeader h = read_header(is);
  if (h.kind != PayloadKind::GridFunction) throw InvalidArgument(path + ": not a grid function");
  auto g = std::make_shared<const VelocityGrid>(Vec3{h.center[0], h.center[1], h.center[2]}, h.R, h.n);
  return GridFunction(g, read_reals(is, g->size()));
}

void export_csv(const GridFunction& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot open " + path + " for writing");
  os << "x,y,z,value\n" << std::setprecision(17);
  const auto& g = f.grid();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Vec3 v = g.node(i);
    os << v.x << ',' << v.y << ',' << v.z << ',' << f[i] << '\n';
  }
}

}  // namespace boltzinv
