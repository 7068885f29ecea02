#include "boltzinv/common.hpp"

#include <algorithm>

namespace boltzinv {

Frame frame_along(const Vec3& axis) {
  const double len = norm(axis);
  const Vec3 e3 = len > 0 ? (1.0 / len) * axis : Vec3{0, 0, 1};
  const Vec3 trial = std::fabs(e3.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 e1 = cross(e3, trial);
  e1 *= 1.0 / norm(e1);
  return {e1, cross(e3, e1), e3};
}

double compensated_dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("compensated_dot: length mismatch");
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
  return s.value();
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return splitmix64(splitmix64(splitmix64(seed_) ^ stream_) ^ counter);
}

double CounterRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
  const double u1 = 1.0 - uniform(), u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

Vec3 CounterRng::unit_vector() {
  const double z = uniform(-1.0, 1.0), ph = uniform(0.0, 2.0 * kPi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(ph), r * std::sin(ph), z};
}

}  // namespace boltzinv
