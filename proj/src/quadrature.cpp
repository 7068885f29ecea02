#include "boltzinv/quadrature.hpp"

#include <boost/math/special_functions/legendre.hpp>
#include <map>
#include <memory>
#include <mutex>

#include "boltzinv/common.hpp"

namespace boltzinv {

namespace {

QuadratureRule build_gauss_legendre(int order) {
  // legendre_p_zeros returns the non-negative half of the nodes.
  const auto half = boost::math::legendre_p_zeros<double>(order);
  QuadratureRule r;
  r.nodes.reserve(order);
  r.weights.reserve(order);
  auto weight = [order](double x) {
    const double dp = boost::math::legendre_p_prime(order, x);
    return 2.0 / ((1.0 - x * x) * dp * dp);
  };
  for (auto it = half.rbegin(); it != half.rend(); ++it) {
    if (*it == 0.0) continue;
    r.nodes.push_back(-*it);
    r.weights.push_back(weight(*it));
  }
  for (double x : half) {
    r.nodes.push_back(x);
    r.weights.push_back(weight(x));
  }
  return r;
}

}  // namespace

const QuadratureRule& gauss_legendre(int order) {
  if (order < 1 || order > 512) throw InvalidArgument("gauss_legendre: order out of range");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<QuadratureRule>(build_gauss_legendre(order));
  return *slot;
}

QuadratureRule gauss_legendre(int order, double a, double b) {
  const auto& ref = gauss_legendre(order);
  QuadratureRule r;
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    r.nodes.push_back(mid + half * ref.nodes[i]);
    r.weights.push_back(half * ref.weights[i]);
  }
  return r;
}

QuadratureRule composite_gauss(std::span<const double> breaks, int order) {
  const auto& ref = gauss_legendre(order);
  QuadratureRule r;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p], b = breaks[p + 1];
    if (b < a) throw InvalidArgument("composite_gauss: breaks must be non-decreasing");
    if (b == a) continue;
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      r.nodes.push_back(mid + half * ref.nodes[i]);
      r.weights.push_back(half * ref.weights[i]);
    }
  }
  return r;
}

QuadratureRule periodic_trapezoid(int count) {
  QuadratureRule r;
  for (int k = 0; k < count; ++k) {
    r.nodes.push_back(2.0 * kPi * k / count);
    r.weights.push_back(2.0 * kPi / count);
  }
  return r;
}

}  // namespace boltzinv
