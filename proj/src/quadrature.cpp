#include "dealer/quadrature.hpp"

#include "dealer/errors.hpp"

namespace dealer {

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

double trapezoid(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size()) throw DomainError("trapezoid: grid/sample size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    s += 0.5 * (times[i + 1] - times[i]) * (values[i] + values[i + 1]);
  return s;
}

}  // namespace dealer
