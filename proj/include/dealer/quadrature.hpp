#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace dealer {

/// Composite Simpson rule on [a, b]; `panels` is rounded up to an even count.
template <class F>
double simpson(F&& f, double a, double b, std::size_t panels = 4096) {
  if (panels < 2) panels = 2;
  if (panels % 2) ++panels;
  const double h = (b - a) / static_cast<double>(panels);
  double odd = 0.0, even = 0.0;
  for (std::size_t i = 1; i < panels; ++i) {
    const double x = a + h * static_cast<double>(i);
    (i % 2 ? odd : even) += f(x);
  }
  return h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b));
}

/// Simpson with extra resolution inside boundary layers of width `layer` at
/// both ends of [a, b]: the interval is split into [a, a+L], [a+L, b-L],
/// [b-L, b] with L = min(layer, (b-a)/3), each receiving `panels` panels.
template <class F>
double simpson_layered(F&& f, double a, double b, double layer, std::size_t panels = 4096) {
  const double L = std::min(layer, (b - a) / 3.0);
  return simpson(f, a, a + L, panels) + simpson(f, a + L, b - L, panels) + simpson(f, b - L, b, panels);
}

/// Sum with O(log n) error growth and a fixed association order, so results
/// do not depend on how the summands were produced.
double pairwise_sum(std::span<const double> v);

/// Trapezoidal integral of samples over the (possibly non-uniform) grid.
double trapezoid(std::span<const double> times, std::span<const double> values);

}  // namespace dealer
