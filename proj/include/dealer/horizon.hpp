#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dealer {

/// Trading horizon [0, T] together with the time grid every path lives on.
class Horizon {
 public:
  /// Takes an explicit grid; requires grid.front() == 0, strictly increasing.
  explicit Horizon(std::vector<double> grid);

  static Horizon uniform(double T, std::size_t steps);

  double T() const noexcept { return grid_.back(); }
  std::size_t steps() const noexcept { return grid_.size() - 1; }
  std::size_t nodes() const noexcept { return grid_.size(); }
  double operator[](std::size_t i) const noexcept { return grid_[i]; }
  double step(std::size_t i) const noexcept { return grid_[i + 1] - grid_[i]; }
  std::span<const double> times() const noexcept { return grid_; }

  bool operator==(const Horizon&) const = default;

 private:
  std::vector<double> grid_;
};

}  // namespace dealer
