#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "lsde/lattice.hpp"

namespace lsde {

// Sites a field may occupy: the cube |x_i| <= box and the ball |x| <= l1.
// 0 means unrestricted.
struct SiteLimits {
  int box = 0;
  int l1 = 0;

  int cube() const noexcept {
    if (box > 0) return l1 > 0 ? std::min(box, l1) : box;
    return l1 > 0 ? l1 : std::numeric_limits<int>::max() / 4;
  }
  bool allows(const Site& x) const;
};

// Dense rectangular window over Z^d holding one or more non-negative layers
// on a common geometry, plus a scratch buffer per layer. The outer `reach`
// cells of the window are never written and stay zero, so stencils can read
// them without bounds checks. Cells whose every coordinate lies at least
// `reach` inside the window form the interior.
class Grid {
 public:
  Grid(int dim, int reach, int layers, SiteLimits limits);

  int dim() const noexcept { return dim_; }
  int reach() const noexcept { return reach_; }
  int layers() const noexcept { return static_cast<int>(data_.size()); }
  const SiteLimits& limits() const noexcept { return limits_; }
  std::size_t size() const noexcept { return size_; }
  int lo(int i) const noexcept { return lo_[static_cast<std::size_t>(i)]; }
  int extent(int i) const noexcept { return ext_[static_cast<std::size_t>(i)]; }
  std::ptrdiff_t stride(int i) const noexcept { return stride_[static_cast<std::size_t>(i)]; }

  double* layer(int k) { return data_[static_cast<std::size_t>(k)].data(); }
  const double* layer(int k) const { return data_[static_cast<std::size_t>(k)].data(); }
  double* scratch(int k) { return scratch_[static_cast<std::size_t>(k)].data(); }
  // Exchanges a layer with its scratch buffer.
  void swap_scratch(int k);

  // Replaces layer k by u; throws if u leaves the limits.
  void load(int k, const LatticeState& u);
  LatticeState extract(int k) const;

  // Grows (or recentres) the window so the joint support of all layers sits
  // at least 2*reach inside it, clipped to the limits. Call before a step.
  void fit();

  Site site_at(std::size_t flat) const;
  std::ptrdiff_t flat_offset(const Site& offset) const;

  // Calls f(row_start, first_site, n) for each interior row along the last
  // coordinate.
  template <class F>
  void for_each_interior_row(F&& f) const;

  // Value at an arbitrary site (0 outside the window).
  double value_at(int k, const Site& x) const;

  double mass(int k) const;
  std::size_t support(int k) const;
  bool is_zero(int k) const;
  double max_value(int k) const;
  // Zeroes interior cells outside the l1 ball; returns the removed mass.
  double enforce_l1(int k);

 private:
  void relayout(const std::array<int, kMaxDim>& lo, const std::array<int, kMaxDim>& hi);

  int dim_;
  int reach_;
  SiteLimits limits_;
  std::array<int, kMaxDim> lo_{};
  std::array<int, kMaxDim> ext_{};
  std::array<std::ptrdiff_t, kMaxDim> stride_{};
  std::size_t size_ = 0;
  std::vector<std::vector<double>> data_;
  std::vector<std::vector<double>> scratch_;
};

template <class F>
void Grid::for_each_interior_row(F&& f) const {
  const int last = dim_ - 1;
  const int n = ext_[static_cast<std::size_t>(last)] - 2 * reach_;
  if (n <= 0) return;
  std::array<int, kMaxDim> idx{};
  for (int i = 0; i < dim_; ++i) {
    if (ext_[static_cast<std::size_t>(i)] - 2 * reach_ <= 0) return;
    idx[static_cast<std::size_t>(i)] = reach_;
  }
  for (;;) {
    std::size_t flat = 0;
    Site s = Site::origin(dim_);
    for (int i = 0; i < dim_; ++i) {
      flat += static_cast<std::size_t>(idx[static_cast<std::size_t>(i)]) *
              static_cast<std::size_t>(stride_[static_cast<std::size_t>(i)]);
      s[i] = lo_[static_cast<std::size_t>(i)] + idx[static_cast<std::size_t>(i)];
    }
    f(flat, s, static_cast<std::size_t>(n));
    int i = last - 1;
    for (; i >= 0; --i) {
      auto& c = idx[static_cast<std::size_t>(i)];
      if (++c < ext_[static_cast<std::size_t>(i)] - reach_) break;
      c = reach_;
    }
    if (i < 0) return;
  }
}

}  // namespace lsde
