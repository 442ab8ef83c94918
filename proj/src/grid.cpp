#include "lsde/grid.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

#include "lsde/errors.hpp"

namespace lsde {

bool SiteLimits::allows(const Site& x) const {
  if (l1 > 0 && x.l1() > l1) return false;
  if (box > 0)
    for (int i = 0; i < x.dim(); ++i)
      if (x[i] < -box || x[i] > box) return false;
  return true;
}

Grid::Grid(int dim, int reach, int layers, SiteLimits limits)
    : dim_(dim), reach_(std::max(reach, 1)), limits_(limits) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("grid dimension out of range");
  if (layers < 1) throw std::invalid_argument("grid needs at least one layer");
  data_.resize(static_cast<std::size_t>(layers));
  scratch_.resize(static_cast<std::size_t>(layers));
  std::array<int, kMaxDim> lo{}, hi{};
  relayout(lo, hi);
}

void Grid::swap_scratch(int k) {
  data_[static_cast<std::size_t>(k)].swap(scratch_[static_cast<std::size_t>(k)]);
}

void Grid::relayout(const std::array<int, kMaxDim>& lo, const std::array<int, kMaxDim>& hi) {
  // New window [lo - reach, hi + reach]; interior is [lo, hi].
  std::array<int, kMaxDim> nlo{}, next{};
  std::array<std::ptrdiff_t, kMaxDim> nstride{};
  std::size_t total = 1;
  for (int i = 0; i < dim_; ++i) {
    const auto u = static_cast<std::size_t>(i);
    nlo[u] = lo[u] - reach_;
    next[u] = hi[u] - lo[u] + 1 + 2 * reach_;
    total *= static_cast<std::size_t>(next[u]);
  }
  std::ptrdiff_t st = 1;
  for (int i = dim_ - 1; i >= 0; --i) {
    nstride[static_cast<std::size_t>(i)] = st;
    st *= next[static_cast<std::size_t>(i)];
  }
  for (std::size_t k = 0; k < data_.size(); ++k) {
    std::vector<double> fresh(total, 0.0);
    const auto& old = data_[k];
    for (std::size_t f = 0; f < old.size(); ++f) {
      if (old[f] == 0) continue;
      std::size_t g = 0;
      std::size_t rem = f;
      for (int i = 0; i < dim_; ++i) {
        const auto u = static_cast<std::size_t>(i);
        const auto c = static_cast<int>(rem / static_cast<std::size_t>(stride_[u]));
        rem %= static_cast<std::size_t>(stride_[u]);
        const int x = lo_[u] + c;
        if (x < nlo[u] + reach_ || x >= nlo[u] + next[u] - reach_)
          throw std::logic_error("grid relayout would drop mass");
        g += static_cast<std::size_t>(x - nlo[u]) * static_cast<std::size_t>(nstride[u]);
      }
      fresh[g] = old[f];
    }
    data_[k].swap(fresh);
    scratch_[k].assign(total, 0.0);
  }
  lo_ = nlo;
  ext_ = next;
  stride_ = nstride;
  size_ = total;
}

Site Grid::site_at(std::size_t flat) const {
  Site s = Site::origin(dim_);
  for (int i = 0; i < dim_; ++i) {
    const auto u = static_cast<std::size_t>(i);
    s[i] = lo_[u] + static_cast<int>(flat / static_cast<std::size_t>(stride_[u]));
    flat %= static_cast<std::size_t>(stride_[u]);
  }
  return s;
}

std::ptrdiff_t Grid::flat_offset(const Site& offset) const {
  std::ptrdiff_t f = 0;
  for (int i = 0; i < dim_; ++i) f += offset[i] * stride_[static_cast<std::size_t>(i)];
  return f;
}

void Grid::load(int k, const LatticeState& u) {
  if (!u.empty() && u.dim() != dim_) throw DimensionMismatch("state and grid dimensions differ");
  for (const auto& [x, v] : u)
    if (!limits_.allows(x)) throw std::invalid_argument("initial support outside the allowed region: " + x.to_string());
  std::fill(data_[static_cast<std::size_t>(k)].begin(), data_[static_cast<std::size_t>(k)].end(), 0.0);
  // Window covering the union of the current contents and u.
  std::array<int, kMaxDim> lo{}, hi{};
  bool any = false;
  auto cover = [&](const Site& x) {
    for (int i = 0; i < dim_; ++i) {
      const auto s = static_cast<std::size_t>(i);
      lo[s] = any ? std::min(lo[s], x[i]) : x[i];
      hi[s] = any ? std::max(hi[s], x[i]) : x[i];
    }
    any = true;
  };
  for (int j = 0; j < layers(); ++j)
    for (std::size_t f = 0; f < size_; ++f)
      if (data_[static_cast<std::size_t>(j)][f] != 0) cover(site_at(f));
  for (const auto& [x, v] : u) cover(x);
  if (any) {
    const int pad = reach_;
    const int cube = limits_.cube();
    for (int i = 0; i < dim_; ++i) {
      const auto s = static_cast<std::size_t>(i);
      lo[s] = std::max(lo[s] - pad, -cube);
      hi[s] = std::min(hi[s] + pad, cube);
    }
    relayout(lo, hi);
  }
  auto& d = data_[static_cast<std::size_t>(k)];
  for (const auto& [x, v] : u) {
    std::size_t f = 0;
    for (int i = 0; i < dim_; ++i)
      f += static_cast<std::size_t>(x[i] - lo_[static_cast<std::size_t>(i)]) *
           static_cast<std::size_t>(stride_[static_cast<std::size_t>(i)]);
    d[f] = v;
  }
}

LatticeState Grid::extract(int k) const {
  LatticeState u(dim_);
  const auto& d = data_[static_cast<std::size_t>(k)];
  for (std::size_t f = 0; f < size_; ++f)
    if (d[f] != 0) u.set(site_at(f), d[f]);
  return u;
}

void Grid::fit() {
  std::array<int, kMaxDim> blo{}, bhi{};
  blo.fill(std::numeric_limits<int>::max());
  bhi.fill(std::numeric_limits<int>::min());
  bool any = false;
  for (const auto& d : data_) {
    for_each_interior_row([&](std::size_t start, const Site& s, std::size_t n) {
      std::size_t first = n, last = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (d[start + j] != 0) {
          if (first == n) first = j;
          last = j;
        }
      if (first == n) return;
      any = true;
      for (int i = 0; i < dim_ - 1; ++i) {
        const auto u = static_cast<std::size_t>(i);
        blo[u] = std::min(blo[u], s[i]);
        bhi[u] = std::max(bhi[u], s[i]);
      }
      const auto u = static_cast<std::size_t>(dim_ - 1);
      blo[u] = std::min(blo[u], s[dim_ - 1] + static_cast<int>(first));
      bhi[u] = std::max(bhi[u], s[dim_ - 1] + static_cast<int>(last));
    });
  }
  if (!any) return;
  const int cube = limits_.cube();
  bool grow = false;
  for (int i = 0; i < dim_; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const int need_lo = std::max(blo[u] - reach_, -cube);
    const int need_hi = std::min(bhi[u] + reach_, cube);
    if (need_lo < lo_[u] + reach_ || need_hi > lo_[u] + ext_[u] - 1 - reach_) grow = true;
  }
  if (!grow) return;
  // Slack proportional to the support keeps regrowth amortised.
  std::array<int, kMaxDim> lo{}, hi{};
  for (int i = 0; i < dim_; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const int slack = 2 * reach_ + (bhi[u] - blo[u]) / 2 + 4;
    lo[u] = std::max(blo[u] - slack, -cube);
    hi[u] = std::min(bhi[u] + slack, cube);
  }
  relayout(lo, hi);
}

double Grid::value_at(int k, const Site& x) const {
  std::size_t f = 0;
  for (int i = 0; i < dim_; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const int c = x[i] - lo_[u];
    if (c < 0 || c >= ext_[u]) return 0.0;
    f += static_cast<std::size_t>(c) * static_cast<std::size_t>(stride_[u]);
  }
  return data_[static_cast<std::size_t>(k)][f];
}

double Grid::mass(int k) const {
  double s = 0;
  for (double v : data_[static_cast<std::size_t>(k)]) s += v;
  return s;
}

std::size_t Grid::support(int k) const {
  std::size_t n = 0;
  for (double v : data_[static_cast<std::size_t>(k)]) n += (v != 0);
  return n;
}

bool Grid::is_zero(int k) const {
  for (double v : data_[static_cast<std::size_t>(k)])
    if (v != 0) return false;
  return true;
}

double Grid::max_value(int k) const {
  double m = 0;
  for (double v : data_[static_cast<std::size_t>(k)]) m = std::max(m, v);
  return m;
}

double Grid::enforce_l1(int k) {
  if (limits_.l1 <= 0) return 0.0;
  long far = 0;
  for (int i = 0; i < dim_; ++i) {
    const auto u = static_cast<std::size_t>(i);
    far += std::max(std::abs(lo_[u]), std::abs(lo_[u] + ext_[u] - 1));
  }
  if (far <= limits_.l1) return 0.0;
  double removed = 0;
  auto& d = data_[static_cast<std::size_t>(k)];
  for (std::size_t f = 0; f < size_; ++f) {
    if (d[f] == 0) continue;
    if (site_at(f).l1() > limits_.l1) {
      removed += d[f];
      d[f] = 0;
    }
  }
  return removed;
}

}  // namespace lsde
