#include "lsde/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "lsde/errors.hpp"

namespace lsde {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim)
    throw std::invalid_argument("dimension must be in [1, " + std::to_string(kMaxDim) + "]");
}

}  // namespace

Site Site::origin(int dim) {
  check_dim(dim);
  Site s;
  s.dim_ = dim;
  return s;
}

Site::Site(std::initializer_list<int> coords) : dim_(static_cast<int>(coords.size())) {
  check_dim(dim_);
  std::copy(coords.begin(), coords.end(), c_.begin());
}

Site Site::from_coords(std::span<const int> coords) {
  Site s = origin(static_cast<int>(coords.size()));
  std::copy(coords.begin(), coords.end(), s.c_.begin());
  return s;
}

long Site::l1() const noexcept {
  long n = 0;
  for (int i = 0; i < dim_; ++i) n += std::labs(c_[static_cast<std::size_t>(i)]);
  return n;
}

std::string Site::to_string() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << (*this)[i];
  os << ')';
  return os.str();
}

Site Site::operator+(const Site& o) const {
  if (o.dim_ != dim_) throw DimensionMismatch("site dimensions differ");
  Site r = *this;
  for (int i = 0; i < dim_; ++i) r[i] += o[i];
  return r;
}

Site Site::operator-(const Site& o) const { return *this + (-o); }

Site Site::operator-() const {
  Site r = *this;
  for (int i = 0; i < dim_; ++i) r[i] = -r[i];
  return r;
}

std::size_t SiteHash::operator()(const Site& s) const noexcept {
  std::uint64_t h = 0x9E3779B97F4A7C15ull ^ static_cast<std::uint64_t>(s.dim());
  for (int i = 0; i < s.dim(); ++i) {
    h ^= static_cast<std::uint32_t>(s[i]) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

std::vector<Site> neighbors(const Site& x, int dim) {
  if (x.dim() != dim) throw DimensionMismatch("site dimension does not match d");
  std::vector<Site> out;
  out.reserve(static_cast<std::size_t>(2 * dim));
  for (int i = 0; i < dim; ++i) {
    for (int s : {-1, 1}) {
      Site y = x;
      y[i] += s;
      out.push_back(y);
    }
  }
  return out;
}

LatticeState LatticeState::delta(const Site& x, double mass) {
  LatticeState u(x.dim());
  u.set(x, mass);
  return u;
}

double LatticeState::at(const Site& x) const {
  auto it = values_.find(x);
  return it == values_.end() ? 0.0 : it->second;
}

void LatticeState::set(const Site& x, double value) {
  if (x.dim() != dim_) throw DimensionMismatch("site dimension does not match state");
  if (!(value >= 0.0) || !std::isfinite(value))
    throw std::invalid_argument("lattice values must be finite and non-negative");
  if (value == 0.0)
    values_.erase(x);
  else
    values_[x] = value;
}

void LatticeState::add(const Site& x, double value) { set(x, at(x) + value); }

std::vector<std::pair<std::vector<int>, double>> LatticeState::serialize() const {
  std::vector<std::pair<std::vector<int>, double>> out;
  out.reserve(values_.size());
  for (const auto& [x, v] : values_) out.emplace_back(x.coords(), v);
  return out;
}

BoxRegion::BoxRegion(int radius, int dim) : radius_(radius), dim_(dim) {
  check_dim(dim);
  if (radius < 1) throw std::invalid_argument("box radius must be positive");
}

bool BoxRegion::contains(const Site& x) const noexcept {
  if (x.dim() != dim_) return false;
  for (int i = 0; i < dim_; ++i)
    if (std::abs(x[i]) > radius_) return false;
  return true;
}

std::size_t BoxRegion::size() const {
  std::size_t n = 1;
  for (int i = 0; i < dim_; ++i) n *= static_cast<std::size_t>(2 * radius_ + 1);
  return n;
}

std::vector<Site> BoxRegion::sites() const {
  std::vector<Site> out;
  out.reserve(size());
  Site x = Site::origin(dim_);
  for (int i = 0; i < dim_; ++i) x[i] = -radius_;
  while (true) {
    out.push_back(x);
    int k = dim_ - 1;
    while (k >= 0 && x[k] == radius_) {
      x[k] = -radius_;
      --k;
    }
    if (k < 0) break;
    ++x[k];
  }
  return out;
}

std::vector<Site> BoxRegion::boundary() const {
  std::vector<Site> out;
  for (const Site& x : sites()) {
    for (int i = 0; i < dim_; ++i) {
      if (std::abs(x[i]) != radius_) continue;
      Site y = x;
      y[i] += x[i] > 0 ? 1 : -1;
      out.push_back(y);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

GeneratorSpec GeneratorSpec::laplacian(int dim) {
  check_dim(dim);
  GeneratorSpec g;
  g.kind_ = Kind::laplacian;
  g.dim_ = dim;
  for (const Site& y : neighbors(Site::origin(dim), dim)) g.jumps_.push_back({y, 1.0});
  g.qnorm_ = 2.0 * dim;
  g.reach_ = 1;
  return g;
}

GeneratorSpec GeneratorSpec::explicit_rates(int dim, std::vector<Jump> jumps,
                                            bool exponential_moments) {
  check_dim(dim);
  GeneratorSpec g;
  g.kind_ = Kind::explicit_rates;
  g.dim_ = dim;
  g.exp_moments_ = exponential_moments;
  std::sort(jumps.begin(), jumps.end(),
            [](const Jump& a, const Jump& b) { return a.offset < b.offset; });
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    const Jump& j = jumps[i];
    if (j.offset.dim() != dim) throw DimensionMismatch("jump offset dimension mismatch");
    if (j.offset == Site::origin(dim)) throw std::invalid_argument("jump offset must be nonzero");
    if (!(j.rate > 0.0) || !std::isfinite(j.rate))
      throw std::invalid_argument("jump rates must be positive and finite");
    if (i > 0 && jumps[i - 1].offset == j.offset)
      throw std::invalid_argument("duplicate jump offset " + j.offset.to_string());
  }
  g.jumps_ = std::move(jumps);
  for (const Jump& j : g.jumps_) {
    if (g.rate(-j.offset) != j.rate)
      throw std::invalid_argument("rate table is not symmetric at offset " +
                                  j.offset.to_string());
    g.qnorm_ += j.rate;
    for (int i = 0; i < dim; ++i) g.reach_ = std::max(g.reach_, std::abs(j.offset[i]));
  }
  return g;
}

double GeneratorSpec::rate(const Site& offset) const {
  for (const Jump& j : jumps_)
    if (j.offset == offset) return j.rate;
  return 0.0;
}

bool operator==(const GeneratorSpec& a, const GeneratorSpec& b) {
  if (a.kind_ != b.kind_ || a.dim_ != b.dim_ || a.exp_moments_ != b.exp_moments_) return false;
  if (a.jumps_.size() != b.jumps_.size()) return false;
  for (std::size_t i = 0; i < a.jumps_.size(); ++i)
    if (a.jumps_[i].offset != b.jumps_[i].offset || a.jumps_[i].rate != b.jumps_[i].rate)
      return false;
  return true;
}

void ModelParams::validate() const {
  if (!(gamma >= 0.5 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [1/2, 1]");
}

void CatalyticParams::validate() const {
  for (double v : {lambda0, lambda1, lambda2, c1, c2})
    if (!(v > 0.0)) throw std::invalid_argument("envelope parameters must be positive");
  if (!(lambda1 >= lambda2)) throw std::invalid_argument("need lambda1 >= lambda2");
  if (!(c1 <= c2)) throw std::invalid_argument("need c1 <= c2");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in [0, 1]");
}

double apply_generator(const GeneratorSpec& g, const LatticeState& u, const Site& x) {
  if (g.dim() != u.dim() || x.dim() != g.dim())
    throw DimensionMismatch("generator, state and site dimensions differ");
  const double ux = u.at(x);
  double acc = 0.0;
  for (const Jump& j : g.jumps()) acc += j.rate * (u.at(x + j.offset) - ux);
  return acc;
}

double total_mass(const LatticeState& u) {
  double m = 0.0;
  for (const auto& [x, v] : u) m += v;
  return m;
}

double weighted_mass(const LatticeState& u, double lambda) {
  constexpr double kLogMax = 709.782712893384;
  double m = 0.0;
  for (const auto& [x, v] : u) {
    const double e = lambda * static_cast<double>(x.l1());
    double term;
    if (e > 500.0) {
      const double lt = std::log(v) + e;
      if (lt >= kLogMax)
        throw NumericGuardError("weighted_mass term overflows at site " + x.to_string());
      term = std::exp(lt);
    } else {
      term = v * std::exp(e);
    }
    m += term;
  }
  if (!std::isfinite(m)) throw NumericGuardError("weighted_mass overflows");
  return m;
}

double power_sum(const LatticeState& u, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("power_sum needs p > 0");
  double s = 0.0;
  for (const auto& [x, v] : u) s += p == 1.0 ? v : std::pow(v, p);
  return s;
}

}  // namespace lsde
