#include "lsde/kernel.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "lsde/errors.hpp"

namespace lsde {

double rw_kernel_1d(double rate, double t, long x, double tol) {
  if (!(rate > 0)) throw std::invalid_argument("rw_kernel_1d: rate must be positive");
  if (t < 0) throw std::invalid_argument("rw_kernel_1d: t must be >= 0");
  if (!(tol > 0)) throw std::invalid_argument("rw_kernel_1d: tol must be positive");
  const long k = std::labs(x);
  if (t == 0) return k == 0 ? 1.0 : 0.0;
  const double a = 0.5 * rate * t;
  const double la = std::log(a);
  const double kd = static_cast<double>(k);
  // term_n = exp(-rate t + (2n+k) log a - log n! - log (n+k)!)
  double sum = 0;
  for (long n = 0;; ++n) {
    const double nd = static_cast<double>(n);
    const double lt = -rate * t + (2 * nd + kd) * la - std::lgamma(nd + 1) - std::lgamma(nd + kd + 1);
    const double term = std::exp(lt);
    sum += term;
    const double r = a * a / ((nd + 1) * (nd + kd + 1));
    if (r < 1) {
      const double tail = term * r / (1 - r);
      if (tail <= tol * sum || (sum == 0 && term == 0 && nd > a)) break;
    }
  }
  return sum;
}

double rw_kernel(double t, const Site& x, int d, double tol, double rate_per_coordinate) {
  if (x.dim() != d) throw DimensionMismatch("rw_kernel: site dimension does not match d");
  double p = 1;
  for (int i = 0; i < d; ++i) p *= rw_kernel_1d(rate_per_coordinate, t, x[i], tol / d);
  return p;
}

KernelBounds series_sandwich(double t, const Site& x, double rate_per_coordinate) {
  const double a = 0.5 * rate_per_coordinate * t;
  double upper = 1;
  for (int i = 0; i < x.dim(); ++i) {
    const long k = std::labs(x[i]);
    upper *= (k == 0) ? 1.0 : std::exp(static_cast<double>(k) * std::log(a) - std::lgamma(static_cast<double>(k) + 1));
  }
  return {std::exp(-rate_per_coordinate * t * x.dim()) * upper, upper};
}

KernelBounds power_sandwich(double t, const Site& x) {
  double upper = 1;
  for (int i = 0; i < x.dim(); ++i) {
    const long k = std::labs(x[i]);
    upper *= (k == 0) ? 1.0 : std::exp(static_cast<double>(k) * std::log(t) - std::lgamma(static_cast<double>(k) + 1));
  }
  return {std::exp(-t * x.dim()) * upper, upper};
}

namespace {

double log_pois(double lam, long k) {
  const double kd = static_cast<double>(k);
  return -lam + kd * std::log(lam) - std::lgamma(kd + 1);
}

}  // namespace

TailBound poisson_tail(double lam, long H) {
  if (lam < 0) throw std::invalid_argument("poisson_tail: lam must be >= 0");
  if (H < 0) throw std::invalid_argument("poisson_tail: H must be >= 0");
  TailBound b{lam, H, 0, 0, 0};
  if (H == 0) {
    b.exact_tail = b.simple_bound = b.stirling_form = 1;
    return b;
  }
  if (lam == 0) return b;
  const double hd = static_cast<double>(H);
  b.simple_bound = std::exp(hd * std::log(lam) - std::lgamma(hd + 1));
  b.stirling_form = std::exp(hd * std::log(lam) + hd - 0.5 * std::log(hd) - hd * std::log(hd)) /
                    std::sqrt(2 * M_PI);
  if (hd > lam) {
    // Terms decrease from k = H on; stop when the geometric remainder is negligible.
    double sum = 0;
    for (long k = H;; ++k) {
      const double term = std::exp(log_pois(lam, k));
      sum += term;
      const double r = lam / static_cast<double>(k + 1);
      if (term * r / (1 - r) <= 1e-17 * sum || term == 0) break;
    }
    b.exact_tail = sum;
  } else {
    double head = 0;
    for (long k = 0; k < H; ++k) head += std::exp(log_pois(lam, k));
    b.exact_tail = std::max(0.0, 1.0 - head);
  }
  return b;
}

double exit_prob_bound(int N, double t, int start_norm, int d) {
  if (N <= start_norm)
    throw NumericGuardError("exit_prob_bound: N must exceed start_norm (bound is vacuous)");
  if (t < 0) throw std::invalid_argument("exit_prob_bound: t must be >= 0");
  return poisson_tail(2.0 * d * t, N - start_norm).exact_tail;
}

// ---- tables

double KernelTable::at(const Site& offset) const {
  if (box_) throw std::logic_error("Dirichlet kernel is keyed by (x, y)");
  auto it = free_.find(offset);
  return it == free_.end() ? 0.0 : it->second;
}

std::size_t KernelTable::index_of(const Site& x) const {
  const int n = box_->radius();
  std::size_t idx = 0;
  for (int i = 0; i < x.dim(); ++i)
    idx = idx * static_cast<std::size_t>(2 * n + 1) + static_cast<std::size_t>(x[i] + n);
  return idx;
}

double KernelTable::at(const Site& x, const Site& y) const {
  if (!box_) return at(y - x);
  if (!box_->contains(x) || !box_->contains(y)) return 0.0;
  return dense_[index_of(x) * sites_.size() + index_of(y)];
}

double KernelTable::total() const {
  double s = 0;
  if (box_) {
    for (double v : dense_) s += v;
  } else {
    for (const auto& [k, v] : free_) s += v;
  }
  return s;
}

double KernelTable::row_total(const Site& x) const {
  if (!box_) return total();
  if (!box_->contains(x)) return 0.0;
  const std::size_t i = index_of(x);
  double s = 0;
  for (std::size_t j = 0; j < sites_.size(); ++j) s += dense_[i * sites_.size() + j];
  return s;
}

namespace {

// Smallest n_max with P(Poisson(lam) > n_max) < tol.
long uniformization_depth(double lam, double tol) {
  long n = static_cast<long>(lam);
  while (poisson_tail(lam, n + 1).exact_tail >= tol) n += 1 + n / 16;
  while (n > 0 && poisson_tail(lam, n).exact_tail < tol) --n;
  return n;
}

}  // namespace

KernelTable uniformized_kernel(const GeneratorSpec& g, double t, double tol) {
  if (t < 0) throw std::invalid_argument("uniformized_kernel: t must be >= 0");
  if (!(tol > 0)) throw std::invalid_argument("uniformized_kernel: tol must be positive");
  KernelTable k(g);
  k.t_ = t;
  const Site zero = Site::origin(g.dim());
  const double q = g.qnorm();
  if (t == 0 || g.jumps().empty()) {
    if (q == 0 && !g.jumps().empty())
      throw std::invalid_argument("uniformized_kernel: malformed generator");
    k.free_[zero] = 1.0;
    return k;
  }
  if (!(q > 0)) throw std::invalid_argument("uniformized_kernel: malformed generator");
  const double lam = q * t;
  const long depth = uniformization_depth(lam, tol);
  std::map<Site, double> power{{zero, 1.0}};
  for (long n = 0;; ++n) {
    const double w = std::exp(log_pois(lam, n));
    for (const auto& [s, v] : power) k.free_[s] += w * v;
    if (n == depth) break;
    std::map<Site, double> next;
    for (const auto& [s, v] : power)
      for (const Jump& j : g.jumps()) next[s + j.offset] += v * (j.rate / q);
    power.swap(next);
  }
  k.trunc_ = poisson_tail(lam, depth + 1).exact_tail;
  return k;
}

KernelTable dirichlet_kernel(const GeneratorSpec& g, const BoxRegion& box, double t, double tol) {
  if (box.dim() != g.dim()) throw DimensionMismatch("dirichlet_kernel: box and generator dimensions differ");
  if (t < 0) throw std::invalid_argument("dirichlet_kernel: t must be >= 0");
  if (!(tol > 0)) throw std::invalid_argument("dirichlet_kernel: tol must be positive");
  KernelTable k(g);
  k.t_ = t;
  k.box_ = box;
  k.sites_ = box.sites();
  const std::size_t S = k.sites_.size();
  k.dense_.assign(S * S, 0.0);
  for (std::size_t i = 0; i < S; ++i) k.dense_[i * S + i] = 1.0;
  const double q = g.qnorm();
  if (t == 0 || g.jumps().empty()) return k;

  // Transitions of K restricted to D_N; jumps leaving the box are lost.
  std::vector<std::vector<std::pair<std::size_t, double>>> out(S);
  for (std::size_t i = 0; i < S; ++i)
    for (const Jump& j : g.jumps()) {
      const Site y = k.sites_[i] + j.offset;
      if (box.contains(y)) out[i].push_back({k.index_of(y), j.rate / q});
    }

  const double lam = q * t;
  const long depth = uniformization_depth(lam, tol);
  std::vector<double> power = k.dense_, next(S * S);
  std::fill(k.dense_.begin(), k.dense_.end(), 0.0);
  for (long n = 0;; ++n) {
    const double w = std::exp(log_pois(lam, n));
    for (std::size_t e = 0; e < S * S; ++e) k.dense_[e] += w * power[e];
    if (n == depth) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t r = 0; r < S; ++r)
      for (std::size_t i = 0; i < S; ++i) {
        const double v = power[r * S + i];
        if (v == 0) continue;
        for (const auto& [j, p] : out[i]) next[r * S + j] += v * p;
      }
    power.swap(next);
  }
  k.trunc_ = poisson_tail(lam, depth + 1).exact_tail;
  return k;
}

SemigroupResult semigroup_apply_bounded(const GeneratorSpec& g, const LatticeState& u0, double t,
                                        double tol) {
  if (u0.dim() != g.dim())
    throw DimensionMismatch("semigroup_apply: state and generator dimensions differ");
  if (t == 0 || u0.empty()) return {u0, 0.0};
  const KernelTable k = uniformized_kernel(g, t, tol);
  std::map<Site, double> acc;
  for (const auto& [y, m] : u0)
    for (const auto& [off, p] : k.entries()) acc[y + off] += m * p;
  const double mass = total_mass(u0);
  SemigroupResult r{LatticeState(g.dim()), k.truncation_error() * mass};
  for (const auto& [x, v] : acc) {
    if (v > tol * mass)
      r.state.set(x, v);
    else
      r.discarded_mass_bound += v;
  }
  return r;
}

LatticeState semigroup_apply(const GeneratorSpec& g, const LatticeState& u0, double t, double tol) {
  return semigroup_apply_bounded(g, u0, t, tol).state;
}

}  // namespace lsde
