#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "lsde/lattice.hpp"

namespace lsde {

inline constexpr double kDefaultKernelTol = 1e-10;

// P_0(xi_t = x) for the 1-d walk jumping +-1 with total rate `rate`:
//   e^{-rate t} (rate t/2)^{|x|} sum_n (rate t/2)^{2n} / (n! (n+|x|)!).
// The series is cut once the geometric majorant of the tail is below
// tol * (partial sum), so the error is relative (and hence also absolute).
double rw_kernel_1d(double rate, double t, long x, double tol = kDefaultKernelTol);

// Product walk on Z^d, each coordinate an independent 1-d walk with total
// rate `rate_per_coordinate`. rate 1 is the unit walk; the walk generated by
// the discrete Laplacian has rate 2 per coordinate.
double rw_kernel(double t, const Site& x, int d, double tol = kDefaultKernelTol,
                 double rate_per_coordinate = 1.0);

struct KernelBounds {
  double lower;
  double upper;
  bool contains(double p) const { return lower <= p && p <= upper; }
};

// prod_i (lt/2)^{|x_i|}/|x_i|! times [e^{-l t d}, 1], l = rate per coordinate.
// Holds for every t >= 0 (first series term, and e^{-z} I_k(z) <= (z/2)^k/k!).
KernelBounds series_sandwich(double t, const Site& x, double rate_per_coordinate = 1.0);

// t^{|x|}/prod|x_i|! times [e^{-td}, 1]. Not a valid lower bound in general
// (fails e.g. at d=1, t=1, x=1); kept so the claim can be tested as stated.
KernelBounds power_sandwich(double t, const Site& x);

struct TailBound {
  double lam;
  long H;
  double exact_tail;    // P(Y >= H), Y ~ Poisson(lam)
  double simple_bound;  // lam^H / H!
  double stirling_form; // C lam^H / (sqrt(H) H^H e^{-H}) with C = 1/sqrt(2 pi); reported only
};

TailBound poisson_tail(double lam, long H);

// P(Poisson(2 d t) >= N - start_norm): bounds the chance that the nearest-
// neighbour walk started with |x| <= start_norm leaves D_N by time t.
// Throws NumericGuardError when N <= start_norm.
double exit_prob_bound(int N, double t, int start_norm, int d);

class KernelTable {
 public:
  const GeneratorSpec& generator() const { return gen_; }
  double time() const noexcept { return t_; }
  const std::optional<BoxRegion>& boundary() const noexcept { return box_; }
  double truncation_error() const noexcept { return trunc_; }

  // Free kernels: p_t(0, offset). Dirichlet kernels: use at(x, y).
  double at(const Site& offset) const;
  double at(const Site& x, const Site& y) const;
  const std::map<Site, double>& entries() const noexcept { return free_; }
  // Dirichlet: D_N sites in index order.
  const std::vector<Site>& box_sites() const noexcept { return sites_; }
  // Sum over entries (free) or over y for a fixed x (Dirichlet).
  double total() const;
  double row_total(const Site& x) const;

 private:
  explicit KernelTable(GeneratorSpec g) : gen_(std::move(g)) {}
  friend KernelTable uniformized_kernel(const GeneratorSpec&, double, double);
  friend KernelTable dirichlet_kernel(const GeneratorSpec&, const BoxRegion&, double, double);

  std::size_t index_of(const Site& x) const;

  GeneratorSpec gen_;
  double t_ = 0;
  std::optional<BoxRegion> box_;
  double trunc_ = 0;
  std::map<Site, double> free_;
  std::vector<Site> sites_;
  std::vector<double> dense_;  // row-major |D_N| x |D_N|
};

// e^{tQ} = sum_n Pois(qnorm t; n) K^n with K = I + Q/qnorm, cut when the
// Poisson tail drops below tol.
KernelTable uniformized_kernel(const GeneratorSpec& g, double t, double tol = kDefaultKernelTol);

// The chain killed on leaving D_N, uniformized on the finite state space.
KernelTable dirichlet_kernel(const GeneratorSpec& g, const BoxRegion& box, double t,
                             double tol = kDefaultKernelTol);

struct SemigroupResult {
  LatticeState state;
  double discarded_mass_bound;
};

// x -> sum_y u0(y) p_t(y, x), keeping entries above tol * total_mass(u0).
SemigroupResult semigroup_apply_bounded(const GeneratorSpec& g, const LatticeState& u0, double t,
                                        double tol = kDefaultKernelTol);
LatticeState semigroup_apply(const GeneratorSpec& g, const LatticeState& u0, double t,
                             double tol = kDefaultKernelTol);

}  // namespace lsde
