#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lsde {

inline constexpr int kMaxDim = 4;

// A point of Z^d, 1 <= d <= kMaxDim.
class Site {
 public:
  Site() = default;
  static Site origin(int dim);
  Site(std::initializer_list<int> coords);
  static Site from_coords(std::span<const int> coords);

  int dim() const noexcept { return dim_; }
  int operator[](int i) const noexcept { return c_[static_cast<std::size_t>(i)]; }
  int& operator[](int i) noexcept { return c_[static_cast<std::size_t>(i)]; }

  // l1 norm; the only norm used for distances.
  long l1() const noexcept;
  std::vector<int> coords() const { return {c_.begin(), c_.begin() + dim_}; }
  std::string to_string() const;

  Site operator+(const Site& o) const;
  Site operator-(const Site& o) const;
  Site operator-() const;

  friend auto operator<=>(const Site&, const Site&) = default;
  friend bool operator==(const Site&, const Site&) = default;

 private:
  int dim_ = 0;
  std::array<int, kMaxDim> c_{};
};

struct SiteHash {
  std::size_t operator()(const Site& s) const noexcept;
};

// The 2d nearest neighbours of x.
std::vector<Site> neighbors(const Site& x, int dim);

// Finitely supported non-negative function on Z^d. Zeros are never stored.
class LatticeState {
 public:
  using Map = std::map<Site, double>;

  LatticeState() = default;
  explicit LatticeState(int dim) : dim_(dim) {}
  static LatticeState delta(const Site& x, double mass);

  int dim() const noexcept { return dim_; }
  bool empty() const noexcept { return values_.empty(); }
  std::size_t support_size() const noexcept { return values_.size(); }

  double at(const Site& x) const;
  // Throws on negative or non-finite values; 0 evicts the site.
  void set(const Site& x, double value);
  void add(const Site& x, double value);

  Map::const_iterator begin() const { return values_.begin(); }
  Map::const_iterator end() const { return values_.end(); }

  // Lexicographically sorted (coords, value) pairs.
  std::vector<std::pair<std::vector<int>, double>> serialize() const;

  friend bool operator==(const LatticeState&, const LatticeState&) = default;

 private:
  int dim_ = 1;
  Map values_;
};

// D_N = {x : |x_i| <= N for all i}.
class BoxRegion {
 public:
  BoxRegion(int radius, int dim);

  int radius() const noexcept { return radius_; }
  int dim() const noexcept { return dim_; }
  bool contains(const Site& x) const noexcept;
  std::size_t size() const;
  std::vector<Site> sites() const;
  // Sites outside D_N with a nearest neighbour in D_N.
  std::vector<Site> boundary() const;

 private:
  int radius_;
  int dim_;
};

struct Jump {
  Site offset;
  double rate;
};

// Symmetric, translation-invariant Q-matrix. Row sums are zero by
// construction: q_xx = -sum of jump rates.
class GeneratorSpec {
 public:
  enum class Kind { laplacian, explicit_rates };

  static GeneratorSpec laplacian(int dim);
  // Throws unless rates are positive, offsets nonzero and the table is symmetric.
  static GeneratorSpec explicit_rates(int dim, std::vector<Jump> jumps,
                                      bool exponential_moments = true);

  Kind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  const std::vector<Jump>& jumps() const noexcept { return jumps_; }
  // sup_x |q_xx|.
  double qnorm() const noexcept { return qnorm_; }
  // Largest |offset_i| over all jumps.
  int reach() const noexcept { return reach_; }
  // Exponential-moment hypothesis recorded in its strengthened form
  // (lambda'(lambda) = lambda); stored, not verified.
  bool exponential_moments() const noexcept { return exp_moments_; }
  double rate(const Site& offset) const;

  friend bool operator==(const GeneratorSpec&, const GeneratorSpec&);

 private:
  GeneratorSpec() = default;
  Kind kind_ = Kind::laplacian;
  int dim_ = 1;
  std::vector<Jump> jumps_;
  double qnorm_ = 0;
  int reach_ = 0;
  bool exp_moments_ = true;
};

struct ModelParams {
  double gamma;
  GeneratorSpec generator;

  void validate() const;
};

struct CatalyticParams {
  double lambda0;
  double lambda1;
  double lambda2;
  double c1;
  double c2;
  double eta;

  void validate() const;
};

// sum_y q_xy u(y).
double apply_generator(const GeneratorSpec& g, const LatticeState& u, const Site& x);

double total_mass(const LatticeState& u);

// sum_x e^{lambda |x|} u(x). Throws NumericGuardError on overflow.
double weighted_mass(const LatticeState& u, double lambda);

// sum_x u(x)^p, p > 0.
double power_sum(const LatticeState& u, double p);

}  // namespace lsde
