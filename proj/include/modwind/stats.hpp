#pragma once

// Mergeable accumulation of winding statistics and their comparison with
// the limiting Gaussians.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "modwind/error.hpp"
#include "modwind/invariants.hpp"

namespace modwind {

enum class Normalization { period, maxN, word, geom };

inline std::string_view to_string(Normalization norm) {
  switch (norm) {
    case Normalization::period: return "period";
    case Normalization::maxN: return "maxn";
    case Normalization::word: return "word";
    case Normalization::geom: return "geom";
  }
  return "?";
}

inline Normalization parse_normalization(std::string_view name) {
  if (name == "period") return Normalization::period;
  if (name == "maxn" || name == "maxN") return Normalization::maxN;
  if (name == "word") return Normalization::word;
  if (name == "geom") return Normalization::geom;
  throw DomainError("unknown normalization '" + std::string(name) + "'");
}

// Binning of psi / sqrt(lg) over [-half_width, half_width].
struct HistogramConfig {
  int bins = 8192;
  double half_width = 8.0;

  friend bool operator==(const HistogramConfig&, const HistogramConfig&) = default;
};

// Default half-width: eight standard deviations of the geometric law.
inline HistogramConfig default_histogram(int A, int bins = 8192) {
  const int depth = std::min(8, max_ck_depth(A, 1e6));
  const double sigma_g2 = chat_estimate_at_depth(A, depth).sigma_g2;
  return {bins, 8.0 * std::sqrt(sigma_g2)};
}

struct MomentSums {
  std::uint64_t count = 0;
  CompensatedSum sum;
  CompensatedSum sum_sq;

  void add(double x) {
    ++count;
    sum.add(x);
    sum_sq.add(x * x);
  }
  void merge(const MomentSums& other) {
    count += other.count;
    sum.merge(other.sum);
    sum_sq.merge(other.sum_sq);
  }
  double mean() const { return sum.value() / double(count); }
  // population variance
  double variance() const {
    const double m = mean();
    return std::max(0.0, sum_sq.value() / double(count) - m * m);
  }

  friend bool operator==(const MomentSums&, const MomentSums&) = default;
};

inline std::uint64_t checked_add(std::uint64_t x, std::uint64_t y) {
  std::uint64_t out;
  if (__builtin_add_overflow(x, y, &out)) throw ResourceError("count overflow");
  return out;
}

// Exact occurrence table over (n, psi, lw) plus a binned accumulator for
// psi / sqrt(lg) and running moments of the length ratios.
class JointCounts {
 public:
  struct Cell {
    int n;
    int psi;
    int lw;
    std::uint64_t count;
  };

  JointCounts(int A, int N, HistogramConfig hist = {}) : A_(A), N_(N), hist_(hist) {
    require_bound(A);
    require_even_bound(N);
    if (hist.bins < 2) throw DomainError("histogram needs at least 2 bins");
    if (!(hist.half_width > 0.0)) throw DomainError("histogram half-width must be > 0");
    psi_span_ = (A - 1) * N + 1;
    digit_sum_span_ = A * N;
    const std::size_t cells = std::size_t(N / 2) * psi_span_ * digit_sum_span_;
    if (cells <= kDenseCells) table_.assign(cells, 0);
    bins_.assign(hist.bins, 0);
  }

  int A() const { return A_; }
  int N() const { return N_; }
  const HistogramConfig& histogram() const { return hist_; }

  void add(const GeodesicInvariants& rec) {
    const int n = rec.lp;
    if (n < 2 || n > N_ || n % 2 != 0) throw DomainError("accumulate: period length outside [2, N] or odd");
    if (std::abs(rec.psi) > (A_ - 1) * n / 2) throw DomainError("accumulate: winding out of range");
    if (rec.lw < 2 * n || rec.lw > 2 * A_ * n || rec.lw % 2 != 0) throw DomainError("accumulate: word length out of range");
    if (!(rec.lg > 0.0)) throw DomainError("accumulate: geometric length must be > 0");
    auto& cell = slot(index(n, rec.psi, rec.lw));
    cell = checked_add(cell, 1);

    const double x = rec.psi / std::sqrt(rec.lg);
    const double width = 2.0 * hist_.half_width / hist_.bins;
    if (x < -hist_.half_width) {
      ++underflow_;
    } else if (x >= hist_.half_width) {
      ++overflow_;
    } else {
      auto bin = static_cast<std::size_t>((x + hist_.half_width) / width);
      if (bin >= bins_.size()) bin = bins_.size() - 1;
      ++bins_[bin];
    }
    lg_moments_.add(x);
    if (lg_moments_.count == 1 || x < lg_min_) lg_min_ = x;
    if (lg_moments_.count == 1 || x > lg_max_) lg_max_ = x;
    ratio_g_.add(rec.lg / n);
    ratio_w_.add(double(rec.lw) / n);
  }

  void merge(const JointCounts& other) {
    if (A_ != other.A_ || N_ != other.N_ || !(hist_ == other.hist_)) {
      throw DomainError("merge: accumulator configurations differ");
    }
    for (std::size_t i = 0; i < table_.size(); ++i) table_[i] = checked_add(table_[i], other.table_[i]);
    for (const auto& [key, count] : other.sparse_) sparse_[key] = checked_add(sparse_[key], count);
    for (std::size_t i = 0; i < bins_.size(); ++i) bins_[i] += other.bins_[i];
    underflow_ += other.underflow_;
    overflow_ += other.overflow_;
    if (other.lg_moments_.count > 0) {
      if (lg_moments_.count == 0) {
        lg_min_ = other.lg_min_;
        lg_max_ = other.lg_max_;
      } else {
        lg_min_ = std::min(lg_min_, other.lg_min_);
        lg_max_ = std::max(lg_max_, other.lg_max_);
      }
    }
    lg_moments_.merge(other.lg_moments_);
    ratio_g_.merge(other.ratio_g_);
    ratio_w_.merge(other.ratio_w_);
  }

  std::uint64_t total() const { return lg_moments_.count; }

  std::uint64_t cell(int n, int psi, int lw) const {
    if (n < 2 || n > N_ || n % 2 != 0 || std::abs(psi) > (A_ - 1) * N_ / 2 || lw < 2 || lw > 2 * A_ * N_ || lw % 2) {
      return 0;
    }
    const std::size_t key = index(n, psi, lw);
    if (!table_.empty()) return table_[key];
    const auto it = sparse_.find(key);
    return it == sparse_.end() ? 0 : it->second;
  }

  // Nonzero cells in (n, psi, lw) order.
  std::vector<Cell> cells() const {
    std::vector<Cell> out;
    auto emit = [&](std::size_t key, std::uint64_t count) {
      const int half = (A_ - 1) * N_ / 2;
      const int lw = 2 * int(key % digit_sum_span_ + 1);
      key /= digit_sum_span_;
      out.push_back({2 * int(key / psi_span_ + 1), int(key % psi_span_) - half, lw, count});
    };
    for (std::size_t key = 0; key < table_.size(); ++key) {
      if (table_[key] != 0) emit(key, table_[key]);
    }
    for (const auto& [key, count] : sparse_) emit(key, count);
    return out;
  }

  const std::vector<std::uint64_t>& bins() const { return bins_; }
  std::uint64_t underflow() const { return underflow_; }
  std::uint64_t overflow() const { return overflow_; }
  double bin_width() const { return 2.0 * hist_.half_width / hist_.bins; }
  double bin_edge(std::size_t i) const { return -hist_.half_width + double(i) * bin_width(); }
  double lg_min() const { return lg_min_; }
  double lg_max() const { return lg_max_; }
  const MomentSums& lg_moments() const { return lg_moments_; }
  const MomentSums& ratio_g() const { return ratio_g_; }
  const MomentSums& ratio_w() const { return ratio_w_; }

  friend bool operator==(const JointCounts&, const JointCounts&) = default;

 private:
  std::size_t index(int n, int psi, int lw) const {
    const int half = (A_ - 1) * N_ / 2;
    return (std::size_t(n / 2 - 1) * psi_span_ + std::size_t(psi + half)) * digit_sum_span_ + std::size_t(lw / 2 - 1);
  }

  std::uint64_t& slot(std::size_t key) { return table_.empty() ? sparse_[key] : table_[key]; }

  // dense storage up to 8 MiB per accumulator, an ordered map beyond
  static constexpr std::size_t kDenseCells = std::size_t(1) << 20;

  int A_;
  int N_;
  HistogramConfig hist_;
  std::size_t psi_span_ = 0;
  std::size_t digit_sum_span_ = 0;
  std::vector<std::uint64_t> table_;
  std::map<std::size_t, std::uint64_t> sparse_;
  std::vector<std::uint64_t> bins_;
  std::uint64_t underflow_ = 0;
  std::uint64_t overflow_ = 0;
  double lg_min_ = 0.0;
  double lg_max_ = 0.0;
  MomentSums lg_moments_;
  MomentSums ratio_g_;
  MomentSums ratio_w_;
};

inline void accumulate(JointCounts& acc, const GeodesicInvariants& rec) { acc.add(rec); }
inline void accumulate(JointCounts& acc, const GeodesicRecord& rec) { acc.add(rec.invariants()); }

inline JointCounts merge(JointCounts a, const JointCounts& b) {
  a.merge(b);
  return a;
}

// Phi(x / sigma).
inline double gaussian_cdf(double x, double sigma2) {
  if (!(sigma2 > 0.0)) throw DomainError("gaussian_cdf: sigma2 must be > 0");
  return 0.5 * std::erfc(-x / std::sqrt(2.0 * sigma2));
}

struct CdfPoint {
  double x;
  double F;
};

namespace detail {

// An exact support atom psi / sqrt(denominator).
struct Atom {
  int psi;
  int denominator;
  std::uint64_t count;

  double value() const { return psi / std::sqrt(double(denominator)); }
};

// Exact ordering of psi1/sqrt(d1) against psi2/sqrt(d2).
inline int compare_atoms(const Atom& u, const Atom& v) {
  const int su = (u.psi > 0) - (u.psi < 0);
  const int sv = (v.psi > 0) - (v.psi < 0);
  if (su != sv) return su < sv ? -1 : 1;
  if (su == 0) return 0;
  const long long lhs = 1LL * u.psi * u.psi * v.denominator;
  const long long rhs = 1LL * v.psi * v.psi * u.denominator;
  if (lhs == rhs) return 0;
  return ((lhs < rhs) == (su > 0)) ? -1 : 1;
}

// Distinct support points of an exact normalization with their masses.
inline std::vector<Atom> support(const JointCounts& acc, Normalization norm) {
  std::vector<Atom> atoms;
  for (const auto& cell : acc.cells()) {
    int denominator = 1;
    switch (norm) {
      case Normalization::period: denominator = cell.n; break;
      case Normalization::maxN: denominator = acc.N(); break;
      case Normalization::word: denominator = cell.lw; break;
      case Normalization::geom: throw DomainError("support: geom normalization is binned");
    }
    atoms.push_back({cell.psi, denominator, cell.count});
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& u, const Atom& v) { return compare_atoms(u, v) < 0; });
  std::vector<Atom> merged;
  for (const auto& atom : atoms) {
    if (!merged.empty() && compare_atoms(merged.back(), atom) == 0) {
      merged.back().count += atom.count;
    } else {
      merged.push_back(atom);
    }
  }
  return merged;
}

inline void require_nonempty(const JointCounts& acc) {
  if (acc.total() == 0) throw DomainError("accumulator is empty");
}

}  // namespace detail

// Right-continuous empirical CDF. Exact normalizations list every support
// point; geom lists the right edge of every nonempty bin, plus the largest
// observed value when mass lies above the binned range.
inline std::vector<CdfPoint> empirical_cdf(const JointCounts& acc, Normalization norm) {
  detail::require_nonempty(acc);
  const double total = double(acc.total());
  std::vector<CdfPoint> out;
  if (norm != Normalization::geom) {
    std::uint64_t running = 0;
    for (const auto& atom : detail::support(acc, norm)) {
      running += atom.count;
      out.push_back({atom.value(), double(running) / total});
    }
    return out;
  }
  std::uint64_t running = acc.underflow();
  for (std::size_t i = 0; i < acc.bins().size(); ++i) {
    if (acc.bins()[i] == 0) continue;
    running += acc.bins()[i];
    out.push_back({acc.bin_edge(i + 1), double(running) / total});
  }
  if (acc.overflow() > 0) out.push_back({acc.lg_max(), 1.0});
  return out;
}

struct DistributionReport {
  int A = 0;
  int N = 0;
  Normalization normalization = Normalization::period;
  double sigma2_target = 0.0;
  double ks = 0.0;
  double ks_error_bound = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  std::uint64_t count = 0;
  std::vector<CdfPoint> cdf_points;
};

inline DistributionReport ks_distance(const JointCounts& acc, Normalization norm, double sigma2) {
  detail::require_nonempty(acc);
  if (!(sigma2 > 0.0)) throw DomainError("ks_distance: sigma2 must be > 0");
  DistributionReport rep;
  rep.A = acc.A();
  rep.N = acc.N();
  rep.normalization = norm;
  rep.sigma2_target = sigma2;
  rep.count = acc.total();
  rep.cdf_points = empirical_cdf(acc, norm);
  const double total = double(acc.total());

  if (norm != Normalization::geom) {
    double below = 0.0;
    CompensatedSum first, second;
    for (const auto& atom : detail::support(acc, norm)) {
      const double g = gaussian_cdf(atom.value(), sigma2);
      const double at = below + double(atom.count) / total;
      rep.ks = std::max({rep.ks, std::abs(at - g), std::abs(below - g)});
      below = at;
      first.add(double(atom.count) * atom.value());
      second.add(double(atom.count) * double(atom.psi) * double(atom.psi) / double(atom.denominator));
    }
    rep.mean = first.value() / total;
    rep.variance = second.value() / total - rep.mean * rep.mean;
    return rep;
  }

  // binned: compare F(e-) with Phi(e) at every bin edge e; the exact sup can
  // differ by at most the heaviest bin plus the mass outside [-L, L]
  std::uint64_t running = acc.underflow();
  std::uint64_t heaviest = 0;
  for (std::size_t i = 0; i <= acc.bins().size(); ++i) {
    rep.ks = std::max(rep.ks, std::abs(double(running) / total - gaussian_cdf(acc.bin_edge(i), sigma2)));
    if (i < acc.bins().size()) {
      running += acc.bins()[i];
      heaviest = std::max(heaviest, acc.bins()[i]);
    }
  }
  rep.ks_error_bound = double(heaviest + acc.underflow() + acc.overflow()) / total;
  rep.mean = acc.lg_moments().mean();
  rep.variance = acc.lg_moments().variance();
  return rep;
}

// (1 / pi_A(N)) * sum of exp(i t psi / sqrt(norm)) over the table.
inline std::pair<double, double> empirical_char_fn(const JointCounts& acc, Normalization norm, double t) {
  detail::require_nonempty(acc);
  if (norm != Normalization::period && norm != Normalization::maxN) {
    throw DomainError("empirical_char_fn: only period and maxn normalizations are supported");
  }
  CompensatedSum re, im;
  for (const auto& cell : acc.cells()) {
    const double x = cell.psi / std::sqrt(double(norm == Normalization::period ? cell.n : acc.N()));
    re.add(double(cell.count) * std::cos(t * x));
    im.add(double(cell.count) * std::sin(t * x));
  }
  const double total = double(acc.total());
  return {re.value() / total, im.value() / total};
}

struct RatioReport {
  double mean_g = 0.0;
  double var_g = 0.0;
  double mean_w = 0.0;
  double var_w = 0.0;
};

// Population mean and variance of lg/lp and lw/lp over the accumulated set.
inline RatioReport ratio_report(const JointCounts& acc) {
  detail::require_nonempty(acc);
  return {acc.ratio_g().mean(), acc.ratio_g().variance(), acc.ratio_w().mean(), acc.ratio_w().variance()};
}

}  // namespace modwind
