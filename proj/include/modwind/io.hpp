#pragma once

// CSV, JSON and SVG emission. Every floating-point number is written with
// 17 significant digits so outputs are byte-stable across runs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "modwind/necklace.hpp"
#include "modwind/stats.hpp"

namespace modwind {

inline std::string format_number(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string json_quote(std::string_view s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      default: out += ch;
    }
  }
  return out + "\"";
}

// Insertion-ordered flat JSON object.
class JsonObject {
 public:
  JsonObject& number(std::string key, double value) { return raw(std::move(key), format_number(value)); }
  JsonObject& integer(std::string key, long long value) { return raw(std::move(key), std::to_string(value)); }
  JsonObject& integer(std::string key, const mpz_class& value) { return raw(std::move(key), value.get_str()); }
  JsonObject& string(std::string key, std::string_view value) { return raw(std::move(key), json_quote(value)); }
  JsonObject& boolean(std::string key, bool value) { return raw(std::move(key), value ? "true" : "false"); }
  JsonObject& raw(std::string key, std::string json) {
    fields_.emplace_back(std::move(key), std::move(json));
    return *this;
  }

  std::string str() const {
    std::string out = "{";
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      if (i) out += ", ";
      out += json_quote(fields_[i].first) + ": " + fields_[i].second;
    }
    return out + "}";
  }

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

inline std::string json_array(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out + "]";
}

inline std::string rational_string(const Rational& q) { return q.get_str(); }

inline JsonObject count_json(const CountReport& report) {
  JsonObject out;
  out.integer("A", report.A)
      .integer("N", report.N)
      .integer("exact", report.exact)
      .number("asymptotic", report.asymptotic)
      .number("relative_error", report.relative_error);
  return out;
}

// {A, N, normalization, sigma2, ks, ks_error_bound, mean, variance, count}
inline JsonObject report_json(const DistributionReport& report) {
  JsonObject out;
  out.integer("A", report.A)
      .integer("N", report.N)
      .string("normalization", to_string(report.normalization))
      .number("sigma2", report.sigma2_target)
      .number("ks", report.ks)
      .number("ks_error_bound", report.ks_error_bound)
      .number("mean", report.mean)
      .number("variance", report.variance)
      .integer("count", static_cast<long long>(report.count));
  return out;
}

inline void write_table_csv(std::ostream& out, const JointCounts& acc) {
  out << "n,psi,lw,count\n";
  for (const auto& cell : acc.cells()) out << cell.n << ',' << cell.psi << ',' << cell.lw << ',' << cell.count << '\n';
}

inline void write_cdf_csv(std::ostream& out, const DistributionReport& report) {
  out << "x,F_emp,F_gauss\n";
  for (const auto& p : report.cdf_points) {
    out << format_number(p.x) << ',' << format_number(p.F) << ','
        << format_number(gaussian_cdf(p.x, report.sigma2_target)) << '\n';
  }
}

struct DisplayBin {
  double lo;
  double hi;
  double density;
};

// Density histogram used for plotting. Psi is an integer and the
// denominators concentrate around N, (A+1)N and c_hat*N, so bins are centred
// on the matching lattice k / sqrt(denominator) and cover four standard
// deviations; finer bins would alias against that lattice.
inline std::vector<DisplayBin> display_histogram(const JointCounts& acc, Normalization norm, double sigma2) {
  detail::require_nonempty(acc);
  const double sigma = std::sqrt(sigma2);
  double denominator = acc.N();
  if (norm == Normalization::word) denominator = acc.ratio_w().mean() * acc.N();
  if (norm == Normalization::geom) denominator = acc.ratio_g().mean() * acc.N();
  const double width = 1.0 / std::sqrt(denominator);
  const int half = static_cast<int>(std::ceil(4.0 * sigma / width));
  const int count = 2 * half + 1;
  const double start = -(half + 0.5) * width;
  std::vector<double> mass(count, 0.0);
  auto deposit = [&](double x, double m) {
    const double pos = std::floor((x - start) / width);
    if (pos < 0 || pos >= count) return;
    mass[static_cast<std::size_t>(pos)] += m;
  };
  const double total = double(acc.total());
  if (norm == Normalization::geom) {
    for (std::size_t i = 0; i < acc.bins().size(); ++i) {
      if (acc.bins()[i]) deposit(acc.bin_edge(i) + 0.5 * acc.bin_width(), double(acc.bins()[i]) / total);
    }
  } else {
    for (const auto& atom : detail::support(acc, norm)) deposit(atom.value(), double(atom.count) / total);
  }
  std::vector<DisplayBin> out;
  for (int i = 0; i < count; ++i) out.push_back({start + i * width, start + (i + 1) * width, mass[i] / width});
  return out;
}

// Static SVG 1.1 figure: one histogram group and one dashed Gaussian path.
inline void write_svg(std::ostream& out, const JointCounts& acc, Normalization norm, double sigma2) {
  const auto bins = display_histogram(acc, norm, sigma2);
  constexpr double W = 640, H = 400, left = 60, right = 20, top = 40, bottom = 50;
  const double x_lo = bins.front().lo, x_hi = bins.back().hi;
  const double peak = 1.0 / std::sqrt(2.0 * std::numbers::pi * sigma2);
  double y_hi = peak;
  for (const auto& b : bins) y_hi = std::max(y_hi, b.density);
  y_hi *= 1.1;
  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * (W - left - right); };
  auto py = [&](double y) { return H - bottom - y / y_hi * (H - top - bottom); };
  auto f = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::string label;
  switch (norm) {
    case Normalization::period: label = "psi / sqrt(l_p)"; break;
    case Normalization::maxN: label = "psi / sqrt(N)"; break;
    case Normalization::word: label = "psi / sqrt(l_w)"; break;
    case Normalization::geom: label = "psi / sqrt(l_g)"; break;
  }

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">A = "
      << acc.A() << ", N = " << acc.N() << ", " << label << ", sigma^2 = " << format_number(sigma2) << "</text>\n";
  out << "<g id=\"histogram\" fill=\"#4a78c2\" fill-opacity=\"0.75\" stroke=\"none\">\n";
  for (const auto& b : bins) {
    if (b.density <= 0.0) continue;
    out << "<rect x=\"" << f(px(b.lo)) << "\" y=\"" << f(py(b.density)) << "\" width=\"" << f(px(b.hi) - px(b.lo))
        << "\" height=\"" << f(py(0) - py(b.density)) << "\"/>\n";
  }
  out << "</g>\n";
  out << "<path id=\"gaussian\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" stroke-dasharray=\"6,4\" d=\"";
  constexpr int samples = 240;
  for (int i = 0; i <= samples; ++i) {
    const double x = x_lo + (x_hi - x_lo) * i / samples;
    const double y = peak * std::exp(-x * x / (2.0 * sigma2));
    out << (i ? " L" : "M") << f(px(x)) << ',' << f(py(y));
  }
  out << "\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << f(py(0)) << "\" x2=\"" << W - right << "\" y2=\"" << f(py(0))
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << f(py(0))
      << "\" stroke=\"black\"/>\n";
  for (int tick = static_cast<int>(std::ceil(x_lo)); tick <= static_cast<int>(std::floor(x_hi)); ++tick) {
    out << "<text x=\"" << f(px(tick)) << "\" y=\"" << f(py(0) + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << tick << "</text>\n";
  }
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << label << "</text>\n";
  out << "</svg>\n";
}

}  // namespace modwind
