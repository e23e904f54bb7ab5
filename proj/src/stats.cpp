#include "satfp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "satfp/error.hpp"

namespace satfp::stats {

namespace {

void require_nonempty(std::span<const double> x, const char* what) {
  if (x.empty()) throw ConfigError(std::string(what) + ": empty input");
}

}  // namespace

double mean(std::span<const double> x) {
  require_nonempty(x, "mean");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw ConfigError("sample_variance: need at least 2 values");
  return variance(x) * static_cast<double>(x.size()) / static_cast<double>(x.size() - 1);
}

double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

double percentile(std::span<const double> x, double p) {
  require_nonempty(x, "percentile");
  if (!(p >= 0.0 && p <= 100.0)) throw ConfigError("percentile: p must lie in [0, 100]");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double pos = p / 100.0 * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

std::optional<double> acf(std::span<const double> x, int lag) {
  require_nonempty(x, "acf");
  if (lag < 0 || static_cast<std::size_t>(lag) >= x.size()) {
    throw ConfigError("acf: lag out of range");
  }
  const double m = mean(x);
  double c0 = 0.0;
  double ck = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    c0 += (x[n] - m) * (x[n] - m);
    if (n + static_cast<std::size_t>(lag) < x.size()) ck += (x[n] - m) * (x[n + lag] - m);
  }
  if (!(c0 > 0.0)) return std::nullopt;
  return ck / c0;
}

std::optional<double> excess_kurtosis(std::span<const double> x) {
  const double m = mean(x);
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : x) {
    const double d2 = (v - m) * (v - m);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(x.size());
  m4 /= static_cast<double>(x.size());
  if (!(m2 > 0.0)) return std::nullopt;
  return m4 / (m2 * m2) - 3.0;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ConfigError("pearson: length mismatch");
  if (x.size() < 2) throw ConfigError("pearson: need at least 2 pairs");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = (static_cast<double>(i + j) / 2.0) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  return pearson(rx, ry);
}

double pearson_p_value(double r, std::size_t n) {
  if (n < 3) throw ConfigError("pearson_p_value: need at least 3 pairs");
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = r * std::sqrt(df / (1.0 - r * r));
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

std::vector<double> unwrap(std::span<const double> phase) {
  std::vector<double> out(phase.begin(), phase.end());
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double offset = 0.0;
  for (std::size_t n = 1; n < phase.size(); ++n) {
    double d = phase[n] - phase[n - 1];
    const double wrapped = d - two_pi * std::round(d / two_pi);
    offset += wrapped - d;
    out[n] = phase[n] + offset;
  }
  return out;
}

LineFit fit_line(std::span<const double> y) {
  if (y.size() < 2) throw ConfigError("fit_line: need at least 2 points");
  const double n = static_cast<double>(y.size());
  const double tm = (n - 1.0) / 2.0;
  const double ym = mean(y);
  double sty = 0.0;
  double stt = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double t = static_cast<double>(i) - tm;
    sty += t * (y[i] - ym);
    stt += t * t;
  }
  LineFit f;
  f.slope = sty / stt;
  f.intercept = ym - f.slope * tm;
  return f;
}

}  // namespace satfp::stats
