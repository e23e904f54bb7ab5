#pragma once

#include <optional>
#include <span>
#include <vector>

namespace satfp::stats {

double mean(std::span<const double> x);
/// Population variance (divisor N).
double variance(std::span<const double> x);
/// Sample variance (divisor N - 1).
double sample_variance(std::span<const double> x);
double stddev(std::span<const double> x);

/// Linear interpolation between order statistics at index p/100 (N - 1).
double percentile(std::span<const double> x, double p);

/// Biased lag-k autocorrelation (divisor N, normalized by the variance).
/// Empty when the input has zero variance.
std::optional<double> acf(std::span<const double> x, int lag);

/// Plain moment ratio m4 / m2^2 - 3. Empty when the input has zero variance.
std::optional<double> excess_kurtosis(std::span<const double> x);

/// Empty when either input has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value of a Pearson r over n pairs via the t-transform.
double pearson_p_value(double r, std::size_t n);

/// Average ranks (1-based) with ties sharing the mean rank.
std::vector<double> ranks(std::span<const double> x);

/// Unwrap a phase sequence so consecutive differences lie in (-pi, pi].
std::vector<double> unwrap(std::span<const double> phase);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
};

/// Least-squares line through (n, y[n]), n = 0..N-1.
LineFit fit_line(std::span<const double> y);

}  // namespace satfp::stats
