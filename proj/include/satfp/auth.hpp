#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "satfp/features.hpp"

namespace satfp {

using FeatureArray = std::array<double, kNumFeatures>;

struct Fingerprint {
  std::int64_t satellite_id = -1;
  FeatureArray mean{};
  /// Unweighted per-feature variance over the messages (diagnostic).
  FeatureArray variance{};
  int n_messages = 0;
};

/// SNR-weighted mean, weights proportional to the linear SNRs.
Fingerprint accumulate(std::int64_t satellite_id, std::span<const FeatureVector> features,
                       std::span<const double> snrs_linear);

// ---------------------------------------------------------------------------
// Balanced discrimination ratio

enum class Verdict { Strong, Moderate, Detectable, Weak, NotDiscriminative };
const char* verdict_name(Verdict v);

struct VerdictBands {
  double strong = 3.0;
  double moderate = 1.5;
  double detectable = 1.0;
  double weak = 0.8;

  Verdict classify(double dr) const;
};

struct DrEntryStats {
  double mean = 0.0;
  double std = 0.0;
  Verdict verdict = Verdict::NotDiscriminative;
};

struct DrTable {
  std::array<DrEntryStats, kNumFeatures> entries{};
  int n_trials = 0;
  int n_bal = 0;
  std::vector<std::int64_t> satellites;
  /// Satellites with fewer than n_bal messages.
  std::vector<std::int64_t> excluded;

  FeatureArray means() const;
};

/// Per trial: draw n_bal messages per satellite without replacement and split them
/// into halves. DR = std over satellites of the n_bal-message means divided by the
/// std over satellites of (half-A mean - half-B mean) / sqrt(2). Pure noise gives
/// 1/sqrt(2).
DrTable balanced_dr(std::span<const FeatureRow> table, int n_bal, int n_trials, std::uint64_t seed,
                    const VerdictBands& bands = {});

struct CrossStability {
  std::optional<double> pearson_r;
  std::optional<double> p_value;
  int n_common = 0;
};

/// Per-feature Pearson r across satellites present in both campaigns.
std::array<CrossStability, kNumFeatures> cross_stability(std::span<const Fingerprint> a,
                                                         std::span<const Fingerprint> b);

// ---------------------------------------------------------------------------
// IWAT

using FeatureMask = std::array<bool, kNumFeatures>;

/// beta = 0: PA + oscillator features; beta > 0 additionally the IQ features.
FeatureMask active_set(double beta);
FeatureMask mask_of(std::span<const int> features);

enum class WeightScheme { DrSquared, Dr, Equal };
const char* weight_scheme_name(WeightScheme s);

struct WeightVector {
  FeatureArray w{};
};

/// Normalized weights over the active features. DrSquared: DR^2 / sum DR^2.
/// Equal spreads uniformly over active features regardless of DR.
WeightVector iwat_weights(const FeatureArray& dr, const FeatureMask& active,
                          WeightScheme scheme = WeightScheme::DrSquared);
WeightVector iwat_weights(const DrTable& dr, double beta,
                          WeightScheme scheme = WeightScheme::DrSquared);

/// Global z-score from enrollment fingerprint means only.
struct ZNormalizer {
  FeatureArray mean{};
  FeatureArray scale{};

  static ZNormalizer fit(std::span<const Fingerprint> enrollment);
  Fingerprint apply(const Fingerprint& f) const;
  std::vector<Fingerprint> apply(std::span<const Fingerprint> fs) const;
};

struct AuthDecision {
  std::vector<double> scores;
  std::size_t claimed_index = 0;
  std::int64_t claimed_id = -1;
  double tau = 0.0;
  bool accepted = false;
};

/// S_i = sum_k w_k (f_k - mu_ik)^2 over the enrollment list.
std::vector<double> iwat_scores(const Fingerprint& test, std::span<const Fingerprint> enrollment,
                                const WeightVector& w);
AuthDecision iwat_score(const Fingerprint& test, std::span<const Fingerprint> enrollment,
                        const WeightVector& w, double tau);

/// Mahalanobis distance with (Sigma + ridge I); Sigma is the covariance of the
/// enrollment fingerprints over the subset.
std::vector<double> glrt_score(const Fingerprint& test, std::span<const Fingerprint> enrollment,
                               std::span<const int> subset, double ridge);
std::vector<double> glrt_score(const Fingerprint& test, std::span<const Fingerprint> enrollment,
                               std::span<const int> subset, const Eigen::MatrixXd& sigma,
                               double ridge);
Eigen::MatrixXd enrollment_covariance(std::span<const Fingerprint> enrollment,
                                      std::span<const int> subset);

// ---------------------------------------------------------------------------
// ROC

struct RocPoint {
  double fa = 0.0;
  double pd = 0.0;
  double threshold = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.5;
  std::map<double, double> pd_at_fa;
};

/// Lower score = more genuine; accept when score <= threshold. AUC is the
/// Mann-Whitney statistic with ties counted 1/2.
RocCurve roc_auc(std::span<const double> genuine, std::span<const double> impostor,
                 std::span<const double> fa_targets = std::array<double, 2>{0.01, 0.1});

/// Largest P_D over ROC points with fa <= target (step interpolation).
double pd_at(const RocCurve& roc, double fa_target);

/// Threshold whose false-acceptance rate on the given impostor scores does not
/// exceed the target (accept when score < tau).
double threshold_at_fa(std::span<const double> impostor, double fa_target);

}  // namespace satfp
