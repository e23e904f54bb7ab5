#include "satfp/auth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "satfp/error.hpp"
#include "satfp/rng.hpp"
#include "satfp/stats.hpp"

namespace satfp {

Fingerprint accumulate(std::int64_t satellite_id, std::span<const FeatureVector> features,
                       std::span<const double> snrs_linear) {
  if (features.empty()) throw ConfigError("accumulate: no messages");
  if (features.size() != snrs_linear.size()) {
    throw ConfigError("accumulate: features and SNRs differ in length");
  }
  double wsum = 0.0;
  for (double s : snrs_linear) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("accumulate: SNR weights must be >= 0");
    wsum += s;
  }
  if (!(wsum > 0.0)) throw NumericalError("accumulate: all-zero SNR weights");

  Fingerprint fp;
  fp.satellite_id = satellite_id;
  fp.n_messages = static_cast<int>(features.size());
  std::vector<double> col(features.size());
  for (int k = 0; k < kNumFeatures; ++k) {
    double acc = 0.0;
    for (std::size_t m = 0; m < features.size(); ++m) {
      col[m] = features[m].as_array()[k];
      acc += snrs_linear[m] * col[m];
    }
    fp.mean[k] = acc / wsum;
    fp.variance[k] = stats::variance(col);
  }
  return fp;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Strong: return "strong";
    case Verdict::Moderate: return "moderate";
    case Verdict::Detectable: return "detectable";
    case Verdict::Weak: return "weak";
    case Verdict::NotDiscriminative: return "not_discriminative";
  }
  return "unknown";
}

Verdict VerdictBands::classify(double dr) const {
  if (dr > strong) return Verdict::Strong;
  if (dr >= moderate) return Verdict::Moderate;
  if (dr >= detectable) return Verdict::Detectable;
  if (dr >= weak) return Verdict::Weak;
  return Verdict::NotDiscriminative;
}

FeatureArray DrTable::means() const {
  FeatureArray out{};
  for (int k = 0; k < kNumFeatures; ++k) out[k] = entries[k].mean;
  return out;
}

DrTable balanced_dr(std::span<const FeatureRow> table, int n_bal, int n_trials, std::uint64_t seed,
                    const VerdictBands& bands) {
  if (n_bal < 2 || n_bal % 2 != 0) throw ConfigError("balanced_dr: n_bal must be even and >= 2");
  if (n_trials < 1) throw ConfigError("balanced_dr: n_trials must be >= 1");

  std::map<std::int64_t, std::vector<FeatureArray>> by_sat;
  for (const auto& row : table) by_sat[row.satellite_id].push_back(row.features.as_array());

  DrTable out;
  out.n_bal = n_bal;
  out.n_trials = n_trials;
  std::vector<const std::vector<FeatureArray>*> sats;
  for (const auto& [id, rows] : by_sat) {
    if (rows.size() >= static_cast<std::size_t>(n_bal)) {
      out.satellites.push_back(id);
      sats.push_back(&rows);
    } else {
      out.excluded.push_back(id);
    }
  }
  if (sats.size() < 2) throw ConfigError("balanced_dr: fewer than 2 eligible satellites");

  const std::size_t half = static_cast<std::size_t>(n_bal / 2);
  std::vector<std::vector<double>> dr(kNumFeatures);
  std::vector<double> full_mean(sats.size());
  std::vector<double> half_diff(sats.size());
  std::vector<std::vector<std::size_t>> picks(sats.size());

  for (int t = 0; t < n_trials; ++t) {
    Rng rng(derive_seed(seed, 11, static_cast<std::uint64_t>(t)));
    for (std::size_t s = 0; s < sats.size(); ++s) {
      std::vector<std::size_t> idx(sats[s]->size());
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(static_cast<std::size_t>(n_bal));
      picks[s] = std::move(idx);
    }
    for (int k = 0; k < kNumFeatures; ++k) {
      for (std::size_t s = 0; s < sats.size(); ++s) {
        double a = 0.0;
        double b = 0.0;
        for (std::size_t m = 0; m < half; ++m) a += (*sats[s])[picks[s][m]][k];
        for (std::size_t m = half; m < 2 * half; ++m) b += (*sats[s])[picks[s][m]][k];
        a /= static_cast<double>(half);
        b /= static_cast<double>(half);
        full_mean[s] = (a + b) / 2.0;
        half_diff[s] = (a - b) / std::sqrt(2.0);
      }
      const double inter = stats::stddev(full_mean);
      const double intra = stats::stddev(half_diff);
      double v = 0.0;
      if (intra > 0.0) {
        v = inter / intra;
      } else if (inter > 0.0) {
        v = std::numeric_limits<double>::infinity();
      }
      dr[k].push_back(v);
    }
  }
  for (int k = 0; k < kNumFeatures; ++k) {
    auto& e = out.entries[k];
    e.mean = stats::mean(dr[k]);
    e.std = n_trials > 1 && std::isfinite(e.mean) ? std::sqrt(stats::sample_variance(dr[k])) : 0.0;
    e.verdict = bands.classify(e.mean);
  }
  return out;
}

std::array<CrossStability, kNumFeatures> cross_stability(std::span<const Fingerprint> a,
                                                         std::span<const Fingerprint> b) {
  std::map<std::int64_t, const Fingerprint*> mb;
  for (const auto& f : b) mb[f.satellite_id] = &f;
  std::vector<std::pair<const Fingerprint*, const Fingerprint*>> common;
  for (const auto& f : a) {
    if (auto it = mb.find(f.satellite_id); it != mb.end()) common.emplace_back(&f, it->second);
  }
  if (common.size() < 3) throw ConfigError("cross_stability: need >= 3 common satellites");

  std::array<CrossStability, kNumFeatures> out{};
  std::vector<double> xa(common.size());
  std::vector<double> xb(common.size());
  for (int k = 0; k < kNumFeatures; ++k) {
    for (std::size_t i = 0; i < common.size(); ++i) {
      xa[i] = common[i].first->mean[k];
      xb[i] = common[i].second->mean[k];
    }
    out[k].n_common = static_cast<int>(common.size());
    out[k].pearson_r = stats::pearson(xa, xb);
    if (out[k].pearson_r) out[k].p_value = stats::pearson_p_value(*out[k].pearson_r, common.size());
  }
  return out;
}

FeatureMask active_set(double beta) {
  if (!(beta >= 0.0)) throw ConfigError("active_set: beta must be >= 0");
  FeatureMask m{};
  for (int k = 0; k < kNumFeatures; ++k) {
    const auto g = feature_group(k);
    m[k] = g == FeatureGroup::PA || g == FeatureGroup::Oscillator ||
           (beta > 0.0 && g == FeatureGroup::IQ);
  }
  return m;
}

FeatureMask mask_of(std::span<const int> features) {
  FeatureMask m{};
  for (int k : features) {
    if (k < 0 || k >= kNumFeatures) throw ConfigError("mask_of: feature index out of range");
    m[k] = true;
  }
  return m;
}

const char* weight_scheme_name(WeightScheme s) {
  switch (s) {
    case WeightScheme::DrSquared: return "dr_squared";
    case WeightScheme::Dr: return "dr";
    case WeightScheme::Equal: return "equal";
  }
  return "unknown";
}

WeightVector iwat_weights(const FeatureArray& dr, const FeatureMask& active, WeightScheme scheme) {
  WeightVector out;
  double total = 0.0;
  for (int k = 0; k < kNumFeatures; ++k) {
    if (!active[k]) continue;
    if (!(dr[k] >= 0.0) || !std::isfinite(dr[k])) {
      throw NumericalError("iwat_weights: DR values must be finite and >= 0");
    }
    switch (scheme) {
      case WeightScheme::DrSquared: out.w[k] = dr[k] * dr[k]; break;
      case WeightScheme::Dr: out.w[k] = dr[k]; break;
      case WeightScheme::Equal: out.w[k] = 1.0; break;
    }
    total += out.w[k];
  }
  if (!(total > 0.0)) throw NumericalError("iwat_weights: all active DRs are zero");
  for (auto& w : out.w) w /= total;
  return out;
}

WeightVector iwat_weights(const DrTable& dr, double beta, WeightScheme scheme) {
  return iwat_weights(dr.means(), active_set(beta), scheme);
}

ZNormalizer ZNormalizer::fit(std::span<const Fingerprint> enrollment) {
  if (enrollment.empty()) throw ConfigError("ZNormalizer: empty enrollment");
  ZNormalizer z;
  std::vector<double> col(enrollment.size());
  for (int k = 0; k < kNumFeatures; ++k) {
    for (std::size_t i = 0; i < enrollment.size(); ++i) col[i] = enrollment[i].mean[k];
    z.mean[k] = stats::mean(col);
    const double sd = stats::stddev(col);
    z.scale[k] = sd > 0.0 ? sd : 1.0;
  }
  return z;
}

Fingerprint ZNormalizer::apply(const Fingerprint& f) const {
  Fingerprint out = f;
  for (int k = 0; k < kNumFeatures; ++k) {
    out.mean[k] = (f.mean[k] - mean[k]) / scale[k];
    out.variance[k] = f.variance[k] / (scale[k] * scale[k]);
  }
  return out;
}

std::vector<Fingerprint> ZNormalizer::apply(std::span<const Fingerprint> fs) const {
  std::vector<Fingerprint> out;
  out.reserve(fs.size());
  for (const auto& f : fs) out.push_back(apply(f));
  return out;
}

std::vector<double> iwat_scores(const Fingerprint& test, std::span<const Fingerprint> enrollment,
                                const WeightVector& w) {
  if (enrollment.empty()) throw ConfigError("iwat_score: empty enrollment");
  std::vector<double> s(enrollment.size(), 0.0);
  for (std::size_t i = 0; i < enrollment.size(); ++i) {
    for (int k = 0; k < kNumFeatures; ++k) {
      if (w.w[k] == 0.0) continue;
      const double d = test.mean[k] - enrollment[i].mean[k];
      s[i] += w.w[k] * d * d;
    }
  }
  return s;
}

AuthDecision iwat_score(const Fingerprint& test, std::span<const Fingerprint> enrollment,
                        const WeightVector& w, double tau) {
  AuthDecision d;
  d.scores = iwat_scores(test, enrollment, w);
  d.claimed_index = static_cast<std::size_t>(
      std::min_element(d.scores.begin(), d.scores.end()) - d.scores.begin());
  d.claimed_id = enrollment[d.claimed_index].satellite_id;
  d.tau = tau;
  d.accepted = d.scores[d.claimed_index] < tau;
  return d;
}

Eigen::MatrixXd enrollment_covariance(std::span<const Fingerprint> enrollment,
                                      std::span<const int> subset) {
  if (enrollment.size() < 2) throw ConfigError("enrollment_covariance: need >= 2 fingerprints");
  const auto d = static_cast<Eigen::Index>(subset.size());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(enrollment.size()), d);
  for (std::size_t i = 0; i < enrollment.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      x(static_cast<Eigen::Index>(i), j) = enrollment[i].mean[subset[j]];
    }
  }
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  return c.transpose() * c / static_cast<double>(enrollment.size() - 1);
}

std::vector<double> glrt_score(const Fingerprint& test, std::span<const Fingerprint> enrollment,
                               std::span<const int> subset, const Eigen::MatrixXd& sigma,
                               double ridge) {
  if (enrollment.empty()) throw ConfigError("glrt_score: empty enrollment");
  if (subset.empty()) throw ConfigError("glrt_score: empty feature subset");
  if (!(ridge >= 0.0)) throw ConfigError("glrt_score: ridge must be >= 0");
  const auto d = static_cast<Eigen::Index>(subset.size());
  if (sigma.rows() != d || sigma.cols() != d) throw ConfigError("glrt_score: covariance size");
  const Eigen::MatrixXd reg = sigma + ridge * Eigen::MatrixXd::Identity(d, d);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(reg);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reg, Eigen::EigenvaluesOnly);
  if (ldlt.info() != Eigen::Success || !(es.eigenvalues()[0] > 1e-12 * es.eigenvalues()[d - 1])) {
    throw NumericalError("glrt_score: singular regularized covariance");
  }
  std::vector<double> s(enrollment.size());
  Eigen::VectorXd diff(d);
  for (std::size_t i = 0; i < enrollment.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      diff[j] = test.mean[subset[j]] - enrollment[i].mean[subset[j]];
    }
    s[i] = diff.dot(ldlt.solve(diff));
  }
  return s;
}

std::vector<double> glrt_score(const Fingerprint& test, std::span<const Fingerprint> enrollment,
                               std::span<const int> subset, double ridge) {
  if (!(enrollment.size() > subset.size()) && !(ridge > 0.0)) {
    throw ConfigError("glrt_score: need more enrollment rows than features or ridge > 0");
  }
  return glrt_score(test, enrollment, subset, enrollment_covariance(enrollment, subset), ridge);
}

RocCurve roc_auc(std::span<const double> genuine, std::span<const double> impostor,
                 std::span<const double> fa_targets) {
  if (genuine.empty() || impostor.empty()) throw ConfigError("roc_auc: empty score list");
  RocCurve roc;

  // Mann-Whitney via average ranks of the pooled sample.
  std::vector<double> pooled(genuine.begin(), genuine.end());
  pooled.insert(pooled.end(), impostor.begin(), impostor.end());
  const auto rk = stats::ranks(pooled);
  const double ng = static_cast<double>(genuine.size());
  const double ni = static_cast<double>(impostor.size());
  double rsum = 0.0;
  for (std::size_t i = 0; i < genuine.size(); ++i) rsum += rk[i];
  // U counts impostors ranked above each genuine score (lower score = genuine).
  const double u_genuine_higher = rsum - ng * (ng + 1.0) / 2.0;
  roc.auc = (ng * ni - u_genuine_higher) / (ng * ni);

  std::vector<double> g(genuine.begin(), genuine.end());
  std::vector<double> im(impostor.begin(), impostor.end());
  std::sort(g.begin(), g.end());
  std::sort(im.begin(), im.end());
  std::vector<double> thr = pooled;
  std::sort(thr.begin(), thr.end());
  thr.erase(std::unique(thr.begin(), thr.end()), thr.end());

  roc.points.push_back({0.0, 0.0, -std::numeric_limits<double>::infinity()});
  for (double t : thr) {
    const auto cg = std::upper_bound(g.begin(), g.end(), t) - g.begin();
    const auto ci = std::upper_bound(im.begin(), im.end(), t) - im.begin();
    roc.points.push_back({static_cast<double>(ci) / ni, static_cast<double>(cg) / ng, t});
  }
  for (double fa : fa_targets) roc.pd_at_fa[fa] = pd_at(roc, fa);
  return roc;
}

double pd_at(const RocCurve& roc, double fa_target) {
  double best = 0.0;
  for (const auto& p : roc.points) {
    if (p.fa <= fa_target) best = std::max(best, p.pd);
  }
  return best;
}

double threshold_at_fa(std::span<const double> impostor, double fa_target) {
  if (impostor.empty()) throw ConfigError("threshold_at_fa: empty impostor scores");
  if (!(fa_target >= 0.0 && fa_target <= 1.0)) {
    throw ConfigError("threshold_at_fa: target must lie in [0, 1]");
  }
  std::vector<double> s(impostor.begin(), impostor.end());
  std::sort(s.begin(), s.end());
  const auto k = static_cast<std::size_t>(std::floor(fa_target * static_cast<double>(s.size())));
  if (k >= s.size()) return std::numeric_limits<double>::infinity();
  return s[k];
}

}  // namespace satfp
