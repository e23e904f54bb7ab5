#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "satfp/auth.hpp"
#include "satfp/features.hpp"
#include "satfp/signal_model.hpp"

namespace satfp {

struct FleetConfig {
  int n_satellites = 27;
  FleetSpread spread;
};

enum class BurstMode {
  /// 64-symbol preamble + 12-symbol BPSK unique word: real alphabet, beta = 0.
  IridiumPreamble,
  /// Random QPSK pilots: beta = 1.
  QpskPilots,
};
const char* burst_mode_name(BurstMode m);
BurstMode parse_burst_mode(std::string_view s);

struct ProtocolConfig {
  BurstMode burst_mode = BurstMode::IridiumPreamble;
  int n_messages = 60;
  double snr_db = 20.0;
  std::optional<double> rician_k_db = 15.0;
  bool random_carrier_phase = true;
  /// CFO drawn uniformly in [-cfo_max, cfo_max] per burst, rad/symbol.
  double cfo_max = 0.02;
  int n_bal = 30;
  int n_dr_trials = 30;
  std::vector<int> n_acc_grid = {1, 2, 5, 10, 20, 40, 60};
  std::vector<double> fa_targets = {0.01, 0.1};
  /// Target false-acceptance rate used to set tau on enrollment-only data.
  double tau_fa = 0.1;
  double glrt_ridge = 1e-3;
  PipelineConfig pipeline;
  /// Replaces the simulated DR table in the weight computation.
  std::optional<FeatureArray> dr_override;

  void check() const;
};

/// Blind second/fourth-moment SNR estimate for constant-modulus bursts.
double estimate_snr_m2m4(std::span<const cplx> samples);

/// One campaign: n_messages bursts per satellite with fresh noise and channels.
std::vector<FeatureRow> simulate_campaign(const std::vector<Satellite>& fleet,
                                          const ProtocolConfig& proto, std::uint64_t seed);

struct Strategy {
  std::string name;
  enum class Kind { Subset, Iwat, Glrt } kind = Kind::Subset;
  std::vector<int> features;
  WeightScheme scheme = WeightScheme::Equal;
};

/// PA-only, CRB-guided, All-6, IQ-only, oscillator-only, IWAT (DR^2, DR, equal), GLRT.
std::vector<Strategy> default_strategies();

struct StrategyResult {
  std::string name;
  double auc = 0.5;
  std::map<double, double> pd_at_fa;
  double identification_rate = 0.0;
  /// Threshold from the enrollment-only split and the rates it realizes on probes.
  double tau = 0.0;
  double tau_pd = 0.0;
  double tau_fa = 0.0;
  FeatureArray weights{};
  std::vector<std::pair<int, double>> auc_vs_nacc;
  std::optional<double> nacc_spearman;
  RocCurve roc;
};

struct AuthReport {
  double beta = 0.0;
  DrTable dr;
  bool dr_from_override = false;
  FeatureArray dr_used{};
  std::array<CrossStability, kNumFeatures> stability{};
  std::vector<StrategyResult> strategies;
  int n_satellites = 0;
  int n_messages = 0;

  const StrategyResult& strategy(std::string_view name) const;
};

/// Evaluates every strategy with campaign A as enrollment and campaign B as probes.
AuthReport evaluate_campaigns(std::span<const FeatureRow> campaign_a,
                              std::span<const FeatureRow> campaign_b, const ProtocolConfig& proto,
                              double beta, std::uint64_t seed);

AuthReport run_auth_experiment(const FleetConfig& fleet, const ProtocolConfig& proto,
                               std::uint64_t seed);

std::string auth_report_json(const AuthReport& r);
/// Long format: strategy,fa,pd,threshold
std::string roc_csv(const AuthReport& r);
/// Long format: strategy,n_acc,auc
std::string auc_vs_nacc_csv(const AuthReport& r);
std::string dr_table_csv(const DrTable& t);

/// Parses the feature table CSV written by feature_table_csv.
std::vector<FeatureRow> parse_feature_table_csv(const std::string& text);

}  // namespace satfp
