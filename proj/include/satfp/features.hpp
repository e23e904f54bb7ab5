#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "satfp/constellation.hpp"
#include "satfp/signal_model.hpp"

namespace satfp {

inline constexpr int kNumFeatures = 13;

enum FeatureIndex : int {
  kAmpVar = 0,
  kAmpRange,
  kAmpKurtosis,
  kAmpAcf1,
  kPhaseAcf1,
  kPhaseVar,
  kCfo,
  kEvm,
  kIqEps,
  kIqPhi,
  kDcI,
  kDcQ,
  kPaCross,
};

inline constexpr std::array<const char*, kNumFeatures> kFeatureNames = {
    "amp_var", "amp_range", "amp_kurtosis", "amp_acf1", "phase_acf1", "phase_var", "cfo",
    "evm",     "iq_eps",    "iq_phi",       "dc_i",     "dc_q",       "pa_cross"};

enum class FeatureGroup { PA, Oscillator, Constellation, IQ, DC, Cross };
FeatureGroup feature_group(int k);
/// Parses a feature name; throws ConfigError if unknown.
int feature_index(std::string_view name);

// Bits in FeatureVector::flags.
inline constexpr std::uint32_t kFlagAmpDegenerate = 1u << 0;    // zero amplitude variance
inline constexpr std::uint32_t kFlagPhaseDegenerate = 1u << 1;  // zero phase-residual variance
inline constexpr std::uint32_t kFlagNoKnownSymbols = 1u << 2;   // blind alignment / nearest-point EVM

struct FeatureVector {
  double amp_var = 0;
  double amp_range = 0;
  double amp_kurtosis = 0;
  double amp_acf1 = 0;
  double phase_acf1 = 0;
  double phase_var = 0;
  double cfo_hat = 0;
  double evm = 0;
  double iq_eps_hat = 0;
  double iq_phi_hat = 0;
  double dc_i = 0;
  double dc_q = 0;
  double pa_cross = 0;
  std::uint32_t flags = 0;

  std::array<double, kNumFeatures> as_array() const;
  static FeatureVector from_array(const std::array<double, kNumFeatures>& a);
};

struct PipelineConfig {
  int n_known = 76;
  double percentile_lo = 5.0;
  double percentile_hi = 95.0;
  int acf_lag = 1;
  /// Power used to strip the modulation before phase processing (4 removes
  /// QPSK and BPSK alike).
  int strip_power = 4;
  /// Reference alphabet for nearest-point EVM when no known symbols are present.
  Modulation blind_reference = Modulation::QPSK;

  void check() const;
};

struct CfoResult {
  std::vector<cplx> samples;
  double cfo_hat = 0.0;
};

/// Line fit to the unwrapped phase of r^M; derotates by the fitted slope / M.
CfoResult remove_cfo(std::span<const cplx> samples, int strip_power = 4);

/// Scales to unit mean power.
std::vector<cplx> normalize_amplitude(std::span<const cplx> samples);

FeatureVector extract_features(const Burst& b, const PipelineConfig& cfg = {});

struct FeatureRow {
  std::int64_t satellite_id = -1;
  std::int64_t burst_index = 0;
  double snr_db = 0.0;
  FeatureVector features;
};

std::string feature_table_csv(std::span<const FeatureRow> rows);

}  // namespace satfp
