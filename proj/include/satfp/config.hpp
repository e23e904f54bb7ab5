#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "satfp/experiment.hpp"
#include "satfp/signal_model.hpp"

namespace satfp {

struct MomentsConfig {
  std::vector<std::string> constellations = {"bpsk", "sdpsk", "qpsk", "dqpsk",
                                             "8psk", "16qam", "64qam"};
  /// Optional user alphabet, normalized to unit power.
  std::optional<std::vector<cplx>> custom_points;
};

struct CrbCurvesConfig {
  std::vector<std::string> modulations = {"bpsk", "qpsk", "8psk", "16qam"};
  std::vector<double> snr_db = {0, 5, 10, 15, 20, 25, 30, 35, 40};
  std::vector<int> n = {32, 76, 256};
  HwiParams theta{0.05, 0.05235987755982988, {0.0, 0.0}};
};

struct McValidateConfig {
  std::vector<std::string> modulations = {"qpsk", "bpsk"};
  HwiParams truth{0.03, 0.03490658503988659, {0.02, 0.01}};
  std::vector<double> snr_db = {0, 10, 20, 30, 40};
  int n = 76;
  int n_trials = 300;
  double init_rel = 0.1;
  double init_floor = 1e-3;
  int max_iters = 5000;
};

struct IdentifiabilityConfig {
  std::vector<std::string> modulations = {"bpsk", "sdpsk", "qpsk", "dqpsk", "8psk", "16qam", "64qam"};
  HwiParams theta{0.03, 0.03490658503988659, {0.02, 0.01}};
  int n = 76;
  double snr_db = 20.0;
};

/// Whole-tool configuration. Every section is optional in the file; unknown keys
/// are rejected at every level. Angles are in radians.
struct AppConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  MomentsConfig moments;
  CrbCurvesConfig crb_curves;
  McValidateConfig mc_validate;
  IdentifiabilityConfig identifiability;
  FleetConfig fleet;
  ProtocolConfig protocol;

  void check() const;
};

AppConfig parse_config(const std::string& json_text);
std::string serialize_config(const AppConfig& c);

}  // namespace satfp
