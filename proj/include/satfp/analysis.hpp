#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "satfp/config.hpp"
#include "satfp/fim.hpp"

namespace satfp {

/// Largest principal angle (degrees) between the spans of two bases.
double subspace_angle_deg(const std::vector<Eigen::Vector4d>& a,
                          const std::vector<Eigen::Vector4d>& b);

struct IdentifiabilityEntry {
  std::string modulation;
  Moments mom;
  int predicted_rank = 0;
  CrbReport report;
  /// (phi, Im alpha3) sub-block lambda_max / lambda_min.
  double phi_a3im_eig_ratio = 0.0;
  std::optional<double> rho_phi_a3im;
  std::optional<double> rho_eps_a3re;
  /// Angle between the numerical null space and the real-alphabet collapse basis.
  std::optional<double> collapse_angle_deg;
  /// CRB(unknown h) / CRB(known h) for (eps, phi) with alpha3 known.
  std::vector<CrbBound> iq_channel_inflation;
};

IdentifiabilityEntry identifiability_analysis(const Constellation& c, const HwiParams& theta, int n,
                                              double snr_db);
std::string identifiability_json(const std::vector<IdentifiabilityEntry>& entries);

std::string moments_csv(const std::vector<Constellation>& cs);

/// Long format: modulation,snr_db,n,param,crb,crb_known_h,crb_marginalized,rank.
/// crb is the closed form; crb_known_h and crb_marginalized are exact. The extra
/// param "eps_uncoupled" holds 1/J_eps,eps (coupling ignored).
std::string crb_curves_csv(const CrbCurvesConfig& cfg);

/// Balanced DR values measured on 27 Iridium satellites; features absent from that
/// measurement are 0.
FeatureArray measured_dr_values();

}  // namespace satfp
