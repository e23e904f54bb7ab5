#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "satfp/constellation.hpp"
#include "satfp/fim.hpp"
#include "satfp/signal_model.hpp"

namespace satfp {

struct NlsOptions {
  int max_iters = 5000;
  double x_tol = 1e-10;
  double f_tol = 1e-14;
  HwiParams init;
  double simplex_scale = 0.01;
  /// Parameters to fit; the rest stay at init. Unset: chosen automatically so
  /// that the fitted sub-block of the symbol FIM at init is well conditioned.
  std::optional<std::array<bool, kNumParams>> free;
  /// Conditioning threshold (lambda_min / lambda_max) for the automatic choice.
  double identifiability_tol = 1e-8;

  void check() const;
};

struct NlsResult {
  HwiParams estimate;
  std::array<bool, kNumParams> free{};
  bool converged = false;
  int iterations = 0;
  double cost = 0.0;
};

/// Least-squares fit of sum |r(n) - h f(theta; x(n))|^2 over the free parameters.
NlsResult nls_estimate(const Burst& b, cplx h_known, const NlsOptions& opts);

/// Greedy pick in the order (Re a3, Im a3, phi, eps), keeping a parameter only if
/// the sub-FIM of everything picked so far stays well conditioned.
std::array<bool, kNumParams> identifiable_subset(std::span<const cplx> symbols, const HwiParams& p,
                                                 double tol = 1e-8);

struct McConfig {
  Constellation constellation;
  HwiParams truth;
  std::vector<double> snr_grid_db;
  int n = 76;
  int n_trials = 300;
  std::uint64_t seed = 1;
  /// Oracle init: truth + N(0, (init_rel |truth_i| + init_floor)^2).
  double init_rel = 0.1;
  double init_floor = 1e-3;
  int max_iters = 5000;
};

struct McRow {
  double snr_db = 0.0;
  int param = 0;
  double mse = 0.0;
  /// Exact bound at truth; PA sub-block bound for the fitted parameters when the
  /// full FIM is singular; unbounded for parameters that cannot be estimated.
  CrbBound crb = CrbBound::unbounded();
  std::string crb_kind;
  /// Small-impairment closed-form bound, for comparison.
  CrbBound crb_closed_form = CrbBound::unbounded();
  std::optional<double> ratio;
  int n_trials = 0;
  int n_nonconverged = 0;
  std::string status;
};

struct McReport {
  std::string modulation;
  HwiParams truth;
  int n = 0;
  std::vector<McRow> rows;

  const McRow& row(double snr_db, int param) const;
};

McReport mc_crb_validation(const McConfig& cfg);

/// Columns: snr_db,param,mse,crb,ratio,n_trials,status,crb_kind,crb_closed_form,n_nonconverged
std::string mc_report_csv(const McReport& r);

}  // namespace satfp
