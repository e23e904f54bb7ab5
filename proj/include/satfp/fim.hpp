#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "satfp/constellation.hpp"
#include "satfp/signal_model.hpp"

namespace satfp {

enum class FimSource { ClosedForm, NumericalMoment, NumericalSum, FiniteDifference };

const char* fim_source_name(FimSource s);

/// Fisher information for theta = [eps, phi, Re alpha3, Im alpha3].
struct Fim {
  Eigen::Matrix4d matrix = Eigen::Matrix4d::Zero();
  HwiParams operating_point;
  int n_symbols = 0;
  double snr_linear = 0.0;
  FimSource source = FimSource::ClosedForm;
};

/// Throws NumericalError unless the matrix is finite, symmetric (1e-10 relative)
/// and PSD (eigenvalues >= -1e-8 lambda_max).
void validate(const Fim& f);

/// A Cramer-Rao bound that may be unbounded (parameter not identifiable).
class CrbBound {
public:
  static CrbBound of(double v) { return CrbBound(true, v); }
  static CrbBound unbounded() { return CrbBound(false, 0.0); }

  bool bounded() const { return bounded_; }
  /// Throws NumericalError when unbounded.
  double value() const;

private:
  CrbBound(bool b, double v) : bounded_(b), value_(v) {}
  bool bounded_;
  double value_;
};

struct CrbReport {
  std::array<CrbBound, kNumParams> crb{CrbBound::unbounded(), CrbBound::unbounded(),
                                        CrbBound::unbounded(), CrbBound::unbounded()};
  /// Diagonal of the Moore-Penrose pseudo-inverse (equals crb when full rank).
  Eigen::Vector4d pinv_diag = Eigen::Vector4d::Zero();
  Eigen::Vector4d eigenvalues = Eigen::Vector4d::Zero();
  int rank = 0;
  std::vector<Eigen::Vector4d> null_basis;
  /// lambda_max / lambda_min; +inf when rank-deficient.
  double condition_number = 0.0;
  /// Normalized correlation rho_ij; 0 where a diagonal entry vanishes.
  Eigen::Matrix4d coupling = Eigen::Matrix4d::Identity();
};

struct DrEntry {
  double value = 0.0;
  /// Set when the parameter's CRB is unbounded; value is then 0 by convention.
  bool unidentifiable = false;
};

struct DiscriminationResult {
  double d_squared = 0.0;
  double d = 0.0;
  double pe_star = 0.5;
  std::array<DrEntry, kNumParams> per_param_dr{};
};

/// Small-impairment block form 2 N gamma [[J_IQ, J_x], [J_x^T, J_PA]].
Fim fim_closed_form(const Moments& m, const HwiParams& p, int n, double gamma);

enum class NumericalMode { Moment, FiniteDifference };

/// Exact FIM of the full nonlinear model, averaged over a uniform alphabet and
/// scaled by N. Moment mode uses analytic sensitivities; FiniteDifference uses
/// central differences with the given step (must lie in [1e-6, 1e-4]).
Fim fim_numerical(const Constellation& c, const HwiParams& p, int n, double gamma,
                  NumericalMode mode = NumericalMode::Moment, double step = 1e-5);

/// Exact FIM for one specific known-symbol sequence.
Fim fim_from_symbols(std::span<const cplx> symbols, const HwiParams& p, double gamma);

CrbReport crb_report(const Fim& f, double rank_tol = 1e-9, double null_projection_tol = 1e-9);

/// |J_ij| / sqrt(J_ii J_jj). Throws NumericalError on a zero diagonal entry.
double coupling_rho(const Fim& f, int i, int j);

/// [J^-1]_ii J_ii: CRB inflation caused by coupling to the other parameters.
double coupling_inflation(const Fim& f, int i);

/// Inverse of a principal sub-block (other parameters treated as known).
CrbBound sub_block_crb(const Fim& f, std::span<const int> params, int which);

/// Channel as nuisance: joint FIM over (theta, Re h, Im h) and its Schur complement.
struct MarginalizedFim {
  Eigen::Matrix<double, 6, 6> joint;
  Fim known_h;
  Fim effective;
};

MarginalizedFim marginalize_channel(const Constellation& c, const HwiParams& p, int n,
                                    double gamma);

/// J_aa - J_ab J_bb^-1 J_ba where the first `keep` rows/cols form block a.
Eigen::MatrixXd schur_complement(const Eigen::MatrixXd& joint, int keep);

/// CRB(unknown h) / CRB(known h) for the listed parameters, with every other
/// element of theta held known. Entries are unbounded if the marginal FIM is singular.
std::vector<CrbBound> channel_crb_inflation(const Constellation& c, const HwiParams& p, int n,
                                            double gamma, std::span<const int> params,
                                            double rank_tol = 1e-9);

/// Gaussian tail probability Q(x).
double q_function(double x);

DiscriminationResult discrimination(const HwiParams& a, const HwiParams& b, const Fim& f,
                                    double rank_tol = 1e-9);

/// Real-inner-product correlation between the alpha3 and a hypothetical alpha5
/// sensitivity (|u|^2 u vs |u|^4 u) over the alphabet.
double alpha5_confounding(const Constellation& c, const HwiParams& p);

}  // namespace satfp
