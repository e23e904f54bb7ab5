#include "satfp/fim.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "satfp/error.hpp"

namespace satfp {

namespace {

using Grad = Eigen::Matrix<cplx, 4, 1>;

Eigen::Matrix4d outer_real(const Grad& g) { return (g.conjugate() * g.transpose()).real(); }

Grad finite_difference_gradient(cplx x, const HwiParams& p, double step) {
  Grad g;
  const Eigen::Vector4d theta = p.vector();
  for (int i = 0; i < kNumParams; ++i) {
    Eigen::Vector4d up = theta;
    Eigen::Vector4d dn = theta;
    up[i] += step;
    dn[i] -= step;
    g[i] = (apply_hwi(x, HwiParams::from_vector(up)) - apply_hwi(x, HwiParams::from_vector(dn))) /
           (2.0 * step);
  }
  return g;
}

void check_args(int n, double gamma) {
  if (n < 1) throw ConfigError("FIM: need N >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("FIM: gamma must be positive");
}

// Joint FIM over (theta, Re h, Im h) per unit N gamma, at h = 1.
Eigen::Matrix<double, 6, 6> joint_per_symbol(const Constellation& c, const HwiParams& p) {
  Eigen::Matrix<double, 6, 6> acc = Eigen::Matrix<double, 6, 6>::Zero();
  for (const auto& x : c.points) {
    Eigen::Matrix<cplx, 6, 1> g;
    g.head<4>() = hwi_gradient(x, p);
    const cplx y = apply_hwi(x, p);
    g[4] = y;
    g[5] = cplx(0, 1) * y;
    acc += (g.conjugate() * g.transpose()).real();
  }
  return acc / static_cast<double>(c.points.size());
}

}  // namespace

const char* fim_source_name(FimSource s) {
  switch (s) {
    case FimSource::ClosedForm: return "closed_form";
    case FimSource::NumericalMoment: return "numerical_moment";
    case FimSource::NumericalSum: return "numerical_sum";
    case FimSource::FiniteDifference: return "finite_difference";
  }
  return "unknown";
}

double CrbBound::value() const {
  if (!bounded_) throw NumericalError("CRB is unbounded (parameter not identifiable)");
  return value_;
}

void validate(const Fim& f) {
  if (!f.matrix.allFinite()) throw NumericalError("FIM has non-finite entries");
  const double scale = f.matrix.cwiseAbs().maxCoeff();
  if ((f.matrix - f.matrix.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw NumericalError("FIM is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(f.matrix, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if (ev[0] < -1e-8 * std::max(ev[3], 0.0)) throw NumericalError("FIM is not PSD");
}

Fim fim_closed_form(const Moments& m, const HwiParams& p, int n, double gamma) {
  check_args(n, gamma);
  const auto ds = directional_sensitivities(m, p.eps, p.phi);
  const double g1 = 1.0 + p.eps;
  const double c = std::cos(p.phi);
  const double s = std::sin(p.phi);

  Eigen::Matrix4d j;
  Eigen::Matrix2d iq;
  iq << ds.beta_eps, ds.j_epsphi, ds.j_epsphi, g1 * g1 * ds.beta_phi;
  Eigen::Matrix2d cross;
  cross << c, s, -g1 * s, g1 * c;
  cross *= m.mu4 / 2.0;
  j.topLeftCorner<2, 2>() = iq;
  j.topRightCorner<2, 2>() = cross;
  j.bottomLeftCorner<2, 2>() = cross.transpose();
  j.bottomRightCorner<2, 2>() = m.mu6 * Eigen::Matrix2d::Identity();

  return {2.0 * n * gamma * j, p, n, gamma, FimSource::ClosedForm};
}

Fim fim_numerical(const Constellation& c, const HwiParams& p, int n, double gamma,
                  NumericalMode mode, double step) {
  check_args(n, gamma);
  if (c.points.empty()) throw ConfigError("FIM: empty constellation");
  if (mode == NumericalMode::FiniteDifference && !(step >= 1e-6 && step <= 1e-4)) {
    throw ConfigError("FIM: finite-difference step must lie in [1e-6, 1e-4]");
  }
  Eigen::Matrix4d acc = Eigen::Matrix4d::Zero();
  for (const auto& x : c.points) {
    acc += outer_real(mode == NumericalMode::Moment ? hwi_gradient(x, p)
                                                    : finite_difference_gradient(x, p, step));
  }
  acc /= static_cast<double>(c.points.size());
  return {2.0 * n * gamma * acc, p, n, gamma,
          mode == NumericalMode::Moment ? FimSource::NumericalMoment
                                        : FimSource::FiniteDifference};
}

Fim fim_from_symbols(std::span<const cplx> symbols, const HwiParams& p, double gamma) {
  check_args(static_cast<int>(symbols.size()), gamma);
  Eigen::Matrix4d acc = Eigen::Matrix4d::Zero();
  for (const auto& x : symbols) acc += outer_real(hwi_gradient(x, p));
  return {2.0 * gamma * acc, p, static_cast<int>(symbols.size()), gamma, FimSource::NumericalSum};
}

CrbReport crb_report(const Fim& f, double rank_tol, double null_projection_tol) {
  if (!f.matrix.allFinite()) throw NumericalError("crb_report: non-finite FIM entries");
  CrbReport r;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(f.matrix);
  r.eigenvalues = es.eigenvalues();
  const double lmax = r.eigenvalues[3];
  const double cutoff = rank_tol * std::max(lmax, 0.0);

  Eigen::Vector4d inv = Eigen::Vector4d::Zero();
  for (int k = 0; k < kNumParams; ++k) {
    if (lmax > 0.0 && r.eigenvalues[k] > cutoff) {
      inv[k] = 1.0 / r.eigenvalues[k];
      ++r.rank;
    } else {
      r.null_basis.emplace_back(es.eigenvectors().col(k));
    }
  }
  const Eigen::Matrix4d pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  r.pinv_diag = pinv.diagonal();
  r.condition_number = r.rank == kNumParams ? lmax / r.eigenvalues[0]
                                            : std::numeric_limits<double>::infinity();

  for (int i = 0; i < kNumParams; ++i) {
    double proj = 0.0;
    for (const auto& v : r.null_basis) proj += v[i] * v[i];
    r.crb[i] = std::sqrt(proj) > null_projection_tol ? CrbBound::unbounded()
                                                     : CrbBound::of(r.pinv_diag[i]);
  }

  for (int i = 0; i < kNumParams; ++i) {
    for (int j = 0; j < kNumParams; ++j) {
      if (i == j) continue;
      const double den = std::sqrt(f.matrix(i, i) * f.matrix(j, j));
      r.coupling(i, j) = den > 0.0 ? std::min(1.0, std::abs(f.matrix(i, j)) / den) : 0.0;
    }
  }
  return r;
}

double coupling_rho(const Fim& f, int i, int j) {
  const double jii = f.matrix(i, i);
  const double jjj = f.matrix(j, j);
  if (!(jii > 0.0) || !(jjj > 0.0)) {
    throw NumericalError("coupling_rho: undefined coupling (zero FIM diagonal)");
  }
  return std::abs(f.matrix(i, j)) / std::sqrt(jii * jjj);
}

double coupling_inflation(const Fim& f, int i) {
  const auto rep = crb_report(f);
  if (rep.rank < kNumParams) throw NumericalError("coupling_inflation: rank-deficient FIM");
  return rep.crb[i].value() * f.matrix(i, i);
}

CrbBound sub_block_crb(const Fim& f, std::span<const int> params, int which) {
  const auto k = static_cast<Eigen::Index>(params.size());
  Eigen::MatrixXd sub(k, k);
  Eigen::Index pos = -1;
  for (Eigen::Index a = 0; a < k; ++a) {
    if (params[a] == which) pos = a;
    for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = f.matrix(params[a], params[b]);
  }
  if (pos < 0) throw ConfigError("sub_block_crb: parameter not in the sub-block");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
  const auto& ev = es.eigenvalues();
  if (!(ev[k - 1] > 0.0) || ev[0] <= 1e-9 * ev[k - 1]) return CrbBound::unbounded();
  return CrbBound::of(sub.inverse()(pos, pos));
}

Eigen::MatrixXd schur_complement(const Eigen::MatrixXd& joint, int keep) {
  const Eigen::Index n = joint.rows();
  const Eigen::Index m = n - keep;
  const Eigen::MatrixXd a = joint.topLeftCorner(keep, keep);
  const Eigen::MatrixXd b = joint.topRightCorner(keep, m);
  const Eigen::MatrixXd d = joint.bottomRightCorner(m, m);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d, Eigen::EigenvaluesOnly);
  if (ldlt.info() != Eigen::Success || !(es.eigenvalues()[0] > 1e-12 * es.eigenvalues()[m - 1])) {
    throw NumericalError("schur_complement: singular nuisance block");
  }
  Eigen::MatrixXd out = a - b * ldlt.solve(b.transpose());
  return (out + out.transpose()) / 2.0;
}

MarginalizedFim marginalize_channel(const Constellation& c, const HwiParams& p, int n,
                                    double gamma) {
  check_args(n, gamma);
  MarginalizedFim out;
  out.joint = 2.0 * n * gamma * joint_per_symbol(c, p);
  out.known_h = {out.joint.topLeftCorner<4, 4>(), p, n, gamma, FimSource::NumericalMoment};
  out.effective = {Eigen::Matrix4d(schur_complement(out.joint, 4)), p, n, gamma,
                   FimSource::NumericalMoment};
  return out;
}

std::vector<CrbBound> channel_crb_inflation(const Constellation& c, const HwiParams& p, int n,
                                            double gamma, std::span<const int> params,
                                            double rank_tol) {
  check_args(n, gamma);
  const auto full = (2.0 * n * gamma * joint_per_symbol(c, p)).eval();
  const auto k = static_cast<Eigen::Index>(params.size());
  std::vector<int> idx(params.begin(), params.end());
  idx.push_back(4);
  idx.push_back(5);
  Eigen::MatrixXd joint(k + 2, k + 2);
  for (Eigen::Index a = 0; a < k + 2; ++a) {
    for (Eigen::Index b = 0; b < k + 2; ++b) joint(a, b) = full(idx[a], idx[b]);
  }
  const Eigen::MatrixXd known = joint.topLeftCorner(k, k);
  const Eigen::MatrixXd eff = schur_complement(joint, static_cast<int>(k));

  auto inverse_diag = [rank_tol](const Eigen::MatrixXd& m) -> std::optional<Eigen::VectorXd> {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    if (!(ev[ev.size() - 1] > 0.0) || ev[0] <= rank_tol * ev[ev.size() - 1]) return std::nullopt;
    return Eigen::VectorXd(m.inverse().diagonal());
  };
  const auto known_diag = inverse_diag(known);
  const auto eff_diag = inverse_diag(eff);

  std::vector<CrbBound> out;
  for (Eigen::Index a = 0; a < k; ++a) {
    if (!known_diag || !eff_diag) {
      out.push_back(CrbBound::unbounded());
    } else {
      out.push_back(CrbBound::of((*eff_diag)[a] / (*known_diag)[a]));
    }
  }
  return out;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

DiscriminationResult discrimination(const HwiParams& a, const HwiParams& b, const Fim& f,
                                    double rank_tol) {
  const Eigen::Vector4d delta = a.vector() - b.vector();
  double d2 = delta.dot(f.matrix * delta);
  if (d2 < -1e-10) throw NumericalError("discrimination: negative d^2 (FIM not PSD)");
  d2 = std::max(d2, 0.0);

  DiscriminationResult r;
  r.d_squared = d2;
  r.d = std::sqrt(d2);
  r.pe_star = q_function(r.d / 2.0);
  const auto rep = crb_report(f, rank_tol);
  for (int i = 0; i < kNumParams; ++i) {
    if (!rep.crb[i].bounded()) {
      r.per_param_dr[i] = {0.0, true};
    } else {
      r.per_param_dr[i] = {std::abs(delta[i]) / std::sqrt(rep.crb[i].value()), false};
    }
  }
  return r;
}

double alpha5_confounding(const Constellation& c, const HwiParams& p) {
  const auto k = iq_coefficients(p);
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (const auto& x : c.points) {
    const cplx u = apply_iq(x, k);
    const double pu = std::norm(u);
    const cplx a = pu * u;
    const cplx b = pu * pu * u;
    ab += std::real(std::conj(a) * b);
    aa += std::norm(a);
    bb += std::norm(b);
  }
  return ab / std::sqrt(aa * bb);
}

}  // namespace satfp
