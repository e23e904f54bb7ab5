#include "satfp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "satfp/error.hpp"
#include "satfp/io.hpp"

namespace satfp {

namespace {

using nlohmann::json;

Eigen::MatrixXd orthonormal(const std::vector<Eigen::Vector4d>& v) {
  Eigen::MatrixXd m(4, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = v[i];
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(4, m.cols());
}

std::string crb_str(const CrbBound& c) { return c.bounded() ? format_double(c.value()) : "inf"; }

json crb_json(const CrbBound& c) { return c.bounded() ? json(c.value()) : json("inf"); }

}  // namespace

double subspace_angle_deg(const std::vector<Eigen::Vector4d>& a,
                          const std::vector<Eigen::Vector4d>& b) {
  if (a.empty() || b.empty() || a.size() != b.size()) {
    throw ConfigError("subspace_angle_deg: bases must be non-empty and of equal dimension");
  }
  const Eigen::MatrixXd qa = orthonormal(a);
  const Eigen::MatrixXd qb = orthonormal(b);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(qa.transpose() * qb);
  const double smin = std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
  return std::acos(smin) * 180.0 / std::numbers::pi;
}

IdentifiabilityEntry identifiability_analysis(const Constellation& c, const HwiParams& theta, int n,
                                              double snr_db) {
  IdentifiabilityEntry e;
  e.modulation = c.name;
  e.mom = moments(c);
  e.predicted_rank = predicted_fim_rank(e.mom);
  const double gamma = std::pow(10.0, snr_db / 10.0);
  const Fim f = fim_numerical(c, theta, n, gamma);
  validate(f);
  e.report = crb_report(f);

  Eigen::Matrix2d sub;
  sub << f.matrix(kPhi, kPhi), f.matrix(kPhi, kAlpha3Im), f.matrix(kAlpha3Im, kPhi),
      f.matrix(kAlpha3Im, kAlpha3Im);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(sub, Eigen::EigenvaluesOnly);
  e.phi_a3im_eig_ratio = es.eigenvalues()[0] > 0.0
                             ? es.eigenvalues()[1] / es.eigenvalues()[0]
                             : std::numeric_limits<double>::infinity();
  try {
    e.rho_phi_a3im = coupling_rho(f, kPhi, kAlpha3Im);
    e.rho_eps_a3re = coupling_rho(f, kEps, kAlpha3Re);
  } catch (const NumericalError&) {
  }
  if (e.report.rank == 2 && e.mom.beta < 1e-12) {
    const auto col = bpsk_collapse(theta);
    e.collapse_angle_deg =
        subspace_angle_deg(e.report.null_basis, {col.null_basis[0], col.null_basis[1]});
  }
  const std::array<int, 2> iq = {kEps, kPhi};
  e.iq_channel_inflation = channel_crb_inflation(c, theta, n, gamma, iq);
  return e;
}

std::string identifiability_json(const std::vector<IdentifiabilityEntry>& entries) {
  json out = json::array();
  for (const auto& e : entries) {
    json crb = json::object();
    json nulls = json::array();
    for (int k = 0; k < kNumParams; ++k) crb[kParamNames[k]] = crb_json(e.report.crb[k]);
    for (const auto& v : e.report.null_basis) nulls.push_back({v[0], v[1], v[2], v[3]});
    json infl = json::array();
    for (const auto& b : e.iq_channel_inflation) infl.push_back(crb_json(b));
    json coupling = json::array();
    for (int i = 0; i < kNumParams; ++i) {
      coupling.push_back({e.report.coupling(i, 0), e.report.coupling(i, 1), e.report.coupling(i, 2),
                          e.report.coupling(i, 3)});
    }
    out.push_back({
        {"modulation", e.modulation},
        {"beta", e.mom.beta},
        {"predicted_rank", e.predicted_rank},
        {"rank", e.report.rank},
        {"eigenvalues",
         {e.report.eigenvalues[0], e.report.eigenvalues[1], e.report.eigenvalues[2], e.report.eigenvalues[3]}},
        {"condition_number",
         std::isfinite(e.report.condition_number) ? json(e.report.condition_number) : json("inf")},
        {"null_basis", nulls},
        {"crb", crb},
        {"coupling", coupling},
        {"phi_alpha3_im_eigen_ratio",
         std::isfinite(e.phi_a3im_eig_ratio) ? json(e.phi_a3im_eig_ratio) : json("inf")},
        {"rho_phi_alpha3_im", e.rho_phi_a3im ? json(*e.rho_phi_a3im) : json(nullptr)},
        {"rho_eps_alpha3_re", e.rho_eps_a3re ? json(*e.rho_eps_a3re) : json(nullptr)},
        {"collapse_null_angle_deg", e.collapse_angle_deg ? json(*e.collapse_angle_deg) : json(nullptr)},
        {"iq_channel_inflation", infl},
    });
  }
  return out.dump(2) + "\n";
}

std::string moments_csv(const std::vector<Constellation>& cs) {
  std::ostringstream os;
  os << "constellation,mu20_re,mu20_im,beta,mu4,mu6,predicted_rank\n";
  for (const auto& c : cs) {
    const auto m = moments(c);
    os << c.name << ',' << format_double(m.mu20.real()) << ',' << format_double(m.mu20.imag())
       << ',' << format_double(m.beta) << ',' << format_double(m.mu4) << ','
       << format_double(m.mu6) << ',' << predicted_fim_rank(m) << '\n';
  }
  return os.str();
}

std::string crb_curves_csv(const CrbCurvesConfig& cfg) {
  std::ostringstream os;
  os << "modulation,snr_db,n,param,crb,crb_known_h,crb_marginalized,rank\n";
  for (const auto& name : cfg.modulations) {
    const auto c = make_constellation(parse_modulation(name));
    const auto mom = moments(c);
    for (int n : cfg.n) {
      for (double snr : cfg.snr_db) {
        const double gamma = std::pow(10.0, snr / 10.0);
        const Fim closed = fim_closed_form(mom, cfg.theta, n, gamma);
        const auto marg = marginalize_channel(c, cfg.theta, n, gamma);
        const auto rc = crb_report(closed);
        const auto rk = crb_report(marg.known_h);
        const auto rm = crb_report(marg.effective);
        auto row = [&](const std::string& p, const std::string& a, const std::string& b,
                       const std::string& m) {
          os << c.name << ',' << format_double(snr) << ',' << n << ',' << p << ',' << a << ','
             << b << ',' << m << ',' << rk.rank << '\n';
        };
        for (int k = 0; k < kNumParams; ++k) {
          row(kParamNames[k], crb_str(rc.crb[k]), crb_str(rk.crb[k]), crb_str(rm.crb[k]));
        }
        auto inv = [](double v) { return v > 0.0 ? format_double(1.0 / v) : std::string("inf"); };
        row("eps_uncoupled", inv(closed.matrix(kEps, kEps)), inv(marg.known_h.matrix(kEps, kEps)),
            inv(marg.effective.matrix(kEps, kEps)));
      }
    }
  }
  return os.str();
}

FeatureArray measured_dr_values() {
  FeatureArray a{};
  a[kAmpVar] = 4.48;
  a[kAmpRange] = 4.29;
  a[kPhaseAcf1] = 2.40;
  a[kAmpAcf1] = 1.45;
  a[kAmpKurtosis] = 0.92;
  a[kEvm] = 0.86;
  a[kCfo] = 0.79;
  a[kIqEps] = 0.70;
  a[kIqPhi] = 0.69;
  a[kDcI] = 0.74;
  return a;
}

}  // namespace satfp
