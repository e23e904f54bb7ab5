#include "satfp/estimator.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "satfp/error.hpp"
#include "satfp/io.hpp"
#include "satfp/nelder_mead.hpp"
#include "satfp/rng.hpp"

namespace satfp {

namespace {

constexpr std::array<int, kNumParams> kPickOrder = {kAlpha3Re, kAlpha3Im, kPhi, kEps};

bool well_conditioned(const Eigen::Matrix4d& j, const std::vector<int>& idx, double tol) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd sub(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = j(idx[a], idx[b]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return ev[k - 1] > 0.0 && ev[0] > tol * ev[k - 1];
}

}  // namespace

void NlsOptions::check() const {
  if (max_iters < 1) throw ConfigError("NlsOptions: max_iters must be >= 1");
  if (!(x_tol > 0.0) || !(f_tol > 0.0)) throw ConfigError("NlsOptions: tolerances must be > 0");
  if (!(simplex_scale > 0.0)) throw ConfigError("NlsOptions: simplex_scale must be > 0");
  if (!init.vector().allFinite()) throw ConfigError("NlsOptions: init must be finite");
}

std::array<bool, kNumParams> identifiable_subset(std::span<const cplx> symbols, const HwiParams& p,
                                                 double tol) {
  const Fim f = fim_from_symbols(symbols, p, 1.0);
  std::array<bool, kNumParams> free{};
  std::vector<int> picked;
  for (int k : kPickOrder) {
    picked.push_back(k);
    if (well_conditioned(f.matrix, picked, tol)) {
      free[k] = true;
    } else {
      picked.pop_back();
    }
  }
  return free;
}

NlsResult nls_estimate(const Burst& b, cplx h_known, const NlsOptions& opts) {
  opts.check();
  if (b.known_symbols.empty()) throw ConfigError("nls_estimate: burst has no known symbols");
  if (b.samples.size() < b.known_symbols.size()) {
    throw ConfigError("nls_estimate: fewer samples than known symbols");
  }
  if (!std::isfinite(h_known.real()) || !std::isfinite(h_known.imag())) {
    throw ConfigError("nls_estimate: channel must be finite");
  }

  const std::span<const cplx> x(b.known_symbols);
  const std::span<const cplx> r(b.samples.data(), x.size());

  NlsResult res;
  res.free = opts.free ? *opts.free : identifiable_subset(x, opts.init, opts.identifiability_tol);

  std::vector<int> idx;
  for (int k = 0; k < kNumParams; ++k) {
    if (res.free[k]) idx.push_back(k);
  }
  const Eigen::Vector4d base = opts.init.vector();
  auto expand = [&](const Eigen::VectorXd& z) {
    Eigen::Vector4d t = base;
    for (std::size_t i = 0; i < idx.size(); ++i) t[idx[i]] = z[static_cast<Eigen::Index>(i)];
    return t;
  };
  auto cost = [&](const Eigen::VectorXd& z) {
    const HwiParams p = HwiParams::from_vector(expand(z));
    double s = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) s += std::norm(r[n] - h_known * apply_hwi(x[n], p));
    return s;
  };

  const auto k = static_cast<Eigen::Index>(idx.size());
  Eigen::VectorXd z0(k);
  for (Eigen::Index i = 0; i < k; ++i) z0[i] = base[idx[static_cast<std::size_t>(i)]];
  const Eigen::VectorXd step = Eigen::VectorXd::Constant(k, opts.simplex_scale);

  NelderMeadOptions nm;
  nm.max_iters = opts.max_iters;
  nm.x_tol = opts.x_tol;
  nm.f_tol = opts.f_tol;
  auto first = nelder_mead(cost, z0, step, nm);
  // One restart from the converged point with a fresh simplex.
  auto second = nelder_mead(cost, first.x, step, nm);

  const auto& best = second.f <= first.f ? second : first;
  res.estimate = HwiParams::from_vector(expand(best.x));
  res.cost = best.f;
  res.iterations = first.iterations + second.iterations;
  res.converged = first.converged && second.converged;
  return res;
}

const McRow& McReport::row(double snr_db, int param) const {
  for (const auto& r : rows) {
    if (r.snr_db == snr_db && r.param == param) return r;
  }
  throw ConfigError("McReport: no row for the requested SNR/parameter");
}

McReport mc_crb_validation(const McConfig& cfg) {
  if (cfg.n < 1) throw ConfigError("mc: n must be >= 1");
  if (cfg.n_trials < 2) throw ConfigError("mc: n_trials must be >= 2");
  if (cfg.snr_grid_db.empty()) throw ConfigError("mc: empty SNR grid");
  for (double s : cfg.snr_grid_db) {
    if (!std::isfinite(s)) throw ConfigError("mc: SNR grid values must be finite");
  }
  if (!(cfg.init_rel >= 0.0) || !(cfg.init_floor >= 0.0)) {
    throw ConfigError("mc: init perturbation must be non-negative");
  }

  McReport rep;
  rep.modulation = cfg.constellation.name;
  rep.truth = cfg.truth;
  rep.n = cfg.n;
  const Eigen::Vector4d truth = cfg.truth.vector();
  const Moments mom = moments(cfg.constellation);

  for (std::size_t s = 0; s < cfg.snr_grid_db.size(); ++s) {
    const double snr_db = cfg.snr_grid_db[s];
    const double gamma = std::pow(10.0, snr_db / 10.0);
    const std::uint64_t snr_seed = derive_seed(cfg.seed, 100 + s);
    ChannelConfig ch;
    ch.snr_db = snr_db;

    Eigen::Vector4d sq_err = Eigen::Vector4d::Zero();
    std::array<int, kNumParams> free_count{};
    int nonconverged = 0;
    for (int t = 0; t < cfg.n_trials; ++t) {
      const auto tt = static_cast<std::uint64_t>(t);
      const auto symbols = random_symbols(cfg.constellation, static_cast<std::size_t>(cfg.n),
                                          derive_seed(snr_seed, 1, tt));
      const Burst b = synthesize_burst(symbols, cfg.truth, ch, derive_seed(snr_seed, 2, tt));

      Rng rng(derive_seed(snr_seed, 3, tt));
      std::normal_distribution<double> nd(0.0, 1.0);
      Eigen::Vector4d init;
      for (int k = 0; k < kNumParams; ++k) {
        init[k] = truth[k] + (cfg.init_rel * std::abs(truth[k]) + cfg.init_floor) * nd(rng);
      }
      NlsOptions opts;
      opts.init = HwiParams::from_vector(init);
      opts.max_iters = cfg.max_iters;
      const NlsResult est = nls_estimate(b, ch.h, opts);
      if (!est.converged) ++nonconverged;
      const Eigen::Vector4d e = est.estimate.vector() - truth;
      sq_err += e.cwiseAbs2();
      for (int k = 0; k < kNumParams; ++k) free_count[k] += est.free[k] ? 1 : 0;
    }

    const Fim exact = fim_numerical(cfg.constellation, cfg.truth, cfg.n, gamma);
    const CrbReport exact_rep = crb_report(exact);
    const CrbReport closed_rep = crb_report(fim_closed_form(mom, cfg.truth, cfg.n, gamma));
    std::vector<int> fitted;
    for (int k = 0; k < kNumParams; ++k) {
      if (free_count[k] == cfg.n_trials) fitted.push_back(k);
    }

    for (int k = 0; k < kNumParams; ++k) {
      McRow row;
      row.snr_db = snr_db;
      row.param = k;
      row.mse = sq_err[k] / cfg.n_trials;
      row.n_trials = cfg.n_trials;
      row.n_nonconverged = nonconverged;
      row.crb_closed_form = closed_rep.crb[k];
      const bool fitted_k = free_count[k] == cfg.n_trials;
      if (exact_rep.rank == kNumParams) {
        row.crb = exact_rep.crb[k];
        row.crb_kind = "exact";
      } else if (fitted_k) {
        row.crb = sub_block_crb(exact, fitted, k);
        row.crb_kind = "sub_block";
      } else {
        row.crb_kind = "unbounded";
      }
      if (row.crb.bounded()) row.ratio = row.mse / row.crb.value();
      if (free_count[k] == 0) {
        row.status = "unidentifiable_held_at_init";
      } else if (!fitted_k) {
        row.status = "warn_mixed_subset";
      } else {
        row.status = nonconverged > 0 ? "warn_nonconverged" : "ok";
      }
      rep.rows.push_back(row);
    }
  }
  return rep;
}

std::string mc_report_csv(const McReport& r) {
  auto crb_str = [](const CrbBound& c) { return c.bounded() ? format_double(c.value()) : "inf"; };
  std::ostringstream os;
  os << "snr_db,param,mse,crb,ratio,n_trials,status,crb_kind,crb_closed_form,n_nonconverged\n";
  for (const auto& row : r.rows) {
    os << format_double(row.snr_db) << ',' << kParamNames[row.param] << ','
       << format_double(row.mse) << ',' << crb_str(row.crb) << ','
       << (row.ratio ? format_double(*row.ratio) : "") << ',' << row.n_trials << ','
       << row.status << ',' << row.crb_kind << ',' << crb_str(row.crb_closed_form) << ','
       << row.n_nonconverged << '\n';
  }
  return os.str();
}

}  // namespace satfp
