#include <doctest.h>

#include <cmath>
#include <numbers>

#include "satfp/error.hpp"
#include "satfp/estimator.hpp"
#include "satfp/nelder_mead.hpp"

using namespace satfp;

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
const HwiParams kTruth{0.03, 2 * kDeg, {0.02, 0.01}};
}  // namespace

TEST_CASE("Nelder-Mead minimizes Rosenbrock") {
  auto f = [](const Eigen::VectorXd& x) {
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  NelderMeadOptions o;
  o.max_iters = 20000;
  const auto r = nelder_mead(f, Eigen::Vector2d(-1.2, 1.0), Eigen::Vector2d(0.1, 0.1), o);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("noise-free burst with init at truth returns truth") {
  const auto sym = random_symbols(make_constellation(Modulation::QPSK), 76, 4);
  const auto b = synthesize_burst(sym, kTruth, ChannelConfig{}, 0);
  NlsOptions o;
  o.init = kTruth;
  const auto r = nls_estimate(b, cplx(1, 0), o);
  CHECK((r.estimate.vector() - kTruth.vector()).cwiseAbs().maxCoeff() <= o.x_tol);
  CHECK(r.cost < 1e-20);
}

TEST_CASE("noise-free burst from a perturbed init converges to truth") {
  const auto sym = random_symbols(make_constellation(Modulation::QAM16), 76, 5);
  ChannelConfig ch;
  ch.h = {0.6, -0.3};
  const auto b = synthesize_burst(sym, kTruth, ch, 0);
  NlsOptions o;
  o.init = HwiParams{0.025, 2.5 * kDeg, {0.018, 0.013}};
  const auto r = nls_estimate(b, ch.h, o);
  CHECK((r.estimate.vector() - kTruth.vector()).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("identifiable subset") {
  const auto bp = random_symbols(make_constellation(Modulation::BPSK), 76, 1);
  const auto fb = identifiable_subset(bp, kTruth);
  CHECK_FALSE(fb[kEps]);
  CHECK_FALSE(fb[kPhi]);
  CHECK(fb[kAlpha3Re]);
  CHECK(fb[kAlpha3Im]);
  const auto qp = random_symbols(make_constellation(Modulation::QPSK), 76, 1);
  const auto fq = identifiable_subset(qp, kTruth);
  for (bool v : fq) CHECK(v);
}

TEST_CASE("options are validated") {
  const auto sym = random_symbols(make_constellation(Modulation::QPSK), 8, 4);
  auto b = synthesize_burst(sym, kTruth, ChannelConfig{}, 0);
  NlsOptions o;
  o.max_iters = 0;
  CHECK_THROWS_AS(nls_estimate(b, cplx(1, 0), o), ConfigError);
  o = NlsOptions{};
  CHECK_THROWS_AS(nls_estimate(b, cplx(NAN, 0), o), ConfigError);
  b.known_symbols.clear();
  CHECK_THROWS_AS(nls_estimate(b, cplx(1, 0), o), ConfigError);
}

TEST_CASE("Monte Carlo harness is deterministic and reports shape") {
  McConfig cfg;
  cfg.constellation = make_constellation(Modulation::QPSK);
  cfg.truth = kTruth;
  cfg.snr_grid_db = {20.0, 30.0};
  cfg.n_trials = 20;
  cfg.seed = 3;
  const auto a = mc_crb_validation(cfg);
  const auto b = mc_crb_validation(cfg);
  CHECK(mc_report_csv(a) == mc_report_csv(b));
  CHECK(a.rows.size() == 8);
  for (const auto& r : a.rows) {
    CHECK(r.mse >= 0.0);
    CHECK(r.n_trials == 20);
    CHECK(r.crb_kind == "exact");
  }
  cfg.snr_grid_db = {};
  CHECK_THROWS_AS(mc_crb_validation(cfg), ConfigError);
}

TEST_CASE("doubling N halves the MSE of identifiable parameters") {
  McConfig cfg;
  cfg.constellation = make_constellation(Modulation::QPSK);
  cfg.truth = kTruth;
  cfg.snr_grid_db = {30.0};
  cfg.n_trials = 300;
  cfg.seed = 1;
  cfg.n = 76;
  const auto a = mc_crb_validation(cfg);
  cfg.n = 152;
  const auto b = mc_crb_validation(cfg);
  for (int k = 0; k < kNumParams; ++k) {
    const double ratio = a.row(30.0, k).mse / b.row(30.0, k).mse;
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.3));
    // Never below the bound by more than 3 Monte Carlo standard errors
    // (sd of an MSE over n trials ~ MSE sqrt(2/n) for Gaussian errors).
    const auto& r = a.row(30.0, k);
    CHECK(r.mse >= r.crb.value() * (1.0 - 3.0 * std::sqrt(2.0 / cfg.n_trials)));
  }
}

TEST_CASE("BPSK: held parameters are reported as unidentifiable") {
  McConfig cfg;
  cfg.constellation = make_constellation(Modulation::BPSK);
  cfg.truth = kTruth;
  cfg.snr_grid_db = {10.0};
  cfg.n_trials = 20;
  const auto r = mc_crb_validation(cfg);
  CHECK(r.row(10.0, kEps).status == "unidentifiable_held_at_init");
  CHECK_FALSE(r.row(10.0, kEps).crb.bounded());
  CHECK(r.row(10.0, kAlpha3Re).crb_kind == "sub_block");
}
