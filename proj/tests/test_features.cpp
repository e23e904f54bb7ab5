#include <doctest.h>

#include <cmath>
#include <numbers>

#include "satfp/error.hpp"
#include "satfp/experiment.hpp"
#include "satfp/features.hpp"
#include "satfp/rng.hpp"
#include "satfp/stats.hpp"

using namespace satfp;

namespace {

Burst qam16_burst(const HwiParams& p, double snr_db, std::uint64_t seed, double cfo = 0.0) {
  const auto sym = random_symbols(make_constellation(Modulation::QAM16), 76, seed);
  ChannelConfig ch;
  ch.snr_db = snr_db;
  ch.cfo = cfo;
  return synthesize_burst(sym, p, ch, seed + 1);
}

}  // namespace

TEST_CASE("remove_cfo undoes a pure ramp") {
  std::vector<cplx> r(100);
  for (std::size_t n = 0; n < r.size(); ++n) r[n] = std::polar(1.0, 0.3 + 0.013 * n);
  const auto out = remove_cfo(r);
  CHECK(out.cfo_hat == doctest::Approx(0.013).epsilon(1e-12));
  for (const auto& z : out.samples) CHECK(std::arg(z * std::conj(out.samples[0])) == doctest::Approx(0.0).epsilon(1e-9));
  const auto same = remove_cfo(out.samples);
  CHECK(std::abs(same.cfo_hat) < 1e-12);
  std::vector<cplx> bad = {1.0, 0.0, 1.0, 1.0};
  CHECK_THROWS_AS(remove_cfo(bad), NumericalError);
  CHECK_THROWS_AS(remove_cfo(std::vector<cplx>{1.0, 1.0}), ConfigError);
}

TEST_CASE("CFO estimator variance matches the small-noise line-fit oracle") {
  // Phase noise of r^4 has variance ~ 16 sigma^2/2; dividing the slope by 4 gives
  // var(cfo_hat) ~ sigma^2 / (2 sum (t - tbar)^2).
  const int n = 76;
  const double sigma2 = 1e-3;
  double sxx = 0;
  for (int t = 0; t < n; ++t) sxx += std::pow(t - (n - 1) / 2.0, 2);
  const double oracle = sigma2 / (2 * sxx);
  const auto c = make_constellation(Modulation::QPSK);
  std::vector<double> err;
  for (int trial = 0; trial < 600; ++trial) {
    const auto sym = random_symbols(c, n, derive_seed(9, 1, trial));
    ChannelConfig ch;
    ch.snr_db = -10 * std::log10(sigma2);
    ch.cfo = 0.01;
    const auto b = synthesize_burst(sym, HwiParams{}, ch, derive_seed(9, 2, trial));
    err.push_back(remove_cfo(b.samples).cfo_hat - 0.01);
  }
  CHECK(std::abs(stats::mean(err)) < 4 * std::sqrt(oracle / err.size()));
  // Three standard errors of a variance estimate over 600 draws (~ sqrt(2/600)).
  CHECK(stats::variance(err) / oracle == doctest::Approx(1.0).epsilon(3 * std::sqrt(2.0 / 600)));
}

TEST_CASE("normalize_amplitude gives unit mean power") {
  const std::vector<cplx> r = {{3, 0}, {0, 4}, {1, 1}};
  const auto out = normalize_amplitude(r);
  double p = 0;
  for (auto z : out) p += std::norm(z);
  CHECK(p / 3 == doctest::Approx(1.0));
  CHECK(std::abs(out[1] / out[0] - r[1] / r[0]) < 1e-12);
}

TEST_CASE("noise-free ideal transmitter on a constant-modulus alphabet") {
  const auto sym = random_symbols(make_constellation(Modulation::QPSK), 76, 2);
  const auto b = synthesize_burst(sym, HwiParams{}, ChannelConfig{}, 0);
  const auto f = extract_features(b);
  CHECK(f.amp_var < 1e-20);
  CHECK(f.evm < 1e-12);
  CHECK(std::abs(f.iq_eps_hat) < 1e-12);
  CHECK(std::abs(f.iq_phi_hat) < 1e-12);
  CHECK(std::abs(f.cfo_hat) < 1e-12);
  CHECK((f.flags & kFlagAmpDegenerate) != 0);
  CHECK(f.amp_acf1 == 0.0);
}

TEST_CASE("IQ estimates track the injected imbalance") {
  const auto sym = random_symbols(make_constellation(Modulation::QPSK), 2000, 3);
  const HwiParams p{0.02, 0.015, {0, 0}};
  ChannelConfig ch;
  ch.h = std::polar(0.8, 1.1);
  PipelineConfig cfg;
  cfg.n_known = 2000;
  const auto f = extract_features(synthesize_burst(sym, p, ch, 0), cfg);
  // C ~ 2 K2 / K1 ~ -eps + j phi to first order.
  CHECK(f.iq_eps_hat == doctest::Approx(p.eps).epsilon(0.1));
  CHECK(f.iq_phi_hat == doctest::Approx(p.phi).epsilon(0.1));
}

TEST_CASE("features are invariant to a global complex scale") {
  const HwiParams p{0.03, 0.03, {0.02, -0.01}};
  const auto b = qam16_burst(p, 25, 11, 0.005);
  auto s = b;
  for (auto& z : s.samples) z *= std::polar(3.7, -2.2);
  const auto fa = extract_features(b).as_array();
  const auto fb = extract_features(s).as_array();
  for (int k = 0; k < kNumFeatures; ++k) {
    INFO(kFeatureNames[k]);
    CHECK(std::abs(fa[k] - fb[k]) <= 1e-9 * std::max(1.0, std::abs(fa[k])));
  }
}

TEST_CASE("feature extraction is deterministic") {
  const auto b = qam16_burst(HwiParams{0.01, 0.02, {0.03, 0}}, 15, 4);
  CHECK(extract_features(b).as_array() == extract_features(b).as_array());
}

TEST_CASE("amplitude variance grows with PA compression on 16QAM") {
  double prev = -1;
  for (double a : {0.0, 0.02, 0.04, 0.08}) {
    const auto f = extract_features(qam16_burst(HwiParams{0, 0, {a, 0}}, INFINITY, 5));
    CHECK(f.amp_var > prev);
    prev = f.amp_var;
  }
}

TEST_CASE("feature names and groups") {
  CHECK(feature_index("amp_var") == kAmpVar);
  CHECK(feature_index("pa_cross") == kPaCross);
  CHECK_THROWS_AS(feature_index("nope"), ConfigError);
  CHECK(feature_group(kAmpKurtosis) == FeatureGroup::PA);
  CHECK(feature_group(kPhaseAcf1) == FeatureGroup::Oscillator);
  CHECK(feature_group(kIqEps) == FeatureGroup::IQ);
  std::array<double, kNumFeatures> a{};
  for (int k = 0; k < kNumFeatures; ++k) a[k] = k + 0.5;
  CHECK(FeatureVector::from_array(a).as_array() == a);
}

TEST_CASE("feature table CSV round trip") {
  std::vector<FeatureRow> rows;
  for (int i = 0; i < 3; ++i) {
    FeatureRow r;
    r.satellite_id = 10 + i;
    r.burst_index = i;
    r.snr_db = 17.25 + i;
    r.features = extract_features(qam16_burst(HwiParams{0.01 * i, 0.01, {0.02, 0}}, 20, 30 + i));
    rows.push_back(r);
  }
  const auto back = parse_feature_table_csv(feature_table_csv(rows));
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].satellite_id == rows[i].satellite_id);
    CHECK(back[i].burst_index == rows[i].burst_index);
    CHECK(back[i].snr_db == rows[i].snr_db);
    CHECK(back[i].features.as_array() == rows[i].features.as_array());
  }
  CHECK_THROWS_AS(parse_feature_table_csv("a,b\n1,2\n"), ConfigError);
}

TEST_CASE("pipeline config is validated") {
  PipelineConfig c;
  c.percentile_lo = 96;
  CHECK_THROWS_AS(c.check(), ConfigError);
  c = PipelineConfig{};
  c.acf_lag = 0;
  CHECK_THROWS_AS(c.check(), ConfigError);
}
