#include <doctest.h>

#include <cmath>

#include "satfp/config.hpp"
#include "satfp/error.hpp"
#include "satfp/experiment.hpp"

using namespace satfp;

namespace {

ProtocolConfig small_protocol(BurstMode mode) {
  ProtocolConfig p;
  p.burst_mode = mode;
  p.n_messages = 20;
  p.n_bal = 10;
  p.n_dr_trials = 5;
  p.n_acc_grid = {1, 5, 20};
  return p;
}

}  // namespace

TEST_CASE("M2M4 SNR estimate on a constant-modulus burst") {
  const auto sym = random_symbols(make_constellation(Modulation::QPSK), 20000, 1);
  for (double snr_db : {5.0, 10.0, 20.0}) {
    ChannelConfig ch;
    ch.snr_db = snr_db;
    ch.h = std::polar(0.3, 0.4);
    const auto b = synthesize_burst(sym, HwiParams{}, ch, 2);
    CHECK(10 * std::log10(estimate_snr_m2m4(b.samples)) == doctest::Approx(snr_db).epsilon(0.03));
  }
}

TEST_CASE("default config survives a serialize/parse round trip") {
  AppConfig c;
  c.seed = 42;
  c.protocol.burst_mode = BurstMode::QpskPilots;
  c.protocol.rician_k_db.reset();
  c.mc_validate.truth.alpha3 = {0.01, -0.02};
  c.moments.custom_points = std::vector<cplx>{{1, 0}, {0, 2}};
  const auto text = serialize_config(c);
  const auto back = parse_config(text);
  CHECK(serialize_config(back) == text);
  CHECK(back.seed == 42);
  CHECK(back.protocol.burst_mode == BurstMode::QpskPilots);
  CHECK_FALSE(back.protocol.rician_k_db.has_value());
  CHECK(back.mc_validate.truth.alpha3 == cplx(0.01, -0.02));
}

TEST_CASE("config parsing rejects unknown keys and bad values") {
  CHECK_NOTHROW(parse_config("{}"));
  CHECK_THROWS_AS(parse_config(R"({"sed": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"protocol": {"n_msgs": 5}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"fleet": {"spread": {"eps": 1}}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"protocol": {"n_bal": 7}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"protocol": {"burst_mode": "ofdm"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"seed": "one"})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
}

TEST_CASE("burst modes parse") {
  CHECK(parse_burst_mode("iridium_preamble") == BurstMode::IridiumPreamble);
  CHECK(parse_burst_mode("qpsk_pilots") == BurstMode::QpskPilots);
  CHECK_THROWS_AS(parse_burst_mode("x"), ConfigError);
}

TEST_CASE("campaign simulation shape and determinism") {
  const auto fleet = generate_fleet(4, FleetSpread{}, 3);
  const auto p = small_protocol(BurstMode::IridiumPreamble);
  const auto a = simulate_campaign(fleet, p, 9);
  CHECK(a.size() == 4 * 20);
  CHECK(feature_table_csv(a) == feature_table_csv(simulate_campaign(fleet, p, 9)));
  CHECK(feature_table_csv(a) != feature_table_csv(simulate_campaign(fleet, p, 10)));
}

TEST_CASE("authentication experiment is deterministic and complete") {
  FleetConfig fleet;
  fleet.n_satellites = 6;
  const auto p = small_protocol(BurstMode::IridiumPreamble);
  const auto r = run_auth_experiment(fleet, p, 5);
  CHECK(auth_report_json(r) == auth_report_json(run_auth_experiment(fleet, p, 5)));
  CHECK(r.n_satellites == 6);
  CHECK(r.beta == doctest::Approx(0.0));
  CHECK(r.strategies.size() == default_strategies().size());
  for (const auto& s : r.strategies) {
    CHECK(s.auc >= 0.0);
    CHECK(s.auc <= 1.0);
    CHECK(s.auc_vs_nacc.size() == 3);
  }
  CHECK_THROWS(r.strategy("nope"));
  double sum = 0;
  for (double w : r.strategy("iwat_dr2").weights) sum += w;
  CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("pilot bursts with beta = 1 expose the IQ imbalance") {
  FleetConfig fleet;
  fleet.n_satellites = 12;
  auto p = small_protocol(BurstMode::IridiumPreamble);
  p.n_messages = 30;
  const auto r0 = run_auth_experiment(fleet, p, 1);
  p.burst_mode = BurstMode::QpskPilots;
  const auto r1 = run_auth_experiment(fleet, p, 1);
  CHECK(r1.beta == doctest::Approx(1.0));
  CHECK(r1.dr.entries[kIqEps].mean > 2.0 * r0.dr.entries[kIqEps].mean);
  CHECK(r1.strategy("iq_only").auc > r0.strategy("iq_only").auc);
}

TEST_CASE("DR override replaces the simulated table in the weights") {
  FleetConfig fleet;
  fleet.n_satellites = 5;
  auto p = small_protocol(BurstMode::IridiumPreamble);
  FeatureArray dr{};
  dr[kAmpVar] = 2.0;
  dr[kPhaseAcf1] = 1.0;
  p.dr_override = dr;
  const auto r = run_auth_experiment(fleet, p, 2);
  CHECK(r.dr_from_override);
  CHECK(r.strategy("iwat_dr2").weights[kAmpVar] == doctest::Approx(0.8));
  CHECK(r.strategy("iwat_dr2").weights[kPhaseAcf1] == doctest::Approx(0.2));
}
