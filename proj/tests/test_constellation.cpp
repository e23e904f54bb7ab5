#include <doctest.h>

#include <cmath>
#include <numbers>

#include "satfp/constellation.hpp"
#include "satfp/error.hpp"

using namespace satfp;

namespace {

// Brute-force moments of an arbitrary point list after unit-power scaling.
Moments brute(std::vector<cplx> pts) {
  double p = 0;
  for (auto& z : pts) p += std::norm(z);
  p /= pts.size();
  Moments m{};
  m.mu4 = 0;
  m.mu6 = 0;
  for (auto& z : pts) {
    z /= std::sqrt(p);
    m.mu20 += z * z;
    m.mu4 += std::pow(std::abs(z), 4);
    m.mu6 += std::pow(std::abs(z), 6);
  }
  const double n = static_cast<double>(pts.size());
  m.mu20 /= n;
  m.mu4 /= n;
  m.mu6 /= n;
  m.beta = 1 - std::norm(m.mu20);
  return m;
}

}  // namespace

TEST_CASE("built-in alphabets have unit power and expected beta") {
  for (auto k : {Modulation::BPSK, Modulation::SDPSK, Modulation::QPSK, Modulation::DQPSK,
                 Modulation::PSK8, Modulation::QAM16, Modulation::QAM64}) {
    const auto c = make_constellation(k);
    double p = 0;
    for (auto z : c.points) p += std::norm(z);
    CHECK(p / c.points.size() == doctest::Approx(1.0).epsilon(1e-12));
    const auto m = moments(c);
    const bool real = k == Modulation::BPSK || k == Modulation::SDPSK;
    CHECK(m.beta == doctest::Approx(real ? 0.0 : 1.0).epsilon(1e-12));
    CHECK(predicted_fim_rank(m) == (real ? 2 : 4));
  }
}

TEST_CASE("16QAM and 64QAM moments match a brute-force grid") {
  for (int side : {4, 8}) {
    std::vector<cplx> grid;
    for (int i = 0; i < side; ++i) {
      for (int q = 0; q < side; ++q) grid.emplace_back(2 * i - (side - 1), 2 * q - (side - 1));
    }
    const auto m = moments(make_constellation(side == 4 ? Modulation::QAM16 : Modulation::QAM64));
    const auto b = brute(grid);
    CHECK(m.mu4 == doctest::Approx(b.mu4).epsilon(1e-12));
    CHECK(m.mu6 == doctest::Approx(b.mu6).epsilon(1e-12));
    CHECK(std::abs(m.mu20) < 1e-12);
  }
  CHECK(moments(make_constellation(Modulation::QAM16)).mu4 == doctest::Approx(1.32));
}

TEST_CASE("custom alphabets are normalized and validated") {
  const auto c = make_custom_constellation({{3, 0}, {-3, 0}, {0, 3}, {0, -3}});
  CHECK(c.scale == doctest::Approx(1.0 / 3.0));
  CHECK(moments(c).beta == doctest::Approx(1.0));
  const auto j = constellation_from_json("[[1,0],[-1,0],[0,2]]");
  const auto b = brute({{1, 0}, {-1, 0}, {0, 2}});
  CHECK(moments(j).mu4 == doctest::Approx(b.mu4));
  CHECK(moments(j).mu20.real() == doctest::Approx(b.mu20.real()));
  CHECK_THROWS_AS(make_custom_constellation({}), ConfigError);
  CHECK_THROWS_AS(make_custom_constellation({{0, 0}}), ConfigError);
  CHECK_THROWS_AS(make_custom_constellation({{1, 0}, {1, 0}}), ConfigError);
  CHECK_THROWS_AS(constellation_from_json("{\"a\":1}"), ConfigError);
  CHECK_THROWS_AS(constellation_from_json("[[1,0],"), ConfigError);
}

TEST_CASE("names parse and print") {
  CHECK(parse_modulation("QPSK") == Modulation::QPSK);
  CHECK(parse_modulation("qam16") == Modulation::QAM16);
  CHECK(modulation_name(Modulation::PSK8) == "8psk");
  CHECK_THROWS_AS(parse_modulation("ook"), ConfigError);
}

TEST_CASE("directional sensitivities at theta = 0") {
  const auto m = moments(make_constellation(Modulation::BPSK));
  const auto d = directional_sensitivities(m, 0.0, 0.0);
  CHECK(d.beta_eps == doctest::Approx(0.0));
  CHECK(d.beta_phi == doctest::Approx(1.0));
  const auto q = directional_sensitivities(moments(make_constellation(Modulation::QPSK)), 0.0, 0.0);
  CHECK(q.beta_eps == doctest::Approx(0.5));
  CHECK(q.beta_phi == doctest::Approx(0.5));
}
