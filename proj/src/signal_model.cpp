#include "satfp/signal_model.hpp"

#include <cmath>
#include <numbers>

#include "satfp/error.hpp"
#include "satfp/rng.hpp"

namespace satfp {

BpskCollapse bpsk_collapse(const HwiParams& p) {
  BpskCollapse out;
  const double gain = 1.0 + p.eps;
  out.kappa = cplx(1.0, gain * std::sin(p.phi));
  out.c = bpsk_gain(p);
  out.xi1 = p.alpha3.real();
  out.xi2 = gain * std::sin(p.phi) + p.alpha3.imag();
  out.null_basis[0] = Vector4<double>(1.0, 0.0, 0.0, -p.phi);
  out.null_basis[1] = Vector4<double>(0.0, 1.0, 0.0, -gain);
  return out;
}

double ChannelConfig::noise_variance() const {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  const double gamma = std::pow(10.0, snr_db / 10.0);
  const double sigma2 = std::norm(h) / gamma;
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw ConfigError("channel: |h|^2 / gamma must be positive and finite");
  }
  return sigma2;
}

Burst synthesize_burst(std::span<const cplx> symbols, const HwiParams& p, const ChannelConfig& ch,
                       std::uint64_t seed) {
  if (symbols.empty()) throw ConfigError("synthesize_burst: empty symbol list");
  Rng rng(seed);
  const double sigma2 = ch.noise_variance();

  cplx h = ch.h;
  if (ch.rician_k_db) {
    const double k = std::pow(10.0, *ch.rician_k_db / 10.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    const cplx los = std::polar(std::sqrt(k / (k + 1.0)), phase(rng));
    const cplx scatter = complex_normal(rng, 1.0 / (k + 1.0));
    h = std::abs(ch.h) * (los + scatter);
  }
  if (ch.random_carrier_phase) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    h *= std::polar(1.0, phase(rng));
  }

  Burst b;
  b.known_symbols.assign(symbols.begin(), symbols.end());
  b.samples.resize(symbols.size());
  for (std::size_t n = 0; n < symbols.size(); ++n) {
    cplx r = h * apply_hwi(symbols[n], p);
    if (ch.cfo != 0.0) r *= std::polar(1.0, ch.cfo * static_cast<double>(n));
    if (sigma2 > 0.0) r += complex_normal(rng, sigma2);
    b.samples[n] = r;
  }
  b.meta.truth = p;
  b.meta.channel = ch;
  b.meta.h_realized = h;
  b.meta.sigma2 = sigma2;
  b.meta.seed = seed;
  return b;
}

std::vector<cplx> iridium_known_symbols() {
  std::vector<cplx> syms(64, cplx{1.0, 0.0});
  constexpr unsigned kUniqueWord = 0x789;
  for (int bit = 11; bit >= 0; --bit) {
    syms.emplace_back(((kUniqueWord >> bit) & 1U) ? -1.0 : 1.0, 0.0);
  }
  return syms;
}

std::vector<cplx> random_symbols(const Constellation& c, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, c.points.size() - 1);
  std::vector<cplx> out(n);
  for (auto& x : out) x = c.points[pick(rng)];
  return out;
}

std::vector<Satellite> generate_fleet(int n_sats, const FleetSpread& s, std::uint64_t seed) {
  if (n_sats < 2) throw ConfigError("generate_fleet: need at least 2 satellites");
  if (s.eps_lo > s.eps_hi || s.phi_lo > s.phi_hi || s.alpha3_mag_lo > s.alpha3_mag_hi ||
      s.alpha3_arg_lo > s.alpha3_arg_hi) {
    throw ConfigError("generate_fleet: degenerate range (lo > hi)");
  }
  Rng rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  std::vector<Satellite> fleet;
  fleet.reserve(static_cast<std::size_t>(n_sats));
  for (int i = 0; i < n_sats; ++i) {
    HwiParams p;
    p.eps = uniform(s.eps_lo, s.eps_hi);
    p.phi = uniform(s.phi_lo, s.phi_hi);
    const double mag = uniform(s.alpha3_mag_lo, s.alpha3_mag_hi);
    const double arg = uniform(s.alpha3_arg_lo, s.alpha3_arg_hi);
    p.alpha3 = std::polar(mag, arg);
    fleet.push_back({i, p});
  }
  return fleet;
}

}  // namespace satfp
