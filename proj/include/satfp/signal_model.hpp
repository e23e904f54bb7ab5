#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "satfp/constellation.hpp"

namespace satfp {

// Parameter ordering used by every 4-vector and 4x4 matrix in the library.
enum Param : int { kEps = 0, kPhi = 1, kAlpha3Re = 2, kAlpha3Im = 3 };
inline constexpr int kNumParams = 4;
inline constexpr std::array<const char*, kNumParams> kParamNames = {"eps", "phi", "alpha3_re",
                                                                    "alpha3_im"};

template <typename Scalar>
using Vector4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar>
using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;

/// Transmitter hardware impairments: the fingerprint theta.
template <typename Scalar>
struct HwiParamsT {
  Scalar eps{0};
  Scalar phi{0};
  std::complex<Scalar> alpha3{0, 0};

  Vector4<Scalar> vector() const { return {eps, phi, alpha3.real(), alpha3.imag()}; }

  static HwiParamsT from_vector(const Vector4<Scalar>& v) {
    return {v[kEps], v[kPhi], std::complex<Scalar>(v[kAlpha3Re], v[kAlpha3Im])};
  }

  /// Soft check for |eps|, |phi|, |alpha3| <= 0.2.
  bool small_impairment() const {
    using std::abs;
    return abs(eps) <= Scalar(0.2) && abs(phi) <= Scalar(0.2) && abs(alpha3) <= Scalar(0.2);
  }
};
using HwiParams = HwiParamsT<double>;

template <typename Scalar>
struct IqCoefficientsT {
  std::complex<Scalar> k1;
  std::complex<Scalar> k2;
};
using IqCoefficients = IqCoefficientsT<double>;

template <typename Scalar>
IqCoefficientsT<Scalar> iq_coefficients(const HwiParamsT<Scalar>& p) {
  const Scalar gain = Scalar(1) + p.eps;
  return {(Scalar(1) + gain * std::polar(Scalar(1), p.phi)) / Scalar(2),
          (Scalar(1) - gain * std::polar(Scalar(1), -p.phi)) / Scalar(2)};
}

/// Mixer output K1 x + K2 x*.
template <typename Scalar>
std::complex<Scalar> apply_iq(std::complex<Scalar> x, const IqCoefficientsT<Scalar>& k) {
  return k.k1 * x + k.k2 * std::conj(x);
}

/// Noise-free transmitter output before the channel: x_IQ + alpha3 |x_IQ|^2 x_IQ.
template <typename Scalar>
std::complex<Scalar> apply_hwi(std::complex<Scalar> x, const HwiParamsT<Scalar>& p) {
  const auto u = apply_iq(x, iq_coefficients(p));
  return u + p.alpha3 * std::norm(u) * u;
}

/// Exact partial derivatives of apply_hwi(x, p) with respect to theta.
template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, 4, 1> hwi_gradient(std::complex<Scalar> x,
                                                        const HwiParamsT<Scalar>& p) {
  using C = std::complex<Scalar>;
  const auto k = iq_coefficients(p);
  const C u = apply_iq(x, k);
  const Scalar gain = Scalar(1) + p.eps;
  const C ep = std::polar(Scalar(1), p.phi);
  const C em = std::conj(ep);
  const C j{0, 1};
  const C du_eps = ep / Scalar(2) * x - em / Scalar(2) * std::conj(x);
  const C du_phi = j * gain * ep / Scalar(2) * x + j * gain * em / Scalar(2) * std::conj(x);
  const Scalar pu = std::norm(u);
  auto through_pa = [&](const C& du) {
    const Scalar dpu = Scalar(2) * std::real(std::conj(u) * du);
    return du + p.alpha3 * (dpu * u + pu * du);
  };
  Eigen::Matrix<C, 4, 1> g;
  g << through_pa(du_eps), through_pa(du_phi), pu * u, j * pu * u;
  return g;
}

/// Collapse of the model onto a single complex gain for real-valued symbols.
struct BpskCollapse {
  cplx kappa;
  cplx c;
  double xi1 = 0;
  double xi2 = 0;
  std::array<Vector4<double>, 2> null_basis;
};

BpskCollapse bpsk_collapse(const HwiParams& p);

/// Effective scalar c(theta) = kappa (1 + alpha3 |kappa|^2).
template <typename Scalar>
std::complex<Scalar> bpsk_gain(const HwiParamsT<Scalar>& p) {
  const std::complex<Scalar> kappa(Scalar(1), (Scalar(1) + p.eps) * std::sin(p.phi));
  return kappa * (Scalar(1) + p.alpha3 * std::norm(kappa));
}

// ---------------------------------------------------------------------------
// Channel and burst synthesis

struct ChannelConfig {
  cplx h{1.0, 0.0};
  /// Mean SNR gamma = |h|^2 / sigma^2 in dB. +inf disables noise.
  double snr_db = std::numeric_limits<double>::infinity();
  /// When set, each burst draws h as LOS + scatter with this K-factor, scaled by |h|.
  std::optional<double> rician_k_db;
  /// Uniform random carrier phase per burst applied on top of h.
  bool random_carrier_phase = false;
  /// Linear phase ramp, radians per symbol.
  double cfo = 0.0;

  double noise_variance() const;
};

struct BurstMeta {
  std::int64_t satellite_id = -1;
  std::optional<HwiParams> truth;
  ChannelConfig channel;
  cplx h_realized{1.0, 0.0};
  double sigma2 = 0.0;
  std::uint64_t seed = 0;
  std::string modulation = "unknown";
};

struct Burst {
  std::vector<cplx> samples;
  std::vector<cplx> known_symbols;
  BurstMeta meta;

  std::size_t size() const { return samples.size(); }
};

/// r(n) = h apply_hwi(x(n)) e^{j cfo n} + w(n), w ~ CN(0, sigma^2).
Burst synthesize_burst(std::span<const cplx> symbols, const HwiParams& p, const ChannelConfig& ch,
                       std::uint64_t seed);

/// 64 preamble symbols (1+0j) followed by the 12-symbol BPSK unique word 0x789.
std::vector<cplx> iridium_known_symbols();

/// Uniform i.i.d. draws from the alphabet.
std::vector<cplx> random_symbols(const Constellation& c, std::size_t n, std::uint64_t seed);

struct FleetSpread {
  double eps_lo = 0.01;
  double eps_hi = 0.05;
  double phi_lo = 0.5 * 3.14159265358979323846 / 180.0;
  double phi_hi = 5.0 * 3.14159265358979323846 / 180.0;
  double alpha3_mag_lo = 0.02;
  double alpha3_mag_hi = 0.05;
  double alpha3_arg_lo = 0.0;
  double alpha3_arg_hi = 2.0 * 3.14159265358979323846;
};

struct Satellite {
  std::int64_t id = 0;
  HwiParams params;
};

std::vector<Satellite> generate_fleet(int n_sats, const FleetSpread& spread, std::uint64_t seed);

}  // namespace satfp
