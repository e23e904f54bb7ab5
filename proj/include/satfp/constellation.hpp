#pragma once

#include <complex>
#include <string>
#include <string_view>
#include <vector>

namespace satfp {

using cplx = std::complex<double>;

enum class Modulation { BPSK, SDPSK, QPSK, DQPSK, PSK8, QAM16, QAM64, Custom };

/// Unit-average-power symbol alphabet.
struct Constellation {
  Modulation kind = Modulation::Custom;
  std::vector<cplx> points;
  std::string name;
  /// Factor applied to the raw points to reach unit power (1 for built-ins).
  double scale = 1.0;
};

/// Uniform-average moments over the alphabet.
struct Moments {
  cplx mu20;       // E[x^2]
  double mu4 = 1;  // E[|x|^4]
  double mu6 = 1;  // E[|x|^6]
  double beta = 0; // 1 - |mu20|^2
};

struct DirectionalSensitivity {
  double beta_eps = 0;
  double beta_phi = 0;
  double j_epsphi = 0;
};

Constellation make_constellation(Modulation kind);

/// Normalizes the given points to unit average power. Throws ConfigError on an
/// empty list, zero power, or duplicate points.
Constellation make_custom_constellation(std::vector<cplx> points, std::string name = "custom");

/// Parses a JSON array of [re, im] pairs.
Constellation constellation_from_json(std::string_view json_text, std::string name = "custom");

Modulation parse_modulation(std::string_view name);
std::string_view modulation_name(Modulation kind);

Moments moments(const Constellation& c);

DirectionalSensitivity directional_sensitivities(const Moments& m, double eps, double phi);

/// FIM rank predicted from the identifiability factor alone (2 when beta = 0).
int predicted_fim_rank(const Moments& m, double tol = 1e-12);

}  // namespace satfp
