#include "satfp/constellation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "satfp/error.hpp"

namespace satfp {

namespace {

std::vector<cplx> square_qam(int side) {
  std::vector<cplx> pts;
  pts.reserve(static_cast<std::size_t>(side * side));
  for (int i = 0; i < side; ++i) {
    for (int q = 0; q < side; ++q) {
      pts.emplace_back(2.0 * i - (side - 1), 2.0 * q - (side - 1));
    }
  }
  return pts;
}

std::vector<cplx> psk(int order, double offset) {
  std::vector<cplx> pts;
  for (int k = 0; k < order; ++k) {
    pts.push_back(std::polar(1.0, offset + 2.0 * std::numbers::pi * k / order));
  }
  return pts;
}

double mean_power(const std::vector<cplx>& pts) {
  double acc = 0.0;
  for (const auto& p : pts) acc += std::norm(p);
  return acc / static_cast<double>(pts.size());
}

}  // namespace

Constellation make_custom_constellation(std::vector<cplx> points, std::string name) {
  if (points.empty()) throw ConfigError("invalid constellation: empty point list");
  for (const auto& p : points) {
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) {
      throw ConfigError("invalid constellation: non-finite point");
    }
  }
  const double power = mean_power(points);
  if (!(power > 0.0)) throw ConfigError("invalid constellation: zero average power");
  const double scale = 1.0 / std::sqrt(power);
  for (auto& p : points) p *= scale;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (std::abs(points[i] - points[j]) < 1e-12) {
        throw ConfigError("invalid constellation: duplicate point");
      }
    }
  }
  return Constellation{Modulation::Custom, std::move(points), std::move(name), scale};
}

Constellation make_constellation(Modulation kind) {
  Constellation c;
  switch (kind) {
    case Modulation::BPSK:
    case Modulation::SDPSK:
      // SDPSK shares the binary alphabet; the differential mapping is not modeled.
      c = make_custom_constellation({cplx{1, 0}, cplx{-1, 0}});
      break;
    case Modulation::QPSK:
    case Modulation::DQPSK:
      c = make_custom_constellation(psk(4, std::numbers::pi / 4));
      break;
    case Modulation::PSK8:
      c = make_custom_constellation(psk(8, 0.0));
      break;
    case Modulation::QAM16:
      c = make_custom_constellation(square_qam(4));
      break;
    case Modulation::QAM64:
      c = make_custom_constellation(square_qam(8));
      break;
    case Modulation::Custom:
      throw ConfigError("make_constellation: custom alphabets need explicit points");
  }
  c.kind = kind;
  c.name = std::string(modulation_name(kind));
  c.scale = 1.0;
  return c;
}

Constellation constellation_from_json(std::string_view json_text, std::string name) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("constellation JSON: ") + e.what());
  }
  if (!j.is_array()) throw ConfigError("constellation JSON must be an array of [re, im] pairs");
  std::vector<cplx> pts;
  for (const auto& item : j) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_number()) {
      throw ConfigError("constellation JSON: each point must be a [re, im] pair");
    }
    pts.emplace_back(item[0].get<double>(), item[1].get<double>());
  }
  return make_custom_constellation(std::move(pts), std::move(name));
}

Modulation parse_modulation(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (s == "bpsk") return Modulation::BPSK;
  if (s == "sdpsk") return Modulation::SDPSK;
  if (s == "qpsk") return Modulation::QPSK;
  if (s == "dqpsk") return Modulation::DQPSK;
  if (s == "8psk" || s == "psk8") return Modulation::PSK8;
  if (s == "16qam" || s == "qam16") return Modulation::QAM16;
  if (s == "64qam" || s == "qam64") return Modulation::QAM64;
  throw ConfigError("unknown constellation: " + std::string(name));
}

std::string_view modulation_name(Modulation kind) {
  switch (kind) {
    case Modulation::BPSK: return "bpsk";
    case Modulation::SDPSK: return "sdpsk";
    case Modulation::QPSK: return "qpsk";
    case Modulation::DQPSK: return "dqpsk";
    case Modulation::PSK8: return "8psk";
    case Modulation::QAM16: return "16qam";
    case Modulation::QAM64: return "64qam";
    case Modulation::Custom: return "custom";
  }
  return "custom";
}

Moments moments(const Constellation& c) {
  cplx mu20{0, 0};
  double mu4 = 0.0;
  double mu6 = 0.0;
  for (const auto& x : c.points) {
    const double p = std::norm(x);
    mu20 += x * x;
    mu4 += p * p;
    mu6 += p * p * p;
  }
  const double n = static_cast<double>(c.points.size());
  Moments m;
  m.mu20 = mu20 / n;
  m.mu4 = mu4 / n;
  m.mu6 = mu6 / n;
  m.beta = 1.0 - std::norm(m.mu20);
  return m;
}

DirectionalSensitivity directional_sensitivities(const Moments& m, double eps, double phi) {
  const cplx rotated = std::polar(1.0, -2.0 * phi) * m.mu20;
  return {(1.0 - rotated.real()) / 2.0, (1.0 + rotated.real()) / 2.0,
          (1.0 + eps) / 2.0 * rotated.imag()};
}

int predicted_fim_rank(const Moments& m, double tol) { return m.beta > tol ? 4 : 2; }

}  // namespace satfp
