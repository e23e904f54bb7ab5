#include "satfp/burst_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include <json.hpp>

#include "satfp/error.hpp"
#include "satfp/io.hpp"

namespace satfp {

using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary burst files assume a little-endian host");

json pairs(const std::vector<cplx>& v) {
  json a = json::array();
  for (const auto& z : v) a.push_back({z.real(), z.imag()});
  return a;
}

std::vector<cplx> unpairs(const json& a, const char* field) {
  if (!a.is_array()) throw ConfigError(std::string("burst file: '") + field + "' must be an array");
  std::vector<cplx> out;
  out.reserve(a.size());
  for (const auto& p : a) {
    if (!p.is_array() || p.size() != 2) {
      throw ConfigError(std::string("burst file: '") + field + "' entries must be [re, im]");
    }
    out.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return out;
}

json header(const Burst& b) {
  json h;
  h["satellite_id"] = b.meta.satellite_id;
  h["N"] = b.samples.size();
  if (std::isfinite(b.meta.channel.snr_db)) {
    h["snr_db"] = b.meta.channel.snr_db;
  } else {
    h["snr_db"] = nullptr;
  }
  h["modulation"] = b.meta.modulation;
  if (b.meta.truth) {
    const auto& t = *b.meta.truth;
    h["truth"] = {{"eps", t.eps},
                  {"phi", t.phi},
                  {"alpha3_re", t.alpha3.real()},
                  {"alpha3_im", t.alpha3.imag()}};
  }
  h["h"] = {b.meta.h_realized.real(), b.meta.h_realized.imag()};
  if (!b.known_symbols.empty()) h["known_symbols"] = pairs(b.known_symbols);
  return h;
}

Burst from_header(const json& h) {
  Burst b;
  try {
    b.meta.satellite_id = h.at("satellite_id").get<std::int64_t>();
    if (h.at("snr_db").is_null()) {
      b.meta.channel.snr_db = std::numeric_limits<double>::infinity();
    } else {
      b.meta.channel.snr_db = h.at("snr_db").get<double>();
    }
    b.meta.modulation = h.at("modulation").get<std::string>();
    if (h.contains("truth")) {
      const auto& t = h["truth"];
      HwiParams p;
      p.eps = t.at("eps").get<double>();
      p.phi = t.at("phi").get<double>();
      p.alpha3 = cplx(t.at("alpha3_re").get<double>(), t.at("alpha3_im").get<double>());
      b.meta.truth = p;
    }
    if (h.contains("h")) {
      b.meta.h_realized = cplx(h["h"].at(0).get<double>(), h["h"].at(1).get<double>());
    }
    if (h.contains("known_symbols")) b.known_symbols = unpairs(h["known_symbols"], "known_symbols");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("burst file header: ") + e.what());
  }
  return b;
}

void check_lengths(const Burst& b, std::size_t n) {
  if (b.samples.size() != n) throw ConfigError("burst file: N does not match sample count");
  if (n == 0) throw ConfigError("burst file: empty burst");
  if (!b.known_symbols.empty() && b.known_symbols.size() != n) {
    throw ConfigError("burst file: known_symbols length differs from N");
  }
}

}  // namespace

std::string burst_to_json(const Burst& b) {
  json j = header(b);
  j["samples"] = pairs(b.samples);
  return j.dump();
}

Burst burst_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("burst file: ") + e.what());
  }
  Burst b = from_header(j);
  if (!j.contains("samples")) throw ConfigError("burst file: missing 'samples'");
  b.samples = unpairs(j["samples"], "samples");
  check_lengths(b, j.at("N").get<std::size_t>());
  return b;
}

std::string burst_to_binary(const Burst& b) {
  const std::string head = header(b).dump();
  const auto len = static_cast<std::uint32_t>(head.size());
  std::string out(4 + head.size() + 16 * b.samples.size(), '\0');
  std::memcpy(out.data(), &len, 4);
  std::memcpy(out.data() + 4, head.data(), head.size());
  char* p = out.data() + 4 + head.size();
  for (const auto& z : b.samples) {
    const double re = z.real();
    const double im = z.imag();
    std::memcpy(p, &re, 8);
    std::memcpy(p + 8, &im, 8);
    p += 16;
  }
  return out;
}

Burst burst_from_binary(const std::string& bytes) {
  if (bytes.size() < 4) throw ConfigError("binary burst: truncated length prefix");
  std::uint32_t len = 0;
  std::memcpy(&len, bytes.data(), 4);
  if (bytes.size() < 4ULL + len) throw ConfigError("binary burst: truncated header");
  json h;
  try {
    h = json::parse(bytes.substr(4, len));
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("binary burst header: ") + e.what());
  }
  Burst b = from_header(h);
  const auto n = h.at("N").get<std::size_t>();
  const std::size_t payload = bytes.size() - 4 - len;
  if (payload != 16 * n) throw ConfigError("binary burst: payload size does not match N");
  b.samples.resize(n);
  const char* p = bytes.data() + 4 + len;
  for (std::size_t i = 0; i < n; ++i, p += 16) {
    double re = 0;
    double im = 0;
    std::memcpy(&re, p, 8);
    std::memcpy(&im, p + 8, 8);
    b.samples[i] = cplx(re, im);
  }
  check_lengths(b, n);
  return b;
}

void write_burst_file(const std::filesystem::path& path, const Burst& b) {
  write_file_atomic(path, path.extension() == ".bin" ? burst_to_binary(b) : burst_to_json(b));
}

Burst read_burst_file(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  return path.extension() == ".bin" ? burst_from_binary(data) : burst_from_json(data);
}

}  // namespace satfp
