#include "satfp/config.hpp"

#include <initializer_list>
#include <string_view>

#include <json.hpp>

#include "satfp/error.hpp"

namespace satfp {

namespace {

using nlohmann::json;

void allow_only(const json& j, std::initializer_list<std::string_view> keys,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (auto a : keys) ok = ok || k == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

json theta_to_json(const HwiParams& p) {
  return {{"eps", p.eps}, {"phi", p.phi}, {"alpha3_re", p.alpha3.real()}, {"alpha3_im", p.alpha3.imag()}};
}

HwiParams theta_from_json(const json& j, const std::string& where) {
  allow_only(j, {"eps", "phi", "alpha3_re", "alpha3_im"}, where);
  HwiParams p;
  double re = 0.0;
  double im = 0.0;
  read(j, "eps", p.eps, where);
  read(j, "phi", p.phi, where);
  read(j, "alpha3_re", re, where);
  read(j, "alpha3_im", im, where);
  p.alpha3 = {re, im};
  return p;
}

void read_theta(const json& j, const char* key, HwiParams& out, const std::string& where) {
  if (j.contains(key)) out = theta_from_json(j.at(key), where + "." + key);
}

json points_to_json(const std::vector<cplx>& v) {
  json a = json::array();
  for (const auto& z : v) a.push_back({z.real(), z.imag()});
  return a;
}

std::vector<cplx> points_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of [re, im] pairs");
  std::vector<cplx> out;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ConfigError(where + ": expected [re, im] pairs");
    }
    out.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return out;
}

}  // namespace

void AppConfig::check() const {
  auto check_mods = [](const std::vector<std::string>& mods, const char* where) {
    if (mods.empty()) throw ConfigError(std::string(where) + ": empty modulation list");
    for (const auto& m : mods) parse_modulation(m);
  };
  check_mods(moments.constellations, "moments");
  if (moments.custom_points) make_custom_constellation(*moments.custom_points);
  check_mods(crb_curves.modulations, "crb_curves");
  if (crb_curves.snr_db.empty() || crb_curves.n.empty()) throw ConfigError("crb_curves: invalid grid");
  for (double s : crb_curves.snr_db) {
    if (!std::isfinite(s)) throw ConfigError("crb_curves: SNR values must be finite");
  }
  for (int n : crb_curves.n) {
    if (n < 1) throw ConfigError("crb_curves: N must be >= 1");
  }
  check_mods(mc_validate.modulations, "mc_validate");
  if (mc_validate.n < 1 || mc_validate.n_trials < 2 || mc_validate.max_iters < 1 ||
      mc_validate.snr_db.empty()) {
    throw ConfigError("mc_validate: invalid n, n_trials, max_iters or SNR grid");
  }
  check_mods(identifiability.modulations, "identifiability");
  if (identifiability.n < 1 || !std::isfinite(identifiability.snr_db)) {
    throw ConfigError("identifiability: invalid n or snr_db");
  }
  if (fleet.n_satellites < 3) throw ConfigError("fleet: need at least 3 satellites");
  protocol.check();
}

AppConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  allow_only(j, {"seed", "out_dir", "moments", "crb_curves", "mc_validate", "identifiability", "fleet", "protocol"},
             "config");
  AppConfig c;
  read(j, "seed", c.seed, "config");
  read(j, "out_dir", c.out_dir, "config");

  if (j.contains("moments")) {
    const auto& m = j["moments"];
    allow_only(m, {"constellations", "custom_points"}, "moments");
    read(m, "constellations", c.moments.constellations, "moments");
    if (m.contains("custom_points") && !m["custom_points"].is_null()) {
      c.moments.custom_points = points_from_json(m["custom_points"], "moments.custom_points");
    }
  }
  if (j.contains("crb_curves")) {
    const auto& m = j["crb_curves"];
    allow_only(m, {"modulations", "snr_db", "n", "theta"}, "crb_curves");
    read(m, "modulations", c.crb_curves.modulations, "crb_curves");
    read(m, "snr_db", c.crb_curves.snr_db, "crb_curves");
    read(m, "n", c.crb_curves.n, "crb_curves");
    read_theta(m, "theta", c.crb_curves.theta, "crb_curves");
  }
  if (j.contains("mc_validate")) {
    const auto& m = j["mc_validate"];
    allow_only(m, {"modulations", "truth", "snr_db", "n", "n_trials", "init_rel", "init_floor", "max_iters"},
               "mc_validate");
    auto& o = c.mc_validate;
    read(m, "modulations", o.modulations, "mc_validate");
    read_theta(m, "truth", o.truth, "mc_validate");
    read(m, "snr_db", o.snr_db, "mc_validate");
    read(m, "n", o.n, "mc_validate");
    read(m, "n_trials", o.n_trials, "mc_validate");
    read(m, "init_rel", o.init_rel, "mc_validate");
    read(m, "init_floor", o.init_floor, "mc_validate");
    read(m, "max_iters", o.max_iters, "mc_validate");
  }
  if (j.contains("identifiability")) {
    const auto& m = j["identifiability"];
    allow_only(m, {"modulations", "theta", "n", "snr_db"}, "identifiability");
    auto& o = c.identifiability;
    read(m, "modulations", o.modulations, "identifiability");
    read_theta(m, "theta", o.theta, "identifiability");
    read(m, "n", o.n, "identifiability");
    read(m, "snr_db", o.snr_db, "identifiability");
  }
  if (j.contains("fleet")) {
    const auto& m = j["fleet"];
    allow_only(m, {"n_satellites", "spread"}, "fleet");
    read(m, "n_satellites", c.fleet.n_satellites, "fleet");
    if (m.contains("spread")) {
      const auto& s = m["spread"];
      auto& o = c.fleet.spread;
      allow_only(s, {"eps_lo", "eps_hi", "phi_lo", "phi_hi", "alpha3_mag_lo", "alpha3_mag_hi",
                     "alpha3_arg_lo", "alpha3_arg_hi"},
                 "fleet.spread");
      read(s, "eps_lo", o.eps_lo, "fleet.spread");
      read(s, "eps_hi", o.eps_hi, "fleet.spread");
      read(s, "phi_lo", o.phi_lo, "fleet.spread");
      read(s, "phi_hi", o.phi_hi, "fleet.spread");
      read(s, "alpha3_mag_lo", o.alpha3_mag_lo, "fleet.spread");
      read(s, "alpha3_mag_hi", o.alpha3_mag_hi, "fleet.spread");
      read(s, "alpha3_arg_lo", o.alpha3_arg_lo, "fleet.spread");
      read(s, "alpha3_arg_hi", o.alpha3_arg_hi, "fleet.spread");
    }
  }
  if (j.contains("protocol")) {
    const auto& m = j["protocol"];
    allow_only(m, {"burst_mode", "n_messages", "snr_db", "rician_k_db", "random_carrier_phase", "cfo_max",
                   "n_bal", "n_dr_trials", "n_acc_grid", "fa_targets", "tau_fa", "glrt_ridge", "pipeline",
                   "dr_override"},
               "protocol");
    auto& o = c.protocol;
    if (m.contains("burst_mode")) {
      std::string s;
      read(m, "burst_mode", s, "protocol");
      o.burst_mode = parse_burst_mode(s);
    }
    read(m, "n_messages", o.n_messages, "protocol");
    read(m, "snr_db", o.snr_db, "protocol");
    if (m.contains("rician_k_db")) {
      if (m["rician_k_db"].is_null()) {
        o.rician_k_db.reset();
      } else {
        double k = 0.0;
        read(m, "rician_k_db", k, "protocol");
        o.rician_k_db = k;
      }
    }
    read(m, "random_carrier_phase", o.random_carrier_phase, "protocol");
    read(m, "cfo_max", o.cfo_max, "protocol");
    read(m, "n_bal", o.n_bal, "protocol");
    read(m, "n_dr_trials", o.n_dr_trials, "protocol");
    read(m, "n_acc_grid", o.n_acc_grid, "protocol");
    read(m, "fa_targets", o.fa_targets, "protocol");
    read(m, "tau_fa", o.tau_fa, "protocol");
    read(m, "glrt_ridge", o.glrt_ridge, "protocol");
    if (m.contains("pipeline")) {
      const auto& p = m["pipeline"];
      allow_only(p, {"n_known", "percentile_lo", "percentile_hi", "acf_lag", "strip_power", "blind_reference"},
                 "protocol.pipeline");
      auto& q = o.pipeline;
      read(p, "n_known", q.n_known, "protocol.pipeline");
      read(p, "percentile_lo", q.percentile_lo, "protocol.pipeline");
      read(p, "percentile_hi", q.percentile_hi, "protocol.pipeline");
      read(p, "acf_lag", q.acf_lag, "protocol.pipeline");
      read(p, "strip_power", q.strip_power, "protocol.pipeline");
      if (p.contains("blind_reference")) {
        std::string s;
        read(p, "blind_reference", s, "protocol.pipeline");
        q.blind_reference = parse_modulation(s);
      }
    }
    if (m.contains("dr_override") && !m["dr_override"].is_null()) {
      const auto& d = m["dr_override"];
      if (!d.is_object()) throw ConfigError("protocol.dr_override: expected an object");
      FeatureArray a{};
      for (const auto& [k, v] : d.items()) {
        if (!v.is_number()) throw ConfigError("protocol.dr_override." + k + ": expected a number");
        a[feature_index(k)] = v.get<double>();
      }
      o.dr_override = a;
    }
  }
  c.check();
  return c;
}

std::string serialize_config(const AppConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["moments"] = {{"constellations", c.moments.constellations},
                  {"custom_points", c.moments.custom_points ? points_to_json(*c.moments.custom_points)
                                                            : json(nullptr)}};
  j["crb_curves"] = {{"modulations", c.crb_curves.modulations},
                     {"snr_db", c.crb_curves.snr_db},
                     {"n", c.crb_curves.n},
                     {"theta", theta_to_json(c.crb_curves.theta)}};
  const auto& mc = c.mc_validate;
  j["mc_validate"] = {{"modulations", mc.modulations}, {"truth", theta_to_json(mc.truth)},
                      {"snr_db", mc.snr_db},           {"n", mc.n},
                      {"n_trials", mc.n_trials},       {"init_rel", mc.init_rel},
                      {"init_floor", mc.init_floor},   {"max_iters", mc.max_iters}};
  const auto& id = c.identifiability;
  j["identifiability"] = {{"modulations", id.modulations},
                          {"theta", theta_to_json(id.theta)},
                          {"n", id.n},
                          {"snr_db", id.snr_db}};
  const auto& s = c.fleet.spread;
  j["fleet"] = {{"n_satellites", c.fleet.n_satellites},
                {"spread",
                 {{"eps_lo", s.eps_lo},
                  {"eps_hi", s.eps_hi},
                  {"phi_lo", s.phi_lo},
                  {"phi_hi", s.phi_hi},
                  {"alpha3_mag_lo", s.alpha3_mag_lo},
                  {"alpha3_mag_hi", s.alpha3_mag_hi},
                  {"alpha3_arg_lo", s.alpha3_arg_lo},
                  {"alpha3_arg_hi", s.alpha3_arg_hi}}}};
  const auto& p = c.protocol;
  json dr = nullptr;
  if (p.dr_override) {
    dr = json::object();
    for (int k = 0; k < kNumFeatures; ++k) dr[kFeatureNames[k]] = (*p.dr_override)[k];
  }
  j["protocol"] = {{"burst_mode", burst_mode_name(p.burst_mode)},
                   {"n_messages", p.n_messages},
                   {"snr_db", p.snr_db},
                   {"rician_k_db", p.rician_k_db ? json(*p.rician_k_db) : json(nullptr)},
                   {"random_carrier_phase", p.random_carrier_phase},
                   {"cfo_max", p.cfo_max},
                   {"n_bal", p.n_bal},
                   {"n_dr_trials", p.n_dr_trials},
                   {"n_acc_grid", p.n_acc_grid},
                   {"fa_targets", p.fa_targets},
                   {"tau_fa", p.tau_fa},
                   {"glrt_ridge", p.glrt_ridge},
                   {"pipeline",
                    {{"n_known", p.pipeline.n_known},
                     {"percentile_lo", p.pipeline.percentile_lo},
                     {"percentile_hi", p.pipeline.percentile_hi},
                     {"acf_lag", p.pipeline.acf_lag},
                     {"strip_power", p.pipeline.strip_power},
                     {"blind_reference", std::string(modulation_name(p.pipeline.blind_reference))}}},
                   {"dr_override", dr}};
  return j.dump(2) + "\n";
}

}  // namespace satfp
