#include "satfp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "satfp/error.hpp"
#include "satfp/io.hpp"
#include "satfp/rng.hpp"
#include "satfp/stats.hpp"

namespace satfp {

namespace {

using nlohmann::json;

struct Campaign {
  std::vector<std::int64_t> ids;
  std::map<std::int64_t, std::vector<const FeatureRow*>> rows;
};

Campaign group(std::span<const FeatureRow> table) {
  Campaign c;
  for (const auto& r : table) c.rows[r.satellite_id].push_back(&r);
  for (auto& [id, v] : c.rows) {
    std::stable_sort(v.begin(), v.end(), [](const FeatureRow* a, const FeatureRow* b) {
      return a->burst_index < b->burst_index;
    });
    c.ids.push_back(id);
  }
  return c;
}

Fingerprint fingerprint_of(std::int64_t id, const std::vector<const FeatureRow*>& rows,
                           std::size_t begin, std::size_t end) {
  std::vector<FeatureVector> f;
  std::vector<double> w;
  for (std::size_t i = begin; i < end && i < rows.size(); ++i) {
    f.push_back(rows[i]->features);
    w.push_back(std::pow(10.0, rows[i]->snr_db / 10.0));
  }
  return accumulate(id, f, w);
}

struct Scores {
  std::vector<double> genuine;
  std::vector<double> impostor;
  int correct = 0;
};

class Scorer {
public:
  Scorer(const Strategy& s, const FeatureArray& dr, double beta, double ridge)
      : s_(s), ridge_(ridge) {
    if (s.kind == Strategy::Kind::Iwat) {
      w_ = iwat_weights(dr, active_set(beta), s.scheme);
    } else if (s.kind == Strategy::Kind::Subset) {
      FeatureArray ones{};
      ones.fill(1.0);
      w_ = iwat_weights(ones, mask_of(s.features), WeightScheme::Equal);
    }
  }

  const WeightVector& weights() const { return w_; }

  // Probes and enrollment must be z-normalized and aligned by index.
  Scores score(std::span<const Fingerprint> enroll, std::span<const Fingerprint> probes) const {
    Scores out;
    for (std::size_t p = 0; p < probes.size(); ++p) {
      const auto s = s_.kind == Strategy::Kind::Glrt
                         ? glrt_score(probes[p], enroll, s_.features, ridge_)
                         : iwat_scores(probes[p], enroll, w_);
      const auto best = static_cast<std::size_t>(std::min_element(s.begin(), s.end()) - s.begin());
      if (best == p) ++out.correct;
      for (std::size_t e = 0; e < enroll.size(); ++e) {
        (e == p ? out.genuine : out.impostor).push_back(s[e]);
      }
    }
    return out;
  }

private:
  Strategy s_;
  WeightVector w_;
  double ridge_;
};

}  // namespace

const char* burst_mode_name(BurstMode m) {
  return m == BurstMode::IridiumPreamble ? "iridium_preamble" : "qpsk_pilots";
}

BurstMode parse_burst_mode(std::string_view s) {
  if (s == "iridium_preamble") return BurstMode::IridiumPreamble;
  if (s == "qpsk_pilots") return BurstMode::QpskPilots;
  throw ConfigError("unknown burst mode: " + std::string(s));
}

void ProtocolConfig::check() const {
  pipeline.check();
  if (n_messages < 2) throw ConfigError("protocol: n_messages must be >= 2");
  if (!std::isfinite(snr_db)) throw ConfigError("protocol: snr_db must be finite");
  if (!(cfo_max >= 0.0)) throw ConfigError("protocol: cfo_max must be >= 0");
  if (n_bal < 2 || n_bal % 2 != 0 || n_bal > n_messages) {
    throw ConfigError("protocol: n_bal must be even, >= 2 and <= n_messages");
  }
  if (n_dr_trials < 1) throw ConfigError("protocol: n_dr_trials must be >= 1");
  if (n_acc_grid.empty()) throw ConfigError("protocol: empty n_acc grid");
  for (int n : n_acc_grid) {
    if (n < 1 || n > n_messages) throw ConfigError("protocol: n_acc values must lie in [1, n_messages]");
  }
  for (double fa : fa_targets) {
    if (!(fa >= 0.0 && fa <= 1.0)) throw ConfigError("protocol: FA targets must lie in [0, 1]");
  }
  if (!(tau_fa >= 0.0 && tau_fa <= 1.0)) throw ConfigError("protocol: tau_fa must lie in [0, 1]");
  if (!(glrt_ridge >= 0.0)) throw ConfigError("protocol: glrt_ridge must be >= 0");
  if (pipeline.n_known > 76) throw ConfigError("protocol: bursts carry 76 known symbols");
}

double estimate_snr_m2m4(std::span<const cplx> samples) {
  if (samples.empty()) throw ConfigError("estimate_snr_m2m4: empty burst");
  double m2 = 0.0;
  double m4 = 0.0;
  for (const auto& s : samples) {
    const double p = std::norm(s);
    m2 += p;
    m4 += p * p;
  }
  m2 /= static_cast<double>(samples.size());
  m4 /= static_cast<double>(samples.size());
  const double sig = std::sqrt(std::max(2.0 * m2 * m2 - m4, 0.0));
  const double noise = m2 - sig;
  constexpr double lo = 1e-3;
  constexpr double hi = 1e6;
  if (!(noise > 0.0)) return hi;
  return std::clamp(sig / noise, lo, hi);
}

std::vector<FeatureRow> simulate_campaign(const std::vector<Satellite>& fleet,
                                          const ProtocolConfig& proto, std::uint64_t seed) {
  proto.check();
  const auto iridium = iridium_known_symbols();
  const auto qpsk = make_constellation(Modulation::QPSK);
  std::vector<FeatureRow> rows;
  rows.reserve(fleet.size() * static_cast<std::size_t>(proto.n_messages));
  for (const auto& sat : fleet) {
    for (int m = 0; m < proto.n_messages; ++m) {
      const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(sat.id),
                                          static_cast<std::uint64_t>(m));
      Rng rng(derive_seed(s, 1));
      std::uniform_real_distribution<double> cfo(-proto.cfo_max, proto.cfo_max);
      ChannelConfig ch;
      ch.snr_db = proto.snr_db;
      ch.rician_k_db = proto.rician_k_db;
      ch.random_carrier_phase = proto.random_carrier_phase;
      ch.cfo = proto.cfo_max > 0.0 ? cfo(rng) : 0.0;
      const auto symbols = proto.burst_mode == BurstMode::IridiumPreamble
                               ? iridium
                               : random_symbols(qpsk, iridium.size(), derive_seed(s, 2));
      Burst b = synthesize_burst(symbols, sat.params, ch, derive_seed(s, 3));
      b.meta.satellite_id = sat.id;

      FeatureRow row;
      row.satellite_id = sat.id;
      row.burst_index = m;
      row.snr_db = 10.0 * std::log10(estimate_snr_m2m4(b.samples));
      row.features = extract_features(b, proto.pipeline);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<Strategy> default_strategies() {
  using K = Strategy::Kind;
  return {
      {"pa_only", K::Subset, {kAmpVar, kAmpRange, kAmpAcf1}, WeightScheme::Equal},
      {"crb_guided", K::Subset, {kAmpVar, kAmpRange, kAmpAcf1, kPhaseAcf1}, WeightScheme::Equal},
      {"all_6",
       K::Subset,
       {kAmpVar, kAmpRange, kAmpAcf1, kAmpKurtosis, kPhaseAcf1, kCfo},
       WeightScheme::Equal},
      {"iq_only", K::Subset, {kIqEps, kIqPhi}, WeightScheme::Equal},
      {"oscillator_only", K::Subset, {kPhaseAcf1, kPhaseVar}, WeightScheme::Equal},
      {"iwat_dr2", K::Iwat, {}, WeightScheme::DrSquared},
      {"iwat_dr", K::Iwat, {}, WeightScheme::Dr},
      {"iwat_equal", K::Iwat, {}, WeightScheme::Equal},
      {"glrt", K::Glrt, {kAmpVar, kAmpRange, kAmpAcf1, kPhaseAcf1}, WeightScheme::Equal},
  };
}

const StrategyResult& AuthReport::strategy(std::string_view name) const {
  for (const auto& s : strategies) {
    if (s.name == name) return s;
  }
  throw ConfigError("no strategy named " + std::string(name));
}

AuthReport evaluate_campaigns(std::span<const FeatureRow> campaign_a,
                              std::span<const FeatureRow> campaign_b, const ProtocolConfig& proto,
                              double beta, std::uint64_t seed) {
  proto.check();
  const Campaign a = group(campaign_a);
  const Campaign b = group(campaign_b);

  AuthReport rep;
  rep.beta = beta;
  rep.n_messages = proto.n_messages;
  rep.dr = balanced_dr(campaign_a, proto.n_bal, proto.n_dr_trials, derive_seed(seed, 21));
  rep.dr_from_override = proto.dr_override.has_value();
  rep.dr_used = proto.dr_override ? *proto.dr_override : rep.dr.means();

  // Satellites enrolled in A and probed in B.
  std::vector<std::int64_t> ids;
  for (auto id : a.ids) {
    if (b.rows.count(id)) ids.push_back(id);
  }
  if (ids.size() < 3) throw ConfigError("evaluate_campaigns: need >= 3 common satellites");
  rep.n_satellites = static_cast<int>(ids.size());

  std::vector<Fingerprint> enroll_raw;
  std::vector<Fingerprint> probe_full_raw;
  std::vector<Fingerprint> split_enroll_raw;
  std::vector<Fingerprint> split_probe_raw;
  for (auto id : ids) {
    const auto& ra = a.rows.at(id);
    const auto& rb = b.rows.at(id);
    if (ra.size() < 2) throw ConfigError("evaluate_campaigns: need >= 2 enrollment messages");
    enroll_raw.push_back(fingerprint_of(id, ra, 0, ra.size()));
    probe_full_raw.push_back(fingerprint_of(id, rb, 0, rb.size()));
    split_enroll_raw.push_back(fingerprint_of(id, ra, 0, ra.size() / 2));
    split_probe_raw.push_back(fingerprint_of(id, ra, ra.size() / 2, ra.size()));
  }
  rep.stability = cross_stability(enroll_raw, probe_full_raw);

  const auto zn = ZNormalizer::fit(enroll_raw);
  const auto enroll = zn.apply(enroll_raw);
  const auto zs = ZNormalizer::fit(split_enroll_raw);
  const auto split_enroll = zs.apply(split_enroll_raw);
  const auto split_probe = zs.apply(split_probe_raw);

  std::map<int, std::vector<Fingerprint>> probes_by_nacc;
  for (int n : proto.n_acc_grid) {
    std::vector<Fingerprint> p;
    for (auto id : ids) p.push_back(fingerprint_of(id, b.rows.at(id), 0, static_cast<std::size_t>(n)));
    probes_by_nacc[n] = zn.apply(p);
  }
  const auto probes = zn.apply(probe_full_raw);

  for (const auto& strat : default_strategies()) {
    const Scorer scorer(strat, rep.dr_used, beta, proto.glrt_ridge);
    StrategyResult res;
    res.name = strat.name;
    res.weights = scorer.weights().w;

    const Scores sc = scorer.score(enroll, probes);
    res.roc = roc_auc(sc.genuine, sc.impostor, proto.fa_targets);
    res.auc = res.roc.auc;
    res.pd_at_fa = res.roc.pd_at_fa;
    res.identification_rate = static_cast<double>(sc.correct) / static_cast<double>(ids.size());

    const Scores split = scorer.score(split_enroll, split_probe);
    res.tau = threshold_at_fa(split.impostor, proto.tau_fa);
    auto frac_below = [&](const std::vector<double>& v) {
      return static_cast<double>(std::count_if(v.begin(), v.end(),
                                               [&](double x) { return x < res.tau; })) /
             static_cast<double>(v.size());
    };
    res.tau_pd = frac_below(sc.genuine);
    res.tau_fa = frac_below(sc.impostor);

    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [n, p] : probes_by_nacc) {
      const Scores s = scorer.score(enroll, p);
      const double auc = roc_auc(s.genuine, s.impostor).auc;
      res.auc_vs_nacc.emplace_back(n, auc);
      xs.push_back(n);
      ys.push_back(auc);
    }
    if (xs.size() >= 2) res.nacc_spearman = stats::spearman(xs, ys);
    rep.strategies.push_back(std::move(res));
  }
  return rep;
}

AuthReport run_auth_experiment(const FleetConfig& fleet, const ProtocolConfig& proto,
                               std::uint64_t seed) {
  proto.check();
  const auto sats = generate_fleet(fleet.n_satellites, fleet.spread, derive_seed(seed, 31));
  const auto a = simulate_campaign(sats, proto, derive_seed(seed, 32));
  const auto b = simulate_campaign(sats, proto, derive_seed(seed, 33));
  const double beta = proto.burst_mode == BurstMode::IridiumPreamble
                          ? moments(make_constellation(Modulation::BPSK)).beta
                          : moments(make_constellation(Modulation::QPSK)).beta;
  return evaluate_campaigns(a, b, proto, beta, seed);
}

std::string auth_report_json(const AuthReport& r) {
  json j;
  j["beta"] = r.beta;
  j["n_satellites"] = r.n_satellites;
  j["n_messages"] = r.n_messages;
  j["dr_from_override"] = r.dr_from_override;

  json dr = json::object();
  for (int k = 0; k < kNumFeatures; ++k) {
    dr[kFeatureNames[k]] = {{"mean", r.dr.entries[k].mean},
                            {"std", r.dr.entries[k].std},
                            {"verdict", verdict_name(r.dr.entries[k].verdict)},
                            {"used", r.dr_used[k]}};
  }
  j["dr_table"] = {{"n_bal", r.dr.n_bal},
                   {"n_trials", r.dr.n_trials},
                   {"excluded_satellites", r.dr.excluded},
                   {"features", dr}};

  json st = json::object();
  for (int k = 0; k < kNumFeatures; ++k) {
    const auto& s = r.stability[k];
    st[kFeatureNames[k]] = {{"pearson_r", s.pearson_r ? json(*s.pearson_r) : json(nullptr)},
                            {"p_value", s.p_value ? json(*s.p_value) : json(nullptr)},
                            {"n_common", s.n_common}};
  }
  j["cross_stability"] = st;

  json strategies = json::array();
  for (const auto& s : r.strategies) {
    json pd = json::object();
    for (const auto& [fa, v] : s.pd_at_fa) pd[format_double(fa)] = v;
    json w = json::object();
    for (int k = 0; k < kNumFeatures; ++k) {
      if (s.weights[k] != 0.0) w[kFeatureNames[k]] = s.weights[k];
    }
    json curve = json::array();
    for (const auto& [n, auc] : s.auc_vs_nacc) curve.push_back({{"n_acc", n}, {"auc", auc}});
    strategies.push_back({{"name", s.name},
                          {"auc", s.auc},
                          {"pd_at_fa", pd},
                          {"identification_rate", s.identification_rate},
                          {"tau", s.tau},
                          {"tau_pd", s.tau_pd},
                          {"tau_fa", s.tau_fa},
                          {"weights", w},
                          {"auc_vs_nacc", curve},
                          {"nacc_spearman", s.nacc_spearman ? json(*s.nacc_spearman) : json(nullptr)}});
  }
  j["strategies"] = strategies;
  return j.dump(2) + "\n";
}

std::string roc_csv(const AuthReport& r) {
  std::ostringstream os;
  os << "strategy,fa,pd,threshold\n";
  for (const auto& s : r.strategies) {
    for (const auto& p : s.roc.points) {
      os << s.name << ',' << format_double(p.fa) << ',' << format_double(p.pd) << ','
         << format_double(p.threshold) << '\n';
    }
  }
  return os.str();
}

std::string auc_vs_nacc_csv(const AuthReport& r) {
  std::ostringstream os;
  os << "strategy,n_acc,auc\n";
  for (const auto& s : r.strategies) {
    for (const auto& [n, auc] : s.auc_vs_nacc) os << s.name << ',' << n << ',' << format_double(auc) << '\n';
  }
  return os.str();
}

std::string dr_table_csv(const DrTable& t) {
  std::ostringstream os;
  os << "feature,dr_mean,dr_std,n_trials,verdict\n";
  for (int k = 0; k < kNumFeatures; ++k) {
    const auto& e = t.entries[k];
    os << kFeatureNames[k] << ',' << format_double(e.mean) << ',' << format_double(e.std) << ','
       << t.n_trials << ',' << verdict_name(e.verdict) << '\n';
  }
  return os.str();
}

std::vector<FeatureRow> parse_feature_table_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("feature CSV: empty input");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  if (header.size() != 3 + kNumFeatures || header[0] != "satellite_id" ||
      header[1] != "burst_index" || header[2] != "snr_db") {
    throw ConfigError("feature CSV: unexpected header");
  }
  for (int k = 0; k < kNumFeatures; ++k) {
    if (header[3 + k] != kFeatureNames[k]) throw ConfigError("feature CSV: unexpected header");
  }
  std::vector<FeatureRow> rows;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) {
      throw ConfigError("feature CSV: wrong column count on line " + std::to_string(line_no));
    }
    try {
      FeatureRow row;
      row.satellite_id = std::stoll(cells[0]);
      row.burst_index = std::stoll(cells[1]);
      row.snr_db = std::stod(cells[2]);
      FeatureArray f{};
      for (int k = 0; k < kNumFeatures; ++k) f[k] = std::stod(cells[3 + k]);
      row.features = FeatureVector::from_array(f);
      rows.push_back(row);
    } catch (const std::logic_error&) {
      throw ConfigError("feature CSV: bad number on line " + std::to_string(line_no));
    }
  }
  return rows;
}

}  // namespace satfp
