#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "satfp/analysis.hpp"
#include "satfp/burst_io.hpp"
#include "satfp/config.hpp"
#include "satfp/error.hpp"
#include "satfp/estimator.hpp"
#include "satfp/experiment.hpp"
#include "satfp/io.hpp"
#include "satfp/rng.hpp"

namespace fs = std::filesystem;
using namespace satfp;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string config_path;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

AppConfig load(const Globals& g) {
  AppConfig c = g.config_path.empty() ? AppConfig{} : parse_config(read_file(g.config_path));
  if (g.seed_opt->count() > 0) c.seed = g.seed;
  if (g.out_opt->count() > 0) c.out_dir = g.out_dir;
  c.check();
  return c;
}

void emit(const AppConfig& c, const std::string& name, const std::string& text) {
  const fs::path p = fs::path(c.out_dir) / name;
  write_file_atomic(p, text);
  std::cout << "wrote " << p.string() << '\n';
}

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

std::vector<FeatureRow> features_from_bursts(const fs::path& dir, const PipelineConfig& pipe) {
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".json" || ext == ".bin")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::map<std::int64_t, std::int64_t> next_index;
  std::vector<FeatureRow> rows;
  for (const auto& f : files) {
    const Burst b = read_burst_file(f);
    FeatureRow row;
    row.satellite_id = b.meta.satellite_id;
    row.burst_index = next_index[b.meta.satellite_id]++;
    row.snr_db = 10.0 * std::log10(estimate_snr_m2m4(b.samples));
    row.features = extract_features(b, pipe);
    rows.push_back(row);
  }
  if (rows.empty()) throw ConfigError("no burst files in " + dir.string());
  return rows;
}

double beta_of(BurstMode m) {
  return moments(make_constellation(m == BurstMode::IridiumPreamble ? Modulation::BPSK
                                                                    : Modulation::QPSK))
      .beta;
}

void print_dr(const DrTable& t, const FeatureArray* used) {
  std::cout << "feature         DR mean   DR std   verdict\n";
  for (int k = 0; k < kNumFeatures; ++k) {
    const auto& e = t.entries[k];
    std::printf("%-14s %8.3f %8.3f   %s", kFeatureNames[k], e.mean, e.std, verdict_name(e.verdict));
    if (used && (*used)[k] != e.mean) std::printf("   (weights use %.3f)", (*used)[k]);
    std::printf("\n");
  }
}

void print_weights(const FeatureArray& dr, double beta) {
  for (auto scheme : {WeightScheme::DrSquared, WeightScheme::Dr, WeightScheme::Equal}) {
    const auto w = iwat_weights(dr, active_set(beta), scheme);
    std::cout << "weights[" << weight_scheme_name(scheme) << "]:";
    for (int k = 0; k < kNumFeatures; ++k) {
      if (w.w[k] > 0.0) std::cout << ' ' << kFeatureNames[k] << '=' << fmt(w.w[k], 4);
    }
    std::cout << '\n';
  }
}

void write_auth(const AppConfig& c, const AuthReport& r) {
  emit(c, "auth_report.json", auth_report_json(r));
  emit(c, "roc.csv", roc_csv(r));
  emit(c, "auc_vs_nacc.csv", auc_vs_nacc_csv(r));
  emit(c, "dr_table.csv", dr_table_csv(r.dr));
  print_dr(r.dr, r.dr_from_override ? &r.dr_used : nullptr);
  print_weights(r.dr_used, r.beta);
  std::cout << "strategy           AUC    P_D@FA   ident   AUC-vs-N_acc spearman\n";
  for (const auto& s : r.strategies) {
    std::printf("%-16s %6.3f", s.name.c_str(), s.auc);
    for (const auto& [fa, pd] : s.pd_at_fa) std::printf("  %.2f@%g", pd, fa);
    std::printf("  %5.2f   %s\n", s.identification_rate,
                s.nacc_spearman ? fmt(*s.nacc_spearman, 3).c_str() : "n/a");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hardware-impairment fingerprint identifiability and authentication toolkit"};
  app.require_subcommand(1);
  Globals g;
  g.seed_opt = app.add_option("--seed", g.seed, "Base RNG seed (overrides config)");
  g.out_opt = app.add_option("--out-dir", g.out_dir, "Output directory (overrides config)");
  app.add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
  bool dump_config = false;
  app.add_flag("--dump-config", dump_config, "Write the effective config to <out-dir>/config.json");

  auto* moments_cmd = app.add_subcommand("moments", "Constellation moments, beta and predicted FIM rank");
  std::vector<std::string> mom_names;
  std::string custom_file;
  moments_cmd->add_option("--constellation", mom_names, "Built-in constellation name(s)");
  moments_cmd->add_option("--custom", custom_file, "JSON alphabet file ([[re, im], ...])")
      ->check(CLI::ExistingFile);

  auto* crb_cmd = app.add_subcommand("crb-curves", "CRB vs SNR for several modulations and N");

  auto* mc_cmd = app.add_subcommand("mc-validate", "Monte Carlo NLS variance vs CRB");
  std::vector<std::string> mc_mods;
  int mc_trials = 0;
  mc_cmd->add_option("--modulation", mc_mods, "Modulation(s) to run");
  mc_cmd->add_option("--trials", mc_trials, "Trials per SNR point");

  auto* ident_cmd = app.add_subcommand("identifiability", "FIM rank, null space and coupling per modulation");

  auto* fleet_cmd = app.add_subcommand("fleet-sim", "Simulate two campaigns and write feature tables");
  std::string burst_mode;
  fleet_cmd->add_option("--burst-mode", burst_mode, "iridium_preamble | qpsk_pilots");

  auto* dr_cmd = app.add_subcommand("dr-analysis", "Balanced discrimination ratios from a feature table");
  std::string dr_features;
  bool dr_paper = false;
  dr_cmd->add_option("--features", dr_features, "Feature table CSV (default <out-dir>/features_a.csv)");
  dr_cmd->add_flag("--paper-dr", dr_paper, "Also compute weights from the measured 27-satellite DR table");

  auto* auth_cmd = app.add_subcommand("authenticate", "Two-campaign authentication experiment");
  std::string enroll_csv;
  std::string probe_csv;
  std::string enroll_dir;
  std::string probe_dir;
  bool auth_paper = false;
  auth_cmd->add_option("--burst-mode", burst_mode, "iridium_preamble | qpsk_pilots");
  auth_cmd->add_option("--enroll", enroll_csv, "Enrollment feature CSV instead of simulation");
  auth_cmd->add_option("--probe", probe_csv, "Probe feature CSV instead of simulation");
  auth_cmd->add_option("--enroll-bursts", enroll_dir, "Directory of enrollment burst files");
  auth_cmd->add_option("--probe-bursts", probe_dir, "Directory of probe burst files");
  auth_cmd->add_flag("--paper-dr", auth_paper, "Weight with the measured 27-satellite DR table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    AppConfig cfg = load(g);
    if (!burst_mode.empty()) cfg.protocol.burst_mode = parse_burst_mode(burst_mode);
    if (auth_paper) cfg.protocol.dr_override = measured_dr_values();
    if (mc_trials > 0) cfg.mc_validate.n_trials = mc_trials;
    if (!mc_mods.empty()) cfg.mc_validate.modulations = mc_mods;
    if (!mom_names.empty()) cfg.moments.constellations = mom_names;
    cfg.check();
    if (dump_config) emit(cfg, "config.json", serialize_config(cfg));

    if (*moments_cmd) {
      std::vector<Constellation> cs;
      for (const auto& n : cfg.moments.constellations) cs.push_back(make_constellation(parse_modulation(n)));
      if (cfg.moments.custom_points) cs.push_back(make_custom_constellation(*cfg.moments.custom_points));
      if (!custom_file.empty()) cs.push_back(constellation_from_json(read_file(custom_file)));
      const auto csv = moments_csv(cs);
      std::cout << csv;
      emit(cfg, "moments.csv", csv);
    } else if (*crb_cmd) {
      emit(cfg, "crb_curves.csv", crb_curves_csv(cfg.crb_curves));
    } else if (*mc_cmd) {
      const auto& m = cfg.mc_validate;
      for (const auto& name : m.modulations) {
        McConfig mc;
        mc.constellation = make_constellation(parse_modulation(name));
        mc.truth = m.truth;
        mc.snr_grid_db = m.snr_db;
        mc.n = m.n;
        mc.n_trials = m.n_trials;
        mc.seed = derive_seed(cfg.seed, 41);
        mc.init_rel = m.init_rel;
        mc.init_floor = m.init_floor;
        mc.max_iters = m.max_iters;
        if (mc.n_trials < 50) std::cerr << "warning: fewer than 50 trials per SNR point\n";
        const auto rep = mc_crb_validation(mc);
        std::cout << name << ":\n";
        for (const auto& row : rep.rows) {
          std::printf("  %5.1f dB %-10s mse %-11s crb %-11s ratio %-7s %s\n", row.snr_db,
                      kParamNames[row.param], fmt(row.mse).c_str(),
                      row.crb.bounded() ? fmt(row.crb.value()).c_str() : "inf",
                      row.ratio ? fmt(*row.ratio, 3).c_str() : "-", row.status.c_str());
        }
        emit(cfg, "mc_" + mc.constellation.name + ".csv", mc_report_csv(rep));
      }
    } else if (*ident_cmd) {
      const auto& id = cfg.identifiability;
      std::vector<IdentifiabilityEntry> entries;
      for (const auto& name : id.modulations) {
        entries.push_back(identifiability_analysis(make_constellation(parse_modulation(name)), id.theta,
                                                   id.n, id.snr_db));
        const auto& e = entries.back();
        std::printf("%-6s beta %.3f rank %d (predicted %d)  rho(phi,Im a3) %s\n", e.modulation.c_str(),
                    e.mom.beta, e.report.rank, e.predicted_rank,
                    e.rho_phi_a3im ? fmt(*e.rho_phi_a3im, 3).c_str() : "n/a");
      }
      emit(cfg, "identifiability.json", identifiability_json(entries));
    } else if (*fleet_cmd) {
      const auto sats = generate_fleet(cfg.fleet.n_satellites, cfg.fleet.spread, derive_seed(cfg.seed, 31));
      std::string truth = "satellite_id,eps,phi,alpha3_re,alpha3_im\n";
      for (const auto& s : sats) {
        truth += std::to_string(s.id) + ',' + format_double(s.params.eps) + ',' + format_double(s.params.phi) +
                 ',' + format_double(s.params.alpha3.real()) + ',' + format_double(s.params.alpha3.imag()) + '\n';
      }
      emit(cfg, "fleet.csv", truth);
      const auto a = simulate_campaign(sats, cfg.protocol, derive_seed(cfg.seed, 32));
      const auto b = simulate_campaign(sats, cfg.protocol, derive_seed(cfg.seed, 33));
      emit(cfg, "features_a.csv", feature_table_csv(a));
      emit(cfg, "features_b.csv", feature_table_csv(b));
    } else if (*dr_cmd) {
      const fs::path p = dr_features.empty() ? fs::path(cfg.out_dir) / "features_a.csv" : fs::path(dr_features);
      const auto rows = parse_feature_table_csv(read_file(p));
      const auto t = balanced_dr(rows, cfg.protocol.n_bal, cfg.protocol.n_dr_trials, derive_seed(cfg.seed, 21));
      print_dr(t, nullptr);
      if (!t.excluded.empty()) std::cout << "excluded satellites: " << t.excluded.size() << '\n';
      const double beta = beta_of(cfg.protocol.burst_mode);
      print_weights(t.means(), beta);
      if (dr_paper) {
        std::cout << "measured DR table:\n";
        print_weights(measured_dr_values(), beta);
      }
      emit(cfg, "dr_table.csv", dr_table_csv(t));
    } else if (*auth_cmd) {
      const double beta = beta_of(cfg.protocol.burst_mode);
      AuthReport r;
      if (!enroll_csv.empty() || !probe_csv.empty()) {
        if (enroll_csv.empty() || probe_csv.empty()) throw ConfigError("--enroll and --probe go together");
        const auto a = parse_feature_table_csv(read_file(enroll_csv));
        const auto b = parse_feature_table_csv(read_file(probe_csv));
        r = evaluate_campaigns(a, b, cfg.protocol, beta, cfg.seed);
      } else if (!enroll_dir.empty() || !probe_dir.empty()) {
        if (enroll_dir.empty() || probe_dir.empty()) {
          throw ConfigError("--enroll-bursts and --probe-bursts go together");
        }
        const auto a = features_from_bursts(enroll_dir, cfg.protocol.pipeline);
        const auto b = features_from_bursts(probe_dir, cfg.protocol.pipeline);
        r = evaluate_campaigns(a, b, cfg.protocol, beta, cfg.seed);
      } else {
        r = run_auth_experiment(cfg.fleet, cfg.protocol, cfg.seed);
      }
      write_auth(cfg, r);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
