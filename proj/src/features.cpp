#include "satfp/features.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "satfp/error.hpp"
#include "satfp/io.hpp"
#include "satfp/stats.hpp"

namespace satfp {

namespace {

std::vector<double> phase_of_power(std::span<const cplx> r, int m) {
  std::vector<double> ph(r.size());
  for (std::size_t n = 0; n < r.size(); ++n) ph[n] = std::arg(std::pow(r[n], m));
  return stats::unwrap(ph);
}

std::vector<double> detrend(std::span<const double> y) {
  const auto f = stats::fit_line(y);
  std::vector<double> out(y.size());
  for (std::size_t n = 0; n < y.size(); ++n) {
    out[n] = y[n] - (f.intercept + f.slope * static_cast<double>(n));
  }
  return out;
}

}  // namespace

FeatureGroup feature_group(int k) {
  switch (k) {
    case kAmpVar:
    case kAmpRange:
    case kAmpKurtosis:
    case kAmpAcf1: return FeatureGroup::PA;
    case kPhaseAcf1:
    case kPhaseVar:
    case kCfo: return FeatureGroup::Oscillator;
    case kEvm: return FeatureGroup::Constellation;
    case kIqEps:
    case kIqPhi: return FeatureGroup::IQ;
    case kDcI:
    case kDcQ: return FeatureGroup::DC;
    case kPaCross: return FeatureGroup::Cross;
    default: throw ConfigError("feature_group: index out of range");
  }
}

int feature_index(std::string_view name) {
  for (int k = 0; k < kNumFeatures; ++k) {
    if (name == kFeatureNames[k]) return k;
  }
  throw ConfigError("unknown feature: " + std::string(name));
}

std::array<double, kNumFeatures> FeatureVector::as_array() const {
  return {amp_var, amp_range, amp_kurtosis, amp_acf1,   phase_acf1, phase_var, cfo_hat,
          evm,     iq_eps_hat, iq_phi_hat,  dc_i,       dc_q,       pa_cross};
}

FeatureVector FeatureVector::from_array(const std::array<double, kNumFeatures>& a) {
  FeatureVector f;
  f.amp_var = a[kAmpVar];
  f.amp_range = a[kAmpRange];
  f.amp_kurtosis = a[kAmpKurtosis];
  f.amp_acf1 = a[kAmpAcf1];
  f.phase_acf1 = a[kPhaseAcf1];
  f.phase_var = a[kPhaseVar];
  f.cfo_hat = a[kCfo];
  f.evm = a[kEvm];
  f.iq_eps_hat = a[kIqEps];
  f.iq_phi_hat = a[kIqPhi];
  f.dc_i = a[kDcI];
  f.dc_q = a[kDcQ];
  f.pa_cross = a[kPaCross];
  return f;
}

void PipelineConfig::check() const {
  if (n_known < 4) throw ConfigError("PipelineConfig: n_known must be >= 4");
  if (!(percentile_lo >= 0.0 && percentile_lo < percentile_hi && percentile_hi <= 100.0)) {
    throw ConfigError("PipelineConfig: need 0 <= percentile_lo < percentile_hi <= 100");
  }
  if (acf_lag < 1 || acf_lag >= n_known) throw ConfigError("PipelineConfig: acf_lag out of range");
  if (strip_power < 1) throw ConfigError("PipelineConfig: strip_power must be >= 1");
}

CfoResult remove_cfo(std::span<const cplx> samples, int strip_power) {
  if (samples.size() < 4) throw ConfigError("remove_cfo: need at least 4 samples");
  if (strip_power < 1) throw ConfigError("remove_cfo: strip_power must be >= 1");
  for (const auto& s : samples) {
    if (std::abs(s) == 0.0 || !std::isfinite(std::abs(s))) {
      throw NumericalError("remove_cfo: degenerate input (zero or non-finite sample)");
    }
  }
  const auto ph = phase_of_power(samples, strip_power);
  CfoResult out;
  out.cfo_hat = stats::fit_line(ph).slope / strip_power;
  out.samples.resize(samples.size());
  for (std::size_t n = 0; n < samples.size(); ++n) {
    out.samples[n] = samples[n] * std::polar(1.0, -out.cfo_hat * static_cast<double>(n));
  }
  return out;
}

std::vector<cplx> normalize_amplitude(std::span<const cplx> samples) {
  if (samples.empty()) throw ConfigError("normalize_amplitude: empty burst");
  double p = 0.0;
  for (const auto& s : samples) p += std::norm(s);
  p /= static_cast<double>(samples.size());
  if (!(p > 0.0) || !std::isfinite(p)) throw NumericalError("normalize_amplitude: zero power");
  const double g = 1.0 / std::sqrt(p);
  std::vector<cplx> out(samples.begin(), samples.end());
  for (auto& s : out) s *= g;
  return out;
}

FeatureVector extract_features(const Burst& b, const PipelineConfig& cfg) {
  cfg.check();
  const auto nk = static_cast<std::size_t>(cfg.n_known);
  if (b.samples.size() < nk) throw ConfigError("extract_features: burst shorter than n_known");

  const auto cfo = remove_cfo(std::span<const cplx>(b.samples.data(), nk), cfg.strip_power);
  const auto r = normalize_amplitude(cfo.samples);

  FeatureVector f;
  f.cfo_hat = cfo.cfo_hat;

  std::vector<double> amp(nk);
  for (std::size_t n = 0; n < nk; ++n) amp[n] = std::abs(r[n]);
  const double am = stats::mean(amp);
  f.amp_var = stats::variance(amp) / (am * am);
  f.amp_range = stats::percentile(amp, cfg.percentile_hi) - stats::percentile(amp, cfg.percentile_lo);
  const auto kurt = stats::excess_kurtosis(amp);
  const auto aacf = stats::acf(amp, cfg.acf_lag);
  if (!aacf) f.flags |= kFlagAmpDegenerate;
  f.amp_kurtosis = kurt.value_or(0.0);
  f.amp_acf1 = aacf.value_or(0.0);

  const auto psi = detrend(phase_of_power(r, cfg.strip_power));
  const auto pacf = stats::acf(psi, cfg.acf_lag);
  if (!pacf) f.flags |= kFlagPhaseDegenerate;
  f.phase_acf1 = pacf.value_or(0.0);
  f.phase_var = stats::variance(psi);
  f.pa_cross = stats::pearson(amp, psi).value_or(0.0);

  // Phase alignment: data-aided LS gain on known symbols, else M-th power.
  std::vector<cplx> aligned(nk);
  const bool have_known = b.known_symbols.size() >= nk;
  if (have_known) {
    cplx num{0.0, 0.0};
    double den = 0.0;
    for (std::size_t n = 0; n < nk; ++n) {
      num += r[n] * std::conj(b.known_symbols[n]);
      den += std::norm(b.known_symbols[n]);
    }
    if (!(den > 0.0) || std::abs(num) == 0.0) {
      throw NumericalError("extract_features: degenerate known-symbol gain");
    }
    const cplx g = num / den;
    double err = 0.0;
    double ref = 0.0;
    for (std::size_t n = 0; n < nk; ++n) {
      const cplx ideal = g * b.known_symbols[n];
      err += std::norm(r[n] - ideal);
      ref += std::norm(ideal);
    }
    f.evm = std::sqrt(err / ref);
    const cplx rot = std::polar(1.0, -std::arg(g));
    for (std::size_t n = 0; n < nk; ++n) aligned[n] = r[n] * rot;
  } else {
    f.flags |= kFlagNoKnownSymbols;
    const auto refc = make_constellation(cfg.blind_reference);
    const int m = cfg.strip_power;
    cplx sr{0.0, 0.0};
    for (const auto& s : r) sr += std::pow(s, m);
    cplx sc{0.0, 0.0};
    for (const auto& p : refc.points) sc += std::pow(p, m);
    const double offset = (std::arg(sr) - std::arg(sc)) / m;
    const cplx rot = std::polar(1.0, -offset);
    double err = 0.0;
    for (std::size_t n = 0; n < nk; ++n) {
      aligned[n] = r[n] * rot;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : refc.points) best = std::min(best, std::norm(aligned[n] - p));
      err += best;
    }
    f.evm = std::sqrt(err / static_cast<double>(nk));
  }

  // Image-component moment: E[r^2] / E[|r|^2] ~ 2 K2 ~ -eps + j phi.
  cplx m2{0.0, 0.0};
  double p2 = 0.0;
  cplx dc{0.0, 0.0};
  for (const auto& s : aligned) {
    m2 += s * s;
    p2 += std::norm(s);
    dc += s;
  }
  const cplx c = m2 / p2;
  f.iq_eps_hat = -c.real();
  f.iq_phi_hat = c.imag();
  dc /= static_cast<double>(nk);
  f.dc_i = dc.real();
  f.dc_q = dc.imag();
  return f;
}

std::string feature_table_csv(std::span<const FeatureRow> rows) {
  std::ostringstream os;
  os << "satellite_id,burst_index,snr_db";
  for (const auto* name : kFeatureNames) os << ',' << name;
  os << '\n';
  for (const auto& row : rows) {
    os << row.satellite_id << ',' << row.burst_index << ',' << format_double(row.snr_db);
    for (double v : row.features.as_array()) os << ',' << format_double(v);
    os << '\n';
  }
  return os.str();
}

}  // namespace satfp
