#include "basisrisk/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace basisrisk {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

KeyValueConfig parse_lines(std::istream& in, const std::string& origin) {
  KeyValueConfig kv;
  std::string line, section = "run";
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        fail(ErrorKind::parse, origin + ":" + std::to_string(lineno) +
                                   ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        fail(ErrorKind::parse, origin + ":" + std::to_string(lineno) + ": empty section");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::parse,
           origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      fail(ErrorKind::parse, origin + ":" + std::to_string(lineno) + ": empty key");
    kv.set(section, key, value);
  }
  return kv;
}

[[noreturn]] void bad_value(const std::string& sec, const std::string& key,
                            const std::string& got, const std::string& want) {
  fail(ErrorKind::config,
       "[" + sec + "] " + key + ": expected " + want + ", got '" + got + "'");
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open config file '" + path + "'");
  return parse_lines(in, path);
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text,
                                            const std::string& origin) {
  std::istringstream in(text);
  return parse_lines(in, origin);
}

void KeyValueConfig::set(const std::string& section, const std::string& key,
                         const std::string& value) {
  sections_[section][key] = value;
}

std::optional<std::string> KeyValueConfig::get(const std::string& section,
                                               const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return std::nullopt;
  auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

std::string KeyValueConfig::get_string(const std::string& sec, const std::string& key,
                                       const std::string& fallback) const {
  return get(sec, key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& sec, const std::string& key,
                                  double fallback) const {
  auto v = get(sec, key);
  if (!v) return fallback;
  const char* begin = v->c_str();
  char* end = nullptr;
  double d = std::strtod(begin, &end);
  if (end == begin || *end != '\0') bad_value(sec, key, *v, "a number");
  return d;
}

int KeyValueConfig::get_int(const std::string& sec, const std::string& key,
                            int fallback) const {
  auto v = get(sec, key);
  if (!v) return fallback;
  const char* begin = v->c_str();
  char* end = nullptr;
  long d = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0') bad_value(sec, key, *v, "an integer");
  return static_cast<int>(d);
}

std::uint64_t KeyValueConfig::get_u64(const std::string& sec, const std::string& key,
                                      std::uint64_t fallback) const {
  auto v = get(sec, key);
  if (!v) return fallback;
  const char* begin = v->c_str();
  char* end = nullptr;
  unsigned long long d = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0') bad_value(sec, key, *v, "an unsigned integer");
  return static_cast<std::uint64_t>(d);
}

bool KeyValueConfig::get_bool(const std::string& sec, const std::string& key,
                              bool fallback) const {
  auto v = get(sec, key);
  if (!v) return fallback;
  std::string s = *v;
  std::transform(s.begin(), s.end(), s.begin(), ::tolower);
  if (s == "on" || s == "true" || s == "yes" || s == "1") return true;
  if (s == "off" || s == "false" || s == "no" || s == "0") return false;
  bad_value(sec, key, *v, "on/off");
}

std::vector<double> parse_trigger_list(const std::string& text) {
  std::vector<double> out;
  auto parse_num = [&](const std::string& tok) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
      fail(ErrorKind::config, "bad trigger value '" + tok + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    // lo:hi:step
    std::istringstream ss(text);
    std::string a, b, c;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c))
      fail(ErrorKind::config, "trigger range must be lo:hi:step");
    double lo = parse_num(trim(a)), hi = parse_num(trim(b)), step = parse_num(trim(c));
    if (!(step > 0.0) || hi < lo)
      fail(ErrorKind::config, "trigger range must have lo <= hi and step > 0");
    for (double t = lo; t <= hi + 1e-9; t += step) out.push_back(require_grid_trigger(t));
  } else {
    std::istringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (tok.empty()) continue;
      out.push_back(require_grid_trigger(parse_num(tok)));
    }
  }
  if (out.empty()) fail(ErrorKind::config, "empty trigger list");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

RunConfig load_run_config(const KeyValueConfig& kv) {
  RunConfig cfg;
  cfg.raw = kv;

  auto seed = kv.get("run", "seed");
  if (!seed)
    fail(ErrorKind::config, "[run] seed is mandatory (pass --seed or set it in the config)");
  cfg.seed = kv.get_u64("run", "seed", 0);
  cfg.workers = kv.get_int("run", "workers", 1);
  if (cfg.workers < 1) fail(ErrorKind::config, "[run] workers must be >= 1");
  cfg.out_dir = kv.get_string("run", "out", "out");

  std::string mode = kv.get_string("input", "mode", "synthetic");
  if (mode == "synthetic") cfg.input_mode = InputMode::synthetic;
  else if (mode == "file") cfg.input_mode = InputMode::file;
  else bad_value("input", "mode", mode, "synthetic|file");
  cfg.input_path = kv.get_string("input", "path", "");
  if (cfg.input_mode == InputMode::file && cfg.input_path.empty())
    fail(ErrorKind::config, "[input] path required when mode = file");
  cfg.persist_panel = kv.get_bool("input", "persist_panel", false);

  std::string preset = kv.get_string("synthetic", "preset", "none");
  if (preset == "archetype") cfg.archetype_preset = true;
  else if (preset != "none") bad_value("synthetic", "preset", preset, "none|archetype");
  cfg.synthetic.n_counties = kv.get_int("synthetic", "n_counties", 4);
  cfg.synthetic.fields_per_county = kv.get_int("synthetic", "fields_per_county", 50);
  cfg.synthetic.n_years = kv.get_int("synthetic", "n_years", 30);
  cfg.synthetic.crop = parse_crop(kv.get_string("synthetic", "crop", "corn"));
  cfg.synthetic.crop_mean = kv.get_double("synthetic", "crop_mean", 162.0);
  cfg.synthetic.county_shock_sd = kv.get_double("synthetic", "county_shock_sd", 14.0);
  cfg.synthetic.temporal_sd_range = {kv.get_double("synthetic", "temporal_sd_lo", 4.0),
                                     kv.get_double("synthetic", "temporal_sd_hi", 12.0)};
  cfg.synthetic.spatial_sd_range = {kv.get_double("synthetic", "spatial_sd_lo", 3.0),
                                    kv.get_double("synthetic", "spatial_sd_hi", 12.0)};
  cfg.synthetic.beta_range = {kv.get_double("synthetic", "beta_lo", 0.8),
                              kv.get_double("synthetic", "beta_hi", 1.2)};
  cfg.synthetic.seed = cfg.seed;

  cfg.min_years = kv.get_int("filter", "min_years", 8);
  if (cfg.min_years < 1) fail(ErrorKind::config, "[filter] min_years must be >= 1");

  bool sim_enabled = kv.get_bool("simulate", "enabled", true);
  cfg.eval_mode = sim_enabled ? EvalMode::simulated : EvalMode::raw;
  std::string source = kv.get_string("simulate", "source", "reference_means");
  if (source == "reference_means") cfg.sim.source = SimSource::reference_means;
  else if (source == "ar2_extension") cfg.sim.source = SimSource::ar2_extension;
  else bad_value("simulate", "source", source, "reference_means|ar2_extension");
  cfg.sim.n_years = kv.get_int("simulate", "n_years", 0);
  cfg.sim.corn_bounds = {kv.get_double("simulate", "corn_lo", 10.0),
                         kv.get_double("simulate", "corn_hi", 350.0)};
  cfg.sim.soy_bounds = {kv.get_double("simulate", "soy_lo", 10.0),
                        kv.get_double("simulate", "soy_hi", 100.0)};
  cfg.sim.seed = cfg.seed;
  cfg.sim.validate();
  cfg.persist_simulated = kv.get_bool("simulate", "persist", false);
  if (kv.get_bool("simulate", "common_year_bootstrap", false))
    fail(ErrorKind::config,
         "[simulate] common_year_bootstrap is a stub for future investigation "
         "and cannot be enabled");

  cfg.plan.area_trigger = require_grid_trigger(
      kv.get_double("contracts", "area_trigger", 0.90));
  if (auto grid = kv.get("contracts", "grid"))
    cfg.plan.farm_triggers = parse_trigger_list(*grid);
  std::string basis = kv.get_string("contracts", "premium_basis", "field_fair");
  if (basis == "field_fair") cfg.plan.basis = PremiumBasis::field_fair;
  else if (basis == "county_fair") cfg.plan.basis = PremiumBasis::county_fair;
  else if (basis == "subsidized") {
    cfg.plan.basis = PremiumBasis::field_fair;
    cfg.plan.subsidized = true;
  } else {
    bad_value("contracts", "premium_basis", basis, "field_fair|county_fair|subsidized");
  }
  if (kv.get_bool("contracts", "subsidy", false)) cfg.plan.subsidized = true;
  bool include_cat = kv.get_bool("contracts", "include_cat", false);
  cfg.plan.schedule = SubsidySchedule::defaults(include_cat);
  cfg.plan.subsidy_base = cfg.plan.basis;

  // [subsidy] farm_50 = 0.67 style overrides on top of the built-in schedule.
  if (auto sec = kv.sections().find("subsidy"); sec != kv.sections().end()) {
    for (const auto& [key, value] : sec->second) {
      Scheme scheme;
      std::string rest;
      if (key.rfind("farm_", 0) == 0) {
        scheme = Scheme::farm;
        rest = key.substr(5);
      } else if (key.rfind("area_", 0) == 0) {
        scheme = Scheme::area;
        rest = key.substr(5);
      } else {
        bad_value("subsidy", key, value, "keys of the form farm_<pct> or area_<pct>");
      }
      int pct = 0;
      try {
        std::size_t pos = 0;
        pct = std::stoi(rest, &pos);
        if (pos != rest.size()) throw std::invalid_argument(rest);
      } catch (...) {
        bad_value("subsidy", key, value, "a coverage percentage in the key");
      }
      double rate = kv.get_double("subsidy", key, 0.0);
      if (rate < 0.0 || rate > 1.0)
        fail(ErrorKind::config, "[subsidy] " + key + ": rate must be in [0, 1]");
      cfg.plan.schedule.set(scheme, pct / 100.0, rate);
    }
  }

  std::string pk = kv.get_string("preference", "kind", "crra");
  if (pk == "crra") cfg.pref.kind = PreferenceKind::crra;
  else if (pk == "cpt") cfg.pref.kind = PreferenceKind::cpt;
  else bad_value("preference", "kind", pk, "crra|cpt");
  cfg.pref.rho = kv.get_double("preference", "rho", 1.5);
  cfg.pref.cpt.alpha_gain = kv.get_double("preference", "cpt_alpha", 0.88);
  cfg.pref.cpt.beta_loss = kv.get_double("preference", "cpt_beta", 0.88);
  cfg.pref.cpt.lambda = kv.get_double("preference", "cpt_lambda", 2.25);
  cfg.pref.cpt.gamma_gain = kv.get_double("preference", "cpt_gamma_gain", 0.61);
  cfg.pref.cpt.gamma_loss = kv.get_double("preference", "cpt_gamma_loss", 0.69);
  std::string rr = kv.get_string("preference", "cpt_reference", "r1");
  if (rr == "r1") cfg.pref.reference_rule = ReferenceRule::r1_expected_plus_premium;
  else if (rr == "r2") cfg.pref.reference_rule = ReferenceRule::r2_expected_only;
  else bad_value("preference", "cpt_reference", rr, "r1|r2");
  cfg.pref.validate();

  cfg.eval_opts.fnp_county_frac = kv.get_double("evaluate", "fnp_county_frac", 0.9);
  cfg.eval_opts.fnp_field_frac = kv.get_double("evaluate", "fnp_field_frac", 0.9);
  cfg.eval_opts.share_strict = kv.get_bool("evaluate", "share_strict", false);
  cfg.eval_opts.weight_by_years = kv.get_bool("evaluate", "weight_by_years", false);

  cfg.report.grid_resolution = kv.get_int("report", "grid_resolution", 25);
  if (cfg.report.grid_resolution < 2)
    fail(ErrorKind::config, "[report] grid_resolution must be >= 2");
  std::string axis = kv.get_string("report", "temporal_axis", "cv");
  if (axis == "cv") cfg.report.temporal_axis = TemporalAxis::cv;
  else if (axis == "variance") cfg.report.temporal_axis = TemporalAxis::variance;
  else bad_value("report", "temporal_axis", axis, "cv|variance");

  if (auto sizes = kv.get("sweep", "sizes")) {
    cfg.sweep_sizes.clear();
    std::istringstream ss(*sizes);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (tok.empty()) continue;
      int n = 0;
      try {
        n = std::stoi(tok);
      } catch (...) {
        bad_value("sweep", "sizes", tok, "an integer list");
      }
      if (n < 8) fail(ErrorKind::config, "[sweep] sizes must all be >= 8");
      cfg.sweep_sizes.push_back(n);
    }
    if (cfg.sweep_sizes.empty()) fail(ErrorKind::config, "[sweep] sizes is empty");
  }

  return cfg;
}

}  // namespace basisrisk
