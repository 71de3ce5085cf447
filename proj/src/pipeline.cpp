#include "basisrisk/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "basisrisk/contracts.hpp"
#include "basisrisk/errors.hpp"
#include "basisrisk/evaluate.hpp"
#include "basisrisk/panel.hpp"
#include "basisrisk/parallel.hpp"
#include "basisrisk/regression.hpp"
#include "basisrisk/report.hpp"
#include "basisrisk/sha256.hpp"
#include "basisrisk/simulate.hpp"

namespace fs = std::filesystem;

namespace basisrisk {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& tok, const std::string& where) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    fail(ErrorKind::parse, where + ": bad number '" + tok + "'");
  return v;
}

int parse_int(const std::string& tok, const std::string& where) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0')
    fail(ErrorKind::parse, where + ": bad integer '" + tok + "'");
  return static_cast<int>(v);
}

struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
  int require(const std::string& name) const {
    int c = col(name);
    if (c < 0) fail(ErrorKind::parse, path + ": missing column '" + name + "'");
    return c;
  }
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open '" + path + "'");
  CsvTable t;
  t.path = path;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::parse, path + ": empty file");
  t.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split_line(line);
    if (row.size() != t.header.size())
      fail(ErrorKind::parse, path + ": row has " + std::to_string(row.size()) +
                                 " columns, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

// Tracks the files a stage writes so a failing stage can remove its partial
// outputs before the error surfaces.
class StageFiles {
 public:
  explicit StageFiles(std::string dir) : dir_(std::move(dir)) {}

  std::string path(const std::string& name) const { return dir_ + "/" + name; }

  void write_text(const std::string& name, const std::string& content) {
    names_.push_back(name);
    std::ofstream out(path(name), std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write '" + path(name) + "'");
    out << content;
    out.flush();
    if (!out) fail(ErrorKind::io, "write failed on '" + path(name) + "'");
  }

  void write_panel(const std::string& name, const Panel& panel) {
    names_.push_back(name);
    std::string side = panel_sidecar_path(name);
    names_.push_back(side);
    save_panel(panel, path(name));
  }

  void discard() {
    std::error_code ec;
    for (const auto& n : names_) fs::remove(path(n), ec);
    names_.clear();
  }

  const std::vector<std::string>& names() const { return names_; }

 private:
  std::string dir_;
  std::vector<std::string> names_;
};

template <typename Fn>
void run_stage(const char* stage, const std::string& dir,
               std::vector<std::string>* all_names, Fn&& fn) {
  StageFiles files(dir);
  try {
    fn(files);
  } catch (const Error& e) {
    files.discard();
    throw Error(e.kind(), std::string("[stage:") + stage + "] " + e.what());
  } catch (const std::exception& e) {
    files.discard();
    throw Error(ErrorKind::io, std::string("[stage:") + stage + "] " + e.what());
  }
  if (all_names)
    for (const auto& n : files.names()) all_names->push_back(n);
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    fail(ErrorKind::io, "cannot create output directory '" + dir + "': " + ec.message());
}

Panel acquire_panel(const RunConfig& cfg) {
  if (cfg.input_mode == InputMode::file) return load_panel(cfg.input_path);
  if (cfg.archetype_preset)
    return archetype_panel(cfg.synthetic.fields_per_county, cfg.synthetic.n_years,
                           cfg.synthetic.seed, cfg.synthetic.crop, cfg.synthetic.crop_mean);
  return generate_synthetic_panel(cfg.synthetic);
}

Panel filtered_base_panel(const RunConfig& cfg) {
  Panel p = filter_min_years(acquire_panel(cfg), cfg.min_years);
  if (p.fields.empty())
    fail(ErrorKind::insufficient_data,
         "no field series left after the min-years filter (min_years=" +
             std::to_string(cfg.min_years) + ")");
  return p;
}

std::vector<RegressionFit> fit_panel_fields(const Panel& panel, int min_overlap,
                                            int workers) {
  std::vector<RegressionFit> fits(panel.fields.size());
  parallel_for(panel.fields.size(), workers, [&](std::size_t i) {
    const auto& f = panel.fields[i];
    fits[i] = fit_field_regression(f, panel.require_county(f.county_id, f.crop),
                                   min_overlap);
  });
  return fits;
}

// Variability stats per county of the panel being evaluated; counties with a
// single field carry no spatial information and are skipped.
std::vector<CountyStats> stats_for_panel(const Panel& panel, double area_trigger) {
  std::map<std::pair<std::string, Crop>, int> field_counts;
  for (const auto& f : panel.fields) ++field_counts[{f.county_id, f.crop}];
  std::vector<CountyStats> out;
  for (const auto& c : panel.counties) {
    auto it = field_counts.find({c.county_id, c.crop});
    if (it == field_counts.end() || it->second < 2) continue;
    IndemnitySeries ind = area_indemnity(c, area_trigger);
    out.push_back(county_stats(panel, c.county_id, c.crop, ind.indemnities));
  }
  return out;
}

std::vector<CountyAggregate> aggregate_all(const std::vector<FieldEvaluation>& evals,
                                           const EvaluateOptions& opts) {
  std::map<std::pair<std::string, Crop>, std::vector<FieldEvaluation>> groups;
  for (const auto& ev : evals) groups[{ev.county_id, ev.crop}].push_back(ev);
  std::vector<CountyAggregate> out;
  for (const auto& [key, group] : groups) {
    bool any_clean = std::any_of(group.begin(), group.end(),
                                 [](const FieldEvaluation& e) { return !e.flagged; });
    if (!any_clean) continue;  // county yields no usable rows; evals keep the flags
    out.push_back(aggregate_county(group, opts));
  }
  return out;
}

// The reversal pairs aggregates with stats; each side may cover counties the
// other lacks (1-field counties have no stats, all-flagged ones no aggregate).
ReversalReport reversal_for(const std::vector<CountyAggregate>& aggs,
                            const std::vector<CountyStats>& stats,
                            const ReportOptions& opts) {
  std::map<std::pair<std::string, Crop>, const CountyStats*> by_key;
  for (const auto& s : stats) by_key[{s.county_id, s.crop}] = &s;
  std::vector<CountyAggregate> paired_aggs;
  std::vector<CountyStats> paired_stats;
  for (const auto& a : aggs) {
    auto it = by_key.find({a.county_id, a.crop});
    if (it == by_key.end()) continue;
    paired_aggs.push_back(a);
    paired_stats.push_back(*it->second);
  }
  return reversal_report(paired_aggs, paired_stats, opts);
}

std::string fits_csv(const std::vector<RegressionFit>& fits) {
  std::ostringstream out;
  out << "field_id,crop,alpha,beta,r2,sigma2_resid,n_obs\n";
  for (const auto& f : fits)
    out << f.field_id << ',' << crop_name(f.crop) << ',' << fmt(f.alpha) << ','
        << fmt(f.beta) << ',' << fmt(f.r2) << ',' << fmt(f.sigma2_resid) << ','
        << f.n_obs << '\n';
  return out.str();
}

std::string county_stats_csv(const std::vector<CountyStats>& stats) {
  std::ostringstream out;
  out << "county_id,crop,n_fields,temporal_variability,temporal_cv,"
         "spatial_variability,critical_beta,indemnity_var\n";
  for (const auto& s : stats)
    out << s.county_id << ',' << crop_name(s.crop) << ',' << s.n_fields << ','
        << fmt(s.temporal_variability) << ',' << fmt(s.temporal_cv) << ','
        << fmt(s.spatial_variability) << ',' << fmt(s.critical_beta) << ','
        << fmt(s.indemnity_var) << '\n';
  return out.str();
}

std::string trigger_col(double trigger) {
  return "w_farm_" + std::to_string(static_cast<int>(std::lround(trigger * 100.0)));
}

std::string field_evals_csv(const std::vector<FieldEvaluation>& evals,
                            const std::vector<double>& grid) {
  std::ostringstream out;
  out << "field_id,county_id,crop,pref,n_years,mean_yield,min_rel_yield,"
         "premium_area,w_none,w_area";
  for (double t : grid) out << ',' << trigger_col(t);
  out << ",rp_none,rp_area,rp_reduction,farm_equiv,fnp,flagged,flag_reason\n";
  for (const auto& ev : evals) {
    out << ev.field_id << ',' << ev.county_id << ',' << crop_name(ev.crop) << ','
        << preference_kind_name(ev.pref_kind) << ',' << ev.n_years << ','
        << fmt(ev.mean_yield) << ',' << fmt(ev.min_rel_yield) << ','
        << fmt(ev.premium_area) << ',' << fmt(ev.w_none) << ',' << fmt(ev.w_area);
    for (std::size_t i = 0; i < grid.size(); ++i)
      out << ',' << (i < ev.w_farm.size() ? fmt(ev.w_farm[i]) : "nan");
    out << ',' << fmt(ev.rp_none) << ',' << fmt(ev.rp_area) << ','
        << fmt(ev.rp_reduction) << ',' << ev.farm_equiv.encode() << ','
        << fmt(ev.fnp) << ',' << (ev.flagged ? 1 : 0) << ',' << ev.flag_reason
        << '\n';
  }
  return out.str();
}

std::string aggregates_csv(const std::vector<CountyAggregate>& aggs) {
  std::ostringstream out;
  out << "county_id,crop,n_fields,n_flagged,median_farm_equiv,share_ge_85,"
         "share_ge_50,share_ge_90,share_zero,share_undefined,mean_gain_vs_none,"
         "mean_rp_reduction\n";
  for (const auto& a : aggs)
    out << a.county_id << ',' << crop_name(a.crop) << ',' << a.n_fields << ','
        << a.n_flagged << ',' << a.median_farm_equiv.encode() << ','
        << fmt(a.share_ge_85) << ',' << fmt(a.share_ge_50) << ','
        << fmt(a.share_ge_90) << ',' << fmt(a.share_zero) << ','
        << fmt(a.share_undefined) << ',' << fmt(a.mean_gain_vs_none) << ','
        << fmt(a.mean_rp_reduction) << '\n';
  return out.str();
}

std::string reversal_rows_csv(const ReversalReport& rep) {
  std::ostringstream out;
  out << "county_id,crop,temporal_variability,temporal_cv,spatial_variability,"
         "mean_gain_vs_none,share_ge_85\n";
  for (const auto& r : rep.rows)
    out << r.county_id << ',' << crop_name(r.crop) << ','
        << fmt(r.temporal_variability) << ',' << fmt(r.temporal_cv) << ','
        << fmt(r.spatial_variability) << ',' << fmt(r.mean_gain_vs_none) << ','
        << fmt(r.share_ge_85) << '\n';
  return out.str();
}

std::string reversal_grid_csv(const ReversalReport& rep) {
  std::ostringstream out;
  out << "gx,gy,temporal,spatial,gain,share_ge_85\n";
  for (const auto& g : rep.grid)
    out << fmt(g.gx) << ',' << fmt(g.gy) << ',' << fmt(g.temporal) << ','
        << fmt(g.spatial) << ',' << fmt(g.gain) << ',' << fmt(g.share_ge_85)
        << '\n';
  return out.str();
}

std::string reversal_corr_csv(const ReversalReport& rep) {
  std::ostringstream out;
  out << "corr_gain_temporal,corr_gain_spatial,corr_share85_temporal,"
         "corr_share85_spatial,interpolated\n";
  out << fmt(rep.corr_gain_temporal) << ',' << fmt(rep.corr_gain_spatial) << ','
      << fmt(rep.corr_share85_temporal) << ',' << fmt(rep.corr_share85_spatial)
      << ',' << (rep.interpolated ? 1 : 0) << '\n';
  return out.str();
}

std::string sweep_rows_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "n_years,county_id,crop,n_fields,share_ge_85,share_ge_90\n";
  for (const auto& r : rows)
    out << r.n_years << ',' << r.county_id << ',' << crop_name(r.crop) << ','
        << r.n_fields << ',' << fmt(r.share_ge_85) << ',' << fmt(r.share_ge_90)
        << '\n';
  return out.str();
}

std::string sweep_summary_csv(const std::vector<SweepSummary>& summary) {
  std::ostringstream out;
  out << "n_years,avg_share_ge_85,avg_share_ge_90\n";
  for (const auto& s : summary)
    out << s.n_years << ',' << fmt(s.avg_share_ge_85) << ','
        << fmt(s.avg_share_ge_90) << '\n';
  return out.str();
}

std::string manifest_json(const RunConfig& cfg, const Panel* base,
                          const Panel* evaluated,
                          const std::vector<std::pair<std::string, std::string>>& hashes) {
  nlohmann::json j;
  j["config"] = nlohmann::json::object();
  for (const auto& [section, entries] : cfg.raw.sections()) {
    for (const auto& [key, value] : entries) j["config"][section][key] = value;
  }
  j["seed"] = cfg.seed;
  if (base) {
    j["panel"]["provenance"] = provenance_name(base->provenance);
    j["panel"]["n_fields"] = base->fields.size();
    j["panel"]["n_counties"] = base->counties.size();
  }
  if (evaluated) {
    j["evaluated"]["provenance"] = provenance_name(evaluated->provenance);
    j["evaluated"]["n_fields"] = evaluated->fields.size();
    j["evaluated"]["n_counties"] = evaluated->counties.size();
  }
  j["outputs"] = nlohmann::json::object();
  for (const auto& [name, digest] : hashes) j["outputs"][name] = "sha256:" + digest;
  return j.dump(2) + "\n";
}

std::vector<std::pair<std::string, std::string>> hash_outputs(
    const std::string& dir, const std::vector<std::string>& names) {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(names.size());
  for (const auto& n : names) out.emplace_back(n, Sha256::of_file(dir + "/" + n));
  return out;
}

std::vector<RegressionFit> read_fits_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  int c_field = t.require("field_id"), c_crop = t.require("crop");
  int c_alpha = t.require("alpha"), c_beta = t.require("beta");
  int c_r2 = t.require("r2"), c_sig = t.require("sigma2_resid");
  int c_n = t.require("n_obs");
  std::vector<RegressionFit> fits;
  fits.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    RegressionFit f;
    f.field_id = row[c_field];
    f.crop = parse_crop(row[c_crop]);
    f.alpha = parse_double(row[c_alpha], path);
    f.beta = parse_double(row[c_beta], path);
    f.r2 = parse_double(row[c_r2], path);
    f.sigma2_resid = parse_double(row[c_sig], path);
    f.n_obs = parse_int(row[c_n], path);
    fits.push_back(std::move(f));
  }
  return fits;
}

std::vector<CountyStats> read_county_stats_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  int c_county = t.require("county_id"), c_crop = t.require("crop");
  int c_n = t.require("n_fields"), c_tv = t.require("temporal_variability");
  int c_cv = t.require("temporal_cv"), c_sv = t.require("spatial_variability");
  int c_cb = t.require("critical_beta"), c_iv = t.require("indemnity_var");
  std::vector<CountyStats> stats;
  stats.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    CountyStats s;
    s.county_id = row[c_county];
    s.crop = parse_crop(row[c_crop]);
    s.n_fields = parse_int(row[c_n], path);
    s.temporal_variability = parse_double(row[c_tv], path);
    s.temporal_cv = parse_double(row[c_cv], path);
    s.spatial_variability = parse_double(row[c_sv], path);
    s.critical_beta = parse_double(row[c_cb], path);
    s.indemnity_var = parse_double(row[c_iv], path);
    stats.push_back(std::move(s));
  }
  return stats;
}

PreferenceKind parse_pref_kind(const std::string& s, const std::string& where) {
  if (s == "crra") return PreferenceKind::crra;
  if (s == "cpt") return PreferenceKind::cpt;
  fail(ErrorKind::parse, where + ": unknown preference kind '" + s + "'");
}

std::vector<FieldEvaluation> read_field_evals_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  int c_field = t.require("field_id"), c_county = t.require("county_id");
  int c_crop = t.require("crop"), c_pref = t.require("pref");
  int c_ny = t.require("n_years"), c_mean = t.require("mean_yield");
  int c_minrel = t.require("min_rel_yield"), c_prem = t.require("premium_area");
  int c_wnone = t.require("w_none"), c_warea = t.require("w_area");
  int c_rpn = t.require("rp_none"), c_rpa = t.require("rp_area");
  int c_rpr = t.require("rp_reduction"), c_fe = t.require("farm_equiv");
  int c_fnp = t.require("fnp"), c_flag = t.require("flagged");
  int c_reason = t.require("flag_reason");
  std::vector<std::pair<int, int>> farm_cols;  // (trigger pct, column)
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    const std::string& h = t.header[i];
    if (h.rfind("w_farm_", 0) == 0)
      farm_cols.emplace_back(parse_int(h.substr(7), path), static_cast<int>(i));
  }
  std::sort(farm_cols.begin(), farm_cols.end());
  std::vector<FieldEvaluation> evals;
  evals.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    FieldEvaluation ev;
    ev.field_id = row[c_field];
    ev.county_id = row[c_county];
    ev.crop = parse_crop(row[c_crop]);
    ev.pref_kind = parse_pref_kind(row[c_pref], path);
    ev.n_years = parse_int(row[c_ny], path);
    ev.mean_yield = parse_double(row[c_mean], path);
    ev.min_rel_yield = parse_double(row[c_minrel], path);
    ev.premium_area = parse_double(row[c_prem], path);
    ev.w_none = parse_double(row[c_wnone], path);
    ev.w_area = parse_double(row[c_warea], path);
    for (const auto& [pct, col] : farm_cols)
      ev.w_farm.push_back(parse_double(row[col], path));
    ev.rp_none = parse_double(row[c_rpn], path);
    ev.rp_area = parse_double(row[c_rpa], path);
    ev.rp_reduction = parse_double(row[c_rpr], path);
    ev.farm_equiv = FarmEquiv::decode(row[c_fe]);
    ev.fnp = parse_double(row[c_fnp], path);
    ev.flagged = parse_int(row[c_flag], path) != 0;
    ev.flag_reason = row[c_reason];
    evals.push_back(std::move(ev));
  }
  return evals;
}

// Shared by the staged subcommands: where the base panel comes from when a
// stage runs on its own.
Panel stage_base_panel(const RunConfig& cfg) {
  if (cfg.input_mode == InputMode::file) return load_panel(cfg.input_path);
  std::string persisted = cfg.out_dir + "/" + stage_file::panel;
  if (fs::exists(persisted)) return load_panel(persisted);
  return acquire_panel(cfg);
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);

  PipelineResult res;
  res.out_dir = cfg.out_dir;
  std::vector<std::string> names;

  Panel base;
  run_stage("input", cfg.out_dir, &names, [&](StageFiles& f) {
    base = filtered_base_panel(cfg);
    if (cfg.persist_panel) f.write_panel(stage_file::panel, base);
  });

  std::vector<RegressionFit> fits;
  run_stage("fit", cfg.out_dir, &names, [&](StageFiles& f) {
    fits = fit_panel_fields(base, cfg.min_years, cfg.workers);
    f.write_text(stage_file::fits, fits_csv(fits));
  });

  Panel eval_panel;
  run_stage("simulate", cfg.out_dir, &names, [&](StageFiles& f) {
    if (cfg.eval_mode == EvalMode::simulated) {
      eval_panel = simulate_panel(base, fits, cfg.sim, cfg.workers);
      if (cfg.persist_simulated) f.write_panel(stage_file::simulated, eval_panel);
    } else {
      eval_panel = base;
    }
  });

  std::vector<CountyStats> stats;
  std::vector<FieldEvaluation> evals;
  run_stage("evaluate", cfg.out_dir, &names, [&](StageFiles& f) {
    stats = stats_for_panel(eval_panel, cfg.plan.area_trigger);
    f.write_text(stage_file::county_stats, county_stats_csv(stats));
    evals = evaluate_panel(eval_panel, cfg.plan, cfg.pref, cfg.eval_opts, cfg.workers);
    f.write_text(stage_file::field_evals, field_evals_csv(evals, cfg.plan.farm_triggers));
  });

  std::vector<CountyAggregate> aggs;
  run_stage("aggregate", cfg.out_dir, &names, [&](StageFiles& f) {
    aggs = aggregate_all(evals, cfg.eval_opts);
    f.write_text(stage_file::county_aggregates, aggregates_csv(aggs));
  });

  run_stage("report", cfg.out_dir, &names, [&](StageFiles& f) {
    ReversalReport rep = reversal_for(aggs, stats, cfg.report);
    f.write_text(stage_file::reversal_rows, reversal_rows_csv(rep));
    f.write_text(stage_file::reversal_grid, reversal_grid_csv(rep));
    f.write_text(stage_file::reversal_corr, reversal_corr_csv(rep));
  });

  run_stage("manifest", cfg.out_dir, nullptr, [&](StageFiles& f) {
    res.outputs = hash_outputs(cfg.out_dir, names);
    f.write_text(stage_file::manifest,
                 manifest_json(cfg, &base, &eval_panel, res.outputs));
  });
  return res;
}

void stage_generate(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  run_stage("generate", cfg.out_dir, nullptr, [&](StageFiles& f) {
    if (cfg.input_mode == InputMode::file)
      fail(ErrorKind::config, "generate requires [input] mode = synthetic");
    f.write_panel(stage_file::panel, acquire_panel(cfg));
  });
}

void stage_fit(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  run_stage("fit", cfg.out_dir, nullptr, [&](StageFiles& f) {
    Panel base = filter_min_years(stage_base_panel(cfg), cfg.min_years);
    if (base.fields.empty())
      fail(ErrorKind::insufficient_data, "no field series left after the min-years filter");
    f.write_text(stage_file::fits, fits_csv(fit_panel_fields(base, cfg.min_years, cfg.workers)));
  });
}

void stage_simulate(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  run_stage("simulate", cfg.out_dir, nullptr, [&](StageFiles& f) {
    std::string fits_path = cfg.out_dir + "/" + stage_file::fits;
    if (!fs::exists(fits_path))
      fail(ErrorKind::config, "no '" + fits_path + "'; run the fit stage first");
    Panel base = filter_min_years(stage_base_panel(cfg), cfg.min_years);
    if (base.fields.empty())
      fail(ErrorKind::insufficient_data, "no field series left after the min-years filter");
    std::vector<RegressionFit> fits = read_fits_csv(fits_path);
    f.write_panel(stage_file::simulated, simulate_panel(base, fits, cfg.sim, cfg.workers));
  });
}

void stage_evaluate(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  run_stage("evaluate", cfg.out_dir, nullptr, [&](StageFiles& f) {
    Panel eval_panel;
    if (cfg.eval_mode == EvalMode::simulated) {
      std::string sim_path = cfg.out_dir + "/" + stage_file::simulated;
      if (!fs::exists(sim_path))
        fail(ErrorKind::config, "no '" + sim_path +
                                    "'; run the simulate stage first or disable [simulate] enabled");
      eval_panel = load_panel(sim_path);
    } else {
      eval_panel = filter_min_years(stage_base_panel(cfg), cfg.min_years);
      if (eval_panel.fields.empty())
        fail(ErrorKind::insufficient_data, "no field series left after the min-years filter");
    }
    f.write_text(stage_file::county_stats,
                 county_stats_csv(stats_for_panel(eval_panel, cfg.plan.area_trigger)));
    auto evals = evaluate_panel(eval_panel, cfg.plan, cfg.pref, cfg.eval_opts, cfg.workers);
    f.write_text(stage_file::field_evals, field_evals_csv(evals, cfg.plan.farm_triggers));
  });
}

void stage_aggregate(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  run_stage("aggregate", cfg.out_dir, nullptr, [&](StageFiles& f) {
    std::string evals_path = cfg.out_dir + "/" + stage_file::field_evals;
    if (!fs::exists(evals_path))
      fail(ErrorKind::config, "no '" + evals_path + "'; run the evaluate stage first");
    auto evals = read_field_evals_csv(evals_path);
    auto aggs = aggregate_all(evals, cfg.eval_opts);
    f.write_text(stage_file::county_aggregates, aggregates_csv(aggs));

    std::string stats_path = cfg.out_dir + "/" + stage_file::county_stats;
    if (!fs::exists(stats_path))
      fail(ErrorKind::config, "no '" + stats_path + "'; run the evaluate stage first");
    ReversalReport rep = reversal_for(aggs, read_county_stats_csv(stats_path), cfg.report);
    f.write_text(stage_file::reversal_rows, reversal_rows_csv(rep));
    f.write_text(stage_file::reversal_grid, reversal_grid_csv(rep));
    f.write_text(stage_file::reversal_corr, reversal_corr_csv(rep));
  });
}

SweepResult run_sample_size_sweep(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  std::vector<std::string> names;

  Panel base;
  run_stage("input", cfg.out_dir, &names, [&](StageFiles& f) {
    base = filtered_base_panel(cfg);
    if (cfg.persist_panel) f.write_panel(stage_file::panel, base);
  });

  std::vector<RegressionFit> fits;
  run_stage("fit", cfg.out_dir, &names, [&](StageFiles& f) {
    fits = fit_panel_fields(base, cfg.min_years, cfg.workers);
    f.write_text(stage_file::fits, fits_csv(fits));
  });

  SweepResult result;
  run_stage("sweep", cfg.out_dir, &names, [&](StageFiles& f) {
    for (int horizon : cfg.sweep_sizes) {
      SimulationSpec spec = cfg.sim;
      spec.source = SimSource::ar2_extension;
      spec.n_years = horizon;
      Panel sim = simulate_panel(base, fits, spec, cfg.workers);
      auto evals = evaluate_panel(sim, cfg.plan, cfg.pref, cfg.eval_opts, cfg.workers);
      auto aggs = aggregate_all(evals, cfg.eval_opts);
      if (aggs.empty())
        fail(ErrorKind::insufficient_data,
             "no county aggregates at horizon " + std::to_string(horizon));
      double s85 = 0.0, s90 = 0.0;
      for (const auto& a : aggs) {
        result.rows.push_back({horizon, a.county_id, a.crop, a.n_fields,
                               a.share_ge_85, a.share_ge_90});
        s85 += a.share_ge_85;
        s90 += a.share_ge_90;
      }
      result.summary.push_back({horizon, s85 / static_cast<double>(aggs.size()),
                                s90 / static_cast<double>(aggs.size())});
    }
    f.write_text(stage_file::sweep_results, sweep_rows_csv(result.rows));
    f.write_text(stage_file::sweep_summary, sweep_summary_csv(result.summary));
  });

  run_stage("manifest", cfg.out_dir, nullptr, [&](StageFiles& f) {
    f.write_text(stage_file::manifest,
                 manifest_json(cfg, &base, nullptr, hash_outputs(cfg.out_dir, names)));
  });
  return result;
}

}  // namespace basisrisk
