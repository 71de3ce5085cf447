#include "basisrisk/panel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "basisrisk/rng.hpp"
#include "basisrisk/stats.hpp"

namespace basisrisk {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v))
    fail(ErrorKind::parse, where + ": bad number '" + s + "'");
  return v;
}

int parse_int(const std::string& s, const std::string& where) {
  const char* begin = s.c_str();
  char* end = nullptr;
  long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0')
    fail(ErrorKind::parse, where + ": bad integer '" + s + "'");
  return static_cast<int>(v);
}

std::string sidecar_path(const std::string& path) {
  std::string stem = path;
  if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv")
    stem = stem.substr(0, stem.size() - 4);
  return stem + ".counties.csv";
}

// County means recomputed from fields: per (county, crop, year) average over
// the fields observing that year.
std::vector<CountySeries> derive_counties(const std::vector<FieldCropSeries>& fields) {
  std::map<std::pair<std::string, Crop>, std::map<int, std::pair<double, int>>> acc;
  for (const auto& f : fields) {
    auto& county = acc[{f.county_id, f.crop}];
    for (std::size_t i = 0; i < f.years.size(); ++i) {
      auto& cell = county[f.years[i]];
      cell.first += f.yields[i];
      cell.second += 1;
    }
  }
  std::vector<CountySeries> out;
  for (const auto& [key, by_year] : acc) {
    CountySeries cs;
    cs.county_id = key.first;
    cs.crop = key.second;
    for (const auto& [year, cell] : by_year) {
      cs.years.push_back(year);
      cs.mean_yields.push_back(cell.first / cell.second);
    }
    cs.longrun_mean = stats::mean(cs.mean_yields);
    out.push_back(std::move(cs));
  }
  return out;
}

void sort_panel(Panel& p) {
  std::sort(p.fields.begin(), p.fields.end(), [](const auto& a, const auto& b) {
    if (a.field_id != b.field_id) return a.field_id < b.field_id;
    return static_cast<int>(a.crop) < static_cast<int>(b.crop);
  });
  std::sort(p.counties.begin(), p.counties.end(), [](const auto& a, const auto& b) {
    if (a.county_id != b.county_id) return a.county_id < b.county_id;
    return static_cast<int>(a.crop) < static_cast<int>(b.crop);
  });
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string panel_sidecar_path(const std::string& path) { return sidecar_path(path); }

const CountySeries* Panel::find_county(std::string_view county_id, Crop crop) const {
  for (const auto& c : counties)
    if (c.county_id == county_id && c.crop == crop) return &c;
  return nullptr;
}

const CountySeries& Panel::require_county(std::string_view county_id, Crop crop) const {
  const CountySeries* c = find_county(county_id, crop);
  if (!c)
    fail(ErrorKind::validation, "no county series for (" + std::string(county_id) +
                                    ", " + crop_name(crop) + ")");
  return *c;
}

Panel load_panel(const std::string& path, const ColumnSchema& schema) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open panel file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::parse, path + ": no rows");

  // Resolve column positions from the header; order-free, extras ignored.
  int ix_field = -1, ix_county = -1, ix_crop = -1, ix_year = -1, ix_yield = -1;
  {
    auto hdr = split_csv_line(line);
    for (int i = 0; i < static_cast<int>(hdr.size()); ++i) {
      if (hdr[i] == schema.field_id) ix_field = i;
      else if (hdr[i] == schema.county_id) ix_county = i;
      else if (hdr[i] == schema.crop) ix_crop = i;
      else if (hdr[i] == schema.year) ix_year = i;
      else if (hdr[i] == schema.yield) ix_yield = i;
    }
    if (ix_field < 0 || ix_county < 0 || ix_crop < 0 || ix_year < 0 || ix_yield < 0)
      fail(ErrorKind::parse,
           path + ": header missing one of " + schema.field_id + "," +
               schema.county_id + "," + schema.crop + "," + schema.year + "," +
               schema.yield);
  }

  struct Obs { int year; double value; };
  std::map<std::pair<std::string, Crop>, std::pair<std::string, std::vector<Obs>>> groups;
  std::size_t lineno = 1;
  std::size_t n_rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = split_csv_line(line);
    std::string where = path + ":" + std::to_string(lineno);
    int need = std::max({ix_field, ix_county, ix_crop, ix_year, ix_yield}) + 1;
    if (static_cast<int>(cols.size()) < need)
      fail(ErrorKind::parse, where + ": expected at least " + std::to_string(need) +
                                 " columns");
    Crop crop = parse_crop(cols[ix_crop]);
    auto& grp = groups[{cols[ix_field], crop}];
    if (grp.first.empty()) {
      grp.first = cols[ix_county];
    } else if (grp.first != cols[ix_county]) {
      fail(ErrorKind::validation, where + ": field '" + cols[ix_field] +
                                      "' appears under two counties");
    }
    grp.second.push_back(
        {parse_int(cols[ix_year], where), parse_double(cols[ix_yield], where)});
    ++n_rows;
  }
  if (n_rows == 0) fail(ErrorKind::parse, path + ": no rows");

  Panel panel;
  for (auto& [key, grp] : groups) {
    FieldCropSeries f;
    f.field_id = key.first;
    f.crop = key.second;
    f.county_id = grp.first;
    std::sort(grp.second.begin(), grp.second.end(),
              [](const Obs& a, const Obs& b) { return a.year < b.year; });
    for (std::size_t i = 0; i < grp.second.size(); ++i) {
      if (i > 0 && grp.second[i].year == grp.second[i - 1].year)
        fail(ErrorKind::validation, path + ": duplicate year " +
                                        std::to_string(grp.second[i].year) +
                                        " for field '" + f.field_id + "'");
      f.years.push_back(grp.second[i].year);
      f.yields.push_back(grp.second[i].value);
    }
    panel.fields.push_back(std::move(f));
  }

  std::string side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    std::ifstream sin(side);
    if (!sin) fail(ErrorKind::io, "cannot open county sidecar '" + side + "'");
    std::string sline;
    if (!std::getline(sin, sline)) fail(ErrorKind::parse, side + ": empty sidecar");
    if (sline.rfind("# provenance=", 0) == 0) {
      panel.provenance = parse_provenance(sline.substr(13));
      if (!std::getline(sin, sline)) fail(ErrorKind::parse, side + ": missing header");
    }
    {
      auto hdr = split_csv_line(sline);
      const std::vector<std::string> want = {"county_id", "crop", "kind", "year", "value"};
      if (std::vector<std::string>(hdr.begin(), hdr.end()) != want)
        fail(ErrorKind::parse, side + ": expected header county_id,crop,kind,year,value");
    }
    std::map<std::pair<std::string, Crop>, CountySeries> cmap;
    std::size_t sn = 1;
    while (std::getline(sin, sline)) {
      ++sn;
      if (sline.empty()) continue;
      auto cols = split_csv_line(sline);
      std::string where = side + ":" + std::to_string(sn);
      if (cols.size() != 5) fail(ErrorKind::parse, where + ": expected 5 columns");
      Crop crop = parse_crop(cols[1]);
      auto& cs = cmap[{cols[0], crop}];
      cs.county_id = cols[0];
      cs.crop = crop;
      int year = parse_int(cols[3], where);
      double value = parse_double(cols[4], where);
      if (cols[2] == "mean") {
        cs.years.push_back(year);
        cs.mean_yields.push_back(value);
      } else if (cols[2] == "reference") {
        cs.reference_years.push_back(year);
        cs.reference_means.push_back(value);
      } else {
        fail(ErrorKind::parse, where + ": unknown kind '" + cols[2] + "'");
      }
    }
    for (auto& [key, cs] : cmap) {
      if (cs.mean_yields.empty())
        fail(ErrorKind::parse, side + ": county '" + key.first + "' has no mean rows");
      cs.longrun_mean = stats::mean(cs.mean_yields);
      panel.counties.push_back(std::move(cs));
    }
  } else {
    panel.provenance = Provenance::ingested;
    panel.counties = derive_counties(panel.fields);
  }

  sort_panel(panel);
  validate_panel(panel);
  return panel;
}

void save_panel(const Panel& panel, const std::string& path) {
  {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::io, "cannot write panel file '" + path + "'");
    out << "field_id,county_id,crop,year,yield\n";
    for (const auto& f : panel.fields)
      for (std::size_t i = 0; i < f.years.size(); ++i)
        out << f.field_id << ',' << f.county_id << ',' << crop_name(f.crop) << ','
            << f.years[i] << ',' << fmt_double(f.yields[i]) << '\n';
    if (!out) fail(ErrorKind::io, "short write to '" + path + "'");
  }
  {
    std::string side = sidecar_path(path);
    std::ofstream out(side);
    if (!out) fail(ErrorKind::io, "cannot write county sidecar '" + side + "'");
    out << "# provenance=" << provenance_name(panel.provenance) << '\n';
    out << "county_id,crop,kind,year,value\n";
    for (const auto& c : panel.counties) {
      for (std::size_t i = 0; i < c.years.size(); ++i)
        out << c.county_id << ',' << crop_name(c.crop) << ",mean," << c.years[i] << ','
            << fmt_double(c.mean_yields[i]) << '\n';
      for (std::size_t i = 0; i < c.reference_years.size(); ++i)
        out << c.county_id << ',' << crop_name(c.crop) << ",reference,"
            << c.reference_years[i] << ',' << fmt_double(c.reference_means[i]) << '\n';
    }
    if (!out) fail(ErrorKind::io, "short write to '" + side + "'");
  }
}

void validate_panel(const Panel& panel) {
  for (const auto& c : panel.counties) {
    if (c.years.size() != c.mean_yields.size())
      fail(ErrorKind::validation, "county '" + c.county_id + "': ragged series");
    for (std::size_t i = 0; i < c.years.size(); ++i) {
      if (i > 0 && c.years[i] <= c.years[i - 1])
        fail(ErrorKind::validation, "county '" + c.county_id + "': years not increasing");
      if (!(c.mean_yields[i] > 0.0) || !std::isfinite(c.mean_yields[i]))
        fail(ErrorKind::validation, "county '" + c.county_id + "': nonpositive mean yield");
    }
    double lr = stats::mean(c.mean_yields);
    if (std::fabs(lr - c.longrun_mean) > 1e-9 * std::max(1.0, std::fabs(lr)))
      fail(ErrorKind::validation, "county '" + c.county_id + "': longrun_mean out of sync");
    if (c.reference_years.size() != c.reference_means.size())
      fail(ErrorKind::validation, "county '" + c.county_id + "': ragged reference series");
    for (std::size_t i = 0; i < c.reference_years.size(); ++i) {
      if (i > 0 && c.reference_years[i] <= c.reference_years[i - 1])
        fail(ErrorKind::validation,
             "county '" + c.county_id + "': reference years not increasing");
      if (!(c.reference_means[i] > 0.0) || !std::isfinite(c.reference_means[i]))
        fail(ErrorKind::validation,
             "county '" + c.county_id + "': nonpositive reference mean");
    }
  }

  for (const auto& f : panel.fields) {
    if (f.years.size() != f.yields.size())
      fail(ErrorKind::validation, "field '" + f.field_id + "': ragged series");
    if (f.years.empty())
      fail(ErrorKind::validation, "field '" + f.field_id + "': empty series");
    for (std::size_t i = 0; i < f.years.size(); ++i) {
      if (i > 0 && f.years[i] <= f.years[i - 1])
        fail(ErrorKind::validation, "field '" + f.field_id + "': years not increasing");
      if (!(f.yields[i] > 0.0) || !std::isfinite(f.yields[i]))
        fail(ErrorKind::validation, "field '" + f.field_id + "': nonpositive yield");
    }
    const CountySeries& c = panel.require_county(f.county_id, f.crop);
    for (int y : f.years)
      if (!std::binary_search(c.years.begin(), c.years.end(), y))
        fail(ErrorKind::validation, "field '" + f.field_id + "': year " +
                                        std::to_string(y) + " missing from county '" +
                                        f.county_id + "'");
  }

  if (panel.provenance == Provenance::ingested) {
    // Official series for ingested data are panel-derived, so they must agree
    // with what the fields imply.
    auto derived = derive_counties(panel.fields);
    for (const auto& d : derived) {
      const CountySeries& c = panel.require_county(d.county_id, d.crop);
      if (c.years != d.years)
        fail(ErrorKind::validation,
             "county '" + c.county_id + "': years disagree with field coverage");
      for (std::size_t i = 0; i < d.years.size(); ++i)
        if (std::fabs(c.mean_yields[i] - d.mean_yields[i]) >
            1e-6 * std::max(1.0, std::fabs(d.mean_yields[i])))
          fail(ErrorKind::validation,
               "county '" + c.county_id + "': mean yields disagree with fields");
    }
  }
}

Panel filter_min_years(const Panel& panel, int min_years) {
  if (min_years < 1) fail(ErrorKind::config, "min_years must be >= 1");
  Panel out;
  out.provenance = panel.provenance;
  for (const auto& f : panel.fields)
    if (static_cast<int>(f.n_obs()) >= min_years) out.fields.push_back(f);
  if (out.fields.empty()) return out;  // empty panel is a legal result
  if (panel.provenance == Provenance::ingested) {
    out.counties = derive_counties(out.fields);
  } else {
    // Official series are external truth; dropping fields does not change them.
    for (const auto& c : panel.counties)
      for (const auto& f : out.fields)
        if (f.county_id == c.county_id && f.crop == c.crop) {
          out.counties.push_back(c);
          break;
        }
  }
  sort_panel(out);
  validate_panel(out);
  return out;
}

namespace {

double lerp(const Range& r, double t) { return r.lo + (r.hi - r.lo) * t; }

void check_range(const Range& r, const std::string& name) {
  if (!(r.lo <= r.hi))
    fail(ErrorKind::config, name + ": range lo exceeds hi");
}

}  // namespace

Panel generate_panel(const std::vector<CountyGenSpec>& counties, Crop crop,
                     double crop_mean, int fields_per_county, int n_years,
                     std::uint64_t seed) {
  if (counties.empty()) fail(ErrorKind::config, "generate_panel: no counties");
  if (fields_per_county < 1) fail(ErrorKind::config, "fields_per_county must be >= 1");
  if (n_years < 1) fail(ErrorKind::config, "n_years must be >= 1");
  if (!(crop_mean > 0.0)) fail(ErrorKind::config, "crop_mean must be positive");

  CropBounds bounds = crop_bounds(crop);
  Panel panel;
  panel.provenance = Provenance::synthetic;
  const int year0 = 2000;

  for (const auto& spec : counties) {
    if (spec.county_id.empty()) fail(ErrorKind::config, "county_id must be nonempty");
    if (spec.factor_sd < 0.0 || spec.idio_sd < 0.0 || spec.mean_spread_sd < 0.0)
      fail(ErrorKind::config, "county '" + spec.county_id + "': negative sd");
    check_range(spec.beta_range, "county '" + spec.county_id + "' beta_range");

    CountySeries cs;
    cs.county_id = spec.county_id;
    cs.crop = crop;
    Rng factor_rng = stream_rng(seed, "county-factor", spec.county_id);
    for (int t = 0; t < n_years; ++t) {
      double g = crop_mean + spec.factor_sd * factor_rng.normal();
      if (!(g > 0.0))
        fail(ErrorKind::config, "county '" + spec.county_id +
                                    "': factor series went nonpositive; shrink "
                                    "county factor sd or raise crop_mean");
      cs.years.push_back(year0 + t);
      cs.mean_yields.push_back(g);
    }
    cs.longrun_mean = stats::mean(cs.mean_yields);

    for (int k = 0; k < fields_per_county; ++k) {
      FieldCropSeries f;
      char tag[16];
      std::snprintf(tag, sizeof tag, "_f%04d", k);
      f.field_id = spec.county_id + tag;
      f.county_id = spec.county_id;
      f.crop = crop;
      Rng rng = stream_rng(seed, "field", spec.county_id, static_cast<std::uint64_t>(k));
      double beta = lerp(spec.beta_range, rng.uniform01());
      double delta = spec.mean_spread_sd * rng.normal();
      double alpha = (1.0 - beta) * crop_mean + delta;
      for (int t = 0; t < n_years; ++t) {
        double y = alpha + beta * cs.mean_yields[t] + spec.idio_sd * rng.normal();
        // Same plausibility clamp the simulator applies; with sane configs it
        // essentially never binds (default means sit many sd from either bound).
        y = std::clamp(y, bounds.lo, bounds.hi);
        f.years.push_back(year0 + t);
        f.yields.push_back(y);
      }
      panel.fields.push_back(std::move(f));
    }
    panel.counties.push_back(std::move(cs));
  }

  sort_panel(panel);
  validate_panel(panel);
  return panel;
}

Panel generate_synthetic_panel(const SyntheticConfig& cfg) {
  if (cfg.n_counties < 1) fail(ErrorKind::config, "n_counties must be >= 1");
  if (cfg.n_years < 8) fail(ErrorKind::config, "synthetic n_years must be >= 8");
  check_range(cfg.temporal_sd_range, "temporal_sd_range");
  check_range(cfg.spatial_sd_range, "spatial_sd_range");
  check_range(cfg.beta_range, "beta_range");
  if (cfg.temporal_sd_range.lo < 0.0 || cfg.spatial_sd_range.lo < 0.0 ||
      cfg.beta_range.lo < 0.0)
    fail(ErrorKind::config, "synthetic ranges must be non-negative");
  if (cfg.county_shock_sd < 0.0) fail(ErrorKind::config, "county_shock_sd must be >= 0");

  // Counties tile a near-square lattice over (temporal, spatial) so any
  // generated panel exercises both variability axes end to end.
  int g = 1;
  while (g * g < cfg.n_counties) ++g;
  std::vector<CountyGenSpec> specs;
  for (int j = 0; j < cfg.n_counties; ++j) {
    int col = j % g;
    int row = j / g;
    double tx = (g == 1) ? 0.5 : static_cast<double>(col) / (g - 1);
    double sy = (g == 1) ? 0.5 : static_cast<double>(row) / (g - 1);
    CountyGenSpec spec;
    char id[16];
    std::snprintf(id, sizeof id, "C%03d", j + 1);
    spec.county_id = id;
    spec.factor_sd = cfg.county_shock_sd;
    spec.idio_sd = lerp(cfg.temporal_sd_range, tx);
    spec.mean_spread_sd = lerp(cfg.spatial_sd_range, sy);
    spec.beta_range = cfg.beta_range;
    specs.push_back(std::move(spec));
  }
  return generate_panel(specs, cfg.crop, cfg.crop_mean, cfg.fields_per_county,
                        cfg.n_years, cfg.seed);
}

Panel archetype_panel(int fields_per_county, int n_years, std::uint64_t seed,
                      Crop crop, double crop_mean) {
  // Corners of the variability plane. Factor sd drives the temporal axis,
  // mean-spread plus idiosyncratic noise drive the spatial axis and the
  // basis-risk share; parameters are spaced so county rankings on the two
  // axes disagree on purpose.
  std::vector<CountyGenSpec> specs = {
      {"quiet_tight", 9.0, 2.5, 3.0, {0.9, 1.1}},
      {"volatile_tight", 24.0, 8.0, 5.0, {0.9, 1.1}},
      {"quiet_patchy", 9.5, 8.0, 12.0, {0.9, 1.1}},
      {"volatile_patchy", 20.5, 13.0, 15.0, {0.9, 1.1}},
  };
  return generate_panel(specs, crop, crop_mean, fields_per_county, n_years, seed);
}

}  // namespace basisrisk
