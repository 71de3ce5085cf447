#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "basisrisk/config.hpp"
#include "basisrisk/contracts.hpp"
#include "basisrisk/errors.hpp"
#include "basisrisk/evaluate.hpp"
#include "basisrisk/panel.hpp"
#include "basisrisk/pipeline.hpp"
#include "basisrisk/preferences.hpp"
#include "basisrisk/regression.hpp"
#include "basisrisk/simulate.hpp"

namespace py = pybind11;
using namespace basisrisk;

namespace {

PreferenceSpec make_pref(const std::string& kind, double rho,
                         const std::string& reference) {
  PreferenceSpec pref;
  if (kind == "crra") {
    pref.kind = PreferenceKind::crra;
  } else if (kind == "cpt") {
    pref.kind = PreferenceKind::cpt;
  } else {
    fail(ErrorKind::config, "preference must be crra or cpt, got '" + kind + "'");
  }
  pref.rho = rho;
  if (reference == "r1") pref.reference_rule = ReferenceRule::r1_expected_plus_premium;
  else if (reference == "r2") pref.reference_rule = ReferenceRule::r2_expected_only;
  else fail(ErrorKind::config, "reference must be r1 or r2, got '" + reference + "'");
  pref.validate();
  return pref;
}

RunConfig config_from_text(const std::string& text) {
  return load_run_config(KeyValueConfig::parse_string(text, "<python>"));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Batch evaluation of area-based (index) crop insurance";
  m.attr("__version__") = "0.1.0";

  static py::exception<Error> exc(m, "EngineError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(exc, (std::string("[") + error_kind_name(e.kind()) + "] " +
                          e.what())
                             .c_str());
    }
  });

  py::class_<FieldCropSeries>(m, "FieldSeries")
      .def(py::init([](std::string field_id, std::string county_id, std::string crop,
                       std::vector<int> years, std::vector<double> yields) {
             FieldCropSeries f;
             f.field_id = std::move(field_id);
             f.county_id = std::move(county_id);
             f.crop = parse_crop(crop);
             f.years = std::move(years);
             f.yields = std::move(yields);
             return f;
           }),
           py::arg("field_id"), py::arg("county_id"), py::arg("crop"),
           py::arg("years"), py::arg("yields"))
      .def_readonly("field_id", &FieldCropSeries::field_id)
      .def_readonly("county_id", &FieldCropSeries::county_id)
      .def_property_readonly(
          "crop", [](const FieldCropSeries& f) { return std::string(crop_name(f.crop)); })
      .def_readonly("years", &FieldCropSeries::years)
      .def_readonly("yields", &FieldCropSeries::yields);

  py::class_<CountySeries>(m, "CountySeries")
      .def(py::init([](std::string county_id, std::string crop, std::vector<int> years,
                       std::vector<double> mean_yields) {
             CountySeries c;
             c.county_id = std::move(county_id);
             c.crop = parse_crop(crop);
             c.years = std::move(years);
             c.mean_yields = std::move(mean_yields);
             double sum = 0.0;
             for (double v : c.mean_yields) sum += v;
             c.longrun_mean = c.mean_yields.empty()
                                  ? 0.0
                                  : sum / static_cast<double>(c.mean_yields.size());
             return c;
           }),
           py::arg("county_id"), py::arg("crop"), py::arg("years"),
           py::arg("mean_yields"))
      .def_readonly("county_id", &CountySeries::county_id)
      .def_property_readonly(
          "crop", [](const CountySeries& c) { return std::string(crop_name(c.crop)); })
      .def_readonly("years", &CountySeries::years)
      .def_readonly("mean_yields", &CountySeries::mean_yields)
      .def_readonly("longrun_mean", &CountySeries::longrun_mean);

  py::class_<Panel>(m, "Panel")
      .def_readonly("fields", &Panel::fields)
      .def_property_readonly(
          "provenance", [](const Panel& p) { return std::string(provenance_name(p.provenance)); })
      .def_readonly("counties", &Panel::counties)
      .def("county",
           [](const Panel& p, const std::string& county_id, const std::string& crop) {
             return p.require_county(county_id, parse_crop(crop));
           },
           py::arg("county_id"), py::arg("crop") = "corn");

  py::class_<RegressionFit>(m, "RegressionFit")
      .def_readonly("field_id", &RegressionFit::field_id)
      .def_readonly("county_id", &RegressionFit::county_id)
      .def_readonly("alpha", &RegressionFit::alpha)
      .def_readonly("beta", &RegressionFit::beta)
      .def_readonly("r2", &RegressionFit::r2)
      .def_readonly("sigma2_resid", &RegressionFit::sigma2_resid)
      .def_readonly("field_mean", &RegressionFit::field_mean)
      .def_readonly("field_var", &RegressionFit::field_var)
      .def_readonly("n_obs", &RegressionFit::n_obs)
      .def_property_readonly("basis_risk",
                             [](const RegressionFit& f) { return basis_risk(f); });

  m.def("load_panel", [](const std::string& path) { return load_panel(path); },
        py::arg("path"));
  m.def("save_panel", &save_panel, py::arg("panel"), py::arg("path"));

  m.def(
      "generate_panel",
      [](int n_counties, int fields_per_county, int n_years, const std::string& crop,
         double crop_mean, double county_shock_sd, std::pair<double, double> temporal_sd,
         std::pair<double, double> spatial_sd, std::pair<double, double> beta,
         std::uint64_t seed) {
        SyntheticConfig cfg;
        cfg.n_counties = n_counties;
        cfg.fields_per_county = fields_per_county;
        cfg.n_years = n_years;
        cfg.crop = parse_crop(crop);
        cfg.crop_mean = crop_mean;
        cfg.county_shock_sd = county_shock_sd;
        cfg.temporal_sd_range = {temporal_sd.first, temporal_sd.second};
        cfg.spatial_sd_range = {spatial_sd.first, spatial_sd.second};
        cfg.beta_range = {beta.first, beta.second};
        cfg.seed = seed;
        return generate_synthetic_panel(cfg);
      },
      py::arg("n_counties") = 4, py::arg("fields_per_county") = 50,
      py::arg("n_years") = 30, py::arg("crop") = "corn", py::arg("crop_mean") = 162.0,
      py::arg("county_shock_sd") = 14.0,
      py::arg("temporal_sd") = std::pair<double, double>(4.0, 12.0),
      py::arg("spatial_sd") = std::pair<double, double>(3.0, 12.0),
      py::arg("beta") = std::pair<double, double>(0.8, 1.2), py::arg("seed") = 1);

  m.def("archetype_panel",
        [](int fields_per_county, int n_years, std::uint64_t seed) {
          return archetype_panel(fields_per_county, n_years, seed);
        },
        py::arg("fields_per_county") = 200, py::arg("n_years") = 100,
        py::arg("seed") = 1);

  m.def("fit_regression",
        [](const FieldCropSeries& field, const CountySeries& county, int min_overlap) {
          return fit_field_regression(field, county, min_overlap);
        },
        py::arg("field"), py::arg("county"), py::arg("min_overlap") = 8);

  m.def("certainty_equivalent",
        [](const std::vector<double>& outcomes, double rho) {
          PreferenceSpec pref;
          pref.rho = rho;
          pref.validate();
          return certainty_equivalent(outcomes, pref);
        },
        py::arg("outcomes"), py::arg("rho") = 1.5);

  m.def("cpt_value",
        [](const std::vector<double>& outcomes, double reference, double alpha,
           double beta, double lam, double gamma_gain, double gamma_loss) {
          CptParams params;
          params.alpha_gain = alpha;
          params.beta_loss = beta;
          params.lambda = lam;
          params.gamma_gain = gamma_gain;
          params.gamma_loss = gamma_loss;
          return cpt_value(outcomes, reference, params);
        },
        py::arg("outcomes"), py::arg("reference"), py::arg("alpha") = 0.88,
        py::arg("beta") = 0.88, py::arg("lambda_") = 2.25,
        py::arg("gamma_gain") = 0.61, py::arg("gamma_loss") = 0.69);

  m.def("fair_premium_area",
        [](const CountySeries& county, double trigger) {
          return fair_premium(area_indemnity(county, require_grid_trigger(trigger)));
        },
        py::arg("county"), py::arg("trigger") = 0.90);

  m.def("fair_premium_farm",
        [](const FieldCropSeries& field, double trigger) {
          return fair_premium(farm_indemnity(field, require_grid_trigger(trigger)));
        },
        py::arg("field"), py::arg("trigger") = 0.90);

  m.def(
      "evaluate_field_series",
      [](const FieldCropSeries& field, const CountySeries& county, double area_trigger,
         const std::vector<double>& triggers, const std::string& basis, bool subsidized,
         const std::string& preference, double rho, const std::string& reference) {
        ContractPlan plan;
        plan.area_trigger = require_grid_trigger(area_trigger);
        if (!triggers.empty()) {
          plan.farm_triggers.clear();
          for (double t : triggers) plan.farm_triggers.push_back(require_grid_trigger(t));
        }
        if (basis == "field_fair") plan.basis = PremiumBasis::field_fair;
        else if (basis == "county_fair") plan.basis = PremiumBasis::county_fair;
        else fail(ErrorKind::config, "basis must be field_fair or county_fair");
        plan.subsidized = subsidized;
        plan.subsidy_base = plan.basis;
        FieldEvaluation ev =
            evaluate_field(field, county, plan, make_pref(preference, rho, reference));
        py::dict d;
        d["field_id"] = ev.field_id;
        d["county_id"] = ev.county_id;
        d["mean_yield"] = ev.mean_yield;
        d["premium_area"] = ev.premium_area;
        d["w_none"] = ev.w_none;
        d["w_area"] = ev.w_area;
        d["w_farm"] = ev.w_farm;
        d["triggers"] = plan.farm_triggers;
        d["rp_none"] = ev.rp_none;
        d["rp_area"] = ev.rp_area;
        d["rp_reduction"] = ev.rp_reduction;
        d["farm_equiv"] = ev.farm_equiv.encode();
        d["fnp"] = ev.fnp;
        d["flagged"] = ev.flagged;
        d["flag_reason"] = ev.flag_reason;
        return d;
      },
      py::arg("field"), py::arg("county"), py::arg("area_trigger") = 0.90,
      py::arg("triggers") = std::vector<double>{}, py::arg("basis") = "field_fair",
      py::arg("subsidized") = false, py::arg("preference") = "crra",
      py::arg("rho") = 1.5, py::arg("reference") = "r1");

  m.def("simulate",
        [](const Panel& panel, int n_years, std::uint64_t seed, const std::string& source,
           int workers) {
          std::vector<RegressionFit> fits;
          fits.reserve(panel.fields.size());
          for (const auto& f : panel.fields)
            fits.push_back(
                fit_field_regression(f, panel.require_county(f.county_id, f.crop)));
          SimulationSpec spec;
          spec.n_years = n_years;
          spec.seed = seed;
          if (source == "reference_means") spec.source = SimSource::reference_means;
          else if (source == "ar2_extension") spec.source = SimSource::ar2_extension;
          else fail(ErrorKind::config, "source must be reference_means or ar2_extension");
          spec.validate();
          return simulate_panel(panel, fits, spec, workers);
        },
        py::arg("panel"), py::arg("n_years") = 0, py::arg("seed") = 1,
        py::arg("source") = "reference_means", py::arg("workers") = 1);

  m.def("run",
        [](const std::string& config_text) {
          PipelineResult res = run_pipeline(config_from_text(config_text));
          py::dict outputs;
          for (const auto& [name, digest] : res.outputs)
            outputs[py::str(name)] = "sha256:" + digest;
          py::dict d;
          d["out_dir"] = res.out_dir;
          d["outputs"] = outputs;
          return d;
        },
        py::arg("config_text"),
        "Run the full pipeline from configuration text (same format as --config "
        "files); returns output names and content hashes.");

  m.def("sweep",
        [](const std::string& config_text) {
          SweepResult res = run_sample_size_sweep(config_from_text(config_text));
          py::list rows;
          for (const auto& s : res.summary) {
            py::dict d;
            d["n_years"] = s.n_years;
            d["avg_share_ge_85"] = s.avg_share_ge_85;
            d["avg_share_ge_90"] = s.avg_share_ge_90;
            rows.append(d);
          }
          return rows;
        },
        py::arg("config_text"));
}
