#include "basisrisk/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "basisrisk/stats.hpp"

namespace basisrisk {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double safe_spearman(std::span<const double> x, std::span<const double> y) {
  try {
    return stats::spearman(x, y);
  } catch (const Error&) {
    return kNaN;  // fewer than 2 counties or a constant axis
  }
}

}  // namespace

ReversalReport reversal_report(std::span<const CountyAggregate> aggregates,
                               std::span<const CountyStats> stats,
                               const ReportOptions& opts) {
  if (opts.grid_resolution < 2)
    fail(ErrorKind::config, "reversal_report: grid_resolution must be >= 2");

  ReversalReport rep;
  for (const auto& agg : aggregates) {
    const CountyStats* cs = nullptr;
    for (const auto& s : stats)
      if (s.county_id == agg.county_id && s.crop == agg.crop) {
        cs = &s;
        break;
      }
    if (!cs)
      fail(ErrorKind::validation,
           "reversal_report: no stats for county '" + agg.county_id + "'");
    ReversalRow row;
    row.county_id = agg.county_id;
    row.crop = agg.crop;
    row.temporal_variability = cs->temporal_variability;
    row.temporal_cv = cs->temporal_cv;
    row.spatial_variability = cs->spatial_variability;
    row.mean_gain_vs_none = agg.mean_gain_vs_none;
    row.share_ge_85 = agg.share_ge_85;
    rep.rows.push_back(row);
  }

  std::vector<double> tv, sv, gain, share;
  for (const auto& r : rep.rows) {
    tv.push_back(opts.temporal_axis == TemporalAxis::cv ? r.temporal_cv
                                                        : r.temporal_variability);
    sv.push_back(r.spatial_variability);
    gain.push_back(r.mean_gain_vs_none);
    share.push_back(r.share_ge_85);
  }
  rep.corr_gain_temporal = safe_spearman(gain, tv);
  rep.corr_gain_spatial = safe_spearman(gain, sv);
  rep.corr_share85_temporal = safe_spearman(share, tv);
  rep.corr_share85_spatial = safe_spearman(share, sv);

  if (rep.rows.size() < 2) return rep;
  auto [tmin_it, tmax_it] = std::minmax_element(tv.begin(), tv.end());
  auto [smin_it, smax_it] = std::minmax_element(sv.begin(), sv.end());
  double tmin = *tmin_it, tspan = *tmax_it - *tmin_it;
  double smin = *smin_it, sspan = *smax_it - *smin_it;
  if (!(tspan > 0.0) || !(sspan > 0.0)) return rep;  // degenerate spread

  rep.interpolated = true;
  int res = opts.grid_resolution;
  for (int j = 0; j < res; ++j) {
    for (int i = 0; i < res; ++i) {
      ReversalGridPoint p;
      p.gx = static_cast<double>(i) / (res - 1);
      p.gy = static_cast<double>(j) / (res - 1);
      p.temporal = tmin + p.gx * tspan;
      p.spatial = smin + p.gy * sspan;
      double wsum = 0.0, gsum = 0.0, ssum = 0.0;
      bool exact = false;
      for (std::size_t k = 0; k < rep.rows.size(); ++k) {
        double dx = p.gx - (tv[k] - tmin) / tspan;
        double dy = p.gy - (sv[k] - smin) / sspan;
        double d2 = dx * dx + dy * dy;
        if (d2 < 1e-12) {  // grid point sits on a county
          p.gain = gain[k];
          p.share_ge_85 = share[k];
          exact = true;
          break;
        }
        double w = 1.0 / d2;  // inverse distance, power 2
        wsum += w;
        gsum += w * gain[k];
        ssum += w * share[k];
      }
      if (!exact) {
        p.gain = gsum / wsum;
        p.share_ge_85 = ssum / wsum;
      }
      rep.grid.push_back(p);
    }
  }
  return rep;
}

}  // namespace basisrisk
