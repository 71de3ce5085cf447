#pragma once

#include <span>
#include <vector>

#include "basisrisk/evaluate.hpp"
#include "basisrisk/regression.hpp"

namespace basisrisk {

// Where each county sits in the variability plane, with the welfare metrics
// whose rankings flip across it.
struct ReversalRow {
  std::string county_id;
  Crop crop = Crop::corn;
  double temporal_variability = 0.0;  // mean per-field variance
  double temporal_cv = 0.0;           // mean per-field CV
  double spatial_variability = 0.0;
  double mean_gain_vs_none = 0.0;
  double share_ge_85 = 0.0;
};

struct ReversalGridPoint {
  double gx = 0.0, gy = 0.0;        // normalized plane coordinates
  double temporal = 0.0, spatial = 0.0;
  double gain = 0.0, share_ge_85 = 0.0;
};

struct ReversalReport {
  std::vector<ReversalRow> rows;
  std::vector<ReversalGridPoint> grid;  // empty when the spread is degenerate
  bool interpolated = false;
  // Rank correlations between each metric and each axis; NaN when undefined.
  double corr_gain_temporal = 0.0;
  double corr_gain_spatial = 0.0;
  double corr_share85_temporal = 0.0;
  double corr_share85_spatial = 0.0;
};

enum class TemporalAxis { cv, variance };

struct ReportOptions {
  int grid_resolution = 25;
  TemporalAxis temporal_axis = TemporalAxis::cv;
};

// Pairs county aggregates with their variability stats, computes rank
// correlations, and lays an inverse-distance-weighted (power 2) surface over
// the normalized plane for plotting. Correlations are NaN-marked rather than
// raised when too few counties or a constant axis make them undefined.
ReversalReport reversal_report(std::span<const CountyAggregate> aggregates,
                               std::span<const CountyStats> stats,
                               const ReportOptions& opts = {});

}  // namespace basisrisk
