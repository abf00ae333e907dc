#pragma once

#include <string>
#include <vector>

#include "analysis.hpp"

namespace splap::plot {

/// Log-log convergence figure for one p: per-replicate error curves (light
/// gray), the Monte-Carlo mean (red), mean +/- one standard deviation
/// (dashed red) and the regression line (blue) annotated c tau^(a +/- s).
/// Only taus above the reference step are drawn.
std::string rate_figure(const analysis::RateEstimate& est,
                        const std::vector<analysis::ResultRow>& rows);

}  // namespace splap::plot
