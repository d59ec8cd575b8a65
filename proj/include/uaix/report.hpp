#pragma once

#include <span>
#include <string>

#include "uaix/eval.hpp"
#include "uaix/spray.hpp"
#include "uaix/trainer.hpp"

namespace uaix {

// Tab-separated, one header row then one row per aggregation. Rows that
// cannot be computed carry "absent" in every metric column.
std::string format_metric_report(const MetricReport& report);

// Plain-text SpRAy summary: chosen k, leading eigenvalues, cluster sizes
// and strengths, per-sample labels and embedding coordinates.
std::string format_spray_report(const SpectralResult& result, std::size_t shown_eigenvalues = 16);

// Tab-separated per-epoch training statistics, one block of rows per
// trained network.
std::string format_train_log(std::span<const TrainHistory> histories);

// Fixed-precision decimal used by every report.
std::string format_number(double v, int precision = 6);

}  // namespace uaix
