#include "uaix/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace uaix {

std::string format_number(double v, int precision) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string format_metric_report(const MetricReport& report) {
  std::ostringstream s;
  s << "posterior\tmethod\taggregate\tauc_mean\tauc_sd\tma_mean\tma_sd\tma_undefined\timages\n";
  for (const auto& row : report.rows) {
    s << report.posterior << '\t' << report.method << '\t' << row.name;
    if (!row.available) {
      s << "\tabsent\tabsent\tabsent\tabsent\tabsent\t" << report.images << '\n';
      continue;
    }
    s << '\t' << format_number(row.auc_summary.mean) << '\t' << format_number(row.auc_summary.sd) << '\t'
      << format_number(row.ma_summary.mean) << '\t' << format_number(row.ma_summary.sd) << '\t' << row.ma_summary.excluded
      << '\t' << report.images << '\n';
  }
  return s.str();
}

std::string format_spray_report(const SpectralResult& result, std::size_t shown_eigenvalues) {
  std::ostringstream s;
  s << "samples\t" << result.labels.size() << "\nclusters\t" << result.k << "\neigenvalues";
  for (std::size_t i = 0; i < std::min(shown_eigenvalues, result.eigenvalues.size()); ++i)
    s << '\t' << format_number(result.eigenvalues[i], 8);
  s << "\n\ncluster\tsize\tstrength\n";
  for (std::size_t c = 0; c < result.k; ++c) {
    std::size_t size = 0;
    for (std::size_t l : result.labels) size += l == c;
    s << c << '\t' << size << '\t' << format_number(result.strengths[c]) << '\n';
  }
  s << "\nsample\tcluster\tembed_1\tembed_2\n";
  for (std::size_t i = 0; i < result.labels.size(); ++i)
    s << i << '\t' << result.labels[i] << '\t' << format_number(result.embedding[i][0], 8) << '\t'
      << format_number(result.embedding[i][1], 8) << '\n';
  return s.str();
}

std::string format_train_log(std::span<const TrainHistory> histories) {
  std::ostringstream s;
  s << "network\tepoch\tlearning_rate\ttrain_loss\ttrain_accuracy\theldout_loss\theldout_accuracy\n";
  for (std::size_t n = 0; n < histories.size(); ++n) {
    for (std::size_t e = 0; e < histories[n].epochs.size(); ++e) {
      const auto& st = histories[n].epochs[e];
      s << n << '\t' << e << '\t' << format_number(st.learning_rate, 8) << '\t' << format_number(st.train_loss) << '\t'
        << format_number(st.train_accuracy) << '\t' << format_number(st.heldout_loss) << '\t'
        << format_number(st.heldout_accuracy) << '\n';
    }
  }
  return s.str();
}

}  // namespace uaix
