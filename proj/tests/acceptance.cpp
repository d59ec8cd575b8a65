// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Usage: uaix_acceptance <path-to-uaix-cli> [work-dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "criteria.hpp"
#include "uaix/container.hpp"
#include "uaix/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& title, const criteria::Outcome& r) {
  if (!r.pass) ++failures;
  std::printf("%s  criterion %d  %s  %s\n", r.pass ? "PASS" : "FAIL", id, title.c_str(), r.detail.c_str());
  std::fflush(stdout);
}

criteria::Outcome merge(const criteria::Outcome& a, const criteria::Outcome& b) {
  return {a.pass && b.pass, a.detail + "; " + b.detail};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

criteria::Outcome check_report(const uaix::MetricReport& r, const uaix::RunConfig& cfg) {
  criteria::Outcome out;
  std::ostringstream d;
  const auto& uni = r.row(uaix::percentile_row_name(cfg.alphas.back()));
  const auto& inter = r.row(uaix::percentile_row_name(cfg.alphas.front()));
  const auto& avg = r.row("Average");
  const auto& rnd = r.row("Random");
  const double au = uni.auc_summary.mean, aa = avg.auc_summary.mean, ai = inter.auc_summary.mean;
  const double mi = inter.ma_summary.mean, mu = uni.ma_summary.mean;
  out.pass = au - aa >= 0.05 && aa - ai >= 0.05 && mi - mu >= 0.03 && std::abs(rnd.auc_summary.mean - 0.5) <= 0.02 &&
             std::abs(rnd.ma_summary.mean - r.mean_mask_fraction) <= 0.02;
  d << r.posterior << ": AUC union " << fmt(au) << " avg " << fmt(aa) << " inter " << fmt(ai) << ", MA inter "
    << fmt(mi) << " union " << fmt(mu) << ", random AUC " << fmt(rnd.auc_summary.mean) << " MA "
    << fmt(rnd.ma_summary.mean) << " vs area " << fmt(r.mean_mask_fraction);
  out.detail = d.str();
  return out;
}

criteria::Outcome desk_scale_ordering(const fs::path& work) {
  uaix::RunConfig cfg = uaix::preset("small");
  cfg.out = (work / "desk").string();
  cfg.seed = 1;
  const auto start = std::chrono::steady_clock::now();
  const uaix::DemoResult result = uaix::run_demo(cfg, &std::cerr);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  criteria::Outcome out{seconds <= 1200.0, "runtime " + fmt(seconds) + " s"};
  for (const auto& r : result.reports) out = merge(out, check_report(r, cfg));
  if (result.reports.size() != 2) out = {false, "expected dropout and ensemble reports"};
  return out;
}

criteria::Outcome demo_determinism(const std::string& cli, const fs::path& work) {
  const fs::path a = work / "det_a", b = work / "det_b";
  for (const auto& dir : {a, b}) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cmd = "cd \"" + dir.string() + "\" && \"" + cli + "\" demo --scale tiny --seed 5 --out run > log.txt 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "demo run failed in " + dir.string()};
  }
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a / "run")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a / "run");
    if (!fs::exists(b / "run" / rel)) return {false, "missing in second run: " + rel.string()};
    if (uaix::read_file(entry.path()) != uaix::read_file(b / "run" / rel))
      return {false, "differs between runs: " + rel.string()};
    ++files;
  }
  std::size_t other = 0;
  for (const auto& entry : fs::recursive_directory_iterator(b / "run")) other += entry.is_regular_file();
  if (other != files) return {false, "runs produced different file sets"};
  return {files > 0, std::to_string(files) + " files bit-identical"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <uaix-cli> [work-dir]\n", argv[0]);
    return 2;
  }
  const std::string cli = fs::absolute(argv[1]).string();
  const fs::path work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "uaix_acceptance";
  fs::create_directories(work);

  report(2, "ensemble mean equivalence", criteria::ensemble_mean_equivalence(2));
  report(3, "IG completeness", criteria::ig_completeness(3));
  report(4, "LRP conservation", criteria::lrp_conservation(4));
  report(5, "percentile oracle", criteria::percentile_oracle(5, 1000));
  report(6, "spectral properties", criteria::spectral_properties(6));
  report(7, "gradient correctness", criteria::gradient_check(7, 100));
  report(8, "determinism and round trips", merge(demo_determinism(cli, work), criteria::round_trips(8)));
  report(9, "metric identities", criteria::metric_identities(9, 100));
  report(1, "desk-scale aggregation ordering", desk_scale_ordering(work));

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
