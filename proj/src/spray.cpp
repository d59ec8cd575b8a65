#include "uaix/spray.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

#include "uaix/error.hpp"
#include "uaix/rng.hpp"

namespace uaix {
namespace {

constexpr double kZeroEigenvalue = 1e-8;

}  // namespace

Eigen::MatrixXd spray_preprocess(const RelevanceSet& set, std::size_t pool) {
  if (pool == 0) throw InvalidArgument("pool size must be positive");
  set.validate();
  const Shape& shape = set.map_shape();
  if (shape.size() > 2) throw ShapeError("relevance maps must be rank 1 or 2");
  const std::size_t h = shape.size() == 2 ? shape[0] : 1;
  const std::size_t w = shape.back();
  const std::size_t pool_h = shape.size() == 2 ? pool : 1;
  const std::size_t out_h = (h + pool_h - 1) / pool_h;
  const std::size_t out_w = (w + pool - 1) / pool;

  Eigen::MatrixXd rows(static_cast<Eigen::Index>(set.size()), static_cast<Eigen::Index>(out_h * out_w));
  for (std::size_t n = 0; n < set.size(); ++n) {
    const Tensor normalized = minmax_normalize(set.samples[n]);
    for (std::size_t oy = 0; oy < out_h; ++oy)
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        double sum = 0.0;
        for (std::size_t ky = 0; ky < pool_h; ++ky)
          for (std::size_t kx = 0; kx < pool; ++kx) {
            const std::size_t y = std::min(oy * pool_h + ky, h - 1);
            const std::size_t x = std::min(ox * pool + kx, w - 1);
            sum += normalized[y * w + x];
          }
        rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(oy * out_w + ox)) =
            sum / static_cast<double>(pool_h * pool);
      }
  }
  return rows;
}

AffinityMatrix knn_affinity(const Eigen::MatrixXd& rows, std::size_t k_nn) {
  const auto n = static_cast<std::size_t>(rows.rows());
  if (n < 2) throw InvalidArgument("affinity needs at least two samples");
  if (k_nn < 1 || k_nn >= n) throw InvalidArgument("k_nn must lie in [1, N)");
  AffinityMatrix a{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)), k_nn};
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t j = 0; j < n; ++j) {
    dist.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      dist.emplace_back((rows.row(static_cast<Eigen::Index>(i)) - rows.row(static_cast<Eigen::Index>(j))).squaredNorm(), i);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_nn), dist.end());
    for (std::size_t r = 0; r < k_nn; ++r)
      a.m(static_cast<Eigen::Index>(dist[r].second), static_cast<Eigen::Index>(j)) = 1.0;
  }
  a.m = a.m.cwiseMax(a.m.transpose()).eval();
  return a;
}

LaplacianSpectrum laplacian_spectrum(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw ShapeError("affinity matrix must be square and nonempty");
  if (m != m.transpose()) throw InvalidArgument("affinity matrix must be symmetric");
  if (m.minCoeff() < 0.0) throw InvalidArgument("affinity matrix must be nonnegative");
  LaplacianSpectrum s;
  s.laplacian = -m;
  s.laplacian.diagonal() = m.rowwise().sum() - m.diagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s.laplacian);
  if (solver.info() != Eigen::Success) throw NumericalError("Laplacian eigendecomposition did not converge");
  s.eigenvalues = solver.eigenvalues();
  s.eigenvectors = solver.eigenvectors();
  // Fix the sign of each eigenvector: first clearly nonzero entry positive.
  for (Eigen::Index c = 0; c < s.eigenvectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < s.eigenvectors.rows(); ++r) {
      if (std::abs(s.eigenvectors(r, c)) > 1e-12) {
        if (s.eigenvectors(r, c) < 0.0) s.eigenvectors.col(c) *= -1.0;
        break;
      }
    }
  }
  return s;
}

std::size_t eigengap_select(std::span<const double> eigenvalues, std::size_t max_k) {
  if (max_k < 2) throw InvalidArgument("max_k must be at least 2");
  const std::size_t n = eigenvalues.size();
  if (n < 2) return 1;
  const std::size_t limit = std::min(max_k, n - 1);
  std::size_t best = 1;
  double best_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i <= limit; ++i) {
    const double gap = eigenvalues[i] - eigenvalues[i - 1];
    if (gap > best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  const auto zeros = static_cast<std::size_t>(
      std::count_if(eigenvalues.begin(), eigenvalues.end(), [](double v) { return std::abs(v) <= kZeroEigenvalue; }));
  return std::max(best, zeros);
}

std::vector<std::size_t> kmeans(const Eigen::MatrixXd& rows, std::size_t k, std::size_t restarts, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(rows.rows());
  if (k == 0 || k > n) throw InvalidArgument("k-means needs 1 <= k <= N");
  if (restarts == 0) throw InvalidArgument("k-means needs at least one restart");
  std::vector<std::size_t> best_labels(n, 0);
  double best_inertia = std::numeric_limits<double>::infinity();

  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, r));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), rows.cols());
    centers.row(0) = rows.row(static_cast<Eigen::Index>(pick(rng)));
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < k; ++c) {
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        nearest[i] = std::min(nearest[i], (rows.row(static_cast<Eigen::Index>(i)) - centers.row(static_cast<Eigen::Index>(c - 1))).squaredNorm());
        if (nearest[i] > far_d) {
          far_d = nearest[i];
          far = i;
        }
      }
      centers.row(static_cast<Eigen::Index>(c)) = rows.row(static_cast<Eigen::Index>(far));
    }

    std::vector<std::size_t> labels(n, k);
    double inertia = 0.0;
    for (int iter = 0; iter < 300; ++iter) {
      bool changed = false;
      inertia = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t arg = 0;
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
          const double dc = (rows.row(static_cast<Eigen::Index>(i)) - centers.row(static_cast<Eigen::Index>(c))).squaredNorm();
          if (dc < d) {
            d = dc;
            arg = c;
          }
        }
        inertia += d;
        if (labels[i] != arg) {
          labels[i] = arg;
          changed = true;
        }
      }
      if (!changed) break;
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), rows.cols());
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        sums.row(static_cast<Eigen::Index>(labels[i])) += rows.row(static_cast<Eigen::Index>(i));
        ++counts[labels[i]];
      }
      for (std::size_t c = 0; c < k; ++c)
        if (counts[c] > 0) centers.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
    }
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_labels = labels;
    }
  }
  return best_labels;
}

SpectralResult spray_cluster(const RelevanceSet& set, const SprayParams& params) {
  set.validate();
  const std::size_t n = set.size();
  if (n < 2) throw InvalidArgument("clustering needs at least two relevance maps");
  if (n < params.max_k) throw InvalidArgument("clustering needs at least max_k relevance maps");

  const Eigen::MatrixXd rows = spray_preprocess(set, params.pool);
  const AffinityMatrix affinity = knn_affinity(rows, params.k_nn);
  const LaplacianSpectrum spectrum = laplacian_spectrum(affinity.m);

  SpectralResult result;
  result.eigenvalues.assign(spectrum.eigenvalues.data(), spectrum.eigenvalues.data() + spectrum.eigenvalues.size());

  bool identical = true;
  for (Eigen::Index i = 1; i < rows.rows() && identical; ++i) identical = rows.row(i) == rows.row(0);
  std::size_t k = identical ? 1 : eigengap_select(result.eigenvalues, params.max_k);

  std::vector<std::size_t> raw(n, 0);
  if (k > 1) {
    const Eigen::MatrixXd embedding_rows = spectrum.eigenvectors.leftCols(static_cast<Eigen::Index>(k));
    raw = kmeans(embedding_rows, k, params.restarts, derive_seed(params.seed, Stream::Cluster));
  }

  // Canonical labels: descending size, then lowest member index.
  std::vector<std::size_t> size(k, 0), first(k, n);
  for (std::size_t i = 0; i < n; ++i) {
    ++size[raw[i]];
    first[raw[i]] = std::min(first[raw[i]], i);
  }
  std::vector<std::size_t> order;
  for (std::size_t c = 0; c < k; ++c)
    if (size[c] > 0) order.push_back(c);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return size[a] != size[b] ? size[a] > size[b] : first[a] < first[b];
  });
  std::vector<std::size_t> relabel(k, 0);
  for (std::size_t c = 0; c < order.size(); ++c) relabel[order[c]] = c;
  result.k = order.size();
  result.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.labels[i] = relabel[raw[i]];

  std::vector<std::vector<double>> sums(result.k, std::vector<double>(set.samples.front().size(), 0.0));
  std::vector<std::size_t> counts(result.k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++counts[result.labels[i]];
    for (std::size_t j = 0; j < set.samples[i].size(); ++j) sums[result.labels[i]][j] += set.samples[i][j];
  }
  for (std::size_t c = 0; c < result.k; ++c) {
    Tensor mean(set.map_shape());
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] = static_cast<float>(sums[c][j] / static_cast<double>(counts[c]));
    result.cluster_means.push_back(std::move(mean));
    result.strengths.push_back(static_cast<double>(counts[c]) / static_cast<double>(n));
  }

  result.embedding.resize(n, {0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i)
    for (Eigen::Index c = 1; c <= 2 && c < spectrum.eigenvectors.cols(); ++c)
      result.embedding[i][static_cast<std::size_t>(c - 1)] = spectrum.eigenvectors(static_cast<Eigen::Index>(i), c);
  return result;
}

double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw InvalidArgument("label vectors differ in length");
  const std::size_t n = a.size();
  std::map<std::pair<std::size_t, std::size_t>, double> table;
  std::map<std::size_t, double> rows, cols;
  for (std::size_t i = 0; i < n; ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, v] : table) index += pairs(v);
  for (const auto& [key, v] : rows) sum_rows += pairs(v);
  for (const auto& [key, v] : cols) sum_cols += pairs(v);
  const double total = pairs(static_cast<double>(n));
  const double expected = sum_rows * sum_cols / total;
  const double maximum = 0.5 * (sum_rows + sum_cols);
  if (maximum == expected) return 1.0;
  return (index - expected) / (maximum - expected);
}

}  // namespace uaix
