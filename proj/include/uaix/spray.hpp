#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "uaix/uai.hpp"

namespace uaix {

// Symmetrized k-nearest-neighbour indicator matrix.
struct AffinityMatrix {
  Eigen::MatrixXd m;
  std::size_t k_nn = 0;
};

struct LaplacianSpectrum {
  Eigen::MatrixXd laplacian;
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // column i pairs with eigenvalue i
};

struct SprayParams {
  std::size_t k_nn = 10;
  std::size_t pool = 2;
  std::size_t max_k = 15;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
};

struct SpectralResult {
  std::vector<double> eigenvalues;
  std::size_t k = 1;
  // Cluster 0 is the largest; ties go to the cluster with the lowest member.
  std::vector<std::size_t> labels;
  std::vector<Tensor> cluster_means;
  std::vector<double> strengths;
  // Coordinates on the 2nd and 3rd Laplacian eigenvectors.
  std::vector<std::array<double, 2>> embedding;
};

// MinMax-normalizes each map, average-pools it with kernel = stride = pool
// (edge-padded to a multiple of pool) and flattens it. One row per sample.
Eigen::MatrixXd spray_preprocess(const RelevanceSet& set, std::size_t pool);

// m_ij = 1 if row i is among the k_nn nearest rows of row j (self excluded,
// distance ties to the lower index), then symmetrized by entrywise max.
AffinityMatrix knn_affinity(const Eigen::MatrixXd& rows, std::size_t k_nn);

// L = D - M with D the degree matrix; eigenpairs sorted ascending.
LaplacianSpectrum laplacian_spectrum(const Eigen::MatrixXd& m);

// Position of the largest gap lambda_{i+1} - lambda_i over i in [1, max_k],
// smallest i on ties, and never fewer than the count of zero eigenvalues.
std::size_t eigengap_select(std::span<const double> eigenvalues, std::size_t max_k);

// Lloyd's k-means with farthest-point seeding from a seeded first centre;
// the restart with the lowest inertia wins.
std::vector<std::size_t> kmeans(const Eigen::MatrixXd& rows, std::size_t k, std::size_t restarts, std::uint64_t seed);

SpectralResult spray_cluster(const RelevanceSet& set, const SprayParams& params);

double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b);

}  // namespace uaix
