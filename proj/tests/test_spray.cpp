#include <doctest.h>

#include "criteria.hpp"
#include "oracles.hpp"
#include "uaix/error.hpp"
#include "uaix/spray.hpp"

using namespace uaix;

TEST_CASE("preprocessing: minmax then edge-padded average pooling") {
  RelevanceSet s;
  // 3x3 map, max 4, no negatives: normalized values v/4.
  s.samples.emplace_back(Shape{3, 3}, std::vector<float>{4, 0, 2, 0, 0, 0, 2, 2, 2});
  s.seeds.push_back(0);
  const Eigen::MatrixXd rows = spray_preprocess(s, 2);
  REQUIRE(rows.cols() == 4);
  // Padding repeats the last row and column.
  CHECK(rows(0, 0) == doctest::Approx(0.25));
  CHECK(rows(0, 1) == doctest::Approx(0.25));
  CHECK(rows(0, 2) == doctest::Approx(0.5));
  CHECK(rows(0, 3) == doctest::Approx(0.5));
}

TEST_CASE("kNN affinity on points on a line") {
  Eigen::MatrixXd pts(4, 1);
  pts << 0.0, 1.0, 3.0, 10.0;
  const AffinityMatrix a = knn_affinity(pts, 1);
  // Nearest neighbours: 0->1, 1->0, 2->1, 3->2; symmetrized.
  Eigen::MatrixXd expected(4, 4);
  expected << 0, 1, 0, 0,  //
      1, 0, 1, 0,          //
      0, 1, 0, 1,          //
      0, 0, 1, 0;
  CHECK(a.m == expected);
  Eigen::MatrixXd tie(4, 1);
  tie << 0.0, -1.0, 1.0, 1.1;
  // Row 0 is equidistant from 1 and 2; the lower index wins.
  CHECK(knn_affinity(tie, 1).m(1, 0) == 1.0);
  CHECK(knn_affinity(tie, 1).m(2, 0) == 0.0);
  CHECK_THROWS_AS(knn_affinity(pts, 4), InvalidArgument);
}

TEST_CASE("Laplacian spectrum of a path graph") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
  m(0, 1) = m(1, 0) = m(1, 2) = m(2, 1) = 1.0;
  const LaplacianSpectrum s = laplacian_spectrum(m);
  CHECK(s.eigenvalues(0) == doctest::Approx(0.0).scale(1.0));
  CHECK(s.eigenvalues(1) == doctest::Approx(1.0));
  CHECK(s.eigenvalues(2) == doctest::Approx(3.0));
  const Eigen::MatrixXd recon = s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.transpose();
  CHECK((recon - s.laplacian).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::MatrixXd asym = m;
  asym(0, 2) = 1.0;
  CHECK_THROWS_AS(laplacian_spectrum(asym), InvalidArgument);
}

TEST_CASE("eigengap selection") {
  CHECK(eigengap_select(std::vector<double>{0, 0, 0, 2, 2.1, 2.2}, 4) == 3);
  CHECK(eigengap_select(std::vector<double>{0, 1, 2, 3, 4}, 4) == 1);
  CHECK(eigengap_select(std::vector<double>{0, 0, 0, 0.5, 0.6}, 4) == 3);
  // Widest gap after the first value, but three values count as zero.
  CHECK(eigengap_select(std::vector<double>{0, 1e-8, 1e-8, 1.0001e-8}, 3) == 3);
  CHECK_THROWS_AS(eigengap_select(std::vector<double>{0, 1}, 1), InvalidArgument);
}

TEST_CASE("adjusted Rand index") {
  const std::vector<std::size_t> a{0, 0, 1, 1}, b{1, 1, 0, 0}, c{0, 1, 0, 1};
  CHECK(adjusted_rand_index(a, b) == doctest::Approx(1.0));
  // Contingency all ones: index 0, expected (2*2/6)=2/3, max 2 -> (0 - 2/3) / (2 - 2/3) = -0.5.
  CHECK(adjusted_rand_index(a, c) == doctest::Approx(-0.5));
}

TEST_CASE("k-means separates two far blobs deterministically") {
  Eigen::MatrixXd pts(6, 2);
  pts << 0, 0, 0.1, 0, 0, 0.1, 5, 5, 5.1, 5, 5, 5.1;
  const auto l = kmeans(pts, 2, 5, 3);
  CHECK(l[0] == l[1]);
  CHECK(l[1] == l[2]);
  CHECK(l[3] == l[4]);
  CHECK(l[0] != l[3]);
  CHECK(kmeans(pts, 2, 5, 3) == l);
}

TEST_CASE("identical maps form one cluster") {
  RelevanceSet s;
  for (int i = 0; i < 12; ++i) {
    s.samples.emplace_back(Shape{4, 4}, std::vector<float>(16, 1.0f));
    s.seeds.push_back(static_cast<std::uint64_t>(i));
  }
  const SpectralResult r = spray_cluster(s, SprayParams{5, 2, 8, 3, 0});
  CHECK(r.k == 1);
  CHECK(r.strengths == std::vector<double>{1.0});
}

TEST_CASE("spectral properties: zero eigenvalues, eigengaps, planted partitions") {
  const auto r = criteria::spectral_properties(41);
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("Jacobi oracle agrees with a known spectrum") {
  Eigen::MatrixXd m(2, 2);
  m << 2, 1, 1, 2;
  const auto ev = oracle::jacobi_eigenvalues(m);
  CHECK(ev[0] == doctest::Approx(1.0));
  CHECK(ev[1] == doctest::Approx(3.0));
}
