#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include <mvfbm/circulant.hpp>
#include <mvfbm/error.hpp>
#include <mvfbm/fbm.hpp>

#include "support/stats.hpp"

using namespace mvfbm;
using mvfbm::test::estimate;
using mvfbm::test::within_standard_errors;

namespace {

StreamKey key(std::uint64_t seed, std::uint64_t replication = 0) {
  return StreamKey{seed, replication, 0, 0, StreamPurpose::Driver};
}

}  // namespace

TEST_CASE("HurstParameter validates the open unit interval and tags the regime") {
  CHECK_THROWS_AS(HurstParameter(0.0), ConfigError);
  CHECK_THROWS_AS(HurstParameter(1.0), ConfigError);
  CHECK_THROWS_AS(HurstParameter(-0.2), ConfigError);
  CHECK_THROWS_AS(HurstParameter(std::nan("")), ConfigError);
  CHECK(HurstParameter(0.3).regime() == Regime::Rough);
  CHECK(HurstParameter(0.5).regime() == Regime::Standard);
  CHECK(HurstParameter(0.7).regime() == Regime::Smooth);
}

TEST_CASE("UniformMesh nodes") {
  const UniformMesh mesh(1.0, 7);
  CHECK(mesh.delta() * 7 == doctest::Approx(1.0).epsilon(1e-15));
  for (std::size_t k = 0; k < 7; ++k) CHECK(mesh.node(k) <= mesh.node(k + 1));
  CHECK(mesh.node(0) == 0.0);
  CHECK(mesh.node(7) == 1.0);
  CHECK(mesh.coarsen(7).steps() == 1);
  CHECK_THROWS_AS(mesh.coarsen(2), ConfigError);
  CHECK_THROWS_AS(UniformMesh(0.0, 4), ConfigError);
}

TEST_CASE("fbm_covariance examples") {
  CHECK(fbm_covariance(HurstParameter(0.5), 0.3, 0.7) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(fbm_covariance(HurstParameter(0.9), 1.0, 1.0) == 1.0);
  CHECK(fbm_covariance(HurstParameter(0.75), 2.0, 1.0) == doctest::Approx(std::numbers::sqrt2).epsilon(1e-14));
  for (double h : {0.2, 0.5, 0.8}) {
    const HurstParameter hp(h);
    CHECK(fbm_covariance(hp, 0.4, 1.3) == doctest::Approx(fbm_covariance(hp, 1.3, 0.4)));
    CHECK(fbm_covariance(hp, 1.7, 1.7) == doctest::Approx(std::pow(1.7, 2 * h)));
  }
  CHECK_THROWS_AS(fbm_covariance(HurstParameter(0.5), -1.0, 0.0), ConfigError);
}

TEST_CASE("increment covariance matches the four-term expansion of R_H") {
  for (double h : {0.1, 0.3, 0.5, 0.75, 0.95}) {
    for (std::size_t n : {1, 2, 9}) {
      const UniformMesh mesh(1.3, n);
      const CovarianceMatrix c = increment_covariance_matrix(HurstParameter(h), mesh);
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
          const double tj = mesh.node(j), tj1 = mesh.node(j + 1), tk = mesh.node(k), tk1 = mesh.node(k + 1);
          const double oracle = test::fbm_cov_oracle(h, tj1, tk1) - test::fbm_cov_oracle(h, tj1, tk) -
                                test::fbm_cov_oracle(h, tj, tk1) + test::fbm_cov_oracle(h, tj, tk);
          CHECK(c(j, k) == doctest::Approx(oracle).epsilon(1e-10).scale(1.0));
          CHECK(c(j, k) == c(k, j));
        }
        CHECK(c(j, j) == doctest::Approx(std::pow(mesh.delta(), 2 * h)));
      }
    }
  }
}

TEST_CASE("increment covariance special cases") {
  const UniformMesh mesh(1.0, 5);
  const CovarianceMatrix white = increment_covariance_matrix(HurstParameter(0.5), mesh);
  for (std::size_t j = 0; j < 5; ++j) {
    for (std::size_t k = 0; k < 5; ++k) {
      CHECK(white(j, k) == doctest::Approx(j == k ? 0.2 : 0.0).scale(1.0).epsilon(1e-15));
    }
  }
  const CovarianceMatrix single = increment_covariance_matrix(HurstParameter(0.8), UniformMesh(0.5, 1));
  CHECK(single.size == 1);
  CHECK(single(0, 0) == doctest::Approx(std::pow(0.5, 1.6)));
  // 0.5 * (2^1.5 - 2), hand-evaluated
  const CovarianceMatrix c = increment_covariance_matrix(HurstParameter(0.75), UniformMesh(3.0, 3));
  CHECK(c(0, 1) == doctest::Approx(0.41421356237309515));
}

TEST_CASE("Cholesky sampler, Brownian case: increment variance equals delta") {
  const UniformMesh mesh(1.0, 1024);
  const CholeskySampler sampler(HurstParameter(0.5), mesh);
  constexpr std::size_t kPaths = 10000;
  std::vector<double> first(kPaths), last(kPaths);
  std::vector<double> column(mesh.steps());
  for (std::size_t p = 0; p < kPaths; ++p) {
    RandomStream stream(key(11, p));
    sampler.sample_component(stream, column);
    first[p] = column.front() * column.front();
    last[p] = column.back() * column.back();
  }
  CHECK(within_standard_errors(estimate(first), mesh.delta()));
  CHECK(within_standard_errors(estimate(last), mesh.delta()));
}

TEST_CASE("Cholesky sampler, H = 0.8: lag-1 covariance") {
  const UniformMesh mesh(1.0, 256);
  const CholeskySampler sampler(HurstParameter(0.8), mesh);
  const double scale = std::pow(mesh.delta(), 1.6);
  std::vector<double> products(10000);
  std::vector<double> column(mesh.steps());
  for (std::size_t p = 0; p < products.size(); ++p) {
    RandomStream stream(key(12, p));
    sampler.sample_component(stream, column);
    products[p] = column[0] * column[1] / scale;
  }
  // 0.5 * (2^1.6 - 2)
  CHECK(within_standard_errors(estimate(products), 0.5157165665103982));
}

TEST_CASE("samplers are deterministic in their stream key") {
  const UniformMesh mesh(1.0, 100);
  for (SamplerKind kind : {SamplerKind::Cholesky, SamplerKind::Circulant}) {
    const auto sampler = make_sampler(kind, HurstParameter(0.65), mesh);
    const FbmPath a = sampler->sample(3, key(99));
    const FbmPath b = sampler->sample(3, key(99));
    const FbmPath c = sampler->sample(3, key(100));
    CHECK(std::equal(a.increments().begin(), a.increments().end(), b.increments().begin()));
    CHECK_FALSE(std::equal(a.increments().begin(), a.increments().end(), c.increments().begin()));
  }
  const FbmPath one = generate_path_circulant(HurstParameter(0.3), mesh, 1, key(5));
  const FbmPath two = generate_path_circulant(HurstParameter(0.3), mesh, 1, key(5));
  CHECK(std::equal(one.increments().begin(), one.increments().end(), two.increments().begin()));
}

TEST_CASE("concurrent sampling matches sequential sampling") {
  const UniformMesh mesh(1.0, 128);
  const CirculantSampler sampler(HurstParameter(0.7), mesh);
  std::vector<std::vector<double>> threaded(8);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threaded.size(); ++t) {
      pool.emplace_back([&, t] {
        const FbmPath p = sampler.sample(1, key(3, t));
        threaded[t].assign(p.increments().begin(), p.increments().end());
      });
    }
  }
  for (std::size_t t = 0; t < threaded.size(); ++t) {
    const FbmPath p = sampler.sample(1, key(3, t));
    CHECK(std::equal(threaded[t].begin(), threaded[t].end(), p.increments().begin()));
  }
}

TEST_CASE("circulant embedding, Brownian case: all eigenvalues equal delta") {
  const UniformMesh mesh(2.0, 50);
  const CirculantSampler sampler(HurstParameter(0.5), mesh);
  CHECK(sampler.embedding_size() == 100);
  for (double lambda : sampler.eigenvalues()) CHECK(lambda == doctest::Approx(mesh.delta()).epsilon(1e-12));
}

TEST_CASE("circulant eigenvalues match a direct DFT") {
  const std::vector<double> row{2.0, 0.7, -0.3, 0.1, -0.3, 0.7};
  const auto lambda = circulant::eigenvalues(row);
  REQUIRE(lambda.size() == row.size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    double direct = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      direct += row[k] * std::cos(2.0 * std::numbers::pi * static_cast<double>(j * k) / 6.0);
    }
    CHECK(lambda[j] == doctest::Approx(direct).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("negative circulant spectra are detected") {
  // Autocovariance 1, 0.9, -0.9 is not positive definite.
  const std::vector<double> bad{1.0, 0.9, -0.9};
  const auto lambda = circulant::eigenvalues(circulant::embedding_row(bad, 4));
  CHECK_FALSE(circulant::is_nonnegative_spectrum(lambda));
  const std::vector<double> good{1.0, 0.3, 0.1};
  CHECK(circulant::is_nonnegative_spectrum(circulant::eigenvalues(circulant::embedding_row(good, 4))));
  CHECK_THROWS_AS(circulant::embedding_row(good, 3), ConfigError);
}

TEST_CASE("circulant sampler, H = 0.7, n = 4096: Var(B_T) = T^{2H}") {
  const UniformMesh mesh(1.0, 4096);
  const CirculantSampler sampler(HurstParameter(0.7), mesh);
  std::vector<double> squares(10000);
  std::vector<double> column(mesh.steps());
  for (std::size_t p = 0; p < squares.size(); ++p) {
    RandomStream stream(key(21, p));
    sampler.sample_component(stream, column);
    double total = 0.0;
    for (double v : column) total += v;
    squares[p] = total * total;
  }
  CHECK(within_standard_errors(estimate(squares), 1.0));
}

TEST_CASE("both samplers reproduce the increment covariance") {
  const UniformMesh mesh(1.0, 16);
  for (double h : {0.3, 0.8}) {
    for (SamplerKind kind : {SamplerKind::Cholesky, SamplerKind::Circulant}) {
      const auto sampler = make_sampler(kind, HurstParameter(h), mesh);
      const CovarianceMatrix exact = increment_covariance_matrix(HurstParameter(h), mesh);
      constexpr std::size_t kPaths = 4000;
      std::vector<FbmPath> paths;
      for (std::size_t p = 0; p < kPaths; ++p) paths.push_back(sampler->sample(1, key(31, p)));
      std::vector<double> products(kPaths);
      for (std::size_t j = 0; j < 16; ++j) {
        for (std::size_t k = j; k < 16; ++k) {
          for (std::size_t p = 0; p < kPaths; ++p) products[p] = paths[p].increment(j, 0) * paths[p].increment(k, 0);
          CAPTURE(h);
          CAPTURE(j);
          CAPTURE(k);
          CHECK(within_standard_errors(estimate(products), exact(j, k)));
        }
      }
    }
  }
}

TEST_CASE("Brownian increments are uncorrelated and components independent") {
  const UniformMesh mesh(1.0, 32);
  const CirculantSampler sampler(HurstParameter(0.5), mesh);
  std::vector<double> lag1(5000), cross(5000);
  for (std::size_t p = 0; p < lag1.size(); ++p) {
    const FbmPath path = sampler.sample(2, key(41, p));
    lag1[p] = path.increment(3, 0) * path.increment(4, 0);
    cross[p] = path.increment(3, 0) * path.increment(3, 1);
  }
  CHECK(within_standard_errors(estimate(lag1), 0.0));
  CHECK(within_standard_errors(estimate(cross), 0.0));
}

TEST_CASE("restrict_to_coarse sums fine increments") {
  const UniformMesh mesh(1.0, 4);
  const FbmPath fine(mesh, 1, {0.5, -0.25, 1.75, 0.125});
  const FbmPath same = restrict_to_coarse(fine, 1);
  CHECK(std::equal(same.increments().begin(), same.increments().end(), fine.increments().begin()));
  const FbmPath coarse = restrict_to_coarse(fine, 2);
  REQUIRE(coarse.steps() == 2);
  CHECK(coarse.mesh().delta() == 0.5);
  CHECK(coarse.increment(0, 0) == 0.25);
  CHECK(coarse.increment(1, 0) == 1.875);
  // dyadic values sum exactly, so the endpoints agree bit for bit
  CHECK(coarse.cumulative(0).back() == fine.cumulative(0).back());
  CHECK_THROWS_AS(restrict_to_coarse(fine, 3), ConfigError);
}

TEST_CASE("restricted sampled paths end at the same B_T") {
  const UniformMesh mesh(1.0, 64);
  const FbmPath fine = generate_path_circulant(HurstParameter(0.35), mesh, 2, key(8));
  for (std::size_t factor : {2, 4, 8, 64}) {
    const FbmPath coarse = restrict_to_coarse(fine, factor);
    for (std::size_t j = 0; j < 2; ++j) {
      const auto fc = fine.cumulative(j);
      const auto cc = coarse.cumulative(j);
      for (std::size_t k = 0; k < cc.size(); ++k) CHECK(cc[k] == doctest::Approx(fc[k * factor]).epsilon(1e-12));
    }
  }
}

TEST_CASE("path CSV holds cumulative values per node") {
  const FbmPath path(UniformMesh(1.0, 2), 2, {1.0, 2.0, 0.5, -1.0});
  std::ostringstream out;
  write_path_csv(path, out);
  CHECK(out.str() == "t,component_1,component_2\n0,0,0\n0.5,1,2\n1,1.5,1\n");
}

TEST_CASE("sampler names") {
  CHECK(parse_sampler_kind("cholesky") == SamplerKind::Cholesky);
  CHECK(parse_sampler_kind("circulant") == SamplerKind::Circulant);
  CHECK_THROWS_AS(parse_sampler_kind("spectral"), ConfigError);
}
