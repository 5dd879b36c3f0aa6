#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "tfm/common.hpp"
#include "tfm/moment.hpp"
#include "tfm/simulate.hpp"

using tfm::DenseTensor;
using tfm::Flavor;
using tfm::Index;
using tfm::MomentConfig;
using tfm::TensorSeries;

TEST_CASE("two-observation moments match the hand-computed closed form") {
  // Order-1 series: X_0 = (1, 2)', X_1 = (3, 4)'.
  std::vector<DenseTensor> items;
  items.emplace_back(std::vector<Index>{2}, std::vector<double>{1, 2});
  items.emplace_back(std::vector<Index>{2}, std::vector<double>{3, 4});
  const TensorSeries s = TensorSeries::from_items(std::move(items));

  // Single lag term: gram = <X_1, X_1> * X_0 X_0' = 25 * [[1,2],[2,4]].
  Eigen::MatrixXd want_gram(2, 2);
  want_gram << 25, 50, 50, 100;
  CHECK(oracle::rel_err(tfm::topup_gram(s, 0, 1), want_gram) < 1e-14);

  // Single lag block: X_0 X_1' = [[3,4],[6,8]].
  Eigen::MatrixXd want_tip(2, 2);
  want_tip << 3, 4, 6, 8;
  CHECK(oracle::rel_err(tfm::tipup_matrix(s, 0, 1), want_tip) < 1e-14);

  // Lag-free gram: X_0 X_0' + X_1 X_1'.
  Eigen::MatrixXd want_up(2, 2);
  want_up << 10, 14, 14, 20;
  CHECK(oracle::rel_err(tfm::up_gram(s, 0), want_up) < 1e-14);
}

TEST_CASE("moments equal their naive-definition oracles on random series") {
  std::mt19937_64 engine(101);
  std::uniform_int_distribution<int> order_dist(1, 3);
  std::uniform_int_distribution<int> dim_dist(1, 4);
  std::uniform_int_distribution<int> T_dist(3, 8);
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<Index> dims(static_cast<std::size_t>(order_dist(engine)));
    for (auto& d : dims) d = dim_dist(engine);
    const Index T = T_dist(engine);
    const TensorSeries s =
        oracle::random_series(dims, T, 1000 + static_cast<std::uint64_t>(rep));
    std::uniform_int_distribution<int> h0_dist(1, static_cast<int>(T) - 1);
    const int h0 = h0_dist(engine);
    for (Index mode = 0; mode < s.order(); ++mode) {
      const Eigen::MatrixXd stacked = oracle::naive_topup_matrix(s, mode, h0);
      CHECK(oracle::rel_err(tfm::topup_gram(s, mode, h0),
                            stacked * stacked.transpose()) < 1e-10);
      CHECK(oracle::rel_err(tfm::tipup_matrix(s, mode, h0),
                            oracle::naive_tipup_matrix(s, mode, h0)) < 1e-12);
      CHECK(oracle::rel_err(tfm::up_gram(s, mode),
                            oracle::naive_up_gram(s, mode)) < 1e-12);
    }
  }
}

TEST_CASE("contracting the outer-product stack over non-mode indices gives "
          "the inner-product blocks") {
  const TensorSeries s = oracle::random_series({3, 2, 2}, 6, 77);
  const int h0 = 2;
  for (Index mode = 0; mode < 3; ++mode) {
    const DenseTensor stack = oracle::naive_topup_stack(s, mode, h0);
    const Index dk = stack.dims()[0];
    const Index drest = stack.dims()[1];
    Eigen::MatrixXd contracted = Eigen::MatrixXd::Zero(dk, dk * h0);
    for (int h = 0; h < h0; ++h) {
      for (Index i = 0; i < dk; ++i) {
        for (Index i2 = 0; i2 < dk; ++i2) {
          for (Index j = 0; j < drest; ++j) {
            contracted(i, h * dk + i2) +=
                stack.at({i, j, i2, j, static_cast<Index>(h)});
          }
        }
      }
    }
    CHECK(oracle::rel_err(tfm::tipup_matrix(s, mode, h0), contracted) <
          1e-12);
  }
}

TEST_CASE("rescaling the data rescales the moments polynomially") {
  const TensorSeries s = oracle::random_series({3, 4}, 7, 5);
  const double c = 1.7;
  TensorSeries cs = s;
  for (Index t = 0; t < cs.length(); ++t) cs[t].vec() *= c;

  // The outer-product gram is quartic in the data, the inner-product matrix
  // quadratic.
  CHECK(oracle::rel_err(tfm::topup_gram(cs, 0, 2),
                        std::pow(c, 4) * tfm::topup_gram(s, 0, 2)) < 1e-12);
  CHECK(oracle::rel_err(tfm::tipup_matrix(cs, 0, 2),
                        c * c * tfm::tipup_matrix(s, 0, 2)) < 1e-12);
  CHECK(oracle::rel_err(tfm::up_gram(cs, 0), c * c * tfm::up_gram(s, 0)) <
        1e-12);
}

TEST_CASE("lag bounds are enforced") {
  const TensorSeries s = oracle::random_series({2, 2}, 4, 1);
  CHECK_THROWS_AS(tfm::topup_gram(s, 0, 0), tfm::InvalidArgument);
  CHECK_THROWS_AS(tfm::topup_gram(s, 0, 4), tfm::InvalidArgument);
  CHECK_THROWS_AS(tfm::tipup_matrix(s, 1, -1), tfm::InvalidArgument);
  CHECK_THROWS_AS(tfm::tipup_matrix(s, 0, 5), tfm::InvalidArgument);
  CHECK_NOTHROW(tfm::topup_gram(s, 0, 3));
}

TEST_CASE("estimate_loading recovers noiseless loadings for every flavor") {
  tfm::ModelSpec spec;
  spec.dims = {6, 5};
  spec.ranks = {2, 2};
  spec.ar_coeffs = {0.8};
  spec.noise_sigma = 0.0;
  spec.seed = 42;
  const tfm::GroundTruth truth = tfm::generate(spec, 200);

  for (const Flavor flavor : {Flavor::TOPUP, Flavor::TIPUP, Flavor::UP}) {
    MomentConfig config;
    config.flavor = flavor;
    config.h0 = 1;
    for (Index mode = 0; mode < 2; ++mode) {
      const tfm::OrthoBasis u =
          tfm::estimate_loading(truth.observed, mode, 2, config);
      CHECK(tfm::subspace_distance(
                u, truth.loadings[static_cast<std::size_t>(mode)]) < 1e-8);
    }
  }
}

TEST_CASE("the unfolding estimator agrees with the naive stacked projector "
          "on both routing branches") {
  // Narrow branch: few observations, direct SVD of the stacked unfolding.
  {
    const TensorSeries s = oracle::random_series({5, 2}, 3, 9);
    Eigen::MatrixXd stacked(5, 2 * 3);
    for (Index t = 0; t < 3; ++t) {
      stacked.block(0, 2 * t, 5, 2) = oracle::naive_unfold(s[t], 0);
    }
    MomentConfig config;
    config.flavor = Flavor::UP;
    const Eigen::MatrixXd p =
        tfm::projector(tfm::estimate_loading(s, 0, 2, config));
    CHECK(oracle::rel_err(p, oracle::naive_top_projector(stacked, 2)) < 1e-9);
  }
  // Wide branch: many observations route through the gram matrix.
  {
    const TensorSeries s = oracle::random_series({3, 2}, 40, 10);
    Eigen::MatrixXd stacked(3, 2 * 40);
    for (Index t = 0; t < 40; ++t) {
      stacked.block(0, 2 * t, 3, 2) = oracle::naive_unfold(s[t], 0);
    }
    MomentConfig config;
    config.flavor = Flavor::UP;
    const Eigen::MatrixXd p =
        tfm::projector(tfm::estimate_loading(s, 0, 1, config));
    CHECK(oracle::rel_err(p, oracle::naive_top_projector(stacked, 1)) < 1e-9);
  }
}

TEST_CASE("a full-rank request returns the identity basis") {
  const TensorSeries s = oracle::random_series({3, 4}, 5, 13);
  MomentConfig config;
  for (const Flavor flavor : {Flavor::TOPUP, Flavor::TIPUP, Flavor::UP}) {
    config.flavor = flavor;
    const tfm::OrthoBasis u = tfm::estimate_loading(s, 0, 3, config);
    CHECK((u.matrix() - Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);
  }
}

TEST_CASE("an all-zero series is degenerate for directions but not for "
          "diagnostics") {
  const TensorSeries zeros({3, 3}, 6);
  MomentConfig config;
  for (const Flavor flavor : {Flavor::TOPUP, Flavor::TIPUP, Flavor::UP}) {
    config.flavor = flavor;
    CHECK_THROWS_AS(tfm::estimate_loading(zeros, 0, 1, config),
                    tfm::DegenerateMoment);
  }
  const tfm::SignalDiagnostics diag = tfm::signal_strength(
      zeros, {1, 1}, 1, tfm::SignalNormalization::LAG_MEAN);
  CHECK(diag.lambda_sq[0] == 0.0);
  CHECK(diag.lambda_star_sq[1] == 0.0);
}

TEST_CASE("normalization divides by the lag count or its square root") {
  CHECK(tfm::apply_normalization(6.0, 4, tfm::SignalNormalization::LAG_MEAN) ==
        doctest::Approx(1.5));
  CHECK(tfm::apply_normalization(6.0, 4, tfm::SignalNormalization::LAG_SQRT) ==
        doctest::Approx(3.0));
  // Both agree at a single lag.
  CHECK(tfm::apply_normalization(2.5, 1, tfm::SignalNormalization::LAG_MEAN) ==
        tfm::apply_normalization(2.5, 1, tfm::SignalNormalization::LAG_SQRT));
}

TEST_CASE("signal strengths are the normalized singular values of the naive "
          "moment matrices") {
  const TensorSeries s = oracle::random_series({3, 4}, 9, 55);
  const std::vector<Index> ranks = {2, 1};
  const int h0 = 2;
  for (const auto norm : {tfm::SignalNormalization::LAG_MEAN,
                          tfm::SignalNormalization::LAG_SQRT}) {
    const tfm::SignalDiagnostics diag =
        tfm::signal_strength(s, ranks, h0, norm);
    for (Index mode = 0; mode < 2; ++mode) {
      const Index rk = ranks[static_cast<std::size_t>(mode)];
      Eigen::JacobiSVD<Eigen::MatrixXd> top_svd(
          oracle::naive_topup_matrix(s, mode, h0));
      Eigen::JacobiSVD<Eigen::MatrixXd> tip_svd(
          oracle::naive_tipup_matrix(s, mode, h0));
      const double want_top = tfm::apply_normalization(
          top_svd.singularValues()(rk - 1), h0, norm);
      const double want_tip = tfm::apply_normalization(
          tip_svd.singularValues()(rk - 1), h0, norm);
      CHECK(diag.lambda_sq[static_cast<std::size_t>(mode)] ==
            doctest::Approx(want_top).epsilon(1e-9));
      CHECK(diag.lambda_star_sq[static_cast<std::size_t>(mode)] ==
            doctest::Approx(want_tip).epsilon(1e-9));
      // Spectra are reported in descending order.
      const auto& spec = diag.topup_spectrum[static_cast<std::size_t>(mode)];
      for (std::size_t i = 1; i < spec.size(); ++i) {
        CHECK(spec[i - 1] >= spec[i]);
      }
    }
  }
}

TEST_CASE("signal_strength validates its arguments") {
  const TensorSeries s = oracle::random_series({3, 4}, 6, 3);
  CHECK_THROWS_AS(
      tfm::signal_strength(s, {1}, 1, tfm::SignalNormalization::LAG_MEAN),
      tfm::DimensionMismatch);
  CHECK_THROWS_AS(
      tfm::signal_strength(s, {1, 5}, 1, tfm::SignalNormalization::LAG_MEAN),
      tfm::InvalidArgument);
  CHECK_THROWS_AS(
      tfm::signal_strength(s, {1, 1}, 0, tfm::SignalNormalization::LAG_MEAN),
      tfm::InvalidArgument);
}
