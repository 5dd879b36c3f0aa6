#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "tfm/common.hpp"
#include "tfm/simulate.hpp"

using tfm::Index;
using tfm::ModelSpec;
using tfm::Setting;
using tfm::TensorSeries;

namespace {

// AR(1) autocovariance at lag h for unit-variance innovations.
double ar_gamma(double phi, int h) {
  return std::pow(phi, h) / (1.0 - phi * phi);
}

}  // namespace

TEST_CASE("equicorrelation square root satisfies its defining equation") {
  for (const double rho : {0.0, 0.2, 0.5, 0.9}) {
    const Index d = 5;
    const Eigen::MatrixXd half = tfm::equicorrelation_sqrt(d, rho);
    const Eigen::MatrixXd psi =
        (1.0 - rho) * Eigen::MatrixXd::Identity(d, d) +
        rho * Eigen::MatrixXd::Ones(d, d);
    CHECK(oracle::rel_err(half * half, psi) < 1e-12);
  }
  CHECK(oracle::rel_err(tfm::equicorrelation_sqrt(4, 0.0),
                        Eigen::MatrixXd::Identity(4, 4)) == 0.0);
  CHECK_THROWS_AS(tfm::equicorrelation_sqrt(3, 1.0), tfm::InvalidArgument);
  CHECK_THROWS_AS(tfm::equicorrelation_sqrt(3, -0.1), tfm::InvalidArgument);
}

TEST_CASE("generation is reproducible from the seed and shaped correctly") {
  ModelSpec spec;
  spec.dims = {3, 4};
  spec.ranks = {2, 2};
  spec.ar_coeffs = {0.6};
  spec.seed = 99;
  const tfm::GroundTruth a = tfm::generate(spec, 10);
  const tfm::GroundTruth b = tfm::generate(spec, 10);

  CHECK(a.observed.dims() == std::vector<Index>{3, 4});
  CHECK(a.factors.dims() == std::vector<Index>{2, 2});
  CHECK(a.observed.length() == 10);
  CHECK(a.loadings.size() == 2);
  CHECK(a.loadings[0].dim() == 3);
  CHECK(a.loadings[0].rank() == 2);

  for (Index t = 0; t < 10; ++t) {
    CHECK((a.observed[t].vec() - b.observed[t].vec()).cwiseAbs().maxCoeff() ==
          0.0);
  }
  spec.seed = 100;
  const tfm::GroundTruth c = tfm::generate(spec, 10);
  CHECK((a.observed[0].vec() - c.observed[0].vec()).cwiseAbs().maxCoeff() >
        0.0);
}

TEST_CASE("observed = signal + noise, and the extreme scales isolate each") {
  ModelSpec spec;
  spec.dims = {3, 3};
  spec.ranks = {1, 1};
  spec.ar_coeffs = {0.5};
  spec.seed = 17;
  const tfm::GroundTruth both = tfm::generate(spec, 8);
  for (Index t = 0; t < 8; ++t) {
    CHECK((both.observed[t].vec() - both.signal[t].vec() -
           both.noise[t].vec())
              .cwiseAbs()
              .maxCoeff() < 1e-15);
  }

  ModelSpec zero_signal = spec;
  zero_signal.lambda = 0.0;
  const tfm::GroundTruth noise_only = tfm::generate(zero_signal, 8);
  for (Index t = 0; t < 8; ++t) {
    CHECK((noise_only.observed[t].vec() - noise_only.noise[t].vec())
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK(noise_only.signal[t].vec().cwiseAbs().maxCoeff() == 0.0);
  }

  ModelSpec noiseless = spec;
  noiseless.noise_sigma = 0.0;
  const tfm::GroundTruth signal_only = tfm::generate(noiseless, 8);
  for (Index t = 0; t < 8; ++t) {
    CHECK((signal_only.observed[t].vec() - signal_only.signal[t].vec())
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
  // The noiseless run is the noisy run with the noise removed: loadings and
  // factors coincide because every random draw is still consumed.
  for (Index t = 0; t < 8; ++t) {
    CHECK((signal_only.signal[t].vec() - both.signal[t].vec())
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("loadings are orthonormal and reproducible") {
  ModelSpec spec;
  spec.dims = {7, 5};
  spec.ranks = {3, 2};
  spec.ar_coeffs = {0.4};
  spec.seed = 23;
  const tfm::GroundTruth truth = tfm::generate(spec, 4);
  for (const auto& u : truth.loadings) {
    const Eigen::MatrixXd gram = u.matrix().transpose() * u.matrix();
    CHECK((gram - Eigen::MatrixXd::Identity(u.rank(), u.rank()))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
}

TEST_CASE("pure noise with no cross-correlation has unit variance") {
  ModelSpec spec;
  spec.dims = {4, 4};
  spec.ranks = {1, 1};
  spec.ar_coeffs = {0.5};
  spec.lambda = 0.0;
  spec.noise_rho = {0.0};
  spec.seed = 31;
  const Index T = 2000;
  const tfm::GroundTruth truth = tfm::generate(spec, T);
  double sum = 0.0, sum_sq = 0.0;
  const double n = static_cast<double>(T * 16);
  for (Index t = 0; t < T; ++t) {
    sum += truth.observed[t].vec().sum();
    sum_sq += truth.observed[t].vec().squaredNorm();
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("noise covariance is the mode-wise equicorrelation Kronecker "
          "product") {
  ModelSpec spec;
  spec.dims = {2, 3};
  spec.ranks = {1, 1};
  spec.ar_coeffs = {0.5};
  spec.lambda = 0.0;
  spec.noise_rho = {0.4, 0.3};
  spec.seed = 37;
  const Index T = 20000;
  const tfm::GroundTruth truth = tfm::generate(spec, T);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(6, 6);
  for (Index t = 0; t < T; ++t) {
    const auto v = truth.noise[t].vec();
    cov += v * v.transpose();
  }
  cov /= static_cast<double>(T);

  const auto psi = [](Index d, double rho) {
    return Eigen::MatrixXd((1.0 - rho) * Eigen::MatrixXd::Identity(d, d) +
                           rho * Eigen::MatrixXd::Ones(d, d));
  };
  // vec runs the first mode fastest, so the second mode's factor sits on
  // the left of the Kronecker product.
  const Eigen::MatrixXd psi1 = psi(2, 0.4);
  const Eigen::MatrixXd psi2 = psi(3, 0.3);
  Eigen::MatrixXd want(6, 6);
  for (Index a = 0; a < 3; ++a) {
    for (Index b = 0; b < 3; ++b) {
      want.block(2 * a, 2 * b, 2, 2) = psi2(a, b) * psi1;
    }
  }
  CHECK((cov - want).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("factor entries follow their stationary AR(1) autocovariances") {
  ModelSpec spec;
  spec.dims = {1, 2};
  spec.ranks = {1, 2};
  spec.ar_coeffs = {0.8, -0.8};
  spec.noise_sigma = 0.0;
  spec.seed = 43;
  const Index T = 200000;
  const tfm::GroundTruth truth = tfm::generate(spec, T);

  for (int entry = 0; entry < 2; ++entry) {
    const double phi = spec.ar_coeffs[static_cast<std::size_t>(entry)];
    std::vector<double> f(static_cast<std::size_t>(T));
    for (Index t = 0; t < T; ++t) {
      f[static_cast<std::size_t>(t)] =
          truth.factors[t].at({0, static_cast<Index>(entry)});
    }
    for (int h = 0; h <= 3; ++h) {
      double c = 0.0;
      for (Index t = h; t < T; ++t) {
        c += f[static_cast<std::size_t>(t)] *
             f[static_cast<std::size_t>(t - h)];
      }
      c /= static_cast<double>(T - h);
      // Bartlett large-sample variance of the sample autocovariance.
      double bartlett = 0.0;
      for (int j = -400; j <= 400; ++j) {
        bartlett += ar_gamma(phi, std::abs(j)) * ar_gamma(phi, std::abs(j)) +
                    ar_gamma(phi, std::abs(j + h)) *
                        ar_gamma(phi, std::abs(j - h));
      }
      const double se = std::sqrt(bartlett / static_cast<double>(T));
      CHECK(std::abs(c - ar_gamma(phi, h)) < 3.0 * se);
    }
  }

  // The two entries are independent: their lag-1 cross moments cancel.
  double cross = 0.0;
  for (Index t = 1; t < T; ++t) {
    cross += truth.factors[t - 1].at({0, 0}) * truth.factors[t].at({0, 0}) +
             truth.factors[t - 1].at({0, 1}) * truth.factors[t].at({0, 1});
  }
  cross /= static_cast<double>(T - 1);
  CHECK(std::abs(cross) < 0.1);
}

TEST_CASE("setting presets pin the stock experimental designs") {
  const ModelSpec s1 = tfm::setting_preset(Setting::I, 2.0, 11);
  CHECK(s1.dims == std::vector<Index>{16, 16});
  CHECK(s1.ranks == std::vector<Index>{1, 1});
  CHECK(s1.ar_coeffs == std::vector<double>{0.8});
  CHECK(s1.lambda == 2.0);
  CHECK(s1.seed == 11);

  const ModelSpec s2 = tfm::setting_preset(Setting::II, 1.0, 0);
  CHECK(s2.ranks == std::vector<Index>{1, 2});
  CHECK(s2.ar_coeffs == std::vector<double>{0.8, 0.6});

  const ModelSpec s3 = tfm::setting_preset(Setting::III, 1.0, 0);
  CHECK(s3.ranks == std::vector<Index>{1, 2});
  CHECK(s3.ar_coeffs == std::vector<double>{0.8, -0.8});
}

TEST_CASE("population signal strengths match hand-derived constants") {
  using tfm::Flavor;
  using tfm::SignalNormalization;
  const auto mean = SignalNormalization::LAG_MEAN;

  // Setting II, mode 1: the factor autocovariances are gamma_1(h) from
  // phi = 0.8 and gamma_2(h) from phi = 0.6; the outer-product moment sees
  // sqrt(sum_h gamma_1^2 + gamma_2^2) / h0 and the inner-product moment
  // sqrt(sum_h (gamma_1 + gamma_2)^2) / h0.
  const ModelSpec s2 = tfm::setting_preset(Setting::II, 1.0, 0);
  const double want_top[3] = {2.4119, 1.5243, 1.1270};
  const double want_tip[3] = {3.1597, 1.9660, 1.4359};
  for (int h0 = 1; h0 <= 3; ++h0) {
    const auto top = tfm::population_signal(s2, h0, Flavor::TOPUP, mean);
    const auto tip = tfm::population_signal(s2, h0, Flavor::TIPUP, mean);
    CHECK(top[0] == doctest::Approx(want_top[h0 - 1]).epsilon(5e-4));
    CHECK(tip[0] == doctest::Approx(want_tip[h0 - 1]).epsilon(5e-4));
  }

  // Setting III, mode 1: with phi = (0.8, -0.8) the two lag-1
  // autocovariances cancel exactly in the inner-product moment, and at two
  // lags the surviving lag-2 term gives 3.5556 / 2.
  const ModelSpec s3 = tfm::setting_preset(Setting::III, 1.0, 0);
  CHECK(tfm::population_signal(s3, 1, Flavor::TIPUP, mean)[0] == 0.0);
  CHECK(tfm::population_signal(s3, 2, Flavor::TIPUP, mean)[0] ==
        doctest::Approx(1.7778).epsilon(1e-3));
  // The outer-product moment is immune to the cancellation.
  CHECK(tfm::population_signal(s3, 1, Flavor::TOPUP, mean)[0] >
        3.0);

  // Rank-one model: both flavors reduce to lambda^2 |gamma(1)|.
  ModelSpec r1;
  r1.dims = {3, 4};
  r1.ranks = {1, 1};
  r1.ar_coeffs = {0.5};
  r1.lambda = 2.0;
  const double want = 4.0 * ar_gamma(0.5, 1);
  for (const auto flavor : {Flavor::TOPUP, Flavor::TIPUP}) {
    const auto got = tfm::population_signal(r1, 1, flavor, mean);
    CHECK(got[0] == doctest::Approx(want).epsilon(1e-12));
    CHECK(got[1] == doctest::Approx(want).epsilon(1e-12));
  }

  // The population quantity scales with lambda^2.
  ModelSpec r2 = r1;
  r2.lambda = 6.0;
  CHECK(tfm::population_signal(r2, 1, Flavor::TOPUP, mean)[0] ==
        doctest::Approx(9.0 * want).epsilon(1e-12));

  // The lag-free flavor has no lagged population analogue.
  CHECK_THROWS_AS(tfm::population_signal(r1, 1, Flavor::UP, mean),
                  tfm::InvalidArgument);
}

TEST_CASE("lag normalization applies to population quantities") {
  using tfm::Flavor;
  using tfm::SignalNormalization;
  const ModelSpec s2 = tfm::setting_preset(Setting::II, 1.0, 0);
  const auto mean = tfm::population_signal(s2, 3, Flavor::TIPUP,
                                           SignalNormalization::LAG_MEAN);
  const auto sqr = tfm::population_signal(s2, 3, Flavor::TIPUP,
                                          SignalNormalization::LAG_SQRT);
  CHECK(sqr[0] == doctest::Approx(mean[0] * std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("generation validates its spec") {
  ModelSpec bad;
  bad.dims = {3, 3};
  bad.ranks = {4, 1};
  bad.ar_coeffs = {0.5};
  CHECK_THROWS_AS(tfm::generate(bad, 8), tfm::InvalidArgument);

  ModelSpec unstable;
  unstable.dims = {3, 3};
  unstable.ranks = {1, 1};
  unstable.ar_coeffs = {1.0};
  CHECK_THROWS_AS(tfm::generate(unstable, 8), tfm::InvalidArgument);

  ModelSpec wrong_phi_count;
  wrong_phi_count.dims = {3, 3};
  wrong_phi_count.ranks = {2, 2};
  wrong_phi_count.ar_coeffs = {0.5, 0.5};
  CHECK_THROWS_AS(tfm::generate(wrong_phi_count, 8), tfm::DimensionMismatch);
}
