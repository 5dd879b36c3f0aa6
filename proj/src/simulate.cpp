#include "tfm/simulate.hpp"

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/QR>

#include "tfm/rng.hpp"

namespace tfm {
namespace {

constexpr std::uint64_t kRoleLoadings = 1;
constexpr std::uint64_t kRoleFactors = 2;
constexpr std::uint64_t kRoleNoise = 3;

Index product(const std::vector<Index>& v) {
  Index p = 1;
  for (Index x : v) p *= x;
  return p;
}

std::vector<double> broadcast(const std::vector<double>& v, Index n,
                              const std::string& what) {
  if (static_cast<Index>(v.size()) == n) return v;
  if (v.size() == 1) return std::vector<double>(static_cast<std::size_t>(n),
                                                v[0]);
  throw DimensionMismatch(what + " needs 1 or " + std::to_string(n) +
                          " values, got " + std::to_string(v.size()));
}

void validate(const ModelSpec& spec) {
  if (spec.dims.empty() || spec.dims.size() != spec.ranks.size()) {
    throw DimensionMismatch("ModelSpec needs matching dims and ranks");
  }
  for (std::size_t k = 0; k < spec.dims.size(); ++k) {
    if (spec.ranks[k] < 1 || spec.ranks[k] > spec.dims[k]) {
      throw InvalidArgument("rank for mode " + std::to_string(k) +
                            " must lie in [1, dim]");
    }
  }
  if (!(spec.lambda >= 0.0) || !(spec.noise_sigma >= 0.0)) {
    throw InvalidArgument("lambda and noise_sigma must be non-negative");
  }
  if (spec.burn_in < 0) {
    throw InvalidArgument("burn_in must be non-negative");
  }
}

std::vector<double> checked_ar(const ModelSpec& spec) {
  const std::vector<double> phis =
      broadcast(spec.ar_coeffs, product(spec.ranks), "ar_coeffs");
  for (double phi : phis) {
    if (!(std::abs(phi) < 1.0)) {
      throw InvalidArgument("AR coefficients must satisfy |phi| < 1");
    }
  }
  return phis;
}

std::vector<double> checked_rho(const ModelSpec& spec) {
  const std::vector<double> rhos = broadcast(
      spec.noise_rho, static_cast<Index>(spec.dims.size()), "noise_rho");
  for (double rho : rhos) {
    if (!(rho >= 0.0 && rho < 1.0)) {
      throw InvalidArgument("noise_rho must lie in [0, 1)");
    }
  }
  return rhos;
}

// Orthonormal loading for one mode: QR of a standard normal draw, with the
// usual positive-diagonal-of-R convention so the factorization is unique.
Eigen::MatrixXd draw_loading(NormalSampler& rng, Index d, Index r) {
  Eigen::MatrixXd g(d, r);
  for (Index j = 0; j < r; ++j) {
    for (Index i = 0; i < d; ++i) g(i, j) = rng.next();
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(d, r);
  const Eigen::MatrixXd rmat =
      qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (Index j = 0; j < r; ++j) {
    if (rmat(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

Eigen::MatrixXd equicorrelation_sqrt(Index d, double rho) {
  if (d < 1) {
    throw InvalidArgument("equicorrelation dimension must be positive");
  }
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw InvalidArgument("equicorrelation rho must lie in [0, 1)");
  }
  const double a = std::sqrt(1.0 - rho);
  const double b =
      (std::sqrt(1.0 - rho + static_cast<double>(d) * rho) - a) /
      static_cast<double>(d);
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(d, d, b);
  m.diagonal().array() += a;
  return m;
}

GroundTruth generate(const ModelSpec& spec, Index length) {
  validate(spec);
  if (length < 2) {
    throw InvalidArgument("series length must be at least 2");
  }
  const std::vector<double> phis = checked_ar(spec);
  const std::vector<double> rhos = checked_rho(spec);
  const Index K = static_cast<Index>(spec.dims.size());
  const Index r_total = product(spec.ranks);
  const Index d_total = product(spec.dims);

  // Loadings.
  NormalSampler rng_load(substream_seed(spec.seed, kRoleLoadings));
  LoadingSet loadings;
  for (Index k = 0; k < K; ++k) {
    loadings.emplace_back(draw_loading(rng_load,
                                       spec.dims[static_cast<std::size_t>(k)],
                                       spec.ranks[static_cast<std::size_t>(k)]));
  }

  // Factor paths: one AR(1) per entry, drawn entry by entry in flat order;
  // started at the stationary law and burned in before sampling begins.
  NormalSampler rng_fac(substream_seed(spec.seed, kRoleFactors));
  TensorSeries factors(spec.ranks, length);
  for (Index e = 0; e < r_total; ++e) {
    const double phi = phis[static_cast<std::size_t>(e)];
    double f = rng_fac.next() / std::sqrt(1.0 - phi * phi);
    for (int i = 0; i < spec.burn_in; ++i) f = phi * f + rng_fac.next();
    for (Index t = 0; t < length; ++t) {
      f = phi * f + rng_fac.next();
      factors[t].data()[e] = f;
    }
  }

  // Noise: white standard normal colored by the per-mode equicorrelation
  // square roots.  Draws are consumed even when sigma == 0 so that the
  // factors and loadings of a noiseless run match their noisy counterpart.
  NormalSampler rng_noise(substream_seed(spec.seed, kRoleNoise));
  std::vector<Eigen::MatrixXd> psi_sqrt;
  for (Index k = 0; k < K; ++k) {
    psi_sqrt.push_back(
        equicorrelation_sqrt(spec.dims[static_cast<std::size_t>(k)],
                             rhos[static_cast<std::size_t>(k)]));
  }
  TensorSeries noise(spec.dims, length);
  for (Index t = 0; t < length; ++t) {
    DenseTensor z(spec.dims);
    for (Index i = 0; i < d_total; ++i) z.data()[i] = rng_noise.next();
    for (Index k = 0; k < K; ++k) {
      z = mode_product(z, psi_sqrt[static_cast<std::size_t>(k)], k);
    }
    noise[t].vec() = spec.noise_sigma * z.vec();
  }

  // Signal and observation.
  TensorSeries signal(spec.dims, length);
  TensorSeries observed(spec.dims, length);
  for (Index t = 0; t < length; ++t) {
    DenseTensor s = factors[t];
    for (Index k = 0; k < K; ++k) {
      s = mode_product(s, loadings[static_cast<std::size_t>(k)].matrix(), k);
    }
    signal[t].vec() = spec.lambda * s.vec();
    observed[t].vec() = signal[t].vec() + noise[t].vec();
  }

  return GroundTruth{.loadings = std::move(loadings),
                     .factors = std::move(factors),
                     .signal = std::move(signal),
                     .noise = std::move(noise),
                     .observed = std::move(observed)};
}

ModelSpec setting_preset(Setting setting, double lambda, std::uint64_t seed) {
  ModelSpec spec;
  spec.dims = {16, 16};
  spec.lambda = lambda;
  spec.seed = seed;
  switch (setting) {
    case Setting::I:
      spec.ranks = {1, 1};
      spec.ar_coeffs = {0.8};
      return spec;
    case Setting::II:
      spec.ranks = {1, 2};
      spec.ar_coeffs = {0.8, 0.6};
      return spec;
    case Setting::III:
      spec.ranks = {1, 2};
      spec.ar_coeffs = {0.8, -0.8};
      return spec;
  }
  throw InvalidArgument("unknown setting");
}

std::vector<double> population_signal(const ModelSpec& spec, int h0,
                                      Flavor flavor,
                                      SignalNormalization norm) {
  validate(spec);
  if (h0 < 1) {
    throw InvalidArgument("h0 must be at least 1");
  }
  if (flavor == Flavor::UP) {
    throw InvalidArgument("UP has no lagged population signal strength");
  }
  const std::vector<double> phis = checked_ar(spec);
  const Index K = static_cast<Index>(spec.ranks.size());
  const Index r_total = product(spec.ranks);

  // Stationary autocovariance of factor entry e at lag h.
  const auto gamma = [&](Index e, int h) {
    const double phi = phis[static_cast<std::size_t>(e)];
    return std::pow(phi, h) / (1.0 - phi * phi);
  };
  const double scale = spec.lambda * spec.lambda;

  // Position of factor entry e in the mode-k unfolding of the rank shape,
  // found by unfolding an indicator tensor so the cyclic column convention
  // is taken from one place only.
  const auto locate = [&](Index k, Index e) {
    DenseTensor probe(spec.ranks);
    probe.data()[e] = 1.0;
    const Eigen::MatrixXd unf = unfold(probe, k);
    for (Index i = 0; i < unf.rows(); ++i) {
      for (Index j = 0; j < unf.cols(); ++j) {
        if (unf(i, j) != 0.0) return std::pair<Index, Index>{i, j};
      }
    }
    throw Error("indicator entry lost during unfolding");
  };

  // With independent factor entries the lag-h population moment of the
  // factor tensor is diagonal: E[vec(F_{t-h}) vec(F_t)'] = diag(gamma(h)).
  // Orthonormal loadings preserve singular values, so each mode's stacked
  // moment can be assembled directly in factor coordinates.
  std::vector<double> out;
  for (Index k = 0; k < K; ++k) {
    const Index rk = spec.ranks[static_cast<std::size_t>(k)];
    const Index rrest = r_total / rk;
    Eigen::MatrixXd stacked;
    if (flavor == Flavor::TOPUP) {
      // Mode-1 unfolding of the stacked order-5 population object; entry e
      // with mode-k coordinates (a, b) contributes gamma_e(h) at row a,
      // column (b, a, b, h).
      stacked = Eigen::MatrixXd::Zero(rk, rrest * rk * rrest * h0);
      for (int h = 1; h <= h0; ++h) {
        for (Index e = 0; e < r_total; ++e) {
          const auto [a, b] = locate(k, e);
          const Index col =
              b + rrest * (a + rk * (b + rrest * static_cast<Index>(h - 1)));
          stacked(a, col) = scale * gamma(e, h);
        }
      }
    } else {
      // TIPUP: the lag-h block is diagonal with row sums of the gammas.
      stacked = Eigen::MatrixXd::Zero(rk, rk * h0);
      for (int h = 1; h <= h0; ++h) {
        for (Index e = 0; e < r_total; ++e) {
          const auto [a, b] = locate(k, e);
          static_cast<void>(b);
          stacked(a, a + rk * static_cast<Index>(h - 1)) +=
              scale * gamma(e, h);
        }
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
    out.push_back(
        apply_normalization(svd.singularValues()(rk - 1), h0, norm));
  }
  return out;
}

}  // namespace tfm
