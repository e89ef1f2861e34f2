#include "engage/ica.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "engage/error.hpp"
#include "engage/log.hpp"
#include "engage/rng.hpp"

namespace engage {

namespace {

//! W <- (W W^T)^{-1/2} W, making the rows exactly orthonormal.
Eigen::MatrixXd symmetric_orthonormalize(const Eigen::MatrixXd& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w * w.transpose());
  const Eigen::VectorXd inv_sqrt = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose() * w;
}

}  // namespace

Eigen::VectorXd row_kurtosis(const Eigen::MatrixXd& rows) {
  Eigen::VectorXd out(rows.rows());
  for (long i = 0; i < rows.rows(); ++i) {
    const Eigen::ArrayXd centered = rows.row(i).array() - rows.row(i).mean();
    const double m2 = centered.square().mean();
    const double m4 = centered.square().square().mean();
    out[i] = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  }
  return out;
}

IcaModel fit_ica(const Eigen::MatrixXd& data, const IcaConfig& config) {
  const long channels = data.rows();
  const long n = data.cols();
  if (channels < 1) raise(Err::InvalidSpec, "ICA needs at least one channel");
  if (n < 10 * channels)
    raise(Err::TooShort, "ICA needs at least 10 samples per channel, got " +
                             std::to_string(n) + " for " + std::to_string(channels));
  const int k = config.k == 0 ? static_cast<int>(channels) : config.k;
  if (k < 1 || k > channels)
    raise(Err::InvalidSpec, "k must be in [1, " + std::to_string(channels) + "], got " +
                                std::to_string(k));

  IcaModel model;
  model.mean = data.rowwise().mean();
  const Eigen::MatrixXd centered = data.colwise() - model.mean;

  // Eigenvalue whitening of the channel covariance.
  const Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd evals = es.eigenvalues();  // ascending
  const double max_eval = evals[channels - 1];
  if (!(max_eval > 0.0)) raise(Err::RankDeficient, "data has zero variance");
  // Top-k eigenpairs, descending.
  Eigen::VectorXd top(k);
  Eigen::MatrixXd vecs(channels, k);
  for (int i = 0; i < k; ++i) {
    top[i] = evals[channels - 1 - i];
    vecs.col(i) = es.eigenvectors().col(channels - 1 - i);
  }
  if (top[k - 1] <= max_eval * 1e-10)
    raise(Err::RankDeficient,
          "numerical rank below requested component count " + std::to_string(k));

  const Eigen::MatrixXd whiten = top.cwiseSqrt().cwiseInverse().asDiagonal() * vecs.transpose();
  const Eigen::MatrixXd z = whiten * centered;  // k x n, unit variance rows

  // Random orthonormal start, fixed by the seed.
  std::mt19937_64 rng(mix64(config.seed));
  Eigen::MatrixXd w(k, k);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) w(r, c) = gaussian(rng);
  w = symmetric_orthonormalize(w);

  const double inv_n = 1.0 / static_cast<double>(n);
  model.converged = false;
  int iter = 0;
  for (; iter < config.max_iter; ++iter) {
    const Eigen::MatrixXd y = w * z;                 // k x n
    const Eigen::MatrixXd g = y.array().tanh();      // log-cosh contrast derivative
    const Eigen::VectorXd g_prime_mean =
        (1.0 - g.array().square()).rowwise().mean();  // E[1 - tanh^2]
    Eigen::MatrixXd w_next =
        g * z.transpose() * inv_n - g_prime_mean.asDiagonal() * w;
    w_next = symmetric_orthonormalize(w_next);
    const double delta =
        ((w_next * w.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
    w = w_next;
    if (delta < config.tol) {
      model.converged = true;
      ++iter;
      break;
    }
  }
  model.iterations = iter;
  if (!model.converged)
    log_warn("FastICA did not converge in " + std::to_string(config.max_iter) + " iterations");

  model.whitening = whiten;
  model.unmixing = w * whiten;                                   // k x channels
  model.mixing = vecs * top.cwiseSqrt().asDiagonal() * w.transpose();  // channels x k
  return model;
}

Eigen::MatrixXd ica_sources(const IcaModel& model, const Eigen::MatrixXd& data) {
  if (data.rows() != model.unmixing.cols())
    raise(Err::DimensionMismatch, "data channel count does not match the fitted model");
  return model.unmixing * (data.colwise() - model.mean);
}

CleanResult reject_artifact_components(const IcaModel& model, const Eigen::MatrixXd& data,
                                       const ArtifactCriteria& criteria) {
  const long k = model.unmixing.rows();
  const Eigen::MatrixXd sources = ica_sources(model, data);

  // Kurtosis z-scores across components.
  const Eigen::VectorXd kurt = row_kurtosis(sources);
  const double kurt_mean = kurt.mean();
  const double kurt_std =
      std::sqrt((kurt.array() - kurt_mean).square().sum() / static_cast<double>(k));
  Eigen::VectorXd kurt_z = Eigen::VectorXd::Zero(k);
  if (kurt_std > 0.0) kurt_z = (kurt.array() - kurt_mean) / kurt_std;

  // Correlation of each component with the mean of the frontal channels.
  Eigen::VectorXd frontal_r = Eigen::VectorXd::Zero(k);
  if (!criteria.frontal_channels.empty()) {
    Eigen::VectorXd frontal = Eigen::VectorXd::Zero(data.cols());
    for (int ch : criteria.frontal_channels) {
      if (ch < 0 || ch >= data.rows())
        raise(Err::UnknownChannel, "frontal channel index " + std::to_string(ch) +
                                       " outside data with " + std::to_string(data.rows()) +
                                       " channels");
      frontal += data.row(ch).transpose();
    }
    frontal /= static_cast<double>(criteria.frontal_channels.size());
    const Eigen::VectorXd fc = frontal.array() - frontal.mean();
    const double f_norm = fc.norm();
    if (f_norm > 0.0) {
      for (long i = 0; i < k; ++i) {
        const Eigen::VectorXd sc =
            sources.row(i).transpose().array() - sources.row(i).mean();
        const double s_norm = sc.norm();
        frontal_r[i] = s_norm > 0.0 ? fc.dot(sc) / (f_norm * s_norm) : 0.0;
      }
    }
  }

  CleanResult result;
  Eigen::MatrixXd kept = sources;
  for (long i = 0; i < k; ++i) {
    if (kurt_z[i] > criteria.kurtosis_z || std::abs(frontal_r[i]) > criteria.frontal_corr) {
      result.rejected.push_back(static_cast<int>(i));
      kept.row(i).setZero();
    }
  }
  result.all_rejected = static_cast<long>(result.rejected.size()) == k;
  if (result.all_rejected)
    log_warn("all ICA components rejected; reconstruction keeps channel means only");

  result.cleaned = (model.mixing * kept).colwise() + model.mean;
  return result;
}

}  // namespace engage
