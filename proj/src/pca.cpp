#include "engage/pca.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "engage/error.hpp"

namespace engage {

PcaModel pca_fit(const Eigen::MatrixXd& x, const PcaTarget& target, std::uint64_t /*seed*/) {
  const long n = x.rows();
  const long d = x.cols();
  if (n < 2) raise(Err::TooShort, "PCA needs at least 2 samples, got " + std::to_string(n));

  PcaModel model;
  model.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - model.mean.transpose();
  const double denom = static_cast<double>(n - 1);

  // Eigenvalues of the sample covariance, descending, plus the matching
  // directions in feature space.
  Eigen::VectorXd variances;   // length = min(n, d), descending
  Eigen::MatrixXd directions;  // d x length, orthonormal columns
  if (d <= n) {
    const Eigen::MatrixXd cov = centered.transpose() * centered / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const long m = d;
    variances.resize(m);
    directions.resize(d, m);
    for (long i = 0; i < m; ++i) {
      variances[i] = std::max(0.0, es.eigenvalues()[m - 1 - i]);
      directions.col(i) = es.eigenvectors().col(m - 1 - i);
    }
  } else {
    // Gram route for wide data: eigenvectors of (X_c X_c^T) / (n - 1) map to
    // feature-space directions via X_c^T v / sqrt((n - 1) * lambda).
    const Eigen::MatrixXd gram = centered * centered.transpose() / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const long m = n;
    variances.resize(m);
    directions.resize(d, m);
    for (long i = 0; i < m; ++i) {
      const double lambda = std::max(0.0, es.eigenvalues()[m - 1 - i]);
      variances[i] = lambda;
      if (lambda > 0.0)
        directions.col(i) =
            centered.transpose() * es.eigenvectors().col(m - 1 - i) / std::sqrt(lambda * denom);
      else
        directions.col(i).setZero();
    }
  }

  model.total_variance = variances.sum();
  if (!(model.total_variance > 0.0))
    raise(Err::DegenerateData, "training data has zero total variance");

  // Numerical rank: centering caps it at n - 1.
  long rank = 0;
  const double floor = variances[0] * 1e-12;
  while (rank < variances.size() && variances[rank] > floor) ++rank;
  rank = std::min(rank, n - 1);

  long k;
  if (target.k > 0) {
    k = std::min<long>(target.k, rank);
  } else {
    if (!(target.explained_fraction > 0.0) || target.explained_fraction > 1.0)
      raise(Err::InvalidSpec, "explained_fraction must be in (0, 1]");
    double cum = 0.0;
    k = rank;
    for (long i = 0; i < rank; ++i) {
      cum += variances[i];
      if (cum >= target.explained_fraction * model.total_variance - 1e-15) {
        k = i + 1;
        break;
      }
    }
  }
  k = std::max<long>(k, 1);

  model.k = static_cast<int>(k);
  model.explained_variance = variances.head(k);
  model.components = directions.leftCols(k).transpose();

  // Deterministic sign: the largest-magnitude entry of each row is positive.
  for (long i = 0; i < k; ++i) {
    long arg = 0;
    model.components.row(i).cwiseAbs().maxCoeff(&arg);
    if (model.components(i, arg) < 0.0) model.components.row(i) = -model.components.row(i);
  }
  return model;
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.mean.size())
    raise(Err::DimensionMismatch, "expected " + std::to_string(model.mean.size()) +
                                      " features, got " + std::to_string(x.cols()));
  return (x.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Eigen::MatrixXd pca_inverse(const PcaModel& model, const Eigen::MatrixXd& y) {
  if (y.cols() != model.k)
    raise(Err::DimensionMismatch, "expected " + std::to_string(model.k) +
                                      " components, got " + std::to_string(y.cols()));
  return (y * model.components).rowwise() + model.mean.transpose();
}

}  // namespace engage
