#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "engage/error.hpp"
#include "engage/lda.hpp"
#include "engage/model.hpp"
#include "engage/svm.hpp"
#include "helpers.hpp"

using engage::ClassifierKind;
using engage::Err;
using engage::Error;
using engage::KernelKind;
using engage::LdaConfig;
using engage::SvmConfig;
using engage::SvmModel;

namespace {

Eigen::VectorXi labels(std::initializer_list<int> values) {
  Eigen::VectorXi y(static_cast<long>(values.size()));
  long i = 0;
  for (int v : values) y[i++] = v;
  return y;
}

// ---------------------------------------------------------------------------
// Reference solver for the SVM dual: enumerate every {zero, at-C, free}
// assignment of the multipliers, solve the KKT equalities for each, and keep
// the best assignment that satisfies all KKT conditions.  Exhaustive and
// exact for small n, so it serves as an independent optimum oracle.
// ---------------------------------------------------------------------------
struct QpSolution {
  double objective = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd alpha;
  double bias = 0.0;
  bool found = false;
};

QpSolution brute_force_dual(const Eigen::MatrixXd& kmat, const Eigen::VectorXd& y, double c) {
  const long n = kmat.rows();
  Eigen::MatrixXd q(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) q(i, j) = y[i] * y[j] * kmat(i, j);

  const double eps = 1e-8;
  QpSolution best;

  auto consider = [&](const Eigen::VectorXd& alpha, double bias) {
    if ((alpha.array() < -eps).any() || (alpha.array() > c + eps).any()) return;
    if (std::abs(alpha.dot(y)) > eps * (1.0 + c * static_cast<double>(n))) return;
    const Eigen::VectorXd grad = q * alpha;
    for (long i = 0; i < n; ++i) {
      const double r = grad[i] - 1.0 + y[i] * bias;
      if (alpha[i] <= eps) {
        if (r < -1e-7) return;
      } else if (alpha[i] >= c - eps) {
        if (r > 1e-7) return;
      } else if (std::abs(r) > 1e-7) {
        return;
      }
    }
    const double objective = alpha.sum() - 0.5 * alpha.dot(grad);
    if (objective > best.objective) {
      best.objective = objective;
      best.alpha = alpha;
      best.bias = bias;
      best.found = true;
    }
  };

  std::vector<int> state(n, 0);  // 0 = zero, 1 = at C, 2 = free
  long total = 1;
  for (long i = 0; i < n; ++i) total *= 3;
  for (long code = 0; code < total; ++code) {
    long rem = code;
    for (long i = 0; i < n; ++i) {
      state[i] = static_cast<int>(rem % 3);
      rem /= 3;
    }
    std::vector<long> free_set, at_c;
    for (long i = 0; i < n; ++i) {
      if (state[i] == 2) free_set.push_back(i);
      if (state[i] == 1) at_c.push_back(i);
    }

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    for (long i : at_c) alpha[i] = c;

    if (free_set.empty()) {
      double balance = 0.0;
      for (long i : at_c) balance += y[i];
      if (std::abs(balance) > eps) continue;
      // The objective does not involve the bias; pick any feasible one.
      const Eigen::VectorXd grad = q * alpha;
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (long i = 0; i < n; ++i) {
        const double bound = (1.0 - grad[i]) / y[i];
        const bool lower = (state[i] == 0) == (y[i] > 0.0);
        if (lower) lo = std::max(lo, bound);
        else hi = std::min(hi, bound);
      }
      if (lo > hi + eps) continue;
      double bias;
      if (std::isfinite(lo) && std::isfinite(hi)) bias = 0.5 * (lo + hi);
      else if (std::isfinite(lo)) bias = lo;
      else if (std::isfinite(hi)) bias = hi;
      else bias = 0.0;
      consider(alpha, bias);
      continue;
    }

    const long f = static_cast<long>(free_set.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(f + 1, f + 1);
    Eigen::VectorXd rhs(f + 1);
    for (long r = 0; r < f; ++r) {
      for (long s = 0; s < f; ++s) a(r, s) = q(free_set[r], free_set[s]);
      a(r, f) = y[free_set[r]];
      double fixed = 0.0;
      for (long i : at_c) fixed += q(free_set[r], i) * c;
      rhs[r] = 1.0 - fixed;
    }
    double balance = 0.0;
    for (long i : at_c) balance += y[i] * c;
    for (long s = 0; s < f; ++s) a(f, s) = y[free_set[s]];
    rhs[f] = -balance;

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    for (long r = 0; r < f; ++r) alpha[free_set[r]] = sol[r];
    consider(alpha, sol[f]);
  }
  return best;
}

//! Primal objective of the soft-margin problem under the fitted model.
double primal_objective(const Eigen::MatrixXd& kmat, const Eigen::VectorXd& y,
                        const SvmModel& model, double c) {
  const Eigen::VectorXd coeff = model.alpha.array() * y.array();
  const double norm2 = coeff.dot(kmat * coeff);
  double hinge = 0.0;
  const Eigen::VectorXd f = (kmat * coeff).array() + model.bias;
  for (long i = 0; i < y.size(); ++i) hinge += std::max(0.0, 1.0 - y[i] * f[i]);
  return 0.5 * norm2 + c * hinge;
}

}  // namespace

// --------------------------------------------------------------------------
// LDA
// --------------------------------------------------------------------------

TEST_CASE("lda matches a hand-solved discriminant, balanced classes") {
  Eigen::MatrixXd x(8, 2);
  x << 1.0, 2.0, 2.0, 1.0, 1.5, 1.5, 0.5, 1.0,  // class 0
      3.0, 3.5, 4.0, 3.0, 3.5, 2.5, 4.5, 4.0;   // class 1
  const Eigen::VectorXi y = labels({0, 0, 0, 0, 1, 1, 1, 1});
  const engage::LdaModel m = engage::lda_fit(x, y, LdaConfig{0.0});
  // Reference solution of Sw w = mu1 - mu0 with the pooled (n-2) covariance.
  CHECK(m.weights[0] == doctest::Approx(5.2823920265780728).epsilon(1e-9));
  CHECK(m.weights[1] == doctest::Approx(4.7840531561461797).epsilon(1e-9));
  CHECK(m.bias == doctest::Approx(-24.269102990033222).epsilon(1e-9));
}

TEST_CASE("lda matches a hand-solved discriminant, shrinkage and priors") {
  Eigen::MatrixXd x(8, 3);
  x << 0.0, 0.0, 1.0, 1.0, 0.5, 0.0, 0.5, 1.0, 0.5,           // class 0 (3 rows)
      2.0, 2.5, 1.5, 3.0, 2.0, 2.0, 2.5, 3.0, 1.0, 2.0, 3.5,  // class 1 (5 rows)
      2.5, 3.5, 2.5, 1.5;
  const Eigen::VectorXi y = labels({0, 0, 0, 1, 1, 1, 1, 1});
  const engage::LdaModel m = engage::lda_fit(x, y, LdaConfig{0.25});
  CHECK(m.weights[0] == doctest::Approx(10.078161469421675).epsilon(1e-9));
  CHECK(m.weights[1] == doctest::Approx(9.5257034435043817).epsilon(1e-9));
  CHECK(m.weights[2] == doctest::Approx(7.2368803950681277).epsilon(1e-9));
  CHECK(m.bias == doctest::Approx(-38.312018598019556).epsilon(1e-9));
}

TEST_CASE("lda aligns with the displacement axis of spherical clouds") {
  std::mt19937_64 rng(321);
  std::normal_distribution<double> gauss;
  const int n = 200, d = 4;
  Eigen::MatrixXd x(2 * n, d);
  Eigen::VectorXi y(2 * n);
  for (int i = 0; i < 2 * n; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = gauss(rng);
    y[i] = i < n ? 0 : 1;
    if (y[i] == 1) x(i, 0) += 5.0;
  }
  const engage::LdaModel m = engage::lda_fit(x, y, LdaConfig{});
  const double cosine = std::abs(m.weights[0]) / m.weights.norm();
  CHECK(cosine >= 0.99);
}

TEST_CASE("lda boundary passes through the mean of mirror-symmetric classes") {
  Eigen::MatrixXd x(6, 2);
  x << -1.0, -2.0, -2.0, -1.0, -3.0, -3.0, 1.0, 2.0, 2.0, 1.0, 3.0, 3.0;
  const Eigen::VectorXi y = labels({0, 0, 0, 1, 1, 1});
  const engage::LdaModel m = engage::lda_fit(x, y, LdaConfig{0.0});
  const Eigen::VectorXd overall = x.colwise().mean();
  CHECK(std::abs(engage::lda_score(m, overall)) <= 1e-8);
}

TEST_CASE("lda rejects degenerate inputs") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 2);
  CHECK_THROWS_AS(engage::lda_fit(x, labels({1, 1, 1, 1, 1, 1}), LdaConfig{}), Error);
  try {
    engage::lda_fit(x, labels({1, 1, 1, 1, 1, 1}), LdaConfig{});
  } catch (const Error& e) {
    CHECK(e.code() == Err::SingleClass);
  }
  // Identical columns make the pooled covariance singular with shrinkage 0.
  Eigen::MatrixXd dup(6, 2);
  dup << 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 7, 7;
  CHECK_THROWS_AS(engage::lda_fit(dup, labels({0, 0, 0, 1, 1, 1}), LdaConfig{0.0}), Error);
  try {
    engage::lda_fit(dup, labels({0, 0, 0, 1, 1, 1}), LdaConfig{0.0});
  } catch (const Error& e) {
    CHECK(e.code() == Err::SingularCovariance);
  }
}

TEST_CASE("lda predictions ignore a positive global feature scale") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd x(40, 3);
  Eigen::VectorXi y(40);
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = gauss(rng);
    y[i] = i % 2;
    x(i, 1) += y[i] == 1 ? 2.0 : -2.0;
  }
  const engage::LdaModel a = engage::lda_fit(x, y, LdaConfig{});
  const engage::LdaModel b = engage::lda_fit(3.7 * x, y, LdaConfig{});
  const Eigen::VectorXd sa = engage::lda_scores(a, x);
  const Eigen::VectorXd sb = engage::lda_scores(b, 3.7 * x);
  for (long i = 0; i < sa.size(); ++i) CHECK((sa[i] >= 0.0) == (sb[i] >= 0.0));
}

// --------------------------------------------------------------------------
// SVM
// --------------------------------------------------------------------------

TEST_CASE("two symmetric points give the textbook maximum margin") {
  Eigen::MatrixXd x(2, 2);
  x << -1.0, 0.0, 1.0, 0.0;
  const Eigen::VectorXi y = labels({0, 1});
  SvmConfig cfg;
  cfg.kernel = KernelKind::Linear;
  cfg.c = 1000.0;
  const SvmModel m = engage::svm_fit(x, y, cfg);
  CHECK(m.converged);
  CHECK(m.alpha[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(m.alpha[1] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::abs(m.bias) <= 1e-3);
  CHECK(m.support_vectors.rows() == 2);
  CHECK(std::abs(engage::svm_score(m, Eigen::Vector2d(0.0, 0.0))) <= 1e-3);
}

TEST_CASE("xor separates under rbf but not under a linear kernel") {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 1, 1, 0, 1, 1, 0;
  const Eigen::VectorXi y = labels({1, 1, 0, 0});

  SvmConfig rbf;
  rbf.kernel = KernelKind::Rbf;
  rbf.gamma = 1.0;
  rbf.c = 10.0;
  const SvmModel mr = engage::svm_fit(x, y, rbf);
  const Eigen::VectorXd sr = engage::svm_scores(mr, x);
  int correct_rbf = 0;
  for (int i = 0; i < 4; ++i) correct_rbf += ((sr[i] >= 0.0) == (y[i] == 1)) ? 1 : 0;
  CHECK(correct_rbf == 4);

  SvmConfig lin;
  lin.kernel = KernelKind::Linear;
  lin.c = 10.0;
  const SvmModel ml = engage::svm_fit(x, y, lin);
  const Eigen::VectorXd sl = engage::svm_scores(ml, x);
  int correct_lin = 0;
  for (int i = 0; i < 4; ++i) correct_lin += ((sl[i] >= 0.0) == (y[i] == 1)) ? 1 : 0;
  CHECK(correct_lin <= 3);
}

TEST_CASE("smo reaches the brute-force dual optimum on seeded problems") {
  std::mt19937_64 rng(1234);
  std::normal_distribution<double> gauss;
  const double c_choices[] = {0.37, 1.0, 5.5};
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const long n = 4 + static_cast<long>(rng() % 5);  // 4..8 points
    const bool rbf = trial % 2 == 1;
    const long d = rbf ? 3 : 8;  // full-rank linear Gram needs d >= n
    Eigen::MatrixXd x(n, d);
    Eigen::VectorXi y01(n);
    Eigen::VectorXd y(n);
    for (long i = 0; i < n; ++i) {
      for (long j = 0; j < d; ++j) x(i, j) = gauss(rng);
      y01[i] = i < n / 2 ? 0 : 1;
      y[i] = y01[i] == 1 ? 1.0 : -1.0;
    }
    SvmConfig cfg;
    cfg.kernel = rbf ? KernelKind::Rbf : KernelKind::Linear;
    cfg.gamma = rbf ? 0.2 + 0.1 * static_cast<double>(trial % 13) : 0.1;
    cfg.c = c_choices[trial % 3];
    cfg.tol = 1e-6;  // tighten so the dual comparison is meaningful

    const SvmModel m = engage::svm_fit(x, y01, cfg);
    const Eigen::MatrixXd kmat = engage::kernel_matrix(cfg.kernel, cfg.gamma, x, x);
    const QpSolution ref = brute_force_dual(kmat, y, cfg.c);
    REQUIRE(ref.found);
    CHECK(std::abs(m.dual_objective - ref.objective) <=
          1e-4 * (1.0 + std::abs(ref.objective)));
    CHECK(m.kkt_violation <= 1e-3);
    // Dual feasibility of the returned multipliers.
    CHECK((m.alpha.array() >= -1e-12).all());
    CHECK((m.alpha.array() <= cfg.c + 1e-12).all());
    CHECK(std::abs((m.alpha.array() * y.array()).sum()) <= 1e-8);
    // Weak duality with a small gap at convergence.
    const double gap = primal_objective(kmat, y, m, cfg.c) - m.dual_objective;
    CHECK(gap >= -1e-6);
    CHECK(gap <= 1e-2 * (1.0 + std::abs(m.dual_objective)));
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("free support vectors sit on the margin") {
  std::mt19937_64 rng(5150);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd x(12, 2);
  Eigen::VectorXi y(12);
  for (int i = 0; i < 12; ++i) {
    x(i, 0) = gauss(rng) + (i % 2 == 0 ? -1.5 : 1.5);
    x(i, 1) = gauss(rng);
    y[i] = i % 2;
  }
  SvmConfig cfg;
  cfg.kernel = KernelKind::Rbf;
  cfg.gamma = 0.5;
  cfg.c = 10.0;
  cfg.tol = 1e-6;
  const SvmModel m = engage::svm_fit(x, y, cfg);
  const Eigen::VectorXd scores = engage::svm_scores(m, x);
  int free_svs = 0;
  for (int i = 0; i < 12; ++i) {
    if (m.alpha[i] > 1e-8 && m.alpha[i] < cfg.c - 1e-8) {
      CHECK(std::abs(scores[i]) == doctest::Approx(1.0).epsilon(1e-3));
      ++free_svs;
    }
  }
  CHECK(free_svs >= 1);
}

TEST_CASE("non-support points do not influence the fit") {
  Eigen::MatrixXd x(6, 2);
  x << -2, 0, -3, 1, -5, 0, 2, 0, 3, -1, 5, 0;
  const Eigen::VectorXi y = labels({0, 0, 0, 1, 1, 1});
  SvmConfig cfg;
  cfg.kernel = KernelKind::Linear;
  cfg.c = 1000.0;
  cfg.tol = 1e-6;
  const SvmModel full = engage::svm_fit(x, y, cfg);
  REQUIRE(full.alpha[5] <= 1e-10);  // interior point carries no weight

  Eigen::MatrixXd pruned(5, 2);
  pruned = x.topRows(5);
  const SvmModel part = engage::svm_fit(pruned, y.head(5), cfg);

  Eigen::MatrixXd probe(5, 2);
  probe << 0, 0, 1, 1, -1, 2, 4, 0, -4, -1;
  const Eigen::VectorXd sf = engage::svm_scores(full, probe);
  const Eigen::VectorXd sp = engage::svm_scores(part, probe);
  CHECK((sf - sp).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("svm training is deterministic") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 3);
  Eigen::VectorXi y(10);
  for (int i = 0; i < 10; ++i) y[i] = i % 2;
  SvmConfig cfg;
  cfg.kernel = KernelKind::Rbf;
  cfg.gamma = 0.7;
  cfg.c = 2.0;
  const SvmModel a = engage::svm_fit(x, y, cfg);
  const SvmModel b = engage::svm_fit(x, y, cfg);
  CHECK((a.alpha - b.alpha).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.bias == b.bias);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("svm input validation") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 2);
  SvmConfig cfg;
  CHECK_THROWS_AS(engage::svm_fit(x, labels({1, 1, 1, 1}), cfg), Error);
  try {
    engage::svm_fit(x, labels({1, 1, 1, 1}), cfg);
  } catch (const Error& e) {
    CHECK(e.code() == Err::SingleClass);
  }
  CHECK_THROWS_AS(engage::svm_fit(x, labels({0, 1, 2, 1}), cfg), Error);
  SvmConfig bad_c;
  bad_c.c = 0.0;
  CHECK_THROWS_AS(engage::svm_fit(x, labels({0, 1, 0, 1}), bad_c), Error);
}

// --------------------------------------------------------------------------
// Unified classifier interface and the hyper-parameter grid
// --------------------------------------------------------------------------

TEST_CASE("predict maps an exact-zero score to label 1") {
  engage::TrainedModel m;
  m.kind = ClassifierKind::Lda;
  m.lda.weights = Eigen::VectorXd::Zero(2);
  m.lda.bias = 0.0;
  const Eigen::VectorXi p = engage::predict(m, Eigen::MatrixXd::Zero(3, 2));
  for (int i = 0; i < 3; ++i) CHECK(p[i] == 1);
}

TEST_CASE("log_spaced covers the decade grid") {
  const std::vector<double> grid = engage::log_spaced(1e-3, 1e3, 7);
  REQUIRE(grid.size() == 7);
  for (int i = 0; i < 7; ++i)
    CHECK(grid[i] == doctest::Approx(std::pow(10.0, -3 + i)).epsilon(1e-12));
  CHECK_THROWS_AS(engage::log_spaced(1e-3, 1e3, 1), Error);
  CHECK_THROWS_AS(engage::log_spaced(0.0, 1.0, 3), Error);
  CHECK_THROWS_AS(engage::log_spaced(10.0, 1.0, 3), Error);
}

TEST_CASE("classifier names parse case-insensitively") {
  CHECK(engage::classifier_from_string("lda") == ClassifierKind::Lda);
  CHECK(engage::classifier_from_string("LSVM") == ClassifierKind::LinearSvm);
  CHECK(engage::classifier_from_string("RsVm") == ClassifierKind::RbfSvm);
  try {
    engage::classifier_from_string("svm");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Err::InvalidSpec);
    const std::string msg = e.what();
    CHECK(msg.find("lda, lsvm, rsvm") != std::string::npos);
  }
}

TEST_CASE("grid ties resolve to the smallest C then gamma") {
  // Twenty points at exactly two locations: every (C, gamma) classifies the
  // inner folds perfectly, so all grid scores tie.
  Eigen::MatrixXd x(20, 1);
  Eigen::VectorXi y(20);
  for (int i = 0; i < 20; ++i) {
    y[i] = i % 2;
    x(i, 0) = y[i] == 1 ? 1.0 : -1.0;
  }
  const engage::GridSpec grid = engage::GridSpec::defaults();
  const engage::GridChoice rbf =
      engage::grid_search(x, y, ClassifierKind::RbfSvm, grid, 1e-3, 100000, 7);
  CHECK(rbf.best.c == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(rbf.best.gamma == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(rbf.evaluated.size() == 49);

  const engage::GridChoice lin =
      engage::grid_search(x, y, ClassifierKind::LinearSvm, grid, 1e-3, 100000, 7);
  CHECK(lin.best.c == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(lin.best.gamma == 0.0);
  CHECK(lin.evaluated.size() == 7);
}

TEST_CASE("grid visits points C-major, gamma-minor, and argmax matches a re-scan") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss;
  // A ring-versus-center problem where the kernel scale actually matters.
  Eigen::MatrixXd x(40, 2);
  Eigen::VectorXi y(40);
  for (int i = 0; i < 40; ++i) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / 40.0;
    const double radius = i % 2 == 0 ? 0.3 : 2.0;
    x(i, 0) = radius * std::cos(angle) + 0.05 * gauss(rng);
    x(i, 1) = radius * std::sin(angle) + 0.05 * gauss(rng);
    y[i] = i % 2;
  }
  const engage::GridSpec grid = engage::GridSpec::defaults();
  const engage::GridChoice choice =
      engage::grid_search(x, y, ClassifierKind::RbfSvm, grid, 1e-3, 100000, 3);

  REQUIRE(choice.evaluated.size() == 49);
  for (int ci = 0; ci < 7; ++ci)
    for (int gi = 0; gi < 7; ++gi) {
      const auto& pt = choice.evaluated[static_cast<size_t>(ci * 7 + gi)];
      CHECK(pt.c == doctest::Approx(grid.c_values[ci]).epsilon(1e-12));
      CHECK(pt.gamma == doctest::Approx(grid.gamma_values[gi]).epsilon(1e-12));
    }

  // Independent argmax over the reported scores; visiting in ascending
  // (C, gamma) order and replacing only on strict improvement reproduces
  // the documented tie rule exactly.
  engage::GridPoint best = choice.evaluated.front();
  for (const auto& pt : choice.evaluated)
    if (pt.mean_f1 > best.mean_f1) best = pt;
  CHECK(choice.best.mean_f1 == best.mean_f1);
  CHECK(choice.best.c == best.c);
  CHECK(choice.best.gamma == best.gamma);
}

TEST_CASE("grid search is deterministic and guards class sizes") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(20, 2);
  Eigen::VectorXi y(20);
  for (int i = 0; i < 20; ++i) y[i] = i % 2;
  const engage::GridSpec grid = engage::GridSpec::defaults();
  const auto a = engage::grid_search(x, y, ClassifierKind::RbfSvm, grid, 1e-3, 100000, 11);
  const auto b = engage::grid_search(x, y, ClassifierKind::RbfSvm, grid, 1e-3, 100000, 11);
  CHECK(a.best.c == b.best.c);
  CHECK(a.best.gamma == b.best.gamma);
  CHECK(a.best.mean_f1 == b.best.mean_f1);

  Eigen::MatrixXd tiny = Eigen::MatrixXd::Random(8, 2);
  Eigen::VectorXi ty(8);
  for (int i = 0; i < 8; ++i) ty[i] = i % 2;  // 4 per class < 5 inner folds
  CHECK_THROWS_AS(engage::grid_search(tiny, ty, ClassifierKind::RbfSvm, grid, 1e-3, 100000, 1),
                  Error);
  try {
    engage::grid_search(tiny, ty, ClassifierKind::RbfSvm, grid, 1e-3, 100000, 1);
  } catch (const Error& e) {
    CHECK(e.code() == Err::TooFewSamples);
  }
}

TEST_CASE("fit_classifier wires the grid into each kind") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd x(24, 2);
  Eigen::VectorXi y(24);
  for (int i = 0; i < 24; ++i) {
    for (int j = 0; j < 2; ++j) x(i, j) = gauss(rng);
    y[i] = i % 2;
    x(i, 0) += y[i] == 1 ? 2.5 : -2.5;
  }
  engage::ModelConfig cfg;

  cfg.kind = ClassifierKind::Lda;
  const engage::TrainedModel lda = engage::fit_classifier(x, y, cfg, 5);
  CHECK(lda.kind == ClassifierKind::Lda);
  CHECK(lda.lda.weights.size() == 2);

  cfg.kind = ClassifierKind::LinearSvm;
  const engage::TrainedModel lsvm = engage::fit_classifier(x, y, cfg, 5);
  CHECK(lsvm.chosen_c >= 1e-3);
  CHECK(lsvm.chosen_gamma == 0.0);

  cfg.kind = ClassifierKind::RbfSvm;
  const engage::TrainedModel rsvm = engage::fit_classifier(x, y, cfg, 5);
  CHECK(rsvm.chosen_c >= 1e-3);
  CHECK(rsvm.chosen_gamma >= 1e-3);

  // predict agrees with the sign of decision_scores everywhere.
  const Eigen::VectorXd scores = engage::decision_scores(rsvm, x);
  const Eigen::VectorXi pred = engage::predict(rsvm, x);
  for (long i = 0; i < scores.size(); ++i) CHECK(pred[i] == (scores[i] >= 0.0 ? 1 : 0));

  // Determinism across repeated fits with the same seed.
  const engage::TrainedModel again = engage::fit_classifier(x, y, cfg, 5);
  CHECK(again.chosen_c == rsvm.chosen_c);
  CHECK(again.chosen_gamma == rsvm.chosen_gamma);
  CHECK((engage::decision_scores(again, x) - scores).cwiseAbs().maxCoeff() == 0.0);
}
