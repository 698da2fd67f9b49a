// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "tracerisk/errors.hpp"
#include "tracerisk/regress.hpp"

using namespace tracerisk;
using namespace tracerisk::regress;

namespace {

habitfeat::FeatureMatrix make_features(const std::vector<std::string>& names,
                                       const Eigen::MatrixXd& values) {
  habitfeat::FeatureMatrix fm;
  for (const auto& n : names) fm.columns.push_back({n, n});
  fm.values = values;
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    fm.actor_ids.push_back("a" + std::to_string(i));
  fm.gap_imputed.assign(fm.actor_ids.size(), 0);
  return fm;
}

// Independent scorer on top of the normal-equations oracle fit.
double score_oracle(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    Criterion c) {
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(X.rows());
  // Rank check mirroring the library's contract, via SVD (different path).
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
  if (svd.rank() < X.cols() || X.rows() <= X.cols())
    return std::numeric_limits<double>::quiet_NaN();
  const Eigen::VectorXd beta = oracles::weighted_fit_oracle(X, y, w).beta;
  const Eigen::VectorXd e = y - X * beta;
  const double rss = e.squaredNorm();
  const double n = static_cast<double>(X.rows());
  const double p1 = static_cast<double>(X.cols());
  if (c == Criterion::adjusted_r2) {
    const double tss = (y.array() - y.mean()).square().sum();
    const double r2 = tss > 0 ? 1.0 - rss / tss : 0.0;
    return 1.0 - (1.0 - r2) * (n - 1.0) / (n - p1);
  }
  const double aic =
      (rss > 0.0 ? n * std::log(rss / n)
                 : -std::numeric_limits<double>::infinity()) +
      2.0 * p1;
  return -aic;
}

Eigen::MatrixXd design_for(const habitfeat::FeatureMatrix& fm,
                           const std::vector<std::string>& subset) {
  Eigen::MatrixXd X(fm.values.rows(),
                    static_cast<Eigen::Index>(subset.size()) + 1);
  X.col(0).setOnes();
  for (std::size_t j = 0; j < subset.size(); ++j)
    X.col(static_cast<Eigen::Index>(j) + 1) =
        fm.values.col(fm.col(subset[j]));
  return X;
}

}  // namespace

TEST_CASE("hand-computed fit: symmetric three points") {
  // (0,0), (1,1), (2,0): slope 0, intercept 1/3.
  Eigen::MatrixXd vals(3, 1);
  vals << 0, 1, 2;
  Eigen::VectorXd y(3);
  y << 0, 1, 0;
  const auto fm = make_features({"x"}, vals);
  const std::vector<std::string> sub = {"x"};
  const FitResult fit = fit_ols(make_design(fm, y, sub));

  CHECK(fit.beta[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(fit.beta[1] == doctest::Approx(0.0).scale(1).epsilon(1e-12));
  CHECK(fit.sigma2 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(0.0).scale(1).epsilon(1e-12));
  CHECK(fit.adj_r2 == doctest::Approx(-1.0).epsilon(1e-12));
  // Classical SEs from (X'X)^-1 = [[5,-3],[-3,3]]/6.
  CHECK(fit.se_classical[0] ==
        doctest::Approx(std::sqrt(2.0 / 3.0 * 5.0 / 6.0)).epsilon(1e-12));
  CHECK(fit.se_classical[1] ==
        doctest::Approx(std::sqrt(2.0 / 3.0 * 0.5)).epsilon(1e-12));
  CHECK(fit.n == 3);
  CHECK(fit.p == 1);
}

TEST_CASE("noiseless data is recovered exactly") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Index n = 30 + static_cast<Eigen::Index>(rng() % 50);
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng() % 5);
    Eigen::MatrixXd vals(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < p; ++j) vals(i, j) = gauss(rng);
    Eigen::VectorXd beta(p + 1);
    for (Eigen::Index j = 0; j <= p; ++j) beta[j] = gauss(rng);
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < p; ++j)
      names.push_back("f" + std::to_string(j));
    const auto fm = make_features(names, vals);
    Eigen::VectorXd y = Eigen::VectorXd::Constant(n, beta[0]);
    for (Eigen::Index j = 0; j < p; ++j) y += beta[j + 1] * vals.col(j);

    const FitResult fit = fit_ols(make_design(fm, y, names));
    CHECK((fit.beta - beta).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit.residuals.lpNorm<Eigen::Infinity>() <= 1e-8);
  }
}

TEST_CASE("residuals are orthogonal to the design") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 20 + static_cast<Eigen::Index>(rng() % 80);
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng() % 4);
    Eigen::MatrixXd vals(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < p; ++j) vals(i, j) = gauss(rng);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = gauss(rng);
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < p; ++j)
      names.push_back("f" + std::to_string(j));
    const auto fm = make_features(names, vals);

    const DesignMatrix dm = make_design(fm, y, names);
    const FitResult fit = fit_ols(dm);
    CHECK((dm.X.transpose() * fit.residuals).lpNorm<Eigen::Infinity>() <=
          1e-8);
    // y decomposes into fit + residual.
    CHECK((dm.X * fit.beta + fit.residuals - y).lpNorm<Eigen::Infinity>() <=
          1e-8);
  }
}

TEST_CASE("coefficients and sandwich errors match the normal-equations oracle") {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = 25 + static_cast<Eigen::Index>(rng() % 60);
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng() % 4);
    Eigen::MatrixXd vals(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < p; ++j) vals(i, j) = gauss(rng);
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < p; ++j)
      names.push_back("f" + std::to_string(j));
    const auto fm = make_features(names, vals);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i)
      y[i] = 0.5 + vals.row(i).sum() + gauss(rng);

    const DesignMatrix dm = make_design(fm, y, names);
    const FitResult fit = fit_ols(dm);
    const auto oracle = oracles::weighted_fit_oracle(
        dm.X, y, Eigen::VectorXd::Ones(n));
    CHECK((fit.beta - oracle.beta).lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK((fit.se_sandwich - oracle.se_sandwich).lpNorm<Eigen::Infinity>() <=
          1e-9);
    for (Eigen::Index k = 0; k <= p; ++k) {
      CHECK(fit.z[k] == doctest::Approx(fit.beta[k] / fit.se_sandwich[k])
                            .epsilon(1e-12));
      CHECK(fit.significant(k) == (std::abs(fit.z[k]) >= fit.z_crit));
    }
  }
}

TEST_CASE("rank deficiency raises with the dependent columns named") {
  Eigen::MatrixXd vals(6, 2);
  vals << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10, 6, 12;  // col b = 2 * col a
  Eigen::VectorXd y(6);
  y << 1, 2, 1, 2, 1, 2;
  const auto fm = make_features({"alpha", "bravo"}, vals);
  const std::vector<std::string> sub = {"alpha", "bravo"};
  try {
    fit_ols(make_design(fm, y, sub));
    FAIL("expected RankError");
  } catch (const RankError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("rank deficient") != std::string::npos);
    const bool names_one = msg.find("alpha") != std::string::npos ||
                           msg.find("bravo") != std::string::npos;
    CHECK(names_one);
  }

  // Too few rows: n must exceed the coefficient count.
  Eigen::MatrixXd small(3, 2);
  small << 1, 2, 3, 5, 4, 9;
  Eigen::VectorXd ys(3);
  ys << 1, 2, 3;
  const auto fm2 = make_features({"a", "b"}, small);
  const std::vector<std::string> both = {"a", "b"};
  CHECK_THROWS_AS(fit_ols(make_design(fm2, ys, both)), RankError);
}

TEST_CASE("normal critical values match published quantiles") {
  CHECK(normal_critical_value(0.05) ==
        doctest::Approx(1.9599639845).epsilon(1e-7));
  CHECK(normal_critical_value(0.01) ==
        doctest::Approx(2.5758293035).epsilon(1e-7));
  CHECK(normal_critical_value(0.10) ==
        doctest::Approx(1.6448536270).epsilon(1e-7));
  // Inverse property: two-sided tail mass equals alpha.
  for (const double alpha : {0.2, 0.1, 0.05, 0.02, 0.01, 0.001}) {
    const double z = normal_critical_value(alpha);
    CHECK(std::erfc(z / std::sqrt(2.0)) ==
          doctest::Approx(alpha).epsilon(1e-9));
  }
}

TEST_CASE("make_design rejects unknown features and leads with the intercept") {
  Eigen::MatrixXd vals(4, 1);
  vals << 1, 2, 3, 4;
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 4;
  const auto fm = make_features({"x"}, vals);
  const std::vector<std::string> bad = {"nope"};
  CHECK_THROWS_AS(make_design(fm, y, bad), SchemaError);
  const std::vector<std::string> good = {"x"};
  const DesignMatrix dm = make_design(fm, y, good);
  CHECK(dm.names[0] == kInterceptName);
  CHECK(dm.X.col(0).isConstant(1.0));
}

TEST_CASE("criterion names round-trip") {
  CHECK(criterion_name(Criterion::aic) == std::string("aic"));
  CHECK(criterion_name(Criterion::adjusted_r2) == std::string("adjusted_r2"));
  CHECK(criterion_from_name("aic") == Criterion::aic);
  CHECK(criterion_from_name("adjusted_r2") == Criterion::adjusted_r2);
  CHECK(!criterion_from_name("bic").has_value());
}

TEST_CASE("exhaustive selection matches a brute-force oracle") {
  std::mt19937_64 rng(44);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (const Criterion crit : {Criterion::adjusted_r2, Criterion::aic}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::Index n = 40;
      const Eigen::Index p = 6;
      Eigen::MatrixXd vals(n, p);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) vals(i, j) = gauss(rng);
      std::vector<std::string> names;
      for (Eigen::Index j = 0; j < p; ++j)
        names.push_back("f" + std::to_string(j));
      const auto fm = make_features(names, vals);
      Eigen::VectorXd y(n);
      for (Eigen::Index i = 0; i < n; ++i)
        y[i] = 1.0 + 2.0 * vals(i, 1) - 1.5 * vals(i, 4) + 0.5 * gauss(rng);

      const int max_terms = 3;
      const SelectionOutcome out = select_model(fm, y, max_terms, crit);
      CHECK(out.exhaustive);
      // C(6,1) + C(6,2) + C(6,3)
      CHECK(out.evaluated.size() == 6 + 15 + 20);

      // Oracle: enumerate the same subsets independently, score each with
      // the normal-equations fit, keep the first maximum.
      std::vector<std::string> sorted = names;
      std::sort(sorted.begin(), sorted.end());
      double best = -std::numeric_limits<double>::infinity();
      std::vector<std::string> best_sub;
      for (std::size_t s = 1; s <= max_terms; ++s) {
        std::vector<std::size_t> idx(s);
        std::iota(idx.begin(), idx.end(), 0);
        for (;;) {
          std::vector<std::string> sub;
          for (const std::size_t i : idx) sub.push_back(sorted[i]);
          const double sc = score_oracle(design_for(fm, sub), y, crit);
          if (!std::isnan(sc) && sc > best) {
            best = sc;
            best_sub = sub;
          }
          std::size_t j = s;
          while (j > 0 && idx[j - 1] == sorted.size() - s + (j - 1)) --j;
          if (j == 0) break;
          ++idx[j - 1];
          for (std::size_t l = j; l < s; ++l) idx[l] = idx[l - 1] + 1;
        }
      }
      CHECK(out.chosen == best_sub);
      CHECK(out.score == doctest::Approx(best).epsilon(1e-9));
      CHECK(out.design.names.size() == out.chosen.size() + 1);
    }
  }
}

TEST_CASE("duplicate columns: NaN-scored subsets and earliest-name ties") {
  std::mt19937_64 rng(45);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Index n = 30;
  Eigen::MatrixXd vals(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    vals(i, 0) = gauss(rng);
    vals(i, 2) = gauss(rng);
  }
  vals.col(1) = vals.col(0);  // exact duplicate
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i)
    y[i] = 2.0 * vals(i, 0) + 0.1 * gauss(rng);
  const auto fm = make_features({"a_sig", "b_dup", "c_noise"}, vals);

  // {a_sig} and {b_dup} score bit-identically; the earlier name wins.
  const SelectionOutcome single = select_model(fm, y, 1,
                                               Criterion::adjusted_r2);
  CHECK(single.chosen == std::vector<std::string>{"a_sig"});

  const SelectionOutcome out = select_model(fm, y, 2,
                                            Criterion::adjusted_r2);
  bool saw_nan = false;
  for (const auto& ev : out.evaluated)
    if (ev.subset == std::vector<std::string>{"a_sig", "b_dup"}) {
      CHECK(std::isnan(ev.score));
      saw_nan = true;
    }
  CHECK(saw_nan);
  // The winner can never contain both copies of the same column.
  const bool has_a = std::find(out.chosen.begin(), out.chosen.end(),
                               "a_sig") != out.chosen.end();
  const bool has_b = std::find(out.chosen.begin(), out.chosen.end(),
                               "b_dup") != out.chosen.end();
  CHECK(!(has_a && has_b));
}

TEST_CASE("greedy forward path beyond twenty candidates") {
  std::mt19937_64 rng(46);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Index n = 120;
  const Eigen::Index p = 25;
  Eigen::MatrixXd vals(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) vals(i, j) = gauss(rng);
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < p; ++j) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "f%02d", static_cast<int>(j));
    names.push_back(buf);
  }
  const auto fm = make_features(names, vals);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i)
    y[i] = 3.0 * vals(i, 7) - 2.0 * vals(i, 19) + gauss(rng);

  const int max_terms = 3;
  const SelectionOutcome out =
      select_model(fm, y, max_terms, Criterion::adjusted_r2);
  CHECK(!out.exhaustive);

  // Independent greedy-forward replay with the oracle fit.
  std::vector<std::string> sorted = names;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::string> current;
  std::vector<std::string> remaining = sorted;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::string> best_sub;
  std::size_t n_eval = 0;
  while (current.size() < static_cast<std::size_t>(max_terms) &&
         !remaining.empty()) {
    double step_best = -std::numeric_limits<double>::infinity();
    std::size_t pick = remaining.size();
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      std::vector<std::string> trial = current;
      trial.push_back(remaining[i]);
      std::sort(trial.begin(), trial.end());
      const double sc =
          score_oracle(design_for(fm, trial), y, Criterion::adjusted_r2);
      ++n_eval;
      if (!std::isnan(sc) && sc > best) {
        best = sc;
        best_sub = trial;
      }
      if (!std::isnan(sc) && sc > step_best) {
        step_best = sc;
        pick = i;
      }
    }
    if (pick == remaining.size()) break;
    current.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    std::sort(current.begin(), current.end());
  }
  CHECK(out.chosen == best_sub);
  CHECK(out.score == doctest::Approx(best).epsilon(1e-9));
  CHECK(out.evaluated.size() == n_eval);
  // The two planted drivers must be found.
  CHECK(std::find(out.chosen.begin(), out.chosen.end(), "f07") !=
        out.chosen.end());
  CHECK(std::find(out.chosen.begin(), out.chosen.end(), "f19") !=
        out.chosen.end());
}
