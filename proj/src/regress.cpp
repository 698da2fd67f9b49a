// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#include "tracerisk/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tracerisk/errors.hpp"

namespace tracerisk::regress {

DesignMatrix make_design(const habitfeat::FeatureMatrix& f,
                         const Eigen::VectorXd& y,
                         std::span<const std::string> feature_subset) {
  const Eigen::Index n = f.values.rows();
  if (y.size() != n)
    throw ConfigError("response length does not match the feature matrix");
  DesignMatrix dm;
  dm.y = y;
  dm.X.resize(n, static_cast<Eigen::Index>(feature_subset.size()) + 1);
  dm.X.col(0).setOnes();
  dm.names.reserve(feature_subset.size() + 1);
  dm.names.emplace_back(kInterceptName);
  Eigen::Index j = 1;
  for (const std::string& name : feature_subset) {
    const Eigen::Index c = f.col(name);
    if (c < 0) throw SchemaError("unknown feature column: " + name);
    dm.X.col(j++) = f.values.col(c);
    dm.names.push_back(name);
  }
  return dm;
}

double normal_critical_value(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("alpha must lie strictly between 0 and 1");
  // Two-sided: solve erfc(z / sqrt(2)) = alpha for z >= 0. erfc is
  // strictly decreasing, so plain bisection converges cleanly.
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (std::erfc(mid / std::sqrt(2.0)) > alpha)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-13) break;
  }
  return 0.5 * (lo + hi);
}

FitResult fit_ols(const DesignMatrix& dm, double alpha) {
  const Eigen::Index n = dm.X.rows();
  const Eigen::Index pp = dm.X.cols();
  if (dm.y.size() != n)
    throw ConfigError("response length does not match the design matrix");
  if (static_cast<Eigen::Index>(dm.names.size()) != pp)
    throw ConfigError("design matrix column names are out of sync");
  if (n <= pp)
    throw RankError("need more rows than coefficients: n=" +
                    std::to_string(n) + ", columns=" + std::to_string(pp));

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
  qr.setThreshold(1e-10);
  qr.compute(dm.X);
  const Eigen::Index rank = qr.rank();
  if (rank < pp) {
    const auto& perm = qr.colsPermutation().indices();
    std::string cols;
    for (Eigen::Index i = rank; i < pp; ++i) {
      if (!cols.empty()) cols += ", ";
      cols += dm.names[static_cast<std::size_t>(perm(i))];
    }
    throw RankError("design matrix is rank deficient; dependent columns: " +
                    cols);
  }

  FitResult fit;
  fit.alpha = alpha;
  fit.z_crit = normal_critical_value(alpha);
  fit.n = n;
  fit.p = pp - 1;
  fit.beta = qr.solve(dm.y);
  fit.residuals = dm.y - dm.X * fit.beta;

  // (X'X)^-1 = P (R'R)^-1 P' from the pivoted factorization X P = Q R.
  const Eigen::MatrixXd R =
      qr.matrixR().topLeftCorner(pp, pp).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(pp, pp));
  const Eigen::MatrixXd base = rinv * rinv.transpose();
  fit.xtx_inv = qr.colsPermutation() * base *
                qr.colsPermutation().transpose();

  const double rss = fit.residuals.squaredNorm();
  fit.sigma2 = rss / static_cast<double>(n - pp);
  fit.cov_classical = fit.sigma2 * fit.xtx_inv;

  const Eigen::MatrixXd xe = fit.residuals.asDiagonal() * dm.X;
  const Eigen::MatrixXd meat = xe.transpose() * xe;
  fit.cov_sandwich = fit.xtx_inv * meat * fit.xtx_inv;

  fit.se_classical = fit.cov_classical.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.se_sandwich = fit.cov_sandwich.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.z.resize(pp);
  for (Eigen::Index k = 0; k < pp; ++k) {
    const double se = fit.se_sandwich[k];
    if (se > 0.0)
      fit.z[k] = fit.beta[k] / se;
    else
      fit.z[k] = fit.beta[k] == 0.0
                     ? 0.0
                     : std::copysign(
                           std::numeric_limits<double>::infinity(),
                           fit.beta[k]);
  }

  const double tss = (dm.y.array() - dm.y.mean()).matrix().squaredNorm();
  fit.r2 = tss > 0.0 ? 1.0 - rss / tss : 1.0;
  fit.adj_r2 = 1.0 - (1.0 - fit.r2) * static_cast<double>(n - 1) /
                         static_cast<double>(n - pp);
  return fit;
}

const char* criterion_name(Criterion c) {
  return c == Criterion::adjusted_r2 ? "adjusted_r2" : "aic";
}

std::optional<Criterion> criterion_from_name(std::string_view name) {
  if (name == "adjusted_r2") return Criterion::adjusted_r2;
  if (name == "aic") return Criterion::aic;
  return std::nullopt;
}

namespace {

// Higher-is-better score; AIC = n ln(RSS/n) + 2k enters negated.
double score_fit(const FitResult& fit, Criterion c) {
  if (c == Criterion::adjusted_r2) return fit.adj_r2;
  const double rss = fit.residuals.squaredNorm();
  const double n = static_cast<double>(fit.n);
  const double aic =
      (rss > 0.0 ? n * std::log(rss / n)
                 : -std::numeric_limits<double>::infinity()) +
      2.0 * static_cast<double>(fit.p + 1);
  return -aic;
}

}  // namespace

SelectionOutcome select_model(const habitfeat::FeatureMatrix& f,
                              const Eigen::VectorXd& y, int max_terms,
                              Criterion criterion, double alpha) {
  if (max_terms < 1) throw ConfigError("max_terms must be at least 1");
  std::vector<std::string> candidates;
  candidates.reserve(f.columns.size());
  for (const auto& c : f.columns) candidates.push_back(c.name);
  std::sort(candidates.begin(), candidates.end());
  if (candidates.empty()) throw ConfigError("no candidate features");
  const std::size_t limit =
      std::min<std::size_t>(static_cast<std::size_t>(max_terms),
                            candidates.size());

  SelectionOutcome out;
  out.criterion = criterion;
  double best = -std::numeric_limits<double>::infinity();
  bool found = false;

  auto consider = [&](const std::vector<std::string>& subset) {
    double score;
    try {
      const FitResult fit = fit_ols(make_design(f, y, subset), alpha);
      score = score_fit(fit, criterion);
    } catch (const RankError&) {
      score = std::numeric_limits<double>::quiet_NaN();
    }
    out.evaluated.push_back({subset, score});
    if (!std::isnan(score) && score > best) {
      best = score;
      out.chosen = subset;
      found = true;
    }
    return score;
  };

  if (candidates.size() <= 20) {
    out.exhaustive = true;
    std::vector<std::string> subset;
    for (std::size_t s = 1; s <= limit; ++s) {
      std::vector<std::size_t> c(s);
      std::iota(c.begin(), c.end(), 0);
      const std::size_t k = candidates.size();
      for (;;) {
        subset.clear();
        for (const std::size_t i : c) subset.push_back(candidates[i]);
        consider(subset);
        std::size_t j = s;
        while (j > 0 && c[j - 1] == k - s + (j - 1)) --j;
        if (j == 0) break;
        ++c[j - 1];
        for (std::size_t l = j; l < s; ++l) c[l] = c[l - 1] + 1;
      }
    }
  } else {
    out.exhaustive = false;
    std::vector<std::string> current;
    std::vector<std::string> remaining = candidates;
    while (current.size() < limit && !remaining.empty()) {
      double step_best = -std::numeric_limits<double>::infinity();
      std::size_t step_pick = remaining.size();
      for (std::size_t i = 0; i < remaining.size(); ++i) {
        std::vector<std::string> trial = current;
        trial.push_back(remaining[i]);
        std::sort(trial.begin(), trial.end());
        const double score = consider(trial);
        if (!std::isnan(score) && score > step_best) {
          step_best = score;
          step_pick = i;
        }
      }
      if (step_pick == remaining.size()) break;  // nothing fit this round
      current.push_back(remaining[step_pick]);
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(step_pick));
      std::sort(current.begin(), current.end());
    }
  }

  if (!found)
    throw RankError("model selection failed: every candidate subset was "
                    "rank deficient");
  out.score = best;
  out.design = make_design(f, y, out.chosen);
  out.fit = fit_ols(out.design, alpha);
  return out;
}

}  // namespace tracerisk::regress
