// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#include "tracerisk/amip.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tracerisk/errors.hpp"

namespace tracerisk::amip {

namespace {

double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

double qoi_value(Target t, double beta, double se, double s0, double zc) {
  switch (t) {
    case Target::sign:
      return beta;
    case Target::significance:
      return beta - s0 * zc * se;
    case Target::both:
      return beta + s0 * zc * se;
  }
  return beta;
}

}  // namespace

const char* target_name(Target t) {
  switch (t) {
    case Target::sign:
      return "sign";
    case Target::significance:
      return "significance";
    case Target::both:
      return "both";
  }
  return "?";
}

InfluenceScores influence_scores(const regress::FitResult& fit,
                                 const regress::DesignMatrix& dm) {
  const Eigen::Index n = dm.X.rows();
  const Eigen::Index pp = dm.X.cols();
  const Eigen::VectorXd& e = fit.residuals;
  const Eigen::MatrixXd& c = fit.xtx_inv;

  InfluenceScores s;
  // First-order beta shift from dropping row i: -(X'X)^-1 x_i e_i.
  const Eigen::MatrixXd u = dm.X * c;  // row i = (C x_i)'
  s.dbeta = -(u.array().colwise() * e.array()).matrix();

  const Eigen::MatrixXd xe = e.asDiagonal() * dm.X;
  const Eigen::MatrixXd meat = xe.transpose() * xe;

  s.dse.resize(n, pp);
  for (Eigen::Index k = 0; k < pp; ++k) {
    const double se = fit.se_sandwich[k];
    if (!(se > 0.0)) {
      s.dse.col(k).setZero();  // degenerate (perfect fit): no usable slope
      continue;
    }
    const Eigen::VectorXd ck = c.col(k);
    const Eigen::VectorXd uk = u.col(k);  // X C e_k
    const Eigen::VectorXd gk = dm.X * (c * (meat * ck));
    const Eigen::VectorXd tk =
        dm.X.transpose() * (e.array() * uk.array() * uk.array()).matrix();
    const Eigen::VectorXd sk = dm.X * (c * tk);
    // dV_kk/dw_i at w = 1; dropping negates it.
    const Eigen::ArrayXd dv = -2.0 * uk.array() * gk.array() +
                              2.0 * e.array().square() * uk.array().square() -
                              2.0 * e.array() * sk.array();
    s.dse.col(k) = (-dv / (2.0 * se)).matrix();
  }
  return s;
}

AmipResult amip_search(const regress::FitResult& fit,
                       const InfluenceScores& scores,
                       const regress::DesignMatrix& dm, Eigen::Index k,
                       Target target, double alpha_cap) {
  const Eigen::Index n = dm.X.rows();
  const Eigen::Index pp = dm.X.cols();
  if (k < 0 || k >= pp) throw ConfigError("coefficient index out of range");
  if (!(alpha_cap > 0.0 && alpha_cap <= 1.0))
    throw ConfigError("alpha_cap must lie in (0, 1]");

  AmipResult res;
  res.coef = k;
  res.coef_name = dm.names[static_cast<std::size_t>(k)];
  res.target = target;

  const double s0 = sign_of(fit.beta[k]);
  const double q_base = qoi_value(target, fit.beta[k], fit.se_sandwich[k], s0,
                                  fit.z_crit);
  res.qoi_base = q_base;
  const double dir = q_base != 0.0 ? -sign_of(q_base) : -s0;

  // Per-row predicted drop effect on the QOI.
  Eigen::VectorXd dq;
  switch (target) {
    case Target::sign:
      dq = scores.dbeta.col(k);
      break;
    case Target::significance:
      dq = scores.dbeta.col(k) - s0 * fit.z_crit * scores.dse.col(k);
      break;
    case Target::both:
      dq = scores.dbeta.col(k) + s0 * fit.z_crit * scores.dse.col(k);
      break;
  }

  std::vector<std::uint32_t> order;
  order.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    if (dq[i] * dir > 0.0) order.push_back(static_cast<std::uint32_t>(i));
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) {
              const double da = dq[a] * dir, db = dq[b] * dir;
              if (da != db) return da > db;
              return a < b;
            });

  const auto max_drop = static_cast<std::uint32_t>(
      alpha_cap * static_cast<double>(n));
  double q = q_base;
  std::uint32_t taken = 0;
  for (const std::uint32_t i : order) {
    if (taken >= max_drop) break;
    q += dq[i];
    ++taken;
    res.removed.push_back(i);
    if (q * dir > 0.0) {
      res.success = true;
      break;
    }
  }
  res.qoi_predicted = q;

  if (!res.success) {
    res.removed.clear();
    res.n_drop = 0;
    res.alpha = 0.0;
    res.note = order.size() <= max_drop
                   ? "no removal within the cap is predicted to cross; "
                     "helpful rows exhausted"
                   : "predicted crossing needs more than alpha_cap of the "
                     "rows";
    return res;
  }

  res.n_drop = taken;
  res.alpha = static_cast<double>(taken) / static_cast<double>(n);
  std::sort(res.removed.begin(), res.removed.end());
  try {
    const auto [q_refit, crossed] =
        refit_confirm(dm, res.removed, k, target, fit);
    res.qoi_refit = q_refit;
    res.confirmed = crossed;
    if (!crossed)
      res.note = "linear prediction crossed but the refit did not; treat "
                 "the removal set as unverified";
  } catch (const Error& e) {
    res.confirmed = false;
    res.note = std::string("refit failed: ") + e.what();
  }
  return res;
}

std::pair<double, bool> refit_confirm(const regress::DesignMatrix& dm,
                                      std::span<const std::uint32_t> removed,
                                      Eigen::Index k, Target target,
                                      const regress::FitResult& base) {
  const Eigen::Index n = dm.X.rows();
  const Eigen::Index pp = dm.X.cols();
  std::vector<bool> drop(static_cast<std::size_t>(n), false);
  for (const std::uint32_t i : removed) {
    if (i >= static_cast<std::uint32_t>(n))
      throw ConfigError("removal index out of range");
    drop[i] = true;
  }
  const Eigen::Index nred = n - static_cast<Eigen::Index>(removed.size());
  if (nred <= pp)
    throw RankError("refit impossible: too few rows remain after removal");

  regress::DesignMatrix red;
  red.names = dm.names;
  red.X.resize(nred, pp);
  red.y.resize(nred);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (drop[static_cast<std::size_t>(i)]) continue;
    red.X.row(r) = dm.X.row(i);
    red.y[r] = dm.y[i];
    ++r;
  }

  const regress::FitResult refit = regress::fit_ols(red, base.alpha);
  const double s0 = sign_of(base.beta[k]);
  const double q_base = qoi_value(target, base.beta[k], base.se_sandwich[k],
                                  s0, base.z_crit);
  const double dir = q_base != 0.0 ? -sign_of(q_base) : -s0;
  const double q_refit = qoi_value(target, refit.beta[k],
                                   refit.se_sandwich[k], s0, base.z_crit);
  return {q_refit, q_refit * dir > 0.0};
}

Analysis analyze_all(const regress::FitResult& fit,
                     const regress::DesignMatrix& dm, double alpha_cap) {
  Analysis out;
  out.alpha_cap = alpha_cap;
  const InfluenceScores scores = influence_scores(fit, dm);
  const Eigen::Index pp = dm.X.cols();
  for (Eigen::Index k = 0; k < pp; ++k) {
    for (const Target t : {Target::sign, Target::significance, Target::both}) {
      AmipResult res = amip_search(fit, scores, dm, k, t, alpha_cap);
      TargetSummary& ts = out.by_target[static_cast<std::size_t>(t)];
      ++ts.attempts;
      if (res.success) {
        ++ts.successes;
        ts.alphas.push_back(res.alpha);
        if (res.confirmed) ++ts.confirmed;
      }
      out.results.push_back(std::move(res));
    }
  }
  return out;
}

}  // namespace tracerisk::amip
