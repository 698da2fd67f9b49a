// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tracerisk/regress.hpp"

namespace tracerisk::amip {

// First-order drop-one effects under the data-weighting calculus: entry
// (i, k) approximates the change in beta_k (or in the HC0 sandwich SE of
// beta_k) when row i's weight moves from 1 to 0. The SE derivative treats
// the weighted sandwich with squared weights in the meat,
//   V(w) = A(w)^-1 (sum_i w_i^2 e_i(w)^2 x_i x_i') A(w)^-1,
//   A(w) = sum_i w_i x_i x_i',
// evaluated at w = 1.
struct InfluenceScores {
  Eigen::MatrixXd dbeta;  // n x (p+1)
  Eigen::MatrixXd dse;    // n x (p+1)
};

InfluenceScores influence_scores(const regress::FitResult& fit,
                                 const regress::DesignMatrix& dm);

// What the adversarial removal is trying to do to coefficient k, always
// relative to the base fit's sign s0 = sign(beta_k):
//   sign         flip the coefficient's sign     q = beta_k
//   significance cross the significance boundary q = beta_k - s0 z* se_k
//   both         flip sign significantly          q = beta_k + s0 z* se_k
// Every case reduces to flipping the sign of the scalar q.
enum class Target : std::uint8_t { sign, significance, both };

const char* target_name(Target t);

struct AmipResult {
  Eigen::Index coef = 0;
  std::string coef_name;
  Target target = Target::sign;
  bool success = false;    // linear prediction crossed within the cap
  bool confirmed = false;  // refit on the reduced data actually crossed
  std::uint32_t n_drop = 0;
  double alpha = 0.0;  // n_drop / n
  std::vector<std::uint32_t> removed;  // row indices, ascending
  double qoi_base = 0.0;
  double qoi_predicted = 0.0;
  double qoi_refit = 0.0;
  std::string note;
};

// Greedy maximum-influence search for one (coefficient, target): rows are
// ranked by helpful predicted movement and accumulated until the predicted
// QOI crosses zero. Fails cleanly when the crossing needs more than
// alpha_cap * n rows. Successes are always re-checked by a refit; an
// unconfirmed refit keeps success=true with a warning note.
AmipResult amip_search(const regress::FitResult& fit,
                       const InfluenceScores& scores,
                       const regress::DesignMatrix& dm, Eigen::Index k,
                       Target target, double alpha_cap = 0.5);

// Refits without the removed rows and evaluates the target QOI against the
// base fit's sign convention. Returns (refit qoi, crossed). Throws
// RankError when too few or degenerate rows remain.
std::pair<double, bool> refit_confirm(const regress::DesignMatrix& dm,
                                      std::span<const std::uint32_t> removed,
                                      Eigen::Index k, Target target,
                                      const regress::FitResult& base);

struct TargetSummary {
  std::uint32_t attempts = 0;
  std::uint32_t successes = 0;
  std::uint32_t confirmed = 0;
  std::vector<double> alphas;  // one per success, coefficient order
};

struct Analysis {
  std::vector<AmipResult> results;  // coefficient-major, target order
  std::array<TargetSummary, 3> by_target;  // indexed by Target
  double alpha_cap = 0.5;
};

// Runs every (coefficient, target) pair and aggregates success rates and
// the removal-share distribution.
Analysis analyze_all(const regress::FitResult& fit,
                     const regress::DesignMatrix& dm, double alpha_cap = 0.5);

}  // namespace tracerisk::amip
