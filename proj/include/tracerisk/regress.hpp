// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tracerisk/habitfeat.hpp"

namespace tracerisk::regress {

// Response and predictors with an explicit leading intercept column.
struct DesignMatrix {
  Eigen::MatrixXd X;  // n x (p+1); column 0 is all ones
  Eigen::VectorXd y;
  std::vector<std::string> names;  // names[0] == "(intercept)"
};

inline constexpr const char* kInterceptName = "(intercept)";

// Assembles [1, selected feature columns] from a feature matrix. Unknown
// names raise SchemaError.
DesignMatrix make_design(const habitfeat::FeatureMatrix& f,
                         const Eigen::VectorXd& y,
                         std::span<const std::string> feature_subset);

// Two-sided normal critical value for level alpha, solved from erfc by
// bisection (no closed-form constants beyond the math library).
double normal_critical_value(double alpha);

struct FitResult {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  Eigen::VectorXd se_classical;
  Eigen::VectorXd se_sandwich;  // HC0
  Eigen::VectorXd z;            // beta / se_sandwich
  Eigen::MatrixXd cov_classical;
  Eigen::MatrixXd cov_sandwich;
  Eigen::MatrixXd xtx_inv;
  double sigma2 = 0.0;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double alpha = 0.05;
  double z_crit = 0.0;
  Eigen::Index n = 0;
  Eigen::Index p = 0;  // predictors excluding the intercept

  bool significant(Eigen::Index k) const {
    return std::abs(z[k]) >= z_crit;
  }
};

// OLS via column-pivoted Householder QR with a 1e-10 relative rank
// threshold. Rank deficiency raises RankError naming the dependent
// columns; n must exceed the column count. Reports classical and HC0
// sandwich covariances; inference downstream uses the sandwich.
FitResult fit_ols(const DesignMatrix& dm, double alpha = 0.05);

enum class Criterion : std::uint8_t { adjusted_r2, aic };

const char* criterion_name(Criterion c);
std::optional<Criterion> criterion_from_name(std::string_view name);

struct SubsetScore {
  std::vector<std::string> subset;
  double score = 0.0;  // higher is better (AIC enters negated)
};

struct SelectionOutcome {
  std::vector<std::string> chosen;
  double score = 0.0;
  Criterion criterion = Criterion::adjusted_r2;
  bool exhaustive = true;  // false: greedy forward path
  std::vector<SubsetScore> evaluated;
  DesignMatrix design;
  FitResult fit;
};

// Best-subset search over at most max_terms features, scored on the named
// criterion. Exhaustive when the candidate pool has at most 20 columns,
// greedy forward otherwise; ties break toward the earlier subset in
// lexicographic enumeration order. Rank-deficient subsets are recorded
// with a NaN score and skipped.
SelectionOutcome select_model(const habitfeat::FeatureMatrix& f,
                              const Eigen::VectorXd& y, int max_terms = 5,
                              Criterion criterion = Criterion::adjusted_r2,
                              double alpha = 0.05);

}  // namespace tracerisk::regress
