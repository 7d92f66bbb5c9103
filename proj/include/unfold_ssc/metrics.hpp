#pragma once

#include "unfold_ssc/common.hpp"

#include <string>
#include <vector>

namespace unfold_ssc {

/// Counts of (predicted class, true class) pairs. Classes are the distinct label
/// values in ascending order.
struct ContingencyTable {
  Eigen::MatrixXi counts;  // k_pred x k_true
  std::vector<int> pred_classes;
  std::vector<int> true_classes;
  Eigen::Index n = 0;
};

ContingencyTable contingency(const Labels& pred, const Labels& truth);

/// Minimum-cost assignment for a square cost matrix: result[row] = column.
/// Among optimal assignments the lexicographically smallest is returned.
std::vector<int> hungarian(const MatrixXd& cost);

/// Optimal total cost only (no tie-breaking pass).
double assignment_cost(const MatrixXd& cost);

/// Maps each predicted label to a true label through the accuracy-optimal bijection;
/// ties go to the bijection with the smallest chance agreement, so kappa does not
/// depend on how either side is labeled.
/// Predicted classes matched to padding columns keep a fresh label outside the truth set.
Labels match_labels(const Labels& pred, const Labels& truth);

double accuracy(const Labels& pred, const Labels& truth);
double nmi(const Labels& pred, const Labels& truth);
double kappa(const Labels& pred, const Labels& truth);

struct MetricReport {
  double acc = 0, nmi = 0, kappa = 0;
  Eigen::Index n = 0;
  int k_pred = 0, k_true = 0;
};

MetricReport evaluate(const Labels& pred, const Labels& truth);
std::string to_json(const MetricReport& report);

}  // namespace unfold_ssc
