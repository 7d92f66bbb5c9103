#include "unfold_ssc/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace unfold_ssc {

namespace {

std::vector<int> distinct(const Labels& labels) {
  std::vector<int> v(labels.begin(), labels.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

void check_lengths(const Labels& pred, const Labels& truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("metrics: label vectors differ in length (" +
                                std::to_string(pred.size()) + " vs " +
                                std::to_string(truth.size()) + ")");
  if (pred.empty()) throw std::invalid_argument("metrics: empty label vectors");
}

// Shortest augmenting path with row/column potentials, O(m^3). Returns row -> column.
std::vector<int> solve_assignment(const MatrixXd& cost) {
  const int m = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(m + 1, 0), v(m + 1, 0), way_min(m + 1);
  std::vector<int> match(m + 1, 0), way(m + 1, 0);  // match[col] = row, 1-based
  std::vector<char> used(m + 1);
  for (int i = 1; i <= m; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(way_min.begin(), way_min.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < way_min[j]) {
          way_min[j] = cur;
          way[j] = j0;
        }
        if (way_min[j] < delta) {
          delta = way_min[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          way_min[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(m));
  for (int j = 1; j <= m; ++j) row_to_col[static_cast<std::size_t>(match[j] - 1)] = j - 1;
  return row_to_col;
}

double total(const MatrixXd& cost, const std::vector<int>& a) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += cost(static_cast<Eigen::Index>(i), a[i]);
  return s;
}

}  // namespace

ContingencyTable contingency(const Labels& pred, const Labels& truth) {
  check_lengths(pred, truth);
  ContingencyTable t;
  t.pred_classes = distinct(pred);
  t.true_classes = distinct(truth);
  t.n = static_cast<Eigen::Index>(pred.size());
  t.counts = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(t.pred_classes.size()),
                                   static_cast<Eigen::Index>(t.true_classes.size()));
  auto index_of = [](const std::vector<int>& classes, int label) {
    return static_cast<Eigen::Index>(std::lower_bound(classes.begin(), classes.end(), label) -
                                     classes.begin());
  };
  for (std::size_t i = 0; i < pred.size(); ++i)
    ++t.counts(index_of(t.pred_classes, pred[i]), index_of(t.true_classes, truth[i]));
  return t;
}

double assignment_cost(const MatrixXd& cost) {
  if (cost.rows() != cost.cols()) throw ShapeError("metrics: hungarian needs a square matrix");
  if (cost.size() == 0) return 0;
  return total(cost, solve_assignment(cost));
}

std::vector<int> hungarian(const MatrixXd& cost) {
  if (cost.rows() != cost.cols()) throw ShapeError("metrics: hungarian needs a square matrix");
  if (!cost.allFinite()) throw std::invalid_argument("metrics: hungarian needs finite costs");
  const Eigen::Index m = cost.rows();
  std::vector<int> result(static_cast<std::size_t>(m), -1);
  if (m == 0) return result;

  // Integer costs below 2^53 are summed exactly, so only a gap of 1 separates optima.
  const double scale = cost.cwiseAbs().maxCoeff() * static_cast<double>(m);
  const bool integral = scale < 0x1p53 && (cost.array() == cost.array().round()).all();
  const double tol = integral ? 0.5 : 1e-9 * (1.0 + scale);
  double remaining = assignment_cost(cost);
  std::vector<Eigen::Index> free_cols(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) free_cols[static_cast<std::size_t>(j)] = j;

  // Fix rows in order, each to the smallest column that keeps the optimum reachable.
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index rest = m - i - 1;
    for (std::size_t pos = 0; pos < free_cols.size(); ++pos) {
      const Eigen::Index j = free_cols[pos];
      MatrixXd sub(rest, rest);
      for (Eigen::Index r = 0; r < rest; ++r) {
        Eigen::Index cc = 0;
        for (std::size_t q = 0; q < free_cols.size(); ++q)
          if (q != pos) sub(r, cc++) = cost(i + 1 + r, free_cols[q]);
      }
      const double sub_opt = assignment_cost(sub);
      if (std::abs(cost(i, j) + sub_opt - remaining) <= tol) {
        result[static_cast<std::size_t>(i)] = static_cast<int>(j);
        remaining = sub_opt;
        free_cols.erase(free_cols.begin() + static_cast<std::ptrdiff_t>(pos));
        break;
      }
    }
  }
  return result;
}

namespace {

struct Matching {
  ContingencyTable table;
  std::vector<int> assignment;  // padded pred index -> padded true index
  Eigen::Index matched = 0;
};

Matching best_matching(const Labels& pred, const Labels& truth) {
  Matching mt;
  mt.table = contingency(pred, truth);
  const auto kp = mt.table.counts.rows();
  const auto kt = mt.table.counts.cols();
  const Eigen::Index m = std::max(kp, kt);
  // Most matched samples first; among those, the least chance agreement
  // (sum of pred-size * true-size over matched pairs, always below n^2 + 1).
  const double n = static_cast<double>(mt.table.n);
  const Eigen::VectorXd rows = mt.table.counts.rowwise().sum().cast<double>();
  const Eigen::VectorXd cols = mt.table.counts.colwise().sum().transpose().cast<double>();
  MatrixXd cost = MatrixXd::Zero(m, m);
  cost.topLeftCorner(kp, kt) = -(n * n + 1) * mt.table.counts.cast<double>() + rows * cols.transpose();
  mt.assignment = hungarian(cost);
  for (Eigen::Index i = 0; i < kp; ++i) {
    const int j = mt.assignment[static_cast<std::size_t>(i)];
    if (j < kt) mt.matched += mt.table.counts(i, j);
  }
  return mt;
}

}  // namespace

Labels match_labels(const Labels& pred, const Labels& truth) {
  const Matching mt = best_matching(pred, truth);
  const auto& tc = mt.table.true_classes;
  const int fresh = tc.back() + 1;
  std::map<int, int> remap;
  for (std::size_t i = 0; i < mt.table.pred_classes.size(); ++i) {
    const int j = mt.assignment[i];
    remap[mt.table.pred_classes[i]] =
        j < static_cast<int>(tc.size()) ? tc[static_cast<std::size_t>(j)] : fresh + static_cast<int>(i);
  }
  Labels out(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) out[i] = remap.at(pred[i]);
  return out;
}

double accuracy(const Labels& pred, const Labels& truth) {
  const Matching mt = best_matching(pred, truth);
  return static_cast<double>(mt.matched) / static_cast<double>(mt.table.n);
}

double nmi(const Labels& pred, const Labels& truth) {
  const ContingencyTable t = contingency(pred, truth);
  const double n = static_cast<double>(t.n);
  const Eigen::VectorXd pu = t.counts.rowwise().sum().cast<double>() / n;
  const Eigen::VectorXd pv = t.counts.colwise().sum().transpose().cast<double>() / n;
  auto entropy = [](const Eigen::VectorXd& p) {
    double h = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
      if (p(i) > 0) h -= p(i) * std::log(p(i));
    return h;
  };
  const double hu = entropy(pu);
  const double hv = entropy(pv);
  if (hu <= 0 || hv <= 0) {
    // Identical set partitions have exactly one nonzero cell per row and per column.
    const bool identical = t.counts.rows() == t.counts.cols() &&
                           ((t.counts.array() > 0).rowwise().count() == 1).all() &&
                           ((t.counts.array() > 0).colwise().count() == 1).all();
    return identical ? 1.0 : 0.0;
  }
  double mi = 0;
  for (Eigen::Index i = 0; i < t.counts.rows(); ++i)
    for (Eigen::Index j = 0; j < t.counts.cols(); ++j) {
      if (t.counts(i, j) == 0) continue;
      const double pij = t.counts(i, j) / n;
      mi += pij * std::log(pij / (pu(i) * pv(j)));
    }
  return std::clamp(mi / std::sqrt(hu * hv), 0.0, 1.0);
}

double kappa(const Labels& pred, const Labels& truth) {
  check_lengths(pred, truth);
  const Labels matched = match_labels(pred, truth);
  const double n = static_cast<double>(pred.size());
  std::map<int, double> pred_freq, true_freq;
  double agree = 0;
  for (std::size_t i = 0; i < matched.size(); ++i) {
    pred_freq[matched[i]] += 1;
    true_freq[truth[i]] += 1;
    if (matched[i] == truth[i]) agree += 1;
  }
  const double po = agree / n;
  double pe = 0;
  for (const auto& [label, count] : pred_freq) {
    const auto it = true_freq.find(label);
    if (it != true_freq.end()) pe += (count / n) * (it->second / n);
  }
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

MetricReport evaluate(const Labels& pred, const Labels& truth) {
  MetricReport r;
  r.acc = accuracy(pred, truth);
  r.nmi = nmi(pred, truth);
  r.kappa = kappa(pred, truth);
  r.n = static_cast<Eigen::Index>(pred.size());
  r.k_pred = static_cast<int>(distinct(pred).size());
  r.k_true = static_cast<int>(distinct(truth).size());
  return r;
}

std::string to_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["acc"] = r.acc;
  j["nmi"] = r.nmi;
  j["kappa"] = r.kappa;
  j["n"] = r.n;
  j["k_pred"] = r.k_pred;
  j["k_true"] = r.k_true;
  return j.dump(2) + "\n";
}

}  // namespace unfold_ssc
