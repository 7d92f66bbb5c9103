#pragma once

#include "unfold_ssc/autoenc.hpp"
#include "unfold_ssc/common.hpp"
#include "unfold_ssc/unfold.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace unfold_ssc {

struct LossWeights {
  double alpha = 40.0;  // self-representation
  double beta = 1.3;    // sparsity
  double gamma = 0.01;  // structure preservation

  void validate() const;
};

/// Per-dataset settings: Table I patch size and class count, Table II rho0 and loss
/// weights, plus the layer count and rho/theta step multiplier.
struct DatasetPreset {
  std::string name;
  double rho0;
  LossWeights weights;
  int layers;
  int patch;
  int classes;
  double rho_theta_lr_multiplier;
};

const std::vector<DatasetPreset>& dataset_presets();
const DatasetPreset& find_preset(const std::string& name);

struct TrainConfig {
  int pretrain_epochs = 400;
  int joint_epochs = 600;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double rho_theta_lr_multiplier = 1.0;
  LossWeights weights;
  double rho0 = 0.5;
  double threshold0 = 0.005;
  int layers = 3;
  bool tied = false;
  int knn_init = 30;
  int knn_struct = 10;

  void validate() const;
};

/// Flat view of one parameter tensor for the optimizer.
struct ParamView {
  double* data;
  Eigen::Index size;
  double lr_scale = 1.0;
};

struct GradView {
  const double* data;
  Eigen::Index size;
};

std::vector<ParamView> param_views(AeWeights<double>& ae);
std::vector<ParamView> param_views(UnfoldParams<double>& params, double rho_theta_scale);
std::vector<GradView> grad_views(const AeWeights<double>& grads);
std::vector<GradView> grad_views(const UnfoldGrads<double>& grads);

/// Adaptive first-order optimizer with bias-corrected moments.
class Adam {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  /// One update of every parameter; `grads` must mirror `params` slot by slot.
  void step(const std::vector<ParamView>& params, const std::vector<GradView>& grads, double lr);

  std::int64_t steps() const { return step_; }
  const std::vector<VectorXd>& first_moments() const { return m_; }
  const std::vector<VectorXd>& second_moments() const { return v_; }

 private:
  double beta1_, beta2_, eps_;
  std::int64_t step_ = 0;
  std::vector<VectorXd> m_, v_;
};

struct SrLoss {
  double value = 0;
  MatrixXd grad_htilde;  // l x n
  MatrixXd grad_c;       // n x n
};

/// (1/n) sum_i ||H~_i - (H~ C)_i||_2 over columns, unsquared.
SrLoss loss_sr(const MatrixXd& htilde, const MatrixXd& c);

struct SpLoss {
  double value = 0;
  MatrixXd grad;
};

/// (1/n) ||C||_1.
SpLoss loss_sp(const MatrixXd& c);

struct LossBreakdown {
  double all = 0, ae = 0, sr = 0, sp = 0, st = 0;
};

struct TrainState {
  AeWeights<double> ae;
  std::optional<UnfoldParams<double>> unfold;
  Adam ae_optimizer;
  Adam unfold_optimizer;
  MatrixXd z0;         // frozen binary KNN adjacency (knn_init)
  MatrixXd adjacency;  // frozen binary KNN adjacency (knn_struct)
  MatrixXd laplacian;
  bool graphs_frozen = false;
};

struct Gradients {
  AeWeights<double> ae;  // same layout as the weights
  std::optional<UnfoldGrads<double>> unfold;
};

struct LossEvaluation {
  LossBreakdown loss;
  Gradients grads;
};

TrainState make_train_state(const AeConfig& ae_cfg, const TrainConfig& cfg);

/// L_ae + alpha L_sr + beta L_sp + gamma L_st with gradients for every parameter.
/// Before the unfolded network exists only L_ae contributes.
LossEvaluation total_loss(const TrainState& state, const MatrixXd& x, const LossWeights& w);

void adam_step(TrainState& state, const Gradients& grads, const TrainConfig& cfg);

using LossHistory = std::vector<LossBreakdown>;

/// Phase 1: reconstruction-only training, then build and freeze both KNN graphs
/// on the latent codes.
void pretrain(TrainState& state, const MatrixXd& x, const TrainConfig& cfg, LossHistory& history);

/// Phase 2: initialize the unfolded network from H~ and train everything on L_all.
void train_joint(TrainState& state, const MatrixXd& x, const TrainConfig& cfg,
                 LossHistory& history);

/// Final C (zero diagonal) and the last-layer Z for the current state.
struct Representation {
  MatrixXd c;
  MatrixXd z;
};
Representation representation(const TrainState& state, const MatrixXd& x);

std::string loss_history_csv(const LossHistory& history);

}  // namespace unfold_ssc
