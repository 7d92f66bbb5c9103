#include "unfold_ssc/train.hpp"

#include "unfold_ssc/graph.hpp"

#include <cmath>
#include <sstream>

namespace unfold_ssc {

void LossWeights::validate() const {
  if (!(std::isfinite(alpha) && alpha >= 0)) throw ConfigError("train: alpha must be >= 0");
  if (!(std::isfinite(beta) && beta >= 0)) throw ConfigError("train: beta must be >= 0");
  if (!(std::isfinite(gamma) && gamma >= 0)) throw ConfigError("train: gamma must be >= 0");
}

void TrainConfig::validate() const {
  weights.validate();
  if (pretrain_epochs < 0 || joint_epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (!(learning_rate > 0)) throw ConfigError("train: learning_rate must be > 0");
  if (!(rho0 > 0)) throw ConfigError("train: rho0 must be > 0");
  if (!(threshold0 > 0)) throw ConfigError("train: threshold0 must be > 0");
  if (layers < 1) throw ConfigError("train: layers must be >= 1");
  if (knn_init < 1 || knn_struct < 1) throw ConfigError("train: knn sizes must be >= 1");
}

const std::vector<DatasetPreset>& dataset_presets() {
  static const std::vector<DatasetPreset> presets = {
      {"salinas", 0.1, {40.0, 0.1, 0.0001}, 2, 7, 6, 1.0},
      {"indian_pines", 0.9, {40.0, 0.3, 0.0003}, 3, 7, 4, 10.0},
      {"paviau", 0.5, {40.0, 1.3, 0.01}, 3, 13, 8, 10.0},
  };
  return presets;
}

const DatasetPreset& find_preset(const std::string& name) {
  for (const auto& p : dataset_presets())
    if (p.name == name) return p;
  throw ConfigError("unknown preset '" + name + "' (expected salinas, indian_pines or paviau)");
}

std::vector<ParamView> param_views(AeWeights<double>& ae) {
  std::vector<ParamView> views;
  for (auto* stack : {&ae.encoder, &ae.decoder})
    for (auto& l : *stack) {
      views.push_back({l.w.data(), l.w.size()});
      views.push_back({l.b.data(), l.b.size()});
    }
  return views;
}

std::vector<ParamView> param_views(UnfoldParams<double>& params, double rho_theta_scale) {
  std::vector<ParamView> views;
  for (auto& l : params.layers) {
    views.push_back({l.w.data(), l.w.size()});
    views.push_back({l.b.data(), l.b.size()});
    views.push_back({&l.rho_pre, 1, rho_theta_scale});
    views.push_back({&l.theta_pre, 1, rho_theta_scale});
  }
  return views;
}

std::vector<GradView> grad_views(const AeWeights<double>& grads) {
  std::vector<GradView> views;
  for (const auto* stack : {&grads.encoder, &grads.decoder})
    for (const auto& l : *stack) {
      views.push_back({l.w.data(), l.w.size()});
      views.push_back({l.b.data(), l.b.size()});
    }
  return views;
}

std::vector<GradView> grad_views(const UnfoldGrads<double>& grads) {
  std::vector<GradView> views;
  for (const auto& l : grads.layers) {
    views.push_back({l.w.data(), l.w.size()});
    views.push_back({l.b.data(), l.b.size()});
    views.push_back({&l.rho_pre, 1});
    views.push_back({&l.theta_pre, 1});
  }
  return views;
}

void Adam::step(const std::vector<ParamView>& params, const std::vector<GradView>& grads,
                double lr) {
  if (params.size() != grads.size()) throw ShapeError("adam: parameter/gradient count mismatch");
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(VectorXd::Zero(p.size));
      v_.push_back(VectorXd::Zero(p.size));
    }
  }
  if (m_.size() != params.size()) throw ShapeError("adam: parameter set changed between steps");
  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(beta1_, t);
  const double c2 = 1.0 - std::pow(beta2_, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size != grads[i].size || params[i].size != m_[i].size())
      throw ShapeError("adam: slot " + std::to_string(i) + " size mismatch");
    Eigen::Map<VectorXd> p(params[i].data, params[i].size);
    Eigen::Map<const VectorXd> g(grads[i].data, grads[i].size);
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseAbs2();
    const double step_lr = lr * params[i].lr_scale;
    p.array() -= step_lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

SrLoss loss_sr(const MatrixXd& htilde, const MatrixXd& c) {
  const Eigen::Index n = htilde.cols();
  if (c.rows() != n || c.cols() != n)
    throw ShapeError("train: loss_sr expects C of " + shape_str(n, n) + ", got " +
                     shape_str(c.rows(), c.cols()));
  const MatrixXd resid = htilde - htilde * c;
  MatrixXd g_resid(resid.rows(), n);
  double value = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = resid.col(i).norm();
    value += norm;
    if (norm > 0)
      g_resid.col(i) = resid.col(i) / (norm * static_cast<double>(n));
    else
      g_resid.col(i).setZero();
  }
  SrLoss out;
  out.value = value / static_cast<double>(n);
  out.grad_htilde = g_resid - g_resid * c.transpose();
  out.grad_c = -htilde.transpose() * g_resid;
  return out;
}

SpLoss loss_sp(const MatrixXd& c) {
  const double n = static_cast<double>(c.cols());
  return {c.lpNorm<1>() / n, c.unaryExpr([n](double x) { return sign(x) / n; })};
}

TrainState make_train_state(const AeConfig& ae_cfg, const TrainConfig& cfg) {
  cfg.validate();
  TrainState st{make_autoencoder<double>(ae_cfg),
                std::nullopt,
                Adam(cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps),
                Adam(cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps),
                {},
                {},
                {},
                false};
  return st;
}

namespace {

void check_finite(double v, const char* term) {
  if (!std::isfinite(v)) throw NumericalError(std::string("train: non-finite loss term ") + term);
}

}  // namespace

LossEvaluation total_loss(const TrainState& state, const MatrixXd& x, const LossWeights& w) {
  const auto& ae = state.ae;
  LossEvaluation ev;
  ev.grads.ae.encoder = zeros_like(ae.encoder);
  ev.grads.ae.decoder = zeros_like(ae.decoder);
  ev.grads.ae.activation = ae.activation;
  ev.grads.ae.leaky_slope = ae.leaky_slope;

  StackCache<double> enc_cache, dec_cache;
  const MatrixXd h = encode(ae, x, &enc_cache);
  const MatrixXd xhat = decode(ae, h, &dec_cache);
  const auto rec = ae_loss(x, xhat);
  ev.loss.ae = rec.value;
  check_finite(ev.loss.ae, "l_ae");

  MatrixXd grad_h = backprop_stack(ae.decoder, dec_cache, rec.grad, ae.activation,
                                   ae.leaky_slope, true, ev.grads.ae.decoder)
                        .transpose();

  if (state.unfold) {
    const auto& params = *state.unfold;
    const Eigen::Index n = x.cols();
    const MatrixXd htilde = normalize_latent(h);
    const auto fwd = forward(params, htilde, state.z0, MatrixXd(MatrixXd::Zero(n, n)));
    const auto sr = loss_sr(htilde, fwd.c);
    const auto sp = loss_sp(fwd.c);
    const auto st = structure_loss(fwd.c, state.laplacian);
    ev.loss.sr = sr.value;
    ev.loss.sp = sp.value;
    ev.loss.st = st.value;
    check_finite(ev.loss.sr, "l_sr");
    check_finite(ev.loss.sp, "l_sp");
    check_finite(ev.loss.st, "l_st");

    const MatrixXd grad_c = w.alpha * sr.grad_c + w.beta * sp.grad + w.gamma * st.grad;
    auto ug = backward(fwd.tape, params, grad_c);
    const MatrixXd grad_htilde = w.alpha * sr.grad_htilde + ug.htilde;
    grad_h += normalize_latent_backward(h, htilde, grad_htilde);
    ev.grads.unfold = std::move(ug);
  }
  ev.loss.all = ev.loss.ae + w.alpha * ev.loss.sr + w.beta * ev.loss.sp + w.gamma * ev.loss.st;
  check_finite(ev.loss.all, "l_all");

  backprop_stack(ae.encoder, enc_cache, MatrixXd(grad_h.transpose()), ae.activation,
                 ae.leaky_slope, false, ev.grads.ae.encoder);
  return ev;
}

void adam_step(TrainState& state, const Gradients& grads, const TrainConfig& cfg) {
  state.ae_optimizer.step(param_views(state.ae), grad_views(grads.ae), cfg.learning_rate);
  if (state.unfold) {
    if (!grads.unfold) throw ShapeError("adam: missing unfolded-network gradients");
    state.unfold_optimizer.step(param_views(*state.unfold, cfg.rho_theta_lr_multiplier),
                                grad_views(*grads.unfold), cfg.learning_rate);
  }
}

void pretrain(TrainState& state, const MatrixXd& x, const TrainConfig& cfg, LossHistory& history) {
  cfg.validate();
  const Eigen::Index n = x.cols();
  if (cfg.knn_init >= n || cfg.knn_struct >= n)
    throw ConfigError("train: knn sizes must be < sample count " + std::to_string(n));
  for (int epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
    auto ev = total_loss(state, x, cfg.weights);
    history.push_back(ev.loss);
    adam_step(state, ev.grads, cfg);
  }
  const MatrixXd codes = encode(state.ae, x).transpose();
  state.z0 = knn_adjacency(codes, cfg.knn_init).entries;
  const auto adj = knn_adjacency(codes, cfg.knn_struct);
  state.adjacency = adj.entries;
  state.laplacian = laplacian(adj);
  state.graphs_frozen = true;
}

void train_joint(TrainState& state, const MatrixXd& x, const TrainConfig& cfg,
                 LossHistory& history) {
  cfg.validate();
  if (!state.graphs_frozen) throw ConfigError("train: joint training requires pretraining first");
  const MatrixXd htilde = normalize_latent(encode(state.ae, x));
  state.unfold = init_params(htilde, cfg.rho0, cfg.threshold0, cfg.layers, cfg.tied);
  state.unfold_optimizer = Adam(cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  for (int epoch = 0; epoch < cfg.joint_epochs; ++epoch) {
    auto ev = total_loss(state, x, cfg.weights);
    history.push_back(ev.loss);
    adam_step(state, ev.grads, cfg);
  }
}

Representation representation(const TrainState& state, const MatrixXd& x) {
  if (!state.unfold) throw ConfigError("train: unfolded network not initialized");
  const Eigen::Index n = x.cols();
  const MatrixXd htilde = normalize_latent(encode(state.ae, x));
  auto fwd = forward(*state.unfold, htilde, state.z0, MatrixXd(MatrixXd::Zero(n, n)));
  return {std::move(fwd.c), std::move(fwd.tape.layers.back().z)};
}

std::string loss_history_csv(const LossHistory& history) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,l_all,l_ae,l_sr,l_sp,l_st\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& h = history[i];
    out << i << ',' << h.all << ',' << h.ae << ',' << h.sr << ',' << h.sp << ',' << h.st << '\n';
  }
  return out.str();
}

}  // namespace unfold_ssc
