#include "unfold_ssc/config.hpp"

#include "unfold_ssc/container.hpp"

#include <cmath>
#include <functional>
#include <set>

namespace unfold_ssc {

using nlohmann::json;
using nlohmann::ordered_json;

Mode parse_mode(const std::string& s) {
  if (s == "unfold") return Mode::unfold;
  if (s == "classic") return Mode::classic;
  if (s == "kmeans-baseline") return Mode::kmeans_baseline;
  throw ConfigError("unknown mode '" + s + "' (expected unfold, classic or kmeans-baseline)");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::unfold: return "unfold";
    case Mode::classic: return "classic";
    case Mode::kmeans_baseline: return "kmeans-baseline";
  }
  return "unfold";
}

void apply_preset(RunConfig& cfg, const std::string& name) {
  const DatasetPreset& p = find_preset(name);
  cfg.preset = p.name;
  cfg.train.rho0 = p.rho0;
  cfg.train.weights = p.weights;
  cfg.train.layers = p.layers;
  cfg.train.rho_theta_lr_multiplier = p.rho_theta_lr_multiplier;
  cfg.patch = p.patch;
  cfg.k_clusters = p.classes;
}

namespace {

// Reads typed fields out of one JSON object, remembering which keys were consumed.
class ObjectReader {
 public:
  ObjectReader(const json* obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (obj_ && !obj_->is_object()) {
      error("", "must be an object");
      obj_ = nullptr;
    }
  }

  template <typename T>
  void get(const char* key, T& target, std::function<const char*(const T&)> check = {}) {
    if (!obj_) return;
    known_.insert(key);
    const auto it = obj_->find(key);
    if (it == obj_->end()) return;
    T value{};
    if (!convert(*it, value)) {
      error(key, type_message<T>());
      return;
    }
    if (check) {
      if (const char* msg = check(value)) {
        error(key, msg);
        return;
      }
    }
    target = value;
  }

  ObjectReader child(const char* key) {
    known_.insert(key);
    const json* sub = nullptr;
    if (obj_) {
      const auto it = obj_->find(key);
      if (it != obj_->end()) sub = &*it;
    }
    return ObjectReader(sub, qualify(key), errors_);
  }

  void ignore(const char* key) { known_.insert(key); }

  void finish() {
    if (!obj_) return;
    for (const auto& [key, value] : obj_->items())
      if (!known_.count(key)) error(key.c_str(), "unknown key");
  }

  void error(const char* key, const std::string& msg) { errors_.push_back(qualify(key) + ": " + msg); }

 private:
  std::string qualify(const char* key) const {
    if (path_.empty()) return key;
    if (!*key) return path_;
    return path_ + "." + key;
  }

  template <typename T>
  static const char* type_message() {
    if constexpr (std::is_same_v<T, bool>) return "expected a boolean";
    else if constexpr (std::is_same_v<T, std::string>) return "expected a string";
    else if constexpr (std::is_floating_point_v<T>) return "expected a number";
    else if constexpr (std::is_integral_v<T>) return "expected an integer";
    else return "expected a list of positive integers";
  }

  static bool convert(const json& j, bool& v) {
    if (!j.is_boolean()) return false;
    v = j.get<bool>();
    return true;
  }
  static bool convert(const json& j, std::string& v) {
    if (!j.is_string()) return false;
    v = j.get<std::string>();
    return true;
  }
  static bool convert(const json& j, double& v) {
    if (!j.is_number()) return false;
    v = j.get<double>();
    return true;
  }
  static bool convert(const json& j, int& v) {
    if (!j.is_number_integer()) return false;
    const auto x = j.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) return false;
    v = static_cast<int>(x);
    return true;
  }
  static bool convert(const json& j, std::uint64_t& v) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
      return false;
    v = j.get<std::uint64_t>();
    return true;
  }
  static bool convert(const json& j, Eigen::Index& v) {
    if (!j.is_number_integer()) return false;
    v = static_cast<Eigen::Index>(j.get<std::int64_t>());
    return true;
  }
  static bool convert(const json& j, std::vector<Eigen::Index>& v) {
    if (!j.is_array()) return false;
    v.clear();
    for (const auto& e : j) {
      if (!e.is_number_integer() || e.get<std::int64_t>() < 1) return false;
      v.push_back(static_cast<Eigen::Index>(e.get<std::int64_t>()));
    }
    return true;
  }

  const json* obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> known_;
};

const char* non_negative(const double& v) {
  return std::isfinite(v) && v >= 0 ? nullptr : "must be a finite number >= 0";
}
const char* positive(const double& v) {
  return std::isfinite(v) && v > 0 ? nullptr : "must be a finite number > 0";
}
const char* unit_interval(const double& v) {
  return v >= 0 && v < 1 ? nullptr : "must lie in [0, 1)";
}
const char* at_least_one(const int& v) { return v >= 1 ? nullptr : "must be >= 1"; }
const char* at_least_zero(const int& v) { return v >= 0 ? nullptr : "must be >= 0"; }
const char* at_least_one_idx(const Eigen::Index& v) { return v >= 1 ? nullptr : "must be >= 1"; }
const char* odd_patch(const int& v) { return v >= 1 && v % 2 == 1 ? nullptr : "must be odd and >= 1"; }
const char* cluster_count(const int& v) {
  return v == 0 || v >= 2 ? nullptr : "must be >= 2 (or 0 to use the number of true classes)";
}
const char* mode_name(const std::string& s) {
  return s == "unfold" || s == "classic" || s == "kmeans-baseline"
             ? nullptr
             : "must be one of unfold, classic, kmeans-baseline";
}
const char* preset_name(const std::string& s) {
  for (const auto& p : dataset_presets())
    if (p.name == s) return nullptr;
  return "must be one of salinas, indian_pines, paviau";
}
const char* activation_name(const std::string& s) {
  return s == "linear" || s == "leaky_relu" ? nullptr : "must be linear or leaky_relu";
}

}  // namespace

std::optional<RunConfig> resolve_config(const json& doc, const ConfigOverrides& ov,
                                        std::vector<std::string>& errors, bool check_inputs) {
  const std::size_t errors_before = errors.size();
  RunConfig cfg;
  if (!doc.is_object()) {
    errors.push_back("config: top level must be a JSON object");
    return std::nullopt;
  }

  ObjectReader top(&doc, "", errors);
  std::string preset;
  top.get<std::string>("preset", preset, preset_name);
  if (ov.preset) {
    if (const char* msg = preset_name(*ov.preset))
      errors.push_back(std::string("--preset: ") + msg);
    else
      preset = *ov.preset;
  }
  if (!preset.empty() && !preset_name(preset)) apply_preset(cfg, preset);

  std::string mode = to_string(cfg.mode);
  top.get<std::string>("mode", mode, mode_name);
  std::uint64_t seed = cfg.seed;
  top.get<std::uint64_t>("seed", seed);
  std::string out = cfg.out.string();
  top.get<std::string>("out", out);
  top.get<int>("patch", cfg.patch, odd_patch);
  top.get<int>("k_clusters", cfg.k_clusters, cluster_count);
  top.get<int>("knn_init", cfg.train.knn_init, at_least_one);
  top.get<int>("knn_struct", cfg.train.knn_struct, at_least_one);
  top.get<std::string>("pretrained", cfg.pretrained);

  auto input = top.child("input");
  input.get<std::string>("cube", cfg.cube_path);
  input.get<std::string>("labels", cfg.labels_path);
  input.get<std::string>("matrix", cfg.matrix_path);
  input.finish();

  auto loss = top.child("loss");
  loss.get<double>("alpha", cfg.train.weights.alpha, non_negative);
  loss.get<double>("beta", cfg.train.weights.beta, non_negative);
  loss.get<double>("gamma", cfg.train.weights.gamma, non_negative);
  loss.finish();

  auto train = top.child("train");
  train.get<int>("pretrain_epochs", cfg.train.pretrain_epochs, at_least_zero);
  train.get<int>("joint_epochs", cfg.train.joint_epochs, at_least_zero);
  train.get<double>("learning_rate", cfg.train.learning_rate, positive);
  train.get<double>("adam_beta1", cfg.train.adam_beta1, unit_interval);
  train.get<double>("adam_beta2", cfg.train.adam_beta2, unit_interval);
  train.get<double>("adam_eps", cfg.train.adam_eps, positive);
  train.get<double>("rho_theta_lr_multiplier", cfg.train.rho_theta_lr_multiplier, positive);
  train.finish();

  auto unfold = top.child("unfold");
  unfold.get<double>("rho0", cfg.train.rho0, positive);
  unfold.get<double>("threshold0", cfg.train.threshold0, positive);
  unfold.get<int>("layers", cfg.train.layers, at_least_one);
  unfold.get<bool>("tied", cfg.train.tied);
  unfold.finish();

  auto ae = top.child("autoencoder");
  ae.get<std::vector<Eigen::Index>>("hidden_dims", cfg.hidden_dims);
  ae.get<Eigen::Index>("latent_dim", cfg.latent_dim, at_least_one_idx);
  std::string activation = to_string(cfg.activation);
  ae.get<std::string>("activation", activation, activation_name);
  ae.get<double>("leaky_slope", cfg.leaky_slope, non_negative);
  ae.finish();

  auto classic = top.child("classic");
  classic.get<double>("lambda", cfg.classic_lambda, non_negative);
  classic.get<double>("rho", cfg.classic_rho, positive);
  classic.get<int>("iterations", cfg.classic_iterations, at_least_one);
  classic.finish();

  auto cluster = top.child("cluster");
  cluster.get<bool>("row_norm", cfg.row_norm);
  cluster.get<bool>("use_z_output", cfg.use_z_output);
  cluster.get<int>("kmeans_restarts", cfg.kmeans.restarts, at_least_one);
  cluster.get<int>("kmeans_iterations", cfg.kmeans.iterations, at_least_one);
  cluster.finish();

  top.finish();

  if (ov.mode) {
    if (const char* msg = mode_name(*ov.mode))
      errors.push_back(std::string("--mode: ") + msg);
    else
      mode = *ov.mode;
  }
  if (ov.seed) seed = *ov.seed;
  if (ov.out) out = *ov.out;
  if (ov.no_row_norm) cfg.row_norm = false;
  if (ov.use_z_output) cfg.use_z_output = true;

  if (!mode_name(mode)) cfg.mode = parse_mode(mode);
  if (!activation_name(activation)) cfg.activation = parse_activation(activation);
  cfg.seed = seed;
  cfg.out = out;

  const bool has_cube = !cfg.cube_path.empty();
  const bool has_matrix = !cfg.matrix_path.empty();
  if (has_cube == has_matrix)
    errors.push_back("input: exactly one of input.cube or input.matrix is required");
  if (has_cube && cfg.labels_path.empty())
    errors.push_back("input.labels: required with input.cube");
  if (check_inputs) {
    auto exists = [&](const std::string& p, const char* key) {
      if (!p.empty() && !std::filesystem::exists(p))
        errors.push_back(std::string(key) + ": file not found: " + p);
    };
    exists(cfg.cube_path, "input.cube");
    exists(cfg.labels_path, "input.labels");
    exists(cfg.matrix_path, "input.matrix");
    if (!cfg.pretrained.empty() && !std::filesystem::exists(cfg.pretrained + "/manifest.json"))
      errors.push_back("pretrained: no checkpoint manifest in " + cfg.pretrained);
  }
  if (errors.size() != errors_before) return std::nullopt;
  return cfg;
}

RunConfig validate_config(const std::filesystem::path& path, const ConfigOverrides& ov,
                          bool check_inputs) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config: cannot parse " + path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  // A run manifest wraps the resolved config.
  if (doc.is_object() && doc.contains("config") && doc.contains("software_version"))
    doc = doc.at("config");
  std::vector<std::string> errors;
  auto cfg = resolve_config(doc, ov, errors, check_inputs);
  if (!cfg) {
    std::string msg = "config: " + std::to_string(errors.size()) + " error(s) in " + path.string();
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return *cfg;
}

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  // The preset is already expanded into the explicit values below.
  j["mode"] = to_string(c.mode);
  j["seed"] = c.seed;
  j["out"] = c.out.string();
  ordered_json input = ordered_json::object();
  if (!c.cube_path.empty()) input["cube"] = c.cube_path;
  if (!c.labels_path.empty()) input["labels"] = c.labels_path;
  if (!c.matrix_path.empty()) input["matrix"] = c.matrix_path;
  j["input"] = input;
  if (!c.pretrained.empty()) j["pretrained"] = c.pretrained;
  j["patch"] = c.patch;
  j["k_clusters"] = c.k_clusters;
  j["knn_init"] = c.train.knn_init;
  j["knn_struct"] = c.train.knn_struct;
  j["loss"] = {{"alpha", c.train.weights.alpha},
               {"beta", c.train.weights.beta},
               {"gamma", c.train.weights.gamma}};
  j["train"] = {{"pretrain_epochs", c.train.pretrain_epochs},
                {"joint_epochs", c.train.joint_epochs},
                {"learning_rate", c.train.learning_rate},
                {"adam_beta1", c.train.adam_beta1},
                {"adam_beta2", c.train.adam_beta2},
                {"adam_eps", c.train.adam_eps},
                {"rho_theta_lr_multiplier", c.train.rho_theta_lr_multiplier}};
  j["unfold"] = {{"rho0", c.train.rho0},
                 {"threshold0", c.train.threshold0},
                 {"layers", c.train.layers},
                 {"tied", c.train.tied}};
  j["autoencoder"] = {{"hidden_dims", c.hidden_dims},
                      {"latent_dim", c.latent_dim},
                      {"activation", to_string(c.activation)},
                      {"leaky_slope", c.leaky_slope}};
  j["classic"] = {{"lambda", c.classic_lambda},
                  {"rho", c.classic_rho},
                  {"iterations", c.classic_iterations}};
  j["cluster"] = {{"row_norm", c.row_norm},
                  {"use_z_output", c.use_z_output},
                  {"kmeans_restarts", c.kmeans.restarts},
                  {"kmeans_iterations", c.kmeans.iterations}};
  return j;
}

}  // namespace unfold_ssc
