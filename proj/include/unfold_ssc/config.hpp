#pragma once

#include "unfold_ssc/admm.hpp"
#include "unfold_ssc/autoenc.hpp"
#include "unfold_ssc/cluster.hpp"
#include "unfold_ssc/train.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace unfold_ssc {

enum class Mode { unfold, classic, kmeans_baseline };

Mode parse_mode(const std::string& s);
std::string to_string(Mode m);

/// Fully resolved pipeline configuration.
struct RunConfig {
  std::string preset;  // empty when none
  Mode mode = Mode::unfold;
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";

  std::string cube_path;    // 3-D SSCM cube
  std::string labels_path;  // label map (cube) or label vector (matrix)
  std::string matrix_path;  // d x n data matrix, columns are samples
  std::string pretrained;   // optional checkpoint directory from `pretrain`

  int patch = 7;
  int k_clusters = 0;  // 0: number of distinct ground-truth classes

  TrainConfig train;
  std::vector<Eigen::Index> hidden_dims{256, 64};
  Eigen::Index latent_dim = 32;
  Activation activation = Activation::leaky_relu;
  double leaky_slope = 0.01;

  double classic_lambda = 0.1;
  double classic_rho = 1.0;
  int classic_iterations = 200;

  bool row_norm = true;
  bool use_z_output = false;
  KMeansOptions kmeans;
};

/// Command-line overrides; they take precedence over the file.
struct ConfigOverrides {
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> mode;
  bool no_row_norm = false;
  bool use_z_output = false;
};

/// Applies a named preset on top of `cfg`.
void apply_preset(RunConfig& cfg, const std::string& name);

/// Resolves defaults < preset < document < overrides. Every problem found is
/// collected; the result is empty iff `errors` is non-empty.
std::optional<RunConfig> resolve_config(const nlohmann::json& doc, const ConfigOverrides& ov,
                                        std::vector<std::string>& errors,
                                        bool check_inputs = true);

/// Reads a config (or a run_manifest.json) and resolves it; throws ConfigError listing
/// every problem.
RunConfig validate_config(const std::filesystem::path& path, const ConfigOverrides& ov = {},
                          bool check_inputs = true);

/// The resolved config in the same schema the loader accepts.
nlohmann::ordered_json to_json(const RunConfig& cfg);

}  // namespace unfold_ssc
