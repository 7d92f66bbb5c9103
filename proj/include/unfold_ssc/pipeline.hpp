#pragma once

#include "unfold_ssc/config.hpp"
#include "unfold_ssc/data.hpp"
#include "unfold_ssc/metrics.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace unfold_ssc {

/// Samples as columns of a d x n matrix, plus whatever ground truth and
/// scene geometry the input carried.
struct Dataset {
  MatrixXd x;
  std::optional<Labels> truth;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> coords;  // empty for matrix input
  Eigen::Index height = 0, width = 0;
};

Dataset load_dataset(const RunConfig& cfg);

/// Reads a label vector from SSCM or CSV (any 2-D shape, flattened row-major).
Labels read_labels(const std::filesystem::path& path);
std::string labels_csv(const Labels& labels);

/// Binary PPM of the scene; unlabeled pixels black, label l colored palette[l % 12].
std::string label_map_ppm(const Labels& labels,
                          const std::vector<std::pair<Eigen::Index, Eigen::Index>>& coords,
                          Eigen::Index height, Eigen::Index width);

struct PipelineResult {
  Labels labels;
  std::optional<MetricReport> metrics;
  LossHistory pretrain_history;
  LossHistory history;
};

/// Runs the configured mode end to end and writes labels.csv, metrics.json,
/// loss_history.csv, similarity.sscm, checkpoint/, label_map.ppm and
/// run_manifest.json into cfg.out. Artifacts are written only after every
/// stage has succeeded.
PipelineResult run_pipeline(const RunConfig& cfg);

/// Phase 1 only: writes checkpoint/ (autoencoder + frozen graphs),
/// pretrain_history.csv and run_manifest.json.
void run_pretrain(const RunConfig& cfg);

std::string software_version();

}  // namespace unfold_ssc
