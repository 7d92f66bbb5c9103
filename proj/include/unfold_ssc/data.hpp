#pragma once

#include "unfold_ssc/common.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>

namespace unfold_ssc {

using LabelMap = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

/// Hyperspectral cube. Pixel (r, c) is row r*width + c of `values`; columns are bands.
/// Labels use 0 for unlabeled pixels, positive integers for classes.
struct HsiCube {
  Eigen::Index height = 0;
  Eigen::Index width = 0;
  Eigen::Index bands = 0;
  MatrixXd values;
  std::optional<LabelMap> labels;

  double& at(Eigen::Index r, Eigen::Index c, Eigen::Index b) { return values(r * width + c, b); }
  double at(Eigen::Index r, Eigen::Index c, Eigen::Index b) const {
    return values(r * width + c, b);
  }
};

/// Patches around labeled pixels, stored column-wise: column i is patch i flattened
/// in (row, col, band) order, so `data` is the d x n matrix fed downstream.
struct PatchSet {
  Eigen::Index patch = 0;
  Eigen::Index bands = 0;
  MatrixXd data;
  Labels center_labels;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> coords;

  Eigen::Index size() const { return data.cols(); }
  double value(Eigen::Index i, Eigen::Index r, Eigen::Index c, Eigen::Index b) const {
    return data((r * patch + c) * bands + b, i);
  }
};

HsiCube load_cube(const std::filesystem::path& values_path,
                  const std::optional<std::filesystem::path>& labels_path = std::nullopt);
void save_cube(const std::filesystem::path& values_path, const HsiCube& cube,
               const std::optional<std::filesystem::path>& labels_path = std::nullopt);

/// Validates and attaches a label map read from an SSCM or CSV container.
void attach_labels(HsiCube& cube, const MatrixXd& raw_labels);

/// Global per-band min-max to [0, 1]; constant bands map to 0.
MatrixXd normalize_bands(const MatrixXd& pixels);

/// Reflect an index into [0, n) without repeating the edge sample.
Eigen::Index reflect_index(Eigen::Index i, Eigen::Index n);

PatchSet extract_patches(const HsiCube& cube, Eigen::Index patch);
MatrixXd flatten_to_matrix(const PatchSet& patches);

struct SubspaceData {
  MatrixXd points;  // ambient_dim x (k * per_cluster), unit-norm columns
  Labels labels;    // 1..k
};

SubspaceData gen_subspaces(std::uint64_t seed, int k, int ambient_dim, int sub_dim,
                           int per_cluster, double noise_sigma);

HsiCube gen_synthetic_cube(std::uint64_t seed, int classes, Eigen::Index height,
                           Eigen::Index width, Eigen::Index bands, double sigma);

}  // namespace unfold_ssc
