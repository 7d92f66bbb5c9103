#pragma once

#include "unfold_ssc/autoenc.hpp"
#include "unfold_ssc/unfold.hpp"

#include <filesystem>
#include <optional>

namespace unfold_ssc {

/// Everything needed to rebuild a trained model: one SSCM file per tensor plus
/// manifest.json listing layer count, tying flag and tensor file names.
struct Checkpoint {
  AeWeights<double> ae;
  std::optional<UnfoldParams<double>> unfold;
  std::optional<MatrixXd> z0;         // frozen init adjacency
  std::optional<MatrixXd> adjacency;  // frozen structure adjacency
};

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace unfold_ssc
