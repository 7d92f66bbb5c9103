#include "unfold_ssc/data.hpp"

#include "unfold_ssc/container.hpp"
#include "unfold_ssc/rng.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace unfold_ssc {

void attach_labels(HsiCube& cube, const MatrixXd& raw) {
  if (raw.rows() != cube.height || raw.cols() != cube.width)
    throw DataError("data: label map is " + shape_str(raw.rows(), raw.cols()) +
                    " but cube is " + shape_str(cube.height, cube.width));
  LabelMap labels(raw.rows(), raw.cols());
  for (Eigen::Index r = 0; r < raw.rows(); ++r)
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
      const double v = raw(r, c);
      if (v < 0 || v != std::floor(v) || v > std::numeric_limits<int>::max())
        throw DataError("data: label at (" + std::to_string(r) + "," + std::to_string(c) +
                        ") is not a non-negative integer");
      labels(r, c) = static_cast<int>(v);
    }
  cube.labels = std::move(labels);
}

HsiCube load_cube(const std::filesystem::path& values_path,
                  const std::optional<std::filesystem::path>& labels_path) {
  if (!std::filesystem::exists(values_path))
    throw DataError("data: missing cube file " + values_path.string());
  const Tensor t = read_sscm(values_path);
  if (t.dims.size() != 3)
    throw DataError("data: cube file " + values_path.string() + " must have ndims=3");
  HsiCube cube;
  cube.height = static_cast<Eigen::Index>(t.dims[0]);
  cube.width = static_cast<Eigen::Index>(t.dims[1]);
  cube.bands = static_cast<Eigen::Index>(t.dims[2]);
  // The payload is C order over (h, w, bands), which is exactly our row-major pixel layout.
  cube.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                               Eigen::RowMajor>>(
      t.values.data(), cube.height * cube.width, cube.bands);
  if (labels_path) attach_labels(cube, read_matrix(*labels_path));
  return cube;
}

void save_cube(const std::filesystem::path& values_path, const HsiCube& cube,
               const std::optional<std::filesystem::path>& labels_path) {
  Tensor t;
  t.dims = {static_cast<std::uint64_t>(cube.height), static_cast<std::uint64_t>(cube.width),
            static_cast<std::uint64_t>(cube.bands)};
  t.values.resize(static_cast<std::size_t>(cube.values.size()));
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      t.values.data(), cube.values.rows(), cube.values.cols()) = cube.values;
  write_sscm(values_path, t);
  if (labels_path) {
    if (!cube.labels) throw DataError("data: cube has no labels to save");
    write_matrix(*labels_path, cube.labels->cast<double>());
  }
}

MatrixXd normalize_bands(const MatrixXd& pixels) {
  MatrixXd out(pixels.rows(), pixels.cols());
  for (Eigen::Index b = 0; b < pixels.cols(); ++b) {
    const double lo = pixels.col(b).minCoeff();
    const double hi = pixels.col(b).maxCoeff();
    if (hi > lo)
      out.col(b) = (pixels.col(b).array() - lo) / (hi - lo);
    else
      out.col(b).setZero();
  }
  return out;
}

Eigen::Index reflect_index(Eigen::Index i, Eigen::Index n) {
  if (n == 1) return 0;
  const Eigen::Index period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

PatchSet extract_patches(const HsiCube& cube, Eigen::Index patch) {
  if (patch < 1 || patch % 2 == 0)
    throw DataError("data: patch size must be odd and positive, got " + std::to_string(patch));
  if (!cube.labels) throw DataError("data: patch extraction requires a label map");
  const LabelMap& labels = *cube.labels;

  PatchSet set;
  set.patch = patch;
  set.bands = cube.bands;
  for (Eigen::Index r = 0; r < cube.height; ++r)
    for (Eigen::Index c = 0; c < cube.width; ++c)
      if (labels(r, c) > 0) {
        set.coords.emplace_back(r, c);
        set.center_labels.push_back(labels(r, c));
      }
  if (set.coords.empty()) throw DataError("data: no labeled pixels to extract");

  const MatrixXd norm = normalize_bands(cube.values);
  const Eigen::Index half = patch / 2;
  const auto n = static_cast<Eigen::Index>(set.coords.size());
  set.data.resize(patch * patch * cube.bands, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [r0, c0] = set.coords[static_cast<std::size_t>(i)];
    Eigen::Index row = 0;
    for (Eigen::Index dr = -half; dr <= half; ++dr) {
      const Eigen::Index r = reflect_index(r0 + dr, cube.height);
      for (Eigen::Index dc = -half; dc <= half; ++dc) {
        const Eigen::Index c = reflect_index(c0 + dc, cube.width);
        set.data.col(i).segment(row, cube.bands) = norm.row(r * cube.width + c).transpose();
        row += cube.bands;
      }
    }
  }
  return set;
}

MatrixXd flatten_to_matrix(const PatchSet& patches) {
  if (patches.size() == 0) throw DataError("data: empty patch set");
  return patches.data;
}

SubspaceData gen_subspaces(std::uint64_t seed, int k, int ambient_dim, int sub_dim,
                           int per_cluster, double noise_sigma) {
  if (k < 1 || sub_dim < 1 || per_cluster < 1 || sub_dim >= ambient_dim || noise_sigma < 0)
    throw DataError("data: invalid subspace generator dimensions");
  Xoshiro256pp rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto randn = [&](Eigen::Index r, Eigen::Index c) {
    MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = gauss(rng);
    return m;
  };

  SubspaceData out;
  out.points.resize(ambient_dim, static_cast<Eigen::Index>(k) * per_cluster);
  out.labels.reserve(static_cast<std::size_t>(k) * per_cluster);
  for (int cl = 0; cl < k; ++cl) {
    const MatrixXd g = randn(ambient_dim, sub_dim);
    Eigen::HouseholderQR<MatrixXd> qr(g);
    const MatrixXd basis = qr.householderQ() * MatrixXd::Identity(ambient_dim, sub_dim);
    for (int j = 0; j < per_cluster; ++j) {
      VectorXd coeff = randn(sub_dim, 1);
      coeff.normalize();
      VectorXd x = basis * coeff + noise_sigma * randn(ambient_dim, 1);
      x.normalize();
      out.points.col(static_cast<Eigen::Index>(cl) * per_cluster + j) = x;
      out.labels.push_back(cl + 1);
    }
  }
  return out;
}

HsiCube gen_synthetic_cube(std::uint64_t seed, int classes, Eigen::Index height,
                           Eigen::Index width, Eigen::Index bands, double sigma) {
  if (classes < 2 || height < 1 || width < 1 || bands < 1 || sigma < 0 ||
      height * width < classes)
    throw DataError("data: invalid synthetic cube dimensions");

  // Grid of rectangles: `stripes` horizontal stripes, each split into equal-width blocks.
  const int stripes = std::max(1, static_cast<int>(std::floor(std::sqrt(classes))));
  if (height < stripes) throw DataError("data: scene too short for the region grid");
  LabelMap labels(height, width);
  int next = 1;
  for (int s = 0; s < stripes; ++s) {
    const int in_stripe = classes / stripes + (s < classes % stripes ? 1 : 0);
    if (width < in_stripe) throw DataError("data: scene too narrow for the region grid");
    const Eigen::Index r0 = height * s / stripes;
    const Eigen::Index r1 = height * (s + 1) / stripes;
    for (int b = 0; b < in_stripe; ++b) {
      const Eigen::Index c0 = width * b / in_stripe;
      const Eigen::Index c1 = width * (b + 1) / in_stripe;
      labels.block(r0, c0, r1 - r0, c1 - c0).setConstant(next);
      ++next;
    }
  }

  Xoshiro256pp rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Smooth signatures: baseline plus three Gaussian bumps over the band axis.
  MatrixXd signatures(classes, bands);
  for (int cl = 0; cl < classes; ++cl) {
    const double base = 0.1 + 0.2 * unif(rng);
    double amp[3], center[3], spread[3];
    for (int j = 0; j < 3; ++j) {
      amp[j] = 0.1 + 0.3 * unif(rng);
      center[j] = unif(rng);
      spread[j] = 0.08 + 0.17 * unif(rng);
    }
    for (Eigen::Index b = 0; b < bands; ++b) {
      const double t = bands > 1 ? static_cast<double>(b) / static_cast<double>(bands - 1) : 0.0;
      double v = base;
      for (int j = 0; j < 3; ++j)
        v += amp[j] * std::exp(-(t - center[j]) * (t - center[j]) / (2 * spread[j] * spread[j]));
      signatures(cl, b) = v;
    }
  }

  HsiCube cube;
  cube.height = height;
  cube.width = width;
  cube.bands = bands;
  cube.values.resize(height * width, bands);
  for (Eigen::Index r = 0; r < height; ++r)
    for (Eigen::Index c = 0; c < width; ++c)
      for (Eigen::Index b = 0; b < bands; ++b)
        cube.at(r, c, b) = signatures(labels(r, c) - 1, b) + sigma * gauss(rng);
  cube.labels = std::move(labels);
  return cube;
}

}  // namespace unfold_ssc
