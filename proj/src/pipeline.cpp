#include "unfold_ssc/pipeline.hpp"

#include "unfold_ssc/checkpoint.hpp"
#include "unfold_ssc/cluster.hpp"
#include "unfold_ssc/container.hpp"
#include "unfold_ssc/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>

namespace unfold_ssc {

std::string software_version() { return UNFOLD_SSC_VERSION; }

Labels read_labels(const std::filesystem::path& path) {
  const MatrixXd m = read_matrix(path);
  Labels out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (v != std::floor(v) || std::abs(v) > std::numeric_limits<int>::max())
        throw DataError("data: non-integer label in " + path.string());
      out.push_back(static_cast<int>(v));
    }
  return out;
}

std::string labels_csv(const Labels& labels) {
  std::string s;
  for (int l : labels) s += std::to_string(l) + "\n";
  return s;
}

std::string label_map_ppm(const Labels& labels,
                          const std::vector<std::pair<Eigen::Index, Eigen::Index>>& coords,
                          Eigen::Index height, Eigen::Index width) {
  static constexpr std::array<std::array<unsigned char, 3>, 12> kPalette = {{
      {230, 25, 75}, {60, 180, 75}, {255, 225, 25}, {0, 130, 200},
      {245, 130, 48}, {145, 30, 180}, {70, 240, 240}, {240, 50, 230},
      {210, 245, 60}, {250, 190, 212}, {0, 128, 128}, {170, 110, 40},
  }};
  if (labels.size() != coords.size()) throw DataError("ppm: labels and coords differ in length");
  std::string img = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  const std::size_t header = img.size();
  img.resize(header + static_cast<std::size_t>(3 * height * width), '\0');
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto [r, c] = coords[i];
    const auto& color = kPalette[static_cast<std::size_t>(((labels[i] % 12) + 12) % 12)];
    const std::size_t at = header + static_cast<std::size_t>(3 * (r * width + c));
    for (int ch = 0; ch < 3; ++ch) img[at + static_cast<std::size_t>(ch)] = static_cast<char>(color[ch]);
  }
  return img;
}

Dataset load_dataset(const RunConfig& cfg) {
  Dataset ds;
  if (!cfg.cube_path.empty()) {
    const HsiCube cube = load_cube(cfg.cube_path, std::filesystem::path(cfg.labels_path));
    PatchSet patches = extract_patches(cube, cfg.patch);
    ds.x = flatten_to_matrix(patches);
    ds.truth = std::move(patches.center_labels);
    ds.coords = std::move(patches.coords);
    ds.height = cube.height;
    ds.width = cube.width;
  } else {
    ds.x = read_matrix(cfg.matrix_path);
    if (!cfg.labels_path.empty()) {
      ds.truth = read_labels(cfg.labels_path);
      if (static_cast<Eigen::Index>(ds.truth->size()) != ds.x.cols())
        throw DataError("data: " + std::to_string(ds.truth->size()) + " labels for " +
                        std::to_string(ds.x.cols()) + " samples");
    }
  }
  return ds;
}

namespace {

AeConfig ae_config(const RunConfig& cfg, Eigen::Index input_dim) {
  AeConfig ae;
  ae.input_dim = input_dim;
  ae.hidden_dims = cfg.hidden_dims;
  ae.latent_dim = cfg.latent_dim;
  ae.activation = cfg.activation;
  ae.leaky_slope = cfg.leaky_slope;
  ae.seed = cfg.seed;
  return ae;
}

int cluster_count(const RunConfig& cfg, const Dataset& ds) {
  if (cfg.k_clusters > 0) return cfg.k_clusters;
  if (!ds.truth) throw ConfigError("k_clusters is required when no ground truth is given");
  return static_cast<int>(std::set<int>(ds.truth->begin(), ds.truth->end()).size());
}

std::string manifest_json(const RunConfig& cfg) {
  nlohmann::ordered_json m;
  m["software_version"] = software_version();
  m["seed"] = cfg.seed;
  m["config"] = to_json(cfg);
  return m.dump(2) + "\n";
}

void restore_pretrained(TrainState& state, const RunConfig& cfg, Eigen::Index n) {
  Checkpoint ckpt = load_checkpoint(cfg.pretrained);
  if (!ckpt.z0 || !ckpt.adjacency)
    throw DataError("checkpoint " + cfg.pretrained + " has no frozen graphs");
  if (ckpt.z0->rows() != n || ckpt.adjacency->rows() != n)
    throw DataError("checkpoint " + cfg.pretrained + " was built for a different sample count");
  state.ae = std::move(ckpt.ae);
  state.z0 = std::move(*ckpt.z0);
  state.adjacency = std::move(*ckpt.adjacency);
  state.laplacian = -state.adjacency;
  state.laplacian.diagonal() += state.adjacency.rowwise().sum();
  state.graphs_frozen = true;
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& cfg) {
  const Dataset ds = load_dataset(cfg);
  const int k = cluster_count(cfg, ds);
  const Eigen::Index n = ds.x.cols();
  if (k > n) throw ConfigError("k_clusters exceeds the sample count");

  PipelineResult res;
  std::optional<MatrixXd> sim;
  std::optional<Checkpoint> ckpt;
  SpectralOptions sopt;
  sopt.row_normalize = cfg.row_norm;
  sopt.kmeans = cfg.kmeans;

  switch (cfg.mode) {
    case Mode::kmeans_baseline: {
      res.labels = kmeans(MatrixXd(ds.x.transpose()), k, cfg.seed, cfg.kmeans).labels;
      break;
    }
    case Mode::classic: {
      ClassicConfig<double> cc;
      cc.lambda = cfg.classic_lambda;
      cc.rho = cfg.classic_rho;
      cc.iterations = cfg.classic_iterations;
      auto st = solve(ds.x, cc);
      MatrixXd rep = cfg.use_z_output ? st.z : st.c;
      rep.diagonal().setZero();
      sim = similarity(rep);
      res.labels = spectral_cluster(*sim, k, cfg.seed, sopt).labels;
      break;
    }
    case Mode::unfold: {
      TrainState state = make_train_state(ae_config(cfg, ds.x.rows()), cfg.train);
      if (!cfg.pretrained.empty()) {
        restore_pretrained(state, cfg, n);
      } else {
        pretrain(state, ds.x, cfg.train, res.pretrain_history);
      }
      train_joint(state, ds.x, cfg.train, res.history);
      const Representation rep = representation(state, ds.x);
      sim = similarity(cfg.use_z_output ? rep.z : rep.c);
      res.labels = spectral_cluster(*sim, k, cfg.seed, sopt).labels;
      ckpt = Checkpoint{state.ae, state.unfold, state.z0, state.adjacency};
      break;
    }
  }
  if (ds.truth) res.metrics = evaluate(res.labels, *ds.truth);

  const auto& out = cfg.out;
  std::filesystem::create_directories(out);
  if (ckpt) save_checkpoint(out / "checkpoint", *ckpt);
  if (sim) write_sscm(out / "similarity.sscm", to_tensor(*sim));
  write_file_atomic(out / "labels.csv", labels_csv(res.labels));
  if (res.metrics) write_file_atomic(out / "metrics.json", to_json(*res.metrics));
  if (!res.pretrain_history.empty())
    write_file_atomic(out / "pretrain_history.csv", loss_history_csv(res.pretrain_history));
  write_file_atomic(out / "loss_history.csv", loss_history_csv(res.history));
  if (!ds.coords.empty())
    write_file_atomic(out / "label_map.ppm", label_map_ppm(res.labels, ds.coords, ds.height, ds.width));
  write_file_atomic(out / "run_manifest.json", manifest_json(cfg));
  return res;
}

void run_pretrain(const RunConfig& cfg) {
  const Dataset ds = load_dataset(cfg);
  TrainState state = make_train_state(ae_config(cfg, ds.x.rows()), cfg.train);
  LossHistory history;
  pretrain(state, ds.x, cfg.train, history);
  save_checkpoint(cfg.out / "checkpoint", Checkpoint{state.ae, std::nullopt, state.z0, state.adjacency});
  write_file_atomic(cfg.out / "pretrain_history.csv", loss_history_csv(history));
  write_file_atomic(cfg.out / "run_manifest.json", manifest_json(cfg));
}

}  // namespace unfold_ssc
