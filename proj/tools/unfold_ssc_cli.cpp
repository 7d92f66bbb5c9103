#include "unfold_ssc/cluster.hpp"
#include "unfold_ssc/config.hpp"
#include "unfold_ssc/container.hpp"
#include "unfold_ssc/data.hpp"
#include "unfold_ssc/metrics.hpp"
#include "unfold_ssc/pipeline.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdlib>
#include <iostream>
#include <set>
#include <string>

using namespace unfold_ssc;

namespace {

enum Exit { kOk = 0, kConfig = 2, kData = 3, kNumerical = 4 };

void apply_thread_cap() {
  const char* env = std::getenv("UNFOLD_SSC_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError("UNFOLD_SSC_THREADS must be a positive integer");
  Eigen::setNbThreads(static_cast<int>(n));
}

RunConfig load_run_config(const std::string& path, const ConfigOverrides& ov) {
  if (!path.empty()) return validate_config(path, ov);
  std::vector<std::string> errors;
  auto cfg = resolve_config(nlohmann::json::object(), ov, errors);
  if (!cfg) {
    std::string msg = "config: " + std::to_string(errors.size()) + " error(s)";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return *cfg;
}

void print_metrics(const std::optional<MetricReport>& m) {
  if (m) std::cout << to_json(*m);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unfolded-ADMM subspace clustering for hyperspectral images"};
  app.set_version_flag("--version", software_version());
  app.require_subcommand(1);

  std::string config_path;
  ConfigOverrides ov;
  std::string preset, out, mode;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config or run_manifest.json")->check(CLI::ExistingFile);
    sub->add_option("--preset", preset, "salinas | indian_pines | paviau");
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--mode", mode, "unfold | classic | kmeans-baseline");
    sub->add_flag("--no-row-norm", ov.no_row_norm, "skip row normalization of the spectral embedding");
    sub->add_flag("--use-z-output", ov.use_z_output, "cluster on the sparse Z instead of C");
  };

  auto* run = app.add_subcommand("run", "full pipeline: train, cluster, evaluate");
  add_common(run);
  auto* pre = app.add_subcommand("pretrain", "autoencoder pretraining and graph construction only");
  add_common(pre);
  auto* validate = app.add_subcommand("validate", "check a config and print it resolved");
  add_common(validate);

  auto* cluster = app.add_subcommand("cluster", "spectral clustering of a saved representation");
  std::string rep_path, truth_path;
  int k = 0;
  bool no_row_norm = false;
  cluster->add_option("representation", rep_path, "n x n matrix (.sscm or .csv)")->required()->check(CLI::ExistingFile);
  cluster->add_option("-k,--clusters", k, "number of clusters")->required()->check(CLI::PositiveNumber);
  cluster->add_option("--truth", truth_path, "ground-truth labels")->check(CLI::ExistingFile);
  cluster->add_option("--seed", seed, "RNG seed");
  cluster->add_option("--out", out, "output directory")->default_val("out");
  cluster->add_flag("--no-row-norm", no_row_norm);
  cluster->add_flag("--similarity", "input is already a similarity matrix");

  auto* eval = app.add_subcommand("eval", "score predicted labels against ground truth");
  std::string pred_path;
  eval->add_option("predicted", pred_path)->required()->check(CLI::ExistingFile);
  eval->add_option("truth", truth_path)->required()->check(CLI::ExistingFile);

  auto* gen = app.add_subcommand("gen", "synthetic data");
  gen->require_subcommand(1);
  auto* gen_cube = gen->add_subcommand("cube", "striped hyperspectral scene");
  int classes = 4, height = 20, width = 20, bands = 16;
  double sigma = 0.02;
  gen_cube->add_option("--classes", classes)->check(CLI::PositiveNumber);
  gen_cube->add_option("--height", height)->check(CLI::PositiveNumber);
  gen_cube->add_option("--width", width)->check(CLI::PositiveNumber);
  gen_cube->add_option("--bands", bands)->check(CLI::PositiveNumber);
  gen_cube->add_option("--sigma", sigma)->check(CLI::NonNegativeNumber);
  gen_cube->add_option("--seed", seed);
  gen_cube->add_option("--out", out, "output directory")->default_val("data");
  auto* gen_sub = gen->add_subcommand("subspaces", "union of random linear subspaces");
  int ambient = 30, sub_dim = 3, per_cluster = 100;
  int sub_k = 3;
  double sub_sigma = 0.01;
  gen_sub->add_option("-k,--clusters", sub_k)->check(CLI::PositiveNumber);
  gen_sub->add_option("--ambient-dim", ambient)->check(CLI::PositiveNumber);
  gen_sub->add_option("--subspace-dim", sub_dim)->check(CLI::PositiveNumber);
  gen_sub->add_option("--per-cluster", per_cluster)->check(CLI::PositiveNumber);
  gen_sub->add_option("--sigma", sub_sigma)->check(CLI::NonNegativeNumber);
  gen_sub->add_option("--seed", seed);
  gen_sub->add_option("--out", out, "output directory")->default_val("data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    apply_thread_cap();
    auto fill_overrides = [&](CLI::App* sub) {
      if (sub->count("--preset")) ov.preset = preset;
      if (sub->count("--seed")) ov.seed = seed;
      if (sub->count("--out")) ov.out = out;
      if (sub->count("--mode")) ov.mode = mode;
    };

    if (run->parsed()) {
      fill_overrides(run);
      const RunConfig cfg = load_run_config(config_path, ov);
      print_metrics(run_pipeline(cfg).metrics);
    } else if (pre->parsed()) {
      fill_overrides(pre);
      run_pretrain(load_run_config(config_path, ov));
    } else if (validate->parsed()) {
      fill_overrides(validate);
      std::cout << to_json(load_run_config(config_path, ov)).dump(2) << "\n";
    } else if (cluster->parsed()) {
      MatrixXd rep = read_matrix(rep_path);
      if (rep.rows() != rep.cols())
        throw DataError("cluster: representation must be square, got " + shape_str(rep.rows(), rep.cols()));
      const MatrixXd s = cluster->count("--similarity") ? rep : similarity(rep);
      SpectralOptions opts;
      opts.row_normalize = !no_row_norm;
      const Labels labels = spectral_cluster(s, k, seed, opts).labels;
      std::filesystem::create_directories(out);
      write_file_atomic(std::filesystem::path(out) / "labels.csv", labels_csv(labels));
      if (!truth_path.empty()) {
        const auto report = evaluate(labels, read_labels(truth_path));
        write_file_atomic(std::filesystem::path(out) / "metrics.json", to_json(report));
        std::cout << to_json(report);
      }
    } else if (eval->parsed()) {
      std::cout << to_json(evaluate(read_labels(pred_path), read_labels(truth_path)));
    } else if (gen_cube->parsed()) {
      const HsiCube cube = gen_synthetic_cube(seed, classes, height, width, bands, sigma);
      std::filesystem::create_directories(out);
      const std::filesystem::path dir(out);
      save_cube(dir / "cube.sscm", cube, dir / "labels.sscm");
    } else if (gen_sub->parsed()) {
      const SubspaceData d = gen_subspaces(seed, sub_k, ambient, sub_dim, per_cluster, sub_sigma);
      std::filesystem::create_directories(out);
      const std::filesystem::path dir(out);
      write_matrix(dir / "points.sscm", d.points);
      MatrixXd lab(static_cast<Eigen::Index>(d.labels.size()), 1);
      for (std::size_t i = 0; i < d.labels.size(); ++i) lab(static_cast<Eigen::Index>(i), 0) = d.labels[i];
      write_matrix(dir / "labels.sscm", lab);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}
