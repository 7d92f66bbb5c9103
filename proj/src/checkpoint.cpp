#include "unfold_ssc/checkpoint.hpp"

#include "unfold_ssc/container.hpp"

#include <json.hpp>

namespace unfold_ssc {

using nlohmann::ordered_json;

namespace {

MatrixXd scalar_matrix(double v) { return MatrixXd::Constant(1, 1, v); }

class TensorWriter {
 public:
  explicit TensorWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::string put(const std::string& name, const MatrixXd& m) {
    const std::string file = name + ".sscm";
    write_matrix(dir_ / file, m);
    files_.push_back(file);
    return file;
  }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

ordered_json stack_json(TensorWriter& tw, const std::vector<DenseLayer<double>>& layers,
                        const std::string& prefix) {
  ordered_json arr = ordered_json::array();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string base = prefix + "_" + std::to_string(i);
    arr.push_back({{"w", tw.put(base + "_w", layers[i].w)},
                   {"b", tw.put(base + "_b", MatrixXd(layers[i].b))}});
  }
  return arr;
}

std::vector<DenseLayer<double>> read_stack(const std::filesystem::path& dir,
                                           const ordered_json& arr) {
  std::vector<DenseLayer<double>> layers;
  for (const auto& entry : arr) {
    DenseLayer<double> l;
    l.w = read_matrix(dir / entry.at("w").get<std::string>());
    const MatrixXd b = read_matrix(dir / entry.at("b").get<std::string>());
    if (b.cols() != 1 || b.rows() != l.w.rows())
      throw DataError("checkpoint: bias shape does not match weight in " + dir.string());
    l.b = b.col(0);
    layers.push_back(std::move(l));
  }
  return layers;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt) {
  std::filesystem::create_directories(dir);
  TensorWriter tw(dir);
  ordered_json m;
  m["format"] = "unfold-ssc-checkpoint";
  m["version"] = 1;
  m["autoencoder"] = {{"activation", to_string(ckpt.ae.activation)},
                      {"leaky_slope", ckpt.ae.leaky_slope},
                      {"encoder", stack_json(tw, ckpt.ae.encoder, "enc")},
                      {"decoder", stack_json(tw, ckpt.ae.decoder, "dec")}};
  if (ckpt.unfold) {
    const auto& p = *ckpt.unfold;
    ordered_json layers = ordered_json::array();
    for (std::size_t k = 0; k < p.layers.size(); ++k) {
      const std::string base = "unfold_" + std::to_string(k);
      const auto& l = p.layers[k];
      layers.push_back({{"w", tw.put(base + "_w", l.w)},
                        {"b", tw.put(base + "_b", l.b)},
                        {"rho_pre", tw.put(base + "_rho_pre", scalar_matrix(l.rho_pre))},
                        {"theta_pre", tw.put(base + "_theta_pre", scalar_matrix(l.theta_pre))}});
    }
    m["layers"] = p.depth;
    m["tied"] = p.tied;
    m["unfold"] = layers;
  }
  if (ckpt.z0) m["z0"] = tw.put("z0", *ckpt.z0);
  if (ckpt.adjacency) m["adjacency"] = tw.put("adjacency", *ckpt.adjacency);
  m["tensors"] = tw.files();
  write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  ordered_json m;
  try {
    m = ordered_json::parse(read_file(manifest_path));
  } catch (const ordered_json::parse_error& e) {
    throw DataError("checkpoint: malformed manifest " + manifest_path.string() + ": " + e.what());
  }
  try {
    if (m.at("format") != "unfold-ssc-checkpoint" || m.at("version") != 1)
      throw DataError("checkpoint: unsupported manifest in " + dir.string());
    Checkpoint ckpt;
    const auto& ae = m.at("autoencoder");
    ckpt.ae.activation = parse_activation(ae.at("activation").get<std::string>());
    ckpt.ae.leaky_slope = ae.at("leaky_slope").get<double>();
    ckpt.ae.encoder = read_stack(dir, ae.at("encoder"));
    ckpt.ae.decoder = read_stack(dir, ae.at("decoder"));
    if (m.contains("unfold")) {
      UnfoldParams<double> p;
      p.depth = m.at("layers").get<int>();
      p.tied = m.at("tied").get<bool>();
      for (const auto& e : m.at("unfold")) {
        UnfoldLayer<double> l;
        l.w = read_matrix(dir / e.at("w").get<std::string>());
        l.b = read_matrix(dir / e.at("b").get<std::string>());
        l.rho_pre = read_matrix(dir / e.at("rho_pre").get<std::string>())(0, 0);
        l.theta_pre = read_matrix(dir / e.at("theta_pre").get<std::string>())(0, 0);
        p.layers.push_back(std::move(l));
      }
      const std::size_t expected = p.tied ? 1 : static_cast<std::size_t>(p.depth);
      if (p.depth < 1 || p.layers.size() != expected)
        throw DataError("checkpoint: layer count does not match tying flag in " + dir.string());
      ckpt.unfold = std::move(p);
    }
    if (m.contains("z0")) ckpt.z0 = read_matrix(dir / m.at("z0").get<std::string>());
    if (m.contains("adjacency"))
      ckpt.adjacency = read_matrix(dir / m.at("adjacency").get<std::string>());
    return ckpt;
  } catch (const ordered_json::exception& e) {
    throw DataError("checkpoint: bad manifest " + manifest_path.string() + ": " + e.what());
  }
}

}  // namespace unfold_ssc
