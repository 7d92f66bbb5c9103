#pragma once

#include "unfold_ssc/common.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace unfold_ssc {

// SSCM container: "SSCM", u32 LE version (=1), u8 ndims in {2,3},
// ndims x u64 LE dims, then an f64 LE payload in C order over the dims.
struct Tensor {
  std::vector<std::uint64_t> dims;
  std::vector<double> values;

  std::size_t element_count() const;
};

inline constexpr std::uint32_t kSscmVersion = 1;

std::string encode_sscm(const Tensor& tensor);
Tensor decode_sscm(const std::string& bytes, const std::string& origin = "<memory>");

Tensor read_sscm(const std::filesystem::path& path);
void write_sscm(const std::filesystem::path& path, const Tensor& tensor);

Tensor to_tensor(const MatrixXd& m);
MatrixXd to_matrix(const Tensor& t);

/// Reads a 2-D matrix from an SSCM file or, for a ".csv" extension, from CSV.
MatrixXd read_matrix(const std::filesystem::path& path);
MatrixXd parse_csv(const std::string& text, const std::string& origin = "<memory>");
void write_matrix(const std::filesystem::path& path, const MatrixXd& m);

/// Write to "<path>.tmp" then rename, so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace unfold_ssc
