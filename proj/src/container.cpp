#include "unfold_ssc/container.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace unfold_ssc {

namespace {

constexpr char kMagic[4] = {'S', 'S', 'C', 'M'};

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos, const std::string& origin) {
  if (pos + sizeof(T) > in.size()) throw DataError("sscm: truncated file " + origin);
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    value |= static_cast<T>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += sizeof(T);
  return value;
}

}  // namespace

std::size_t Tensor::element_count() const {
  std::size_t n = dims.empty() ? 0 : 1;
  for (auto d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

std::string encode_sscm(const Tensor& tensor) {
  if (tensor.dims.size() != 2 && tensor.dims.size() != 3)
    throw DataError("sscm: ndims must be 2 or 3");
  if (tensor.element_count() != tensor.values.size())
    throw DataError("sscm: payload size does not match dims");
  std::string out(kMagic, 4);
  out.reserve(4 + 4 + 1 + 8 * tensor.dims.size() + 8 * tensor.values.size());
  put_le<std::uint32_t>(out, kSscmVersion);
  out.push_back(static_cast<char>(tensor.dims.size()));
  for (auto d : tensor.dims) put_le<std::uint64_t>(out, d);
  for (double v : tensor.values) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Tensor decode_sscm(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < 9 || bytes.compare(0, 4, kMagic, 4) != 0)
    throw DataError("sscm: bad magic in " + origin);
  std::size_t pos = 4;
  const auto version = get_le<std::uint32_t>(bytes, pos, origin);
  if (version != kSscmVersion)
    throw DataError("sscm: unsupported version " + std::to_string(version) + " in " + origin);
  const auto ndims = static_cast<unsigned char>(bytes[pos++]);
  if (ndims != 2 && ndims != 3)
    throw DataError("sscm: ndims " + std::to_string(ndims) + " not in {2,3} in " + origin);
  Tensor t;
  for (unsigned i = 0; i < ndims; ++i) t.dims.push_back(get_le<std::uint64_t>(bytes, pos, origin));
  const std::size_t count = t.element_count();
  if (bytes.size() - pos != 8 * count)
    throw DataError("sscm: payload length mismatch in " + origin);
  t.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos, origin));
    if (!std::isfinite(v)) {
      std::string where;
      std::size_t rest = i;
      for (std::size_t d = t.dims.size(); d-- > 0;) {
        where = std::to_string(rest % t.dims[d]) + (where.empty() ? "" : "," + where);
        rest /= t.dims[d];
      }
      throw DataError("sscm: non-finite entry at index (" + where + ") in " + origin);
    }
    t.values[i] = v;
  }
  return t;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Tensor read_sscm(const std::filesystem::path& path) {
  return decode_sscm(read_file(path), path.string());
}

void write_sscm(const std::filesystem::path& path, const Tensor& tensor) {
  write_file_atomic(path, encode_sscm(tensor));
}

Tensor to_tensor(const MatrixXd& m) {
  Tensor t;
  t.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
  t.values.resize(static_cast<std::size_t>(m.size()));
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      t.values.data(), m.rows(), m.cols()) = m;
  return t;
}

MatrixXd to_matrix(const Tensor& t) {
  if (t.dims.size() != 2) throw DataError("expected a 2-D tensor");
  const auto rows = static_cast<Eigen::Index>(t.dims[0]);
  const auto cols = static_cast<Eigen::Index>(t.dims[1]);
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      t.values.data(), rows, cols);
}

MatrixXd parse_csv(const std::string& text, const std::string& origin) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      std::string field = line.substr(start, comma == std::string::npos ? std::string::npos
                                                                        : comma - start);
      const auto b = field.find_first_not_of(" \t");
      const auto e = field.find_last_not_of(" \t");
      field = b == std::string::npos ? std::string() : field.substr(b, e - b + 1);
      double v = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw DataError("csv: bad number '" + field + "' at line " + std::to_string(line_no) +
                        " of " + origin);
      if (!std::isfinite(v))
        throw DataError("csv: non-finite entry at line " + std::to_string(line_no) + ", column " +
                        std::to_string(row.size()) + " of " + origin);
      row.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError("csv: ragged row at line " + std::to_string(line_no) + " of " + origin);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("csv: empty matrix in " + origin);
  MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

MatrixXd read_matrix(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("missing file " + path.string());
  if (path.extension() == ".csv") return parse_csv(read_file(path), path.string());
  const Tensor t = read_sscm(path);
  if (t.dims.size() != 2)
    throw DataError("expected a 2-D matrix in " + path.string() + ", got ndims=" +
                    std::to_string(t.dims.size()));
  return to_matrix(t);
}

void write_matrix(const std::filesystem::path& path, const MatrixXd& m) {
  if (path.extension() == ".csv") {
    std::ostringstream out;
    out.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
      out << '\n';
    }
    write_file_atomic(path, out.str());
  } else {
    write_sscm(path, to_tensor(m));
  }
}

}  // namespace unfold_ssc
