#include "gmbayes/model_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace gmbayes {

namespace {

constexpr char kMagic[5] = {'G', 'M', 'X', 'B', '1'};

void append_row_major(std::vector<double>& payload, const Eigen::MatrixXd& M) {
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) payload.push_back(M(r, c));
  }
}

Eigen::MatrixXd read_row_major(const std::vector<double>& payload, std::size_t offset_doubles,
                               Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd M(rows, cols);
  std::size_t k = offset_doubles;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = payload[k++];
  }
  return M;
}

}  // namespace

void save_model(const std::string& path, const MixtureModel& model) {
  model.validate();
  const int L = model.components();
  const int n = model.dim();

  nlohmann::json arrays = nlohmann::json::array();
  std::vector<double> payload;

  auto add_array = [&](const std::string& name, std::vector<std::int64_t> shape, std::size_t offset) {
    arrays.push_back({{"name", name}, {"shape", shape}, {"offset", static_cast<std::int64_t>(offset * sizeof(double))}});
  };

  add_array("weights", {L}, payload.size());
  for (int i = 0; i < L; ++i) payload.push_back(model.weights[i]);

  add_array("means", {L, n}, payload.size());
  for (int i = 0; i < L; ++i) {
    for (int c = 0; c < n; ++c) payload.push_back(model.means[i][c]);
  }

  if (model.has_factors()) {
    for (int i = 0; i < L; ++i) {
      const Eigen::MatrixXd& B = model.factors[i];
      add_array("factor_" + std::to_string(i), {B.rows(), B.cols()}, payload.size());
      append_row_major(payload, B);
    }
  } else {
    add_array("covariances", {L, n, n}, payload.size());
    for (int i = 0; i < L; ++i) append_row_major(payload, model.covariances[i]);
  }

  nlohmann::json header = {{"format", "GMXB1"}, {"version", 1}, {"components", L}, {"dim", n}, {"arrays", arrays}};
  const std::string header_str = header.dump();
  if (header_str.size() > 0xffffffffULL) throw std::runtime_error("save_model: header too large");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t header_len = static_cast<std::uint32_t>(header_str.size());
  unsigned char len_bytes[4];
  for (int b = 0; b < 4; ++b) len_bytes[b] = static_cast<unsigned char>((header_len >> (8 * b)) & 0xff);
  out.write(reinterpret_cast<const char*>(len_bytes), 4);
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  // Doubles are IEEE-754 binary64; this target is little-endian, so raw bytes
  // are already the on-disk layout.
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
  if (!out) throw std::runtime_error("save_model: write failed for " + path);
}

MixtureModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);

  char magic[5];
  in.read(magic, 5);
  if (!in || std::memcmp(magic, kMagic, 5) != 0) throw std::runtime_error("load_model: bad magic in " + path);

  unsigned char len_bytes[4];
  in.read(reinterpret_cast<char*>(len_bytes), 4);
  if (!in) throw std::runtime_error("load_model: truncated header length");
  std::uint32_t header_len = 0;
  for (int b = 0; b < 4; ++b) header_len |= static_cast<std::uint32_t>(len_bytes[b]) << (8 * b);

  std::string header_str(header_len, '\0');
  in.read(header_str.data(), header_len);
  if (!in) throw std::runtime_error("load_model: truncated header");
  const nlohmann::json header = nlohmann::json::parse(header_str);
  if (header.at("format") != "GMXB1") throw std::runtime_error("load_model: unexpected format field");

  std::vector<double> payload;
  {
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (raw.size() % sizeof(double) != 0) throw std::runtime_error("load_model: payload not a multiple of 8 bytes");
    payload.resize(raw.size() / sizeof(double));
    std::memcpy(payload.data(), raw.data(), raw.size());
  }

  const int L = header.at("components").get<int>();
  const int n = header.at("dim").get<int>();

  struct Entry {
    std::vector<std::int64_t> shape;
    std::size_t offset_doubles;
  };
  std::map<std::string, Entry> entries;
  for (const auto& a : header.at("arrays")) {
    Entry e;
    e.shape = a.at("shape").get<std::vector<std::int64_t>>();
    const std::int64_t byte_offset = a.at("offset").get<std::int64_t>();
    if (byte_offset < 0 || byte_offset % sizeof(double) != 0) throw std::runtime_error("load_model: bad offset");
    e.offset_doubles = static_cast<std::size_t>(byte_offset) / sizeof(double);
    entries[a.at("name").get<std::string>()] = e;
  }

  MixtureModel model;
  {
    const Entry& e = entries.at("weights");
    model.weights.resize(L);
    for (int i = 0; i < L; ++i) model.weights[i] = payload.at(e.offset_doubles + i);
  }
  {
    const Entry& e = entries.at("means");
    model.means.assign(L, Eigen::VectorXd(n));
    std::size_t k = e.offset_doubles;
    for (int i = 0; i < L; ++i) {
      for (int c = 0; c < n; ++c) model.means[i][c] = payload.at(k++);
    }
  }
  if (entries.count("covariances")) {
    const Entry& e = entries.at("covariances");
    model.covariances.reserve(L);
    for (int i = 0; i < L; ++i) {
      model.covariances.push_back(
          read_row_major(payload, e.offset_doubles + static_cast<std::size_t>(i) * n * n, n, n));
    }
  } else {
    model.factors.reserve(L);
    model.covariances.reserve(L);
    for (int i = 0; i < L; ++i) {
      const Entry& e = entries.at("factor_" + std::to_string(i));
      if (e.shape.size() != 2) throw std::runtime_error("load_model: factor shape must be rank 2");
      Eigen::MatrixXd B = read_row_major(payload, e.offset_doubles, e.shape[0], e.shape[1]);
      model.covariances.push_back(B * B.transpose());
      model.factors.push_back(std::move(B));
    }
  }
  model.validate();
  return model;
}

}  // namespace gmbayes
