#include "gmbayes/signal_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gmbayes {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

void write_signals_csv(const std::string& path, const Eigen::MatrixXd& signals) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_signals_csv: cannot open " + path);
  std::string line;
  for (Eigen::Index r = 0; r < signals.rows(); ++r) {
    line.clear();
    for (Eigen::Index c = 0; c < signals.cols(); ++c) {
      if (c > 0) line.push_back(',');
      line += format_double(signals(r, c));
    }
    line.push_back('\n');
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
  if (!out) throw std::runtime_error("write_signals_csv: write failed for " + path);
}

Eigen::MatrixXd read_signals_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_signals_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) throw std::runtime_error("read_signals_csv: parse error in " + path);
      row.push_back(v);
      p = res.ptr;
      if (p < end) {
        if (*p != ',') throw std::runtime_error("read_signals_csv: expected comma in " + path);
        ++p;
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("read_signals_csv: ragged rows in " + path);
    }
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) M(r, c) = rows[r][c];
  }
  return M;
}

void write_metadata(const std::string& path, const SignalMetadata& meta) {
  nlohmann::json j = {
      {"n", meta.n}, {"count", meta.count}, {"dataset_id", meta.dataset_id}, {"seed", meta.seed}};
  if (!meta.labels.empty()) j["labels"] = meta.labels;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_metadata: cannot open " + path);
  out << j.dump(2) << "\n";
}

SignalMetadata read_metadata(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_metadata: cannot open " + path);
  nlohmann::json j;
  in >> j;
  SignalMetadata meta;
  meta.n = j.at("n").get<int>();
  meta.count = j.at("count").get<int>();
  meta.dataset_id = j.at("dataset_id").get<int>();
  meta.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("labels")) meta.labels = j.at("labels").get<std::vector<int>>();
  return meta;
}

void write_labels_csv(const std::string& path, const std::vector<int>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_labels_csv: cannot open " + path);
  out << "label\n";
  for (int v : labels) out << v << "\n";
}

std::vector<int> read_labels_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_labels_csv: cannot open " + path);
  std::vector<int> labels;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line == "label") continue;
    }
    labels.push_back(std::stoi(line));
  }
  return labels;
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  std::vector<std::vector<std::string>> cells(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    cells[r].reserve(rows[r].size());
    for (double v : rows[r]) cells[r].push_back(format_double(v));
  }
  write_table_csv(path, header, cells);
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_table_csv: cannot open " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << row[i];
    }
    out << '\n';
  }
}

}  // namespace gmbayes
