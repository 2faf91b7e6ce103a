#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace gmbayes {

// Plain-text interchange for signal sets: one signal per CSV row, values in
// shortest round-trip decimal form (locale independent), plus a sibling JSON
// metadata file.  Identical matrices always serialize to identical bytes.

void write_signals_csv(const std::string& path, const Eigen::MatrixXd& signals);
Eigen::MatrixXd read_signals_csv(const std::string& path);

struct SignalMetadata {
  int n = 0;
  int count = 0;
  int dataset_id = 0;
  std::uint64_t seed = 0;
  std::vector<int> labels;  // optional ground-truth component per signal
};

void write_metadata(const std::string& path, const SignalMetadata& meta);
SignalMetadata read_metadata(const std::string& path);

void write_labels_csv(const std::string& path, const std::vector<int>& labels);
std::vector<int> read_labels_csv(const std::string& path);

/// Rows of doubles under a header line; used for loss histories and tables.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

/// Preformatted cells (mixed text / numeric tables).
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

}  // namespace gmbayes
