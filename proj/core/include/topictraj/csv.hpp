#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

namespace topictraj {

// Full-precision decimal rendering (17 significant digits) so that values
// written to CSV round-trip exactly through load.
std::string format_double(double value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Matrix with a leading label column. Used for the topic-word matrix
// (word, topic_1..topic_K) and position matrices (topic, x_1..x_d).
struct LabeledMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXd values;
};

void write_labeled_matrix(const std::filesystem::path& path,
                          const std::string& label_column,
                          const std::vector<std::string>& value_columns,
                          const std::vector<std::string>& labels,
                          const Eigen::MatrixXd& values);
LabeledMatrix read_labeled_matrix(const std::filesystem::path& path);

double parse_double(const std::string& field);

}  // namespace topictraj
