#include "topictraj/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace topictraj {

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

double parse_double(const std::string& field) {
  std::size_t pos = 0;
  const double v = std::stod(field, &pos);
  if (pos != field.size()) throw std::runtime_error("bad numeric field: '" + field + "'");
  return v;
}

static std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path.string());
  table.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    table.rows.push_back(split_line(line));
    if (table.rows.back().size() != table.header.size())
      throw std::runtime_error("ragged CSV row in " + path.string());
  }
  return table;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < table.header.size(); ++i)
    out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_labeled_matrix(const std::filesystem::path& path,
                          const std::string& label_column,
                          const std::vector<std::string>& value_columns,
                          const std::vector<std::string>& labels,
                          const Eigen::MatrixXd& values) {
  if (static_cast<Eigen::Index>(labels.size()) != values.rows())
    throw std::invalid_argument("label count does not match row count");
  if (static_cast<Eigen::Index>(value_columns.size()) != values.cols())
    throw std::invalid_argument("column name count does not match column count");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << label_column;
  for (const auto& c : value_columns) out << ',' << c;
  out << '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    out << labels[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < values.cols(); ++c) out << ',' << format_double(values(r, c));
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

LabeledMatrix read_labeled_matrix(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 2) throw std::runtime_error("labeled matrix needs >= 2 columns: " + path.string());
  LabeledMatrix m;
  m.labels.reserve(table.rows.size());
  m.values.resize(static_cast<Eigen::Index>(table.rows.size()),
                  static_cast<Eigen::Index>(table.header.size() - 1));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    m.labels.push_back(table.rows[r][0]);
    for (std::size_t c = 1; c < table.rows[r].size(); ++c)
      m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) =
          parse_double(table.rows[r][c]);
  }
  return m;
}

}  // namespace topictraj
