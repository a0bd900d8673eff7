#include "fdrsmooth/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace fdrsmooth {

InputError::InputError(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ',' || line[i] == ' ' || line[i] == '\t' ||
                               line[i] == '\r')) {
      ++i;
    }
    const std::size_t start = i;
    while (i < line.size() && line[i] != ',' && line[i] != ' ' && line[i] != '\t' &&
           line[i] != '\r') {
      ++i;
    }
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

bool parse_double(std::string_view text, double& out) {
  // std::from_chars for double is not available on every toolchain we target.
  std::string copy(text);
  char* end = nullptr;
  out = std::strtod(copy.c_str(), &end);
  return end == copy.c_str() + copy.size() && !copy.empty();
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

bool skippable(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace

Eigen::VectorXd read_grid_values(std::istream& in, std::size_t rows, std::size_t cols,
                                 const std::string& source) {
  const std::size_t expected = rows * cols;
  std::vector<double> values;
  values.reserve(expected);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    for (const auto field : split_fields(line)) {
      double v = 0.0;
      if (!parse_double(field, v)) {
        throw InputError(source, line_no, "cannot parse '" + std::string(field) + "' as a number");
      }
      if (!std::isfinite(v)) throw InputError(source, line_no, "non-finite z value");
      values.push_back(v);
    }
  }
  if (values.size() != expected) {
    throw InputError(source, line_no,
                     "expected " + std::to_string(expected) + " values for a " +
                         std::to_string(rows) + "x" + std::to_string(cols) + " grid, found " +
                         std::to_string(values.size()));
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Eigen::VectorXd read_site_values(std::istream& in, const std::string& source) {
  struct Row {
    std::size_t id;
    double z;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split_fields(line);
    std::size_t id = 0;
    double z = 0.0;
    if (fields.size() != 2 || !parse_int(fields[0], id) || !parse_double(fields[1], z)) {
      if (first_data_line && fields.size() == 2 && fields[0] == "site_id") {
        first_data_line = false;
        continue;
      }
      throw InputError(source, line_no, "expected 'site_id,z'");
    }
    first_data_line = false;
    if (!std::isfinite(z)) throw InputError(source, line_no, "non-finite z value");
    rows.push_back({id, z, line_no});
  }
  Eigen::VectorXd z(static_cast<Eigen::Index>(rows.size()));
  std::vector<char> seen(rows.size(), 0);
  for (const auto& [id, value, row_line] : rows) {
    if (id >= rows.size()) {
      throw InputError(source, row_line,
                       "site id " + std::to_string(id) + " outside 0.." +
                           std::to_string(rows.size() - 1));
    }
    if (seen[id]) throw InputError(source, row_line, "site id " + std::to_string(id) + " repeated");
    seen[id] = 1;
    z[static_cast<Eigen::Index>(id)] = value;
  }
  if (rows.empty()) throw InputError(source, line_no, "no data rows");
  return z;
}

SiteGraph read_edge_list(std::istream& in, std::size_t num_nodes, const std::string& source) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  std::set<std::pair<NodeId, NodeId>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split_fields(line);
    NodeId j = 0;
    NodeId k = 0;
    if (fields.size() != 2 || !parse_int(fields[0], j) || !parse_int(fields[1], k)) {
      throw InputError(source, line_no, "expected 'j k' node pair");
    }
    if (j >= num_nodes || k >= num_nodes) {
      throw InputError(source, line_no, "node id outside 0.." + std::to_string(num_nodes - 1));
    }
    if (j == k) throw InputError(source, line_no, "self-loop");
    if (!seen.insert({std::min(j, k), std::max(j, k)}).second) {
      throw InputError(source, line_no, "duplicate edge");
    }
    pairs.emplace_back(j, k);
  }
  try {
    return SiteGraph(num_nodes, std::move(pairs));
  } catch (const std::invalid_argument& e) {
    throw InputError(source, line_no, e.what());
  }
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (const unsigned char ch : text) {
    hash ^= ch;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace fdrsmooth
