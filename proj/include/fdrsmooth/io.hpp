#pragma once

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "fdrsmooth/graph.hpp"

namespace fdrsmooth {

/// Malformed input file; what() includes the source name and line number.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& source, std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// 10 significant digits, locale independent.
std::string format_number(double value);

/// Row-major z values for a rows x cols grid. Values may be separated by
/// commas or whitespace; blank lines and lines starting with '#' are skipped.
Eigen::VectorXd read_grid_values(std::istream& in, std::size_t rows, std::size_t cols,
                                 const std::string& source = "<input>");

/// "site_id,z" rows (optional header); ids must cover 0..n-1 exactly once.
Eigen::VectorXd read_site_values(std::istream& in, const std::string& source = "<input>");

/// One "j k" pair per line, 0-indexed.
SiteGraph read_edge_list(std::istream& in, std::size_t num_nodes,
                         const std::string& source = "<edges>");

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t value);

}  // namespace fdrsmooth
