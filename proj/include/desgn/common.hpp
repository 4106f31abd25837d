#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace desgn {

/// Thrown for malformed input files and inconsistent model data.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a solver is asked to do something structurally impossible
/// (numerical failures are reported through result statuses, not exceptions).
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Reads a comma-separated file with a mandatory header row.
/// Empty lines are skipped; fields are trimmed of surrounding whitespace.
CsvTable read_csv(const std::string& path);

double parse_double(const std::string& field, const std::string& context);
int parse_int(const std::string& field, const std::string& context);

}  // namespace desgn
