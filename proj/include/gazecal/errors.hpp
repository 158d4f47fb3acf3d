#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gazecal {

// Thrown when a statistical routine is handed fewer samples than it can
// meaningfully work with (e.g. a calibration subset below the minimum size).
class insufficient_data_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Ingest failure with the location of the first offending value.
class parse_error : public std::runtime_error {
public:
  parse_error(std::size_t line, std::string column, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) +
                           (column.empty() ? "" : ", column " + column) + ": " + message),
        line_(line),
        column_(std::move(column)) {}

  std::size_t line() const { return line_; }
  const std::string& column() const { return column_; }

private:
  std::size_t line_;
  std::string column_;
};

}  // namespace gazecal
