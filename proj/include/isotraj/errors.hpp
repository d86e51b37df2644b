#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace isotraj {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input text (logs, fixtures, config). Carries a 1-based line number
/// when the failing line is known (0 otherwise).
class parse_error : public error {
public:
  parse_error(const std::string& what, std::size_t line = 0)
      : error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class empty_input_error : public parse_error {
public:
  explicit empty_input_error(const std::string& what) : parse_error(what) {}
};

class config_error : public error {
public:
  using error::error;
};

/// Mismatched dimensions (grid sizes, sample counts, matrix shapes).
class shape_error : public error {
public:
  using error::error;
};

/// Out-of-order ticks or timestamps.
class sequence_error : public error {
public:
  using error::error;
};

class insufficient_data_error : public error {
public:
  using error::error;
};

class out_of_domain_error : public error {
public:
  using error::error;
};

class not_found_error : public error {
public:
  using error::error;
};

/// Zero-width distribution where a spread is required.
class degenerate_distribution_error : public error {
public:
  using error::error;
};

class invalid_interval_error : public error {
public:
  using error::error;
};

class indeterminate_heading_error : public error {
public:
  using error::error;
};

/// A state record is missing one of its constituents; names the field.
class incomplete_state_error : public error {
public:
  explicit incomplete_state_error(const std::string& field)
      : error("incomplete state: missing " + field), field_(field) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

class duplicate_ingestion_error : public error {
public:
  using error::error;
};

}  // namespace isotraj
