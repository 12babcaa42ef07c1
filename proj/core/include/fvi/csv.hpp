#pragma once

// Locale-independent CSV helpers: '.' decimal point, '\n' line endings and
// shortest round-trip formatting for doubles.

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace fvi::csv {

/// Shortest decimal representation that parses back to the same double.
std::string format(double value);

/// Parses a full field as a double; throws std::invalid_argument naming the field.
double parse_double(std::string_view field);
long long parse_int(std::string_view field);

/// Splits on ',' and strips a trailing '\r'. No quoting support.
std::vector<std::string> split(std::string_view line);

/// Reads all non-empty lines of a text file; throws std::runtime_error when unreadable.
std::vector<std::string> read_lines(const std::string& path);

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  Writer& header(const std::vector<std::string>& names);
  Writer& field(std::string_view text);
  Writer& field(double value);
  Writer& field(long long value);
  Writer& field(int value) { return field(static_cast<long long>(value)); }
  void end_row();

 private:
  std::ostream& out_;
  bool first_ = true;
};

}  // namespace fvi::csv
