#pragma once

#include <string>
#include <string_view>

#include "polypart/model.hpp"

namespace polypart {

/// Syntax or semantic error in `.mlt` text, with a 1-based location.
class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& message);

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Parses the `.mlt` instance format:
///
///   # mlt 1
///   # optimum 7049.248
///   var x >= 100 <= 10000;
///   bin b;
///   min x + 2*y*z - 3*x^2;          (or max; negated into min)
///   s.t. c1: x*y + z >= 4;
///
/// The header line is optional. `# optimum V` records a reference optimum.
RawModel parse(std::string_view text);

/// Reads and parses a file; errors carry the path in the message.
RawModel parse_file(const std::string& path);

/// Canonical text: `# mlt 1` header, declaration order, one statement per
/// line, shortest round-trippable numbers. parse(write(m)) == m.
std::string write(const RawModel& model);
std::string write(const Model& model);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

}  // namespace polypart
