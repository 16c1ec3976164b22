#pragma once

#include <stdexcept>
#include <string>

namespace surfacegrid {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violated a documented parameter range or count.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A text file could not be parsed; carries the offending line and field.
class FormatError : public Error {
 public:
  FormatError(const std::string& path, int line, const std::string& field,
              const std::string& message)
      : Error(path + ":" + std::to_string(line) + ": field '" + field + "': " + message),
        line_(line),
        field_(field) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace surfacegrid
