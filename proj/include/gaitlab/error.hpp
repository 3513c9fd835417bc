#ifndef GAITLAB_ERROR_HPP
#define GAITLAB_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace gaitlab {

/// Error categories. The CLI prints the category name as the first token of
/// its single-line failure message.
enum class ErrorKind {
  Parameter,
  Topology,
  Validation,
  Io,
  Contract,
  Numerical,
  Protocol,
  Metric,
  Config,
  Parse,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Topology: return "topology";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Io: return "io";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Protocol: return "protocol";
    case ErrorKind::Metric: return "metric";
    case ErrorKind::Config: return "config";
    case ErrorKind::Parse: return "parse";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace gaitlab

#endif  // GAITLAB_ERROR_HPP
