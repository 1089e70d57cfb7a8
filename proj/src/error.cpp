#include "raresage/error.hpp"

namespace raresage {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return "io error";
    case ErrorKind::format: return "format error";
    case ErrorKind::validation: return "validation error";
    case ErrorKind::config: return "config error";
    case ErrorKind::state: return "state error";
    case ErrorKind::training: return "training error";
    case ErrorKind::degenerate: return "degenerate class";
    case ErrorKind::undefined: return "undefined value";
    case ErrorKind::stratification: return "stratification error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

}  // namespace raresage
