#include "irdecide/error.hpp"

namespace irdecide {

ParseError::ParseError(std::string source, std::size_t line,
                       const std::string& message)
    : Error(line > 0 ? source + ":" + std::to_string(line) + ": " + message
                     : source + ": " + message),
      source_(std::move(source)),
      line_(line) {}

}  // namespace irdecide
