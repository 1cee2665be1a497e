#include "seedpick/error.hpp"

namespace seedpick {

std::string_view kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::io: return "io";
    case ErrorKind::format: return "format";
    case ErrorKind::corruption: return "corruption";
    case ErrorKind::validation: return "validation";
    case ErrorKind::refusal: return "refusal";
    case ErrorKind::usage: return "usage";
  }
  return "unknown";
}

}  // namespace seedpick
