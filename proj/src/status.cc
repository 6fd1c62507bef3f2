#include "lsmclab/status.h"

namespace lsmclab {

std::string Status::ToString() const {
  const char* prefix = "OK";
  switch (code_) {
    case Code::kOk: return "OK";
    case Code::kInvalidArgument: prefix = "Invalid argument: "; break;
    case Code::kNotFound: prefix = "Not found: "; break;
    case Code::kIOError: prefix = "IO error: "; break;
    case Code::kCorruption: prefix = "Corruption: "; break;
    case Code::kInvariantViolation: prefix = "Invariant violation: "; break;
    case Code::kParseError: prefix = "Parse error: "; break;
  }
  return prefix + msg_;
}

}  // namespace lsmclab
