#include "isneak/error.hpp"

namespace isneak {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse: return "parse";
    case ErrorCode::contract: return "contract";
    case ErrorCode::empty_pool: return "empty_pool";
    case ErrorCode::schema: return "schema";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::generation_failure: return "generation_failure";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::io: return "io";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::bad_request: return "bad_request";
    case ErrorCode::oracle_failure: return "oracle_failure";
  }
  return "unknown";
}

}  // namespace isneak
