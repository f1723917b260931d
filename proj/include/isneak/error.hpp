#pragma once

#include <stdexcept>
#include <string>

namespace isneak {

enum class ErrorCode {
  parse = 1,
  contract,
  empty_pool,
  schema,
  unsupported,
  generation_failure,
  out_of_range,
  io,
  not_found,
  conflict,
  bad_request,
  oracle_failure,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Throws ErrorCode::contract with `what` when `condition` is false.
inline void require(bool condition, const char* what) {
  if (!condition) throw Error(ErrorCode::contract, what);
}

}  // namespace isneak
