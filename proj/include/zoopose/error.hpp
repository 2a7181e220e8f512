#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zoopose {

enum class Errc {
  parse_error,
  schema_error,
  io_error,
  invalid_skeleton,
  unknown_anchor,
  incompatible_anchor,
  not_found,
  empty_library,
  unparseable_response,
  unknown_target,
  non_finite_result,
  backend_error,
  invalid_range,
  step_out_of_range,
  shape_mismatch,
  divergence_detected,
  invalid_argument,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace zoopose
