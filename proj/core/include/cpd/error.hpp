#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cpd {

enum class ErrorCode {
  non_conforming_domain,
  empty_cloud,
  isolated_point,
  degenerate_neighborhood,
  degenerate_reference,
  collapsed_bond,
  collapsed_area,
  collapsed_volume,
  layer_overlap,
  singular_tangent,
  non_convergence,
  step_degeneracy,
  invalid_config,
  invalid_argument,
  io,
};

std::string_view to_string(ErrorCode code);

inline constexpr std::size_t kNoPoint = std::numeric_limits<std::size_t>::max();

/// Every failure raised by the library. `point()` names the offending
/// collocation point when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::size_t point = kNoPoint)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        point_(point),
        detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  std::size_t point() const noexcept { return point_; }
  /// Message without the error-code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::size_t point_;
  std::string detail_;
};

}  // namespace cpd
