#pragma once

#include <stdexcept>
#include <string>

namespace circot {

// Failure categories. Validation-type codes map to CLI exit code 1,
// numerical-type codes to exit code 3.
enum class errc {
  empty_input,
  negative_mass,
  zero_total,
  out_of_range,
  index_out_of_range,
  bad_parameter,
  length_mismatch,
  non_convex_spec,
  asymmetric_input,
  missing_class,
  dimension_mismatch,
  infeasible_marginals,
  numerical_failure,
  not_converged,
  diverged_loss,
  parse_error,
};

const char* errc_name(errc c);
bool errc_is_numerical(errc c);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace circot
