#include "circot/error.hpp"

namespace circot {

const char* errc_name(errc c) {
  switch (c) {
    case errc::empty_input: return "EmptyInput";
    case errc::negative_mass: return "NegativeMass";
    case errc::zero_total: return "ZeroTotal";
    case errc::out_of_range: return "OutOfRange";
    case errc::index_out_of_range: return "IndexOutOfRange";
    case errc::bad_parameter: return "BadParameter";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::non_convex_spec: return "NonConvexSpec";
    case errc::asymmetric_input: return "AsymmetricInput";
    case errc::missing_class: return "MissingClass";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::infeasible_marginals: return "InfeasibleMarginals";
    case errc::numerical_failure: return "NumericalFailure";
    case errc::not_converged: return "NotConverged";
    case errc::diverged_loss: return "DivergedLoss";
    case errc::parse_error: return "ParseError";
  }
  return "UnknownError";
}

bool errc_is_numerical(errc c) {
  return c == errc::numerical_failure || c == errc::not_converged || c == errc::diverged_loss;
}

}  // namespace circot
