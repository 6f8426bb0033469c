#pragma once

#include <stdexcept>
#include <string>

namespace rrho {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// core / params
struct RhoOutOfRange : Error { using Error::Error; };
struct EpsOutOfRange : Error { using Error::Error; };
struct OverrideNonPositive : Error { using Error::Error; };

// preprocess
struct AllMassPruned : Error { using Error::Error; };

// dual
struct CouplingMarginalViolation : Error { using Error::Error; };
struct DenseTooLarge : Error { using Error::Error; };

// kde / augkde
struct EmptyInput : Error { using Error::Error; };
struct AspectRatioViolated : Error { using Error::Error; };
struct WeightPromiseViolated : Error { using Error::Error; };

// oracles
struct NonConvergence : Error { using Error::Error; };
struct NumericalUnderflow : Error { using Error::Error; };

// io
struct ParseError : Error { using Error::Error; };
struct WeightSumError : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

}  // namespace rrho
