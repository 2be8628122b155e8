#pragma once

#include <stdexcept>
#include <string>

namespace chirmt {

// Error taxonomy shared by all modules. The C layer maps each class to a
// status code, so keep the hierarchy flat.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InputError : Error { using Error::Error; };          // bad parameters
struct StructuralError : Error { using Error::Error; };     // mismatched algebra/shape
struct SingularityError : Error { using Error::Error; };    // non-invertible body
struct CapabilityError : Error { using Error::Error; };     // not supported here
struct PreconditionError : Error { using Error::Error; };   // math precondition violated
struct NumericError : Error { using Error::Error; };        // non-finite result

struct ConvergenceError : Error {
    ConvergenceError(const std::string& what, double best_re, double best_im, double err)
        : Error(what), best_re(best_re), best_im(best_im), err_est(err) {}
    double best_re, best_im, err_est;
};

}  // namespace chirmt
