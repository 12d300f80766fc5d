#ifndef GAUSSGEO_ERRORS_HPP
#define GAUSSGEO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gaussgeo {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input: wrong shapes, asymmetric matrices,
/// points that are not on the manifold.
class InputError : public Error
{
public:
  using Error::Error;
};

/// A numerical kernel failed: lost positivity, non-convergence, blow-up.
class NumericalError : public Error
{
public:
  using Error::Error;
};

class NotPositiveDefinite : public NumericalError
{
public:
  using NumericalError::NumericalError;
};

/// Iterative method stopped without meeting its tolerance.
class NonConvergence : public NumericalError
{
public:
  NonConvergence(const std::string & what, double last_residual)
      : NumericalError(what + " (last residual " + std::to_string(last_residual) + ")"),
        last_residual_(last_residual)
  {}

  double last_residual() const noexcept { return last_residual_; }

private:
  double last_residual_;
};

}  // namespace gaussgeo

#endif  // GAUSSGEO_ERRORS_HPP
