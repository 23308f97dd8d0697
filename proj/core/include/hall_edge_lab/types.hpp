#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hel {

using cplx = std::complex<double>;
using Mat  = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using Vec  = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class Channel { Charge, Spin };

// Configuration / contract violations. The CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures carry the module-level error name (GapClosed, NoGap,
// NonConvergent, ...). The CLI maps these to exit code 3.
struct NumericError : std::runtime_error {
  std::string code;
  NumericError(std::string code_, const std::string& msg)
      : std::runtime_error(code_ + ": " + msg), code(std::move(code_)) {}
};

inline double fermi(double e, double mu, double beta) {
  const double x = beta * (e - mu);
  if (x > 0) {
    const double ex = std::exp(-x);
    return ex / (1.0 + ex);
  }
  return 1.0 / (1.0 + std::exp(x));
}

// d/de fermi = -beta f (1 - f)
inline double fermi_prime(double e, double mu, double beta) {
  const double f = fermi(e, mu, beta);
  return -beta * f * (1.0 - f);
}

}  // namespace hel
