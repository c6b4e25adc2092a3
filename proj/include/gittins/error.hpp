#pragma once

#include <stdexcept>
#include <string>

namespace gittins {

enum class ErrorKind {
  Domain,       // input outside an operation's precondition
  Numeric,      // non-finite intermediate value
  Convergence,  // iterative solve or residual check failed
  Regime,       // parameters outside the proven/allowed regime
  Config,       // CLI configuration validation
  Internal,
};

/// Base exception for every failure raised by the library.
///
/// The kind drives the CLI exit code: Domain/Regime/Config are validation
/// failures (exit 1), Numeric/Convergence/Internal are numerical failures
/// (exit 2).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  bool is_validation() const noexcept {
    return kind_ == ErrorKind::Domain || kind_ == ErrorKind::Regime ||
           kind_ == ErrorKind::Config;
  }

 private:
  ErrorKind kind_;
};

inline Error domain_error(const std::string& what) {
  return {ErrorKind::Domain, what};
}
inline Error numeric_error(const std::string& what) {
  return {ErrorKind::Numeric, what};
}
inline Error convergence_error(const std::string& what) {
  return {ErrorKind::Convergence, what};
}
inline Error regime_error(const std::string& what) {
  return {ErrorKind::Regime, what};
}
inline Error config_error(const std::string& what) {
  return {ErrorKind::Config, what};
}
inline Error internal_error(const std::string& what) {
  return {ErrorKind::Internal, what};
}

}  // namespace gittins
