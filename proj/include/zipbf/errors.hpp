#pragma once

#include <stdexcept>
#include <string>

namespace zipbf {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A parameter is outside its mathematical domain (e.g. lambda <= 0).
class domain_error : public error {
public:
  explicit domain_error(const std::string& msg) : error(msg) {}
};

/// Malformed or inconsistent input data (files, shapes, negative counts).
class input_error : public error {
public:
  explicit input_error(const std::string& msg) : error(msg) {}
};

/// The design matrix A does not have full column rank.
class design_rank_error : public input_error {
public:
  explicit design_rank_error(const std::string& msg) : input_error(msg) {}
};

/// All counts are zero: the improper-prior Bayes factor is undefined and the
/// caller must switch to the proper-prior all-zeros route.
class all_zeros_error : public error {
public:
  explicit all_zeros_error(const std::string& msg) : error(msg) {}
};

/// The requested prior does not guarantee a finite marginal for these data
/// and the caller did not force the computation.
class integrability_error : public error {
public:
  explicit integrability_error(const std::string& msg) : error(msg) {}
};

/// An iterative numerical procedure failed to converge.
class numerical_error : public error {
public:
  explicit numerical_error(const std::string& msg) : error(msg) {}
};

} // namespace zipbf
