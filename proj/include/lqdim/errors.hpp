#ifndef LQDIM_ERRORS_HPP
#define LQDIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lqdim {

// Bad caller input: out-of-range symbols, malformed probability vectors,
// parameters outside their documented ranges.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Mathematically undefined request: singular matrices, non-contractions,
// unsupported sign patterns.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Enumeration or sampling budget exceeded.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Not enough usable data to fit an estimate.
struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lqdim

#endif  // LQDIM_ERRORS_HPP
