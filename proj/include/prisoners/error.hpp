#pragma once

#include <stdexcept>
#include <string>

namespace prisoners {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument falls outside an operation's precondition.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The object lacks the certificate or structure an operation needs.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// A bounded witness search ran out of room.
class HorizonError : public Error {
 public:
  using Error::Error;
};

/// A lazy plan was queried beyond what it has materialized.
class NotMaterialized : public Error {
 public:
  using Error::Error;
};

/// Input violated a structural contract (malformed plan, bad config, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace prisoners
