#pragma once

#include <stdexcept>
#include <string>

namespace evac {

/// Base class for all evacplan errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Instance file could not be parsed; message names the offending field.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A source node has no path to any safe node.
class NoRouteError : public Error {
 public:
  using Error::Error;
};

/// The horizon is too small for some source to reach safety.
class HorizonTooSmallError : public Error {
 public:
  using Error::Error;
};

/// Pruning removed a source copy at t=0, so no plan can exist.
class InfeasibleAfterPruneError : public Error {
 public:
  using Error::Error;
};

/// No feasible schedule/routing exists under the given constraints.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// A plan loads some time-expanded edge copy beyond its capacity.
class CapacityViolationError : public Error {
 public:
  using Error::Error;
};

/// Enumeration would exceed the configured routing cap.
class CapExceededError : public Error {
 public:
  using Error::Error;
};

/// Gadget normalization failed to keep the graph grid-embeddable.
class NotASubgridError : public Error {
 public:
  using Error::Error;
};

}  // namespace evac
