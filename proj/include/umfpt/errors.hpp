#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace umfpt {

enum class ErrorKind {
  parameter,
  domain,
  pole_proximity,
  root_isolation,
  degenerate_residue,
  grid,
  capacity,
  integration,
  io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base class of everything the library throws on a contract violation.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define UMFPT_DEFINE_ERROR(Name, Kind)                                 \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

UMFPT_DEFINE_ERROR(ParameterError, parameter)
UMFPT_DEFINE_ERROR(DomainError, domain)
UMFPT_DEFINE_ERROR(PoleProximityError, pole_proximity)
UMFPT_DEFINE_ERROR(RootIsolationError, root_isolation)
UMFPT_DEFINE_ERROR(DegenerateResidueError, degenerate_residue)
UMFPT_DEFINE_ERROR(GridError, grid)
UMFPT_DEFINE_ERROR(CapacityError, capacity)
UMFPT_DEFINE_ERROR(IntegrationError, integration)
UMFPT_DEFINE_ERROR(IoError, io)

#undef UMFPT_DEFINE_ERROR

}  // namespace umfpt
