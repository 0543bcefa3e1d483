#pragma once

#include <stdexcept>
#include <string>

namespace mtm {

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A state with positive target mass that the proposal cannot reach.
class UnsupportedState : public Error
{
public:
  using Error::Error;
};

class InsufficientSpecification : public Error
{
public:
  using Error::Error;
};

class InvalidConfiguration : public Error
{
public:
  using Error::Error;
};

class DomainError : public Error
{
public:
  using Error::Error;
};

/// An exact computation would exceed its enumeration or support budget.
class BudgetExceeded : public InvalidConfiguration
{
public:
  using InvalidConfiguration::InvalidConfiguration;
};

class ConstructionError : public Error
{
public:
  using Error::Error;
};

} // namespace mtm
