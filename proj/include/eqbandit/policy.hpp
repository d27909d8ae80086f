#pragma once

#include <string>

#include "eqbandit/core.hpp"

namespace eqbandit {

/// A sequential decision rule that only sees noisy rewards.
///
/// The driver calls select() once per timestep, then observe() with the
/// reward of that step. finish() is called once when the horizon ends, so
/// epoch-based policies can account for a truncated final epoch.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual ActionId select() = 0;
  virtual void observe(ActionId played, double reward) = 0;
  virtual void finish() {}
};

}  // namespace eqbandit
