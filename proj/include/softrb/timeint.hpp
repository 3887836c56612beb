#ifndef SOFTRB_TIMEINT_HPP
#define SOFTRB_TIMEINT_HPP

///
/// \file timeint.hpp
///
/// Implicit midpoint rule for linear descriptor systems
///   E ẋ = A x + B u(t) + F(t).
/// Inputs and loads are sampled at step midpoints; the step matrix
/// E − (Δt/2)A is factorized once per run.
///

#include <functional>

#include "softrb/coupled_model.hpp"
#include "softrb/numerics.hpp"

namespace softrb {

struct TimeGrid {
  double final_time = 1.0;
  Index steps = 1;

  double dt() const { return final_time / static_cast<double>(steps); }
  double time(Index k) const { return final_time * k / static_cast<double>(steps); }
};

void validate(const TimeGrid& grid);

struct Trajectory {
  /// One column per time node, column 0 is the initial state.
  Matrix states;
  TimeGrid grid;
};

using LoadFunction = std::function<Vector(double)>;

/// Empty `input` / `load` functions mean u ≡ 0 / F ≡ 0.
Trajectory implicit_midpoint(const Matrix& E, const Matrix& A, const Matrix& B,
                             const Vector& x0, const InputFunction& input,
                             const LoadFunction& load, const TimeGrid& grid);

/// Uses the system's constant load F and initial state x0.
Trajectory implicit_midpoint(const FirstOrderSystem& sys,
                             const InputFunction& input, const TimeGrid& grid);

}  // namespace softrb

#endif  // SOFTRB_TIMEINT_HPP
