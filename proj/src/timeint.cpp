#include "softrb/timeint.hpp"

#include <sstream>

namespace softrb {

void validate(const TimeGrid& grid) {
  if (!(grid.final_time > 0) || grid.steps < 1) {
    throw NumericalError("time grid: need T > 0 and at least one step");
  }
}

Trajectory implicit_midpoint(const Matrix& E, const Matrix& A, const Matrix& B,
                             const Vector& x0, const InputFunction& input,
                             const LoadFunction& load, const TimeGrid& grid) {
  validate(grid);
  const Index n = E.rows();
  if (E.cols() != n || A.rows() != n || A.cols() != n || B.rows() != n ||
      x0.size() != n) {
    throw NumericalError("implicit_midpoint: inconsistent system dimensions");
  }
  require_finite(x0, "implicit_midpoint initial state");
  const double dt = grid.dt();
  const LuFactorization step(E - 0.5 * dt * A);
  const Matrix explicit_part = E + 0.5 * dt * A;

  Trajectory traj;
  traj.grid = grid;
  traj.states.resize(n, grid.steps + 1);
  traj.states.col(0) = x0;
  Vector rhs(n);
  for (Index k = 0; k < grid.steps; ++k) {
    const double t_mid = grid.time(k) + 0.5 * dt;
    rhs.noalias() = explicit_part * traj.states.col(k);
    if (input && B.cols() > 0) {
      const Vector u = input(t_mid);
      if (u.size() != B.cols() || !u.allFinite()) {
        std::ostringstream msg;
        msg << "implicit_midpoint: invalid input sample at t = " << t_mid;
        throw NumericalError(msg.str());
      }
      rhs.noalias() += dt * (B * u);
    }
    if (load) {
      const Vector f = load(t_mid);
      if (f.size() != n || !f.allFinite()) {
        std::ostringstream msg;
        msg << "implicit_midpoint: invalid load sample at t = " << t_mid;
        throw NumericalError(msg.str());
      }
      rhs.noalias() += dt * f;
    }
    traj.states.col(k + 1) = step.solve(rhs);
  }
  return traj;
}

Trajectory implicit_midpoint(const FirstOrderSystem& sys,
                             const InputFunction& input, const TimeGrid& grid) {
  LoadFunction load;
  if (sys.F.size() > 0 && sys.F.squaredNorm() > 0) {
    load = [F = sys.F](double) { return F; };
  }
  return implicit_midpoint(sys.E, sys.A, sys.B, sys.x0, input, load, grid);
}

}  // namespace softrb
