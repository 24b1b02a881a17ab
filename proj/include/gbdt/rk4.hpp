#pragma once

#include <utility>

namespace gbdt {

/// One classical Runge-Kutta step. State needs operator+ and scaling by
/// double; Deriv is f(t, state) -> state.
template <class State, class Deriv>
State rk4_step(const State& y, double t, double dt, Deriv&& f) {
    State k1 = f(t, y);
    State k2 = f(t + dt / 2, y + k1 * (dt / 2));
    State k3 = f(t + dt / 2, y + k2 * (dt / 2));
    State k4 = f(t + dt, y + k3 * dt);
    return y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
}

/// Integrate over [t0, t0 + len] with a fixed number of steps.
template <class State, class Deriv>
State rk4_integrate(State y, double t0, double len, int nsteps, Deriv&& f) {
    const double dt = len / nsteps;
    for (int k = 0; k < nsteps; ++k) y = rk4_step(y, t0 + k * dt, dt, f);
    return y;
}

}  // namespace gbdt
