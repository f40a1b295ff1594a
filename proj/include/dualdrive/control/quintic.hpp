#pragma once

#include <array>

namespace dd::control {

// Degree-5 time polynomial on [0, T], fixed by position/velocity/acceleration
// at both endpoints.
struct QuinticPoly {
    std::array<double, 6> c{};  // x(t) = c0 + c1 t + ... + c5 t^5
    double T = 1.0;

    double value(double t) const;
    double d1(double t) const;
    double d2(double t) const;
    double d3(double t) const;
};

// Closed-form boundary-value solve; throws std::invalid_argument for T <= 0.
QuinticPoly quintic_solve(double x0, double v0, double a0,
                          double xT, double vT, double aT, double T);

}  // namespace dd::control
