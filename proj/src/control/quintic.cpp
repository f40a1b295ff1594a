#include "dualdrive/control/quintic.hpp"

#include <stdexcept>

namespace dd::control {

double QuinticPoly::value(double t) const {
    // Horner evaluation
    double r = c[5];
    for (int i = 4; i >= 0; --i) r = r * t + c[i];
    return r;
}

double QuinticPoly::d1(double t) const {
    return c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5])));
}

double QuinticPoly::d2(double t) const {
    return 2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5]));
}

double QuinticPoly::d3(double t) const {
    return 6.0 * c[3] + t * (24.0 * c[4] + t * 60.0 * c[5]);
}

QuinticPoly quintic_solve(double x0, double v0, double a0,
                          double xT, double vT, double aT, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("quintic_solve: T must be > 0");

    QuinticPoly p;
    p.T = T;
    p.c[0] = x0;
    p.c[1] = v0;
    p.c[2] = a0 / 2.0;

    // Residual boundary conditions after subtracting the free quadratic part.
    const double dx = xT - (x0 + v0 * T + 0.5 * a0 * T * T);
    const double dv = vT - (v0 + a0 * T);
    const double da = aT - a0;

    const double T2 = T * T, T3 = T2 * T, T4 = T3 * T, T5 = T4 * T;
    p.c[3] = (20.0 * dx - 8.0 * dv * T + da * T2) / (2.0 * T3);
    p.c[4] = (-30.0 * dx + 14.0 * dv * T - 2.0 * da * T2) / (2.0 * T4);
    p.c[5] = (12.0 * dx - 6.0 * dv * T + da * T2) / (2.0 * T5);
    return p;
}

}  // namespace dd::control
