#pragma once

#include <cmath>
#include <stdexcept>

#include "greenfield/errors.hpp"

namespace greenfield {

/// Parameters of the closed-form 1D kernels for -u'' + m^2 u.
/// `length` is L for the Dirichlet/Neumann kernels on (0,L), the half-length
/// for the interface kernel on (-L,L). `alpha` only enters the interface
/// kernel.
struct Kernel1DParams {
    double m = 1.0;
    double length = 1.0;
    double alpha = 0.0;

    void validate() const {
        if (!(m > 0.0)) throw ModelError("kernel: m must be positive");
        if (!(length > 0.0)) throw ModelError("kernel: L must be positive");
        if (!(alpha >= 0.0)) throw ModelError("kernel: alpha must be >= 0");
    }
};

namespace detail {

// sinh(a) sinh(b) / sinh(c) and cosh(a) cosh(b) / sinh(c) for
// 0 <= a,b and a+b <= c, with the exponentials factored out so that
// m*L values of a few hundred do not overflow.
inline double sinh_sinh_over_sinh(double a, double b, double c) {
    const double num = (1.0 - std::exp(-2.0 * a)) * (1.0 - std::exp(-2.0 * b));
    const double den = 2.0 * (1.0 - std::exp(-2.0 * c));
    return std::exp(a + b - c) * num / den;
}

inline double cosh_cosh_over_sinh(double a, double b, double c) {
    const double num = (1.0 + std::exp(-2.0 * a)) * (1.0 + std::exp(-2.0 * b));
    const double den = 2.0 * (1.0 - std::exp(-2.0 * c));
    return std::exp(a + b - c) * num / den;
}

inline void check_range(double v, double lo, double hi, const char* what) {
    if (!(v >= lo && v <= hi)) throw std::domain_error(what);
}

}  // namespace detail

/// Green kernel of -u'' + m^2 u on (0,L) with u(0)=u(L)=0.
inline double green_dirichlet_1d(const Kernel1DParams& p, double x, double y) {
    p.validate();
    detail::check_range(x, 0.0, p.length, "green_dirichlet_1d: x outside [0,L]");
    detail::check_range(y, 0.0, p.length, "green_dirichlet_1d: y outside [0,L]");
    const double lo = std::min(x, y);
    const double hi = std::max(x, y);
    return detail::sinh_sinh_over_sinh(p.m * lo, p.m * (p.length - hi), p.m * p.length) / p.m;
}

/// Green kernel of -u'' + m^2 u on (0,L) with u'(0)=u'(L)=0.
inline double green_neumann_1d(const Kernel1DParams& p, double x, double y) {
    p.validate();
    detail::check_range(x, 0.0, p.length, "green_neumann_1d: x outside [0,L]");
    detail::check_range(y, 0.0, p.length, "green_neumann_1d: y outside [0,L]");
    const double lo = std::min(x, y);
    const double hi = std::max(x, y);
    return detail::cosh_cosh_over_sinh(p.m * lo, p.m * (p.length - hi), p.m * p.length) / p.m;
}

/// Green kernel on (-L,L), Dirichlet at both ends, with a point penalty
/// (alpha/2) Z(0)^2 at the interface. Rank-one update of the plain Dirichlet
/// kernel G0 on the length-2L interval:
///   G_a(x,y) = G0(x,y) - a G0(x,0) G0(0,y) / (1 + a G0(0,0)).
inline double green_interface_1d(const Kernel1DParams& p, double x, double y) {
    p.validate();
    detail::check_range(x, -p.length, p.length, "green_interface_1d: x outside [-L,L]");
    detail::check_range(y, -p.length, p.length, "green_interface_1d: y outside [-L,L]");
    Kernel1DParams base{p.m, 2.0 * p.length, 0.0};
    const auto g0 = [&](double s, double t) {
        return green_dirichlet_1d(base, s + p.length, t + p.length);
    };
    const double g = g0(x, y);
    if (p.alpha == 0.0) return g;
    return g - p.alpha * g0(x, 0.0) * g0(0.0, y) / (1.0 + p.alpha * g0(0.0, 0.0));
}

/// gamma(s,t) = (C(s,s) + C(t,t) - 2 C(s,t)) / 2 for any symmetric PSD
/// kernel evaluator.
template <typename Kernel>
double variogram_from_kernel(Kernel&& C, double s, double t) {
    return 0.5 * (C(s, s) + C(t, t) - 2.0 * C(s, t));
}

}  // namespace greenfield
