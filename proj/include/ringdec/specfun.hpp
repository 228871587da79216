#pragma once

// Special functions needed by the ring-oscillator model: Kummer's confluent
// hypergeometric function, integer-order Bessel J, the imaginary error function
// (through Dawson's integral) and an adaptive Gauss-Kronrod integrator used by
// the test oracles. Real arguments only.

#include <functional>
#include <vector>

namespace ringdec::specfun {

struct SeriesControl {
    double rel_tol = 1e-15;
    int max_terms = 500;

    // Throws DomainError unless rel_tol in (0, 1e-6] and max_terms >= 50.
    void validate() const;
};

struct KummerValue {
    double value;      // 1F1(a; b; z)
    double derivative; // d/dz 1F1(a; b; z)
};

// 1F1(a; b; z). Non-negative z is summed directly; negative z goes through
// Kummer's transformation 1F1(a;b;z) = e^z 1F1(b-a;b;-z) so that the summed
// series never alternates beyond its first few terms.
double kummer_1f1(double a, double b, double z, const SeriesControl& ctrl = {});

// d/dz 1F1(a; b; z) = (a/b) 1F1(a+1; b+1; z).
double kummer_1f1_dz(double a, double b, double z, const SeriesControl& ctrl = {});

// Value and z-derivative from a single pass over the series.
KummerValue kummer_1f1_with_dz(double a, double b, double z, const SeriesControl& ctrl = {});

// J_gamma(z) for |gamma| <= 200, |z| <= 1e4.
double bessel_j(int gamma, double z);

// J_0(z) .. J_{max_order}(z) in one downward sweep.
std::vector<double> bessel_j_sequence(int max_order, double z);

// Dawson's integral D(x) = e^{-x^2} \int_0^x e^{t^2} dt.
double dawson(double x);

// erfi(x) = 2/sqrt(pi) \int_0^x e^{s^2} ds, |x| <= 26.
double erfi(double x);

// e^{-u^2} sqrt(1 + erfi(u)^2) for u >= 0, finite for every u.
double erfi_scaled_envelope(double u);

struct QuadResult {
    double value;
    double abs_error;
    int evaluations;
};

// Globally adaptive 7/15-point Gauss-Kronrod quadrature. Throws
// ConvergenceError (carrying the best estimate) when the absolute error
// estimate cannot be pushed below tol within max_intervals subdivisions.
QuadResult adaptive_quad(const std::function<double(double)>& f, double a, double b, double tol,
                         int max_intervals = 2000);

} // namespace ringdec::specfun
