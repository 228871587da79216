#include "ringdec/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>

#include "ringdec/errors.hpp"
#include "ringdec/summation.hpp"

namespace ringdec::specfun {

namespace {

bool is_nonpositive_integer(double b) { return b <= 0.0 && b == std::floor(b); }

// Direct Taylor series of 1F1 and its z-derivative, z >= 0. With z >= 0 the
// terms change sign at most ceil(-a) times, so no large cancellation occurs.
KummerValue kummer_series(double a, double b, double z, const SeriesControl& ctrl) {
    CompensatedSum value;
    CompensatedSum deriv;
    double term = 1.0;
    for (int k = 0; k < ctrl.max_terms; ++k) {
        const double ratio = (a + k) / (b + k);
        const double dterm = term * ratio; // k-th term of (a/b) 1F1(a+1; b+1; z)
        value.add(term);
        deriv.add(dterm);
        if (term == 0.0 && dterm == 0.0) {
            return {value.value(), deriv.value()};
        }
        // Past the largest term and past the last sign change the tail is
        // bounded by a geometric series with ratio < 1.
        const bool decreasing = (k + 1) > z && (a + k) > 0.0;
        if (decreasing && std::abs(term) <= ctrl.rel_tol * std::abs(value.value()) &&
            std::abs(dterm) <= ctrl.rel_tol * std::abs(deriv.value())) {
            return {value.value(), deriv.value()};
        }
        term *= ratio * z / (k + 1);
    }
    std::ostringstream msg;
    msg << "1F1(" << a << "; " << b << "; " << z << ") did not converge in " << ctrl.max_terms << " terms";
    throw ConvergenceError(msg.str(), value.value(), std::abs(term), ctrl.max_terms);
}

} // namespace

void SeriesControl::validate() const {
    if (!(rel_tol > 0.0 && rel_tol <= 1e-6)) {
        throw DomainError("SeriesControl.rel_tol must lie in (0, 1e-6]");
    }
    if (max_terms < 50) {
        throw DomainError("SeriesControl.max_terms must be >= 50");
    }
}

KummerValue kummer_1f1_with_dz(double a, double b, double z, const SeriesControl& ctrl) {
    if (is_nonpositive_integer(b)) {
        throw DomainError("1F1: b must not be a non-positive integer");
    }
    if (!std::isfinite(a) || !std::isfinite(z) || std::abs(z) > 200.0) {
        throw DomainError("1F1: requires finite a and |z| <= 200");
    }
    if (z >= 0.0) {
        return kummer_series(a, b, z, ctrl);
    }
    // 1F1(a;b;z) = e^z 1F1(b-a;b;-z); differentiate the product for the slope.
    const KummerValue t = kummer_series(b - a, b, -z, ctrl);
    const double ez = std::exp(z);
    return {ez * t.value, ez * (t.value - t.derivative)};
}

double kummer_1f1(double a, double b, double z, const SeriesControl& ctrl) {
    return kummer_1f1_with_dz(a, b, z, ctrl).value;
}

double kummer_1f1_dz(double a, double b, double z, const SeriesControl& ctrl) {
    return kummer_1f1_with_dz(a, b, z, ctrl).derivative;
}

namespace {

constexpr double kBesselSeriesLimit = 12.0;

// Ascending series for J_n(x), n >= 0, x >= 0.
double bessel_series(int n, double x) {
    if (x == 0.0) {
        return n == 0 ? 1.0 : 0.0;
    }
    const double half = 0.5 * x;
    double term = std::exp(n * std::log(half) - std::lgamma(n + 1.0));
    if (term == 0.0) {
        return 0.0;
    }
    const double q = -half * half;
    CompensatedSum sum;
    for (int k = 0; k < 400; ++k) {
        sum.add(term);
        if (k > half && std::abs(term) < 1e-17 * std::abs(sum.value())) {
            break;
        }
        term *= q / ((k + 1.0) * (k + 1.0 + n));
    }
    return sum.value();
}

// Miller's downward recurrence normalized with J_0 + 2 sum J_{2k} = 1.
// Returns J_0..J_max_order at x > 0.
std::vector<double> bessel_miller(int max_order, double x) {
    const double big = std::max<double>(max_order, x);
    int start = static_cast<int>(big + 30.0 + std::sqrt(60.0 * big));
    start += start % 2; // even start keeps the normalization sum aligned
    std::vector<double> j(static_cast<std::size_t>(start) + 2, 0.0);
    j[start + 1] = 0.0;
    j[start] = 1e-280;
    for (int k = start; k >= 1; --k) {
        j[k - 1] = (2.0 * k / x) * j[k] - j[k + 1];
        if (std::abs(j[k - 1]) > 1e250) {
            for (int i = k - 1; i <= start; ++i) {
                j[i] *= 1e-250;
            }
        }
    }
    CompensatedSum norm;
    norm.add(j[0]);
    for (int k = 2; k <= start; k += 2) {
        norm.add(2.0 * j[k]);
    }
    const double scale = 1.0 / norm.value();
    std::vector<double> out(static_cast<std::size_t>(max_order) + 1);
    for (int k = 0; k <= max_order; ++k) {
        out[k] = j[k] * scale;
    }
    return out;
}

void check_bessel_domain(int order, double z) {
    if (std::abs(order) > 200 || !(std::abs(z) <= 1e4)) {
        throw DomainError("bessel_j: requires |gamma| <= 200 and |z| <= 1e4");
    }
}

} // namespace

double bessel_j(int gamma, double z) {
    check_bessel_domain(gamma, z);
    const int n = std::abs(gamma);
    const double x = std::abs(z);
    double value;
    if (x <= kBesselSeriesLimit) {
        value = bessel_series(n, x);
    } else {
        value = bessel_miller(n, x)[n];
    }
    // J_{-n} = (-1)^n J_n and J_n(-x) = (-1)^n J_n(x).
    const bool flip = ((gamma < 0) != (z < 0.0)) && (n % 2 == 1);
    return flip ? -value : value;
}

std::vector<double> bessel_j_sequence(int max_order, double z) {
    check_bessel_domain(max_order, z);
    if (max_order < 0) {
        throw DomainError("bessel_j_sequence: max_order must be >= 0");
    }
    const double x = std::abs(z);
    std::vector<double> out;
    if (x <= kBesselSeriesLimit) {
        out.resize(static_cast<std::size_t>(max_order) + 1);
        for (int n = 0; n <= max_order; ++n) {
            out[n] = bessel_series(n, x);
        }
    } else {
        out = bessel_miller(max_order, x);
    }
    if (z < 0.0) {
        for (int n = 1; n <= max_order; n += 2) {
            out[n] = -out[n];
        }
    }
    return out;
}

namespace {

constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;

// \int_0^x e^{t^2} dt as sum x^{2k+1} / (k! (2k+1)); positive terms only.
double integral_exp_square(double x) {
    const double x2 = x * x;
    double power = x; // x^{2k+1} / k!
    CompensatedSum sum;
    for (int k = 0; k < 2000; ++k) {
        const double term = power / (2.0 * k + 1.0);
        sum.add(term);
        if (k > x2 && term < 1e-17 * sum.value()) {
            return sum.value();
        }
        power *= x2 / (k + 1.0);
    }
    return sum.value();
}

} // namespace

double dawson(double x) {
    const double ax = std::abs(x);
    double value;
    if (ax <= 6.0) {
        value = std::exp(-ax * ax) * integral_exp_square(ax);
    } else {
        // Asymptotic series 1/(2x) sum (2k-1)!!/(2x^2)^k, cut at its smallest term.
        const double inv = 1.0 / (2.0 * ax * ax);
        double term = 1.0;
        CompensatedSum sum;
        sum.add(term);
        for (int k = 1; k < 200; ++k) {
            const double next = term * (2.0 * k - 1.0) * inv;
            if (next >= term) {
                break;
            }
            term = next;
            sum.add(term);
            if (term < 1e-17) {
                break;
            }
        }
        value = sum.value() / (2.0 * ax);
    }
    return x < 0.0 ? -value : value;
}

double erfi(double x) {
    const double ax = std::abs(x);
    if (ax > 26.0) {
        throw DomainError("erfi overflows for |x| > 26; use erfi_scaled_envelope");
    }
    double value;
    if (ax <= 3.0) {
        value = kTwoOverSqrtPi * integral_exp_square(ax);
    } else {
        value = kTwoOverSqrtPi * std::exp(ax * ax) * dawson(ax);
    }
    return x < 0.0 ? -value : value;
}

double erfi_scaled_envelope(double u) {
    if (!(u >= 0.0)) {
        throw DomainError("erfi_scaled_envelope requires u >= 0");
    }
    // e^{-u^2} erfi(u) = 2 D(u) / sqrt(pi)
    const double gaussian = std::exp(-u * u);
    const double scaled = kTwoOverSqrtPi * dawson(u);
    return std::sqrt(gaussian * gaussian + scaled * scaled);
}

namespace {

// 15-point Kronrod abscissae (non-negative half) and weights; every other
// abscissa is a 7-point Gauss node.
constexpr std::array<double, 8> kXk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kWk[7];
    double gauss = fc * kWg[3];
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kXk[i];
        const double fsum = f(center - dx) + f(center + dx);
        kronrod += kWk[i] * fsum;
        if (i % 2 == 1) {
            gauss += kWg[i / 2] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

} // namespace

QuadResult adaptive_quad(const std::function<double(double)>& f, double a, double b, double tol,
                         int max_intervals) {
    if (!(tol > 0.0)) {
        throw DomainError("adaptive_quad: tol must be positive");
    }
    if (a == b) {
        return {0.0, 0.0, 0};
    }
    std::priority_queue<Segment> heap;
    heap.push(gauss_kronrod(f, a, b));
    double total = heap.top().value;
    double error = heap.top().error;
    int evaluations = 15;
    int intervals = 1;
    while (error > tol) {
        if (intervals >= max_intervals) {
            std::ostringstream msg;
            msg << "adaptive_quad: error estimate " << error << " above tol " << tol << " after "
                << intervals << " intervals";
            throw ConvergenceError(msg.str(), total, error, evaluations);
        }
        const Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Segment left = gauss_kronrod(f, worst.a, mid);
        const Segment right = gauss_kronrod(f, mid, worst.b);
        evaluations += 30;
        ++intervals;
        heap.push(left);
        heap.push(right);
        // Re-sum from the heap occasionally to stop drift in the running totals.
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        if (intervals % 64 == 0) {
            auto copy = heap;
            CompensatedSum v;
            CompensatedSum e;
            while (!copy.empty()) {
                v.add(copy.top().value);
                e.add(copy.top().error);
                copy.pop();
            }
            total = v.value();
            error = e.value();
        }
    }
    CompensatedSum v;
    CompensatedSum e;
    while (!heap.empty()) {
        v.add(heap.top().value);
        e.add(heap.top().error);
        heap.pop();
    }
    return {v.value(), e.value(), evaluations};
}

} // namespace ringdec::specfun
