#pragma once

// Decoherence of the mode-1 qubit {|alpha=0>, |alpha=1>} in a thermal
// ensemble over the total-momentum number n: the exact phase sum, the
// Bessel-series and Erfi-envelope approximations, and regime diagnostics.

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ringdec/spectrum.hpp"

namespace ringdec::decoherence {

enum class Method { exact, bessel, erfi };

std::string method_name(Method m);
// Throws DomainError for anything but "exact", "bessel", "erfi".
Method parse_method(const std::string& name);

struct ThermalEnsemble {
    double beta = 0.0;        // 1 / J, +inf at T = 0
    long long n_trunc = 0;    // support n in [-n_trunc, n_trunc]
    std::vector<double> weights; // index n + n_trunc, sum 1
    // sum_n exp(-beta (E(n,0) - E(0,0))); the factor exp(-beta E(0,0)) is left out.
    double Z = 1.0;
    bool degenerate = false; // T = 0: all weight on n = 0

    double weight(long long n) const;
};

// Smallest multiple of N with beta n^2 hbar^2 / (2 m N R^2) > ln(1e14).
// The periodic part of E(n,0) - E(0,0) vanishes at multiples of N and is
// never negative, so the neglected tail stays below 1e-12. 0 at T = 0.
long long required_n_trunc(const RingParams& params);

// Throws CoverageError when the spectrum table does not reach n_trunc.
ThermalEnsemble build_ensemble(const spectrum::ThinSpectrum& spec);

struct DecoherenceTrace {
    Method method = Method::exact;
    std::vector<double> t; // s
    std::vector<double> F;
    std::vector<std::pair<std::string, double>> meta;
    std::vector<std::string> notes;
};

struct ExecPolicy {
    bool parallel = true; // OpenMP over time points
};

// Delta E(n) = E(n,1) - E(n,0) = eps_1(n,1) - eps_1(n,0), J.
double delta_E(const spectrum::ThinSpectrum& spec, long long n);
// -hbar omega_1 (g/2) cos(4 pi n / N)
double delta_E_cos(const spectrum::LinearizedCoeffs& coeffs, const RingParams& params, double n);

// F(t) = |sum_n w_n exp(-i Delta E(n) t / hbar)| with compensated summation.
DecoherenceTrace decoherence_exact(const ThermalEnsemble& ens, const spectrum::ThinSpectrum& spec,
                                   std::span<const double> times, ExecPolicy policy = {});

// Same sum with caller-supplied energy differences, index n + n_trunc.
DecoherenceTrace decoherence_exact(const ThermalEnsemble& ens, std::span<const double> delta_e,
                                   std::span<const double> times, ExecPolicy policy = {});

// eta = 4 pi^2 / (N^2 beta Delta_e')
double eta_cut(const spectrum::LinearizedCoeffs& coeffs, const RingParams& params);

// Smallest gamma with exp(-eta gamma^2) <= threshold.
int gamma_cutoff(double eta, double threshold = 1e-2);

// |sum_{|gamma| <= Gamma} J_gamma(g omega_1 t / 2) i^gamma exp(-eta gamma^2)|.
// gamma_max < 0 selects gamma_cutoff(eta). Gamma > 200 is rejected.
DecoherenceTrace decoherence_bessel(const spectrum::LinearizedCoeffs& coeffs, const RingParams& params,
                                    std::span<const double> times, int gamma_max = -1, ExecPolicy policy = {});

// tau = sqrt(beta N^4 m Delta_e' / (pi^2 Delta_g^2 kappa))
double erfi_tau(const spectrum::LinearizedCoeffs& coeffs, const RingParams& params);

// exp(-(t/tau)^2) sqrt(1 + erfi(t/tau)^2)
DecoherenceTrace decoherence_erfi(const spectrum::LinearizedCoeffs& coeffs, const RingParams& params,
                                  std::span<const double> times);

struct RegimeDiagnostics {
    double n_fwhm = 0.0;
    double r = 0.0;
    double eta = 0.0;
    int gamma_cutoff = 0; // -1 when eta vanishes or Gamma would exceed 200
    double tau = 0.0;     // NaN when Delta_g = 0
    double tau_spon = 0.0;
};

RegimeDiagnostics regime(const RingParams& params, const spectrum::LinearizedCoeffs& coeffs);

// sqrt(2 m N R^2 / (beta hbar^2))
double n_fwhm(const RingParams& params);

// First time F drops below threshold, linearly interpolated; +inf if never.
double first_decay_time(const DecoherenceTrace& trace, double threshold = 0.36787944117144233);

} // namespace ringdec::decoherence
