#include "ringdec/decoherence.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "ringdec/errors.hpp"
#include "ringdec/specfun.hpp"
#include "ringdec/summation.hpp"

namespace ringdec::decoherence {

using std::numbers::pi;

std::string method_name(Method m) {
    switch (m) {
    case Method::exact:
        return "exact";
    case Method::bessel:
        return "bessel";
    case Method::erfi:
        return "erfi";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    if (name == "exact") {
        return Method::exact;
    }
    if (name == "bessel") {
        return Method::bessel;
    }
    if (name == "erfi") {
        return Method::erfi;
    }
    throw DomainError("unknown method '" + name + "' (expected exact, bessel or erfi)");
}

double ThermalEnsemble::weight(long long n) const {
    if (n < -n_trunc || n > n_trunc) {
        return 0.0;
    }
    return weights[static_cast<std::size_t>(n + n_trunc)];
}

long long required_n_trunc(const RingParams& params) {
    params.validate();
    if (params.temperature == 0.0) {
        return 0;
    }
    const double limit = std::log(1e14);
    const double scale = params.beta() * params.kinetic_unit();
    const long long N = params.N;
    long long n = N * static_cast<long long>(std::ceil(std::sqrt(limit / scale) / N));
    while (scale * static_cast<double>(n) * static_cast<double>(n) <= limit) {
        n += N;
    }
    return std::max(n, N);
}

ThermalEnsemble build_ensemble(const spectrum::ThinSpectrum& spec) {
    const RingParams& params = spec.params();
    ThermalEnsemble ens;
    ens.beta = params.beta();
    if (params.temperature == 0.0) {
        ens.degenerate = true;
        ens.n_trunc = 0;
        ens.weights = {1.0};
        ens.Z = 1.0;
        return ens;
    }
    ens.n_trunc = required_n_trunc(params);
    if (!spec.covers(ens.n_trunc)) {
        throw CoverageError("ensemble needs the spectrum on n in [-" + std::to_string(ens.n_trunc) + ", " +
                            std::to_string(ens.n_trunc) + "], table holds n_max=" + std::to_string(spec.n_max()));
    }
    const std::size_t size = 2 * static_cast<std::size_t>(ens.n_trunc) + 1;
    ens.weights.resize(size);
    CompensatedSum z;
    for (long long n = -ens.n_trunc; n <= ens.n_trunc; ++n) {
        const double w = std::exp(-ens.beta * spec.ground_excess(n));
        ens.weights[static_cast<std::size_t>(n + ens.n_trunc)] = w;
        z.add(w);
    }
    ens.Z = z.value();
    CompensatedSum total;
    for (double& w : ens.weights) {
        w /= ens.Z;
        total.add(w);
    }
    if (std::abs(total.value() - 1.0) > 1e-12) {
        throw ConsistencyError("build_ensemble: weights do not normalize");
    }
    return ens;
}

double delta_E(const spectrum::ThinSpectrum& spec, long long n) { return spec.delta_E(n); }

double delta_E_cos(const spectrum::LinearizedCoeffs& coeffs, const RingParams& params, double n) {
    const double w1 = 2.0 * params.base_frequency() * std::sin(pi / params.N);
    return -constants::hbar * w1 * 0.5 * coeffs.g * std::cos(4.0 * pi * n / params.N);
}

namespace {

// |sum_j w_j exp(-i e_j t / hbar)| for every t.
std::vector<double> phase_sum(std::span<const double> w, std::span<const double> e, std::span<const double> times,
                              bool parallel) {
    std::vector<double> out(times.size());
    const long count = static_cast<long>(times.size());
    auto eval = [&](long i) {
        const double s = times[static_cast<std::size_t>(i)] / constants::hbar;
        CompensatedComplexSum acc;
        for (std::size_t j = 0; j < w.size(); ++j) {
            const double phase = -e[j] * s;
            acc.add({w[j] * std::cos(phase), w[j] * std::sin(phase)});
        }
        out[static_cast<std::size_t>(i)] = std::abs(acc.value());
    };
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (long i = 0; i < count; ++i) {
            eval(i);
        }
    } else {
        for (long i = 0; i < count; ++i) {
            eval(i);
        }
    }
    return out;
}

void check_times(std::span<const double> times) {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || (i > 0 && !(times[i] >= times[i - 1]))) {
            throw DomainError("times: must be finite and non-decreasing");
        }
    }
}

} // namespace

DecoherenceTrace decoherence_exact(const ThermalEnsemble& ens, const spectrum::ThinSpectrum& spec,
                                   std::span<const double> times, ExecPolicy policy) {
    check_times(times);
    if (!spec.covers(ens.n_trunc)) {
        throw CoverageError("decoherence_exact: spectrum must cover n in [-" + std::to_string(ens.n_trunc) + ", " +
                            std::to_string(ens.n_trunc) + "]");
    }
    // Delta E depends on n only through its folded momentum; summing the
    // weights per class first shortens the inner loop to N/2 + 1 terms.
    const int N = spec.params().N;
    const int half = N / 2;
    std::vector<CompensatedSum> cls(static_cast<std::size_t>(half) + 1);
    for (long long n = -ens.n_trunc; n <= ens.n_trunc; ++n) {
        cls[spectrum::ThinSpectrum::fold_momentum(N, n)].add(ens.weight(n));
    }
    std::vector<double> w;
    std::vector<double> e;
    for (int m = 0; m <= half; ++m) {
        const double wm = cls[m].value();
        if (wm != 0.0) {
            w.push_back(wm);
            e.push_back(spec.delta_E(m));
        }
    }
    DecoherenceTrace tr;
    tr.method = Method::exact;
    tr.t.assign(times.begin(), times.end());
    tr.F = phase_sum(w, e, times, policy.parallel);
    tr.meta = {{"n_trunc", static_cast<double>(ens.n_trunc)}, {"Z", ens.Z}};
    if (ens.degenerate) {
        tr.notes.emplace_back("zero temperature: single-momentum ensemble");
    }
    return tr;
}

DecoherenceTrace decoherence_exact(const ThermalEnsemble& ens, std::span<const double> delta_e,
                                   std::span<const double> times, ExecPolicy policy) {
    check_times(times);
    if (delta_e.size() != ens.weights.size()) {
        throw DomainError("decoherence_exact: delta_e must hold one value per ensemble member");
    }
    DecoherenceTrace tr;
    tr.method = Method::exact;
    tr.t.assign(times.begin(), times.end());
    tr.F = phase_sum(ens.weights, delta_e, times, policy.parallel);
    tr.meta = {{"n_trunc", static_cast<double>(ens.n_trunc)}, {"Z", ens.Z}};
    return tr;
}

double eta_cut(const spectrum::LinearizedCoeffs& coeffs, const RingParams& params) {
    if (!(coeffs.delta_e_prime > 0.0)) {
        throw DomainError("delta_e_prime must be positive");
    }
    const double N = params.N;
    return 4.0 * pi * pi / (N * N * params.beta() * coeffs.delta_e_prime);
}

int gamma_cutoff(double eta, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw DomainError("gamma_cutoff: threshold must lie in (0, 1)");
    }
    if (!(eta > 0.0)) {
        throw DomainError("gamma_cutoff: eta must be positive");
    }
    const double g = std::sqrt(std::log(1.0 / threshold) / eta);
    if (g > 1e6) {
        return std::numeric_limits<int>::max();
    }
    int gamma = static_cast<int>(std::ceil(g));
    while (gamma > 0 && std::exp(-eta * (gamma - 1.0) * (gamma - 1.0)) <= threshold) {
        --gamma;
    }
    while (std::exp(-eta * static_cast<double>(gamma) * gamma) > threshold) {
        ++gamma;
    }
    return gamma;
}

DecoherenceTrace decoherence_bessel(const spectrum::LinearizedCoeffs& coeffs, const RingParams& params,
                                    std::span<const double> times, int gamma_max, ExecPolicy policy) {
    check_times(times);
    const double eta = eta_cut(coeffs, params);
    const int cutoff = gamma_max < 0 ? gamma_cutoff(eta) : gamma_max;
    if (cutoff > 200) {
        throw DomainError("decoherence_bessel: gamma cutoff " + std::to_string(cutoff) +
                          " exceeds 200; the cosine approximation is outside its range, use the exact method");
    }
    const double w1 = 2.0 * params.base_frequency() * std::sin(pi / params.N);
    std::vector<double> damp(static_cast<std::size_t>(cutoff) + 1);
    for (int g = 0; g <= cutoff; ++g) {
        damp[g] = std::exp(-eta * static_cast<double>(g) * g);
    }
    DecoherenceTrace tr;
    tr.method = Method::bessel;
    tr.t.assign(times.begin(), times.end());
    tr.F.resize(times.size());
    const long count = static_cast<long>(times.size());
    auto eval = [&](long i) {
        const double z = 0.5 * coeffs.g * w1 * times[static_cast<std::size_t>(i)];
        const auto J = specfun::bessel_j_sequence(cutoff, z);
        // Terms gamma and -gamma coincide: i^-g J_-g = i^g J_g.
        CompensatedSum re;
        CompensatedSum im;
        re.add(J[0]);
        for (int g = 1; g <= cutoff; ++g) {
            const double v = 2.0 * J[g] * damp[g];
            switch (g % 4) {
            case 0:
                re.add(v);
                break;
            case 1:
                im.add(v);
                break;
            case 2:
                re.add(-v);
                break;
            default:
                im.add(-v);
                break;
            }
        }
        tr.F[static_cast<std::size_t>(i)] = std::hypot(re.value(), im.value());
    };
    if (policy.parallel) {
#pragma omp parallel for schedule(static)
        for (long i = 0; i < count; ++i) {
            eval(i);
        }
    } else {
        for (long i = 0; i < count; ++i) {
            eval(i);
        }
    }
    tr.meta = {{"eta", eta}, {"gamma_cutoff", static_cast<double>(cutoff)}};
    tr.notes.emplace_back("summation index of the Jacobi-Anger series read as gamma in the inner exponent");
    return tr;
}

double erfi_tau(const spectrum::LinearizedCoeffs& coeffs, const RingParams& params) {
    if (coeffs.delta_g == 0.0 || !std::isfinite(coeffs.delta_g)) {
        throw DomainError("decoherence_erfi: delta_g = 0, tau is undefined");
    }
    if (!(coeffs.delta_e_prime > 0.0)) {
        throw DomainError("delta_e_prime must be positive");
    }
    const double N = params.N;
    const double N4 = N * N * N * N;
    return std::sqrt(params.beta() * N4 * params.mass * coeffs.delta_e_prime /
                     (pi * pi * coeffs.delta_g * coeffs.delta_g * params.kappa));
}

DecoherenceTrace decoherence_erfi(const spectrum::LinearizedCoeffs& coeffs, const RingParams& params,
                                  std::span<const double> times) {
    check_times(times);
    const double tau = erfi_tau(coeffs, params);
    DecoherenceTrace tr;
    tr.method = Method::erfi;
    tr.t.assign(times.begin(), times.end());
    tr.F.reserve(times.size());
    for (double t : times) {
        tr.F.push_back(specfun::erfi_scaled_envelope(std::abs(t) / tau));
    }
    tr.meta = {{"tau_s", tau}};
    const double r = n_fwhm(params) / (params.N / 4.0);
    if (r >= 1.0) {
        tr.notes.emplace_back("r >= 1: several thin-spectrum periods contribute, the linear approximation is poor");
    }
    return tr;
}

double n_fwhm(const RingParams& params) {
    return std::sqrt(2.0 * params.mass * params.N * params.radius * params.radius /
                     (params.beta() * constants::hbar * constants::hbar));
}

RegimeDiagnostics regime(const RingParams& params, const spectrum::LinearizedCoeffs& coeffs) {
    RegimeDiagnostics d;
    d.n_fwhm = n_fwhm(params);
    d.r = d.n_fwhm / (params.N / 4.0);
    d.eta = eta_cut(coeffs, params);
    d.gamma_cutoff = -1;
    if (d.eta > 0.0) {
        const int g = gamma_cutoff(d.eta);
        if (g <= 200) {
            d.gamma_cutoff = g;
        }
    }
    d.tau = std::numeric_limits<double>::quiet_NaN();
    d.tau_spon = d.tau;
    if (coeffs.delta_g != 0.0) {
        d.tau = erfi_tau(coeffs, params);
        d.tau_spon = std::sqrt(2.0 * (pi - 2.0) / pi) * d.tau;
    }
    return d;
}

double first_decay_time(const DecoherenceTrace& trace, double threshold) {
    if (trace.t.empty() || trace.t.size() != trace.F.size()) {
        throw DomainError("first_decay_time: empty or malformed trace");
    }
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw DomainError("first_decay_time: threshold must lie in (0, 1)");
    }
    if (trace.F[0] < threshold) {
        return trace.t[0];
    }
    for (std::size_t i = 1; i < trace.F.size(); ++i) {
        if (trace.F[i] < threshold) {
            const double f0 = trace.F[i - 1];
            const double f1 = trace.F[i];
            return trace.t[i - 1] + (threshold - f0) * (trace.t[i] - trace.t[i - 1]) / (f1 - f0);
        }
    }
    return std::numeric_limits<double>::infinity();
}

} // namespace ringdec::decoherence
