#include "ringdec/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ringdec/errors.hpp"

namespace ringdec {

using std::numbers::pi;

void RingParams::validate() const {
    if (N < 3) {
        throw DomainError("N: particle count must be >= 3");
    }
    if (!(mass > 0.0) || !std::isfinite(mass)) {
        throw DomainError("mass: must be positive");
    }
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw DomainError("kappa: must be positive");
    }
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw DomainError("radius: must be positive");
    }
    if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
        throw DomainError("temperature: must be >= 0");
    }
}

double RingParams::perimeter() const { return 2.0 * pi * radius; }

double RingParams::beta() const {
    if (temperature == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 1.0 / (constants::k_B * temperature);
}

double RingParams::kinetic_unit() const {
    return constants::hbar * constants::hbar / (2.0 * mass * N * radius * radius);
}

double RingParams::base_frequency() const { return std::sqrt(kappa / mass); }

double momentum_phase(int N, long long n) {
    long long r = n % N;
    if (r < 0) {
        r += N;
    }
    return 2.0 * pi * static_cast<double>(r) / N;
}

namespace {

double transform_entry(int N, int k, int j) {
    const double norm = std::sqrt(2.0 / N);
    const double arg = 2.0 * pi * static_cast<double>(k) * j / N;
    return 2 * k <= N ? norm * std::cos(arg) : norm * std::sin(arg);
}

} // namespace

Eigen::MatrixXd build_transform_matrix(const RingParams& params) {
    if (params.N < 3) {
        throw DomainError("N: particle count must be >= 3");
    }
    const int n = params.N - 1;
    Eigen::MatrixXd M(n, n);
    for (int k = 1; k <= n; ++k) {
        for (int j = 1; j <= n; ++j) {
            M(k - 1, j - 1) = transform_entry(params.N, k, j);
        }
    }
    return M;
}

Eigen::MatrixXd build_full_transform_rows(int N) {
    if (N < 3) {
        throw DomainError("N: particle count must be >= 3");
    }
    Eigen::MatrixXd M(N - 1, N);
    for (int k = 1; k < N; ++k) {
        for (int j = 1; j <= N; ++j) {
            M(k - 1, j - 1) = transform_entry(N, k, j);
        }
    }
    return M;
}

std::vector<double> mode_frequencies(const RingParams& params) {
    params.validate();
    const double w0 = 2.0 * params.base_frequency();
    std::vector<double> omega(static_cast<std::size_t>(params.N) - 1);
    for (int k = 1; k < params.N; ++k) {
        // sin(pi k / N) = sin(pi (N - k) / N); use the smaller index on both sides.
        omega[k - 1] = w0 * std::sin(pi * std::min(k, params.N - k) / params.N);
    }
    return omega;
}

std::vector<double> unit_wave_vectors(const RingParams& params) {
    params.validate();
    const int N = params.N;
    const double q = std::sqrt(2.0) / (std::sqrt(static_cast<double>(N)) * params.radius);
    std::vector<double> out(static_cast<std::size_t>(N) - 1, 0.0);
    for (int k = 1; 2 * k < N; ++k) {
        out[k - 1] = q;
    }
    if (N % 2 == 0) {
        out[N / 2 - 1] = 0.5 * q;
    }
    return out;
}

WaveVectorSolution wave_vectors(const RingParams& params, const Eigen::MatrixXd& M, long long n) {
    const std::vector<double> unit = unit_wave_vectors(params);
    WaveVectorSolution sol;
    sol.q.resize(unit.size());
    for (std::size_t i = 0; i < unit.size(); ++i) {
        sol.q[i] = unit[i] * static_cast<double>(n);
    }
    if (n == 0) {
        return sol;
    }
    // Shifting oscillator j by L moves the relative coordinates along column j
    // of M; each such shift must pick up the phase -theta_n.
    const double L = params.perimeter();
    const double theta = 2.0 * pi * static_cast<double>(n) / params.N;
    const Eigen::Map<const Eigen::VectorXd> qv(sol.q.data(), static_cast<Eigen::Index>(sol.q.size()));
    const Eigen::VectorXd lhs = L * (M.transpose() * qv);
    sol.residual = (lhs.array() + theta).abs().maxCoeff();
    if (!(sol.residual < 1e-9 * std::max(std::abs(theta), 1.0))) {
        std::ostringstream msg;
        msg << "wave_vectors: boundary-condition residual " << sol.residual << " for N=" << params.N
            << ", n=" << n << " (transform convention mismatch)";
        throw ConsistencyError(msg.str());
    }
    return sol;
}

WaveVectorSolution wave_vectors(const RingParams& params, long long n) {
    return wave_vectors(params, build_transform_matrix(params), n);
}

std::vector<RelativePeriod> relative_periods(const RingParams& params, const Eigen::MatrixXd& M) {
    const double L = params.perimeter();
    std::vector<RelativePeriod> out(static_cast<std::size_t>(M.rows()));
    for (Eigen::Index k = 0; k < M.rows(); ++k) {
        const double l = L * M(k, 0);
        out[k] = {l, std::abs(l) < 1e-12 * L};
    }
    return out;
}

ModeTable ModeTable::build(const RingParams& params) {
    params.validate();
    ModeTable t;
    t.params = params;
    t.M = build_transform_matrix(params);
    t.omega = mode_frequencies(params);
    t.q_unit = unit_wave_vectors(params);
    t.period = relative_periods(params, t.M);
    return t;
}

} // namespace ringdec
