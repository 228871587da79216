#pragma once

// Ring of N harmonically coupled oscillators: physical constants, parameter
// validation, the Fourier transformation to relative coordinates, the mode
// frequencies and the wave vectors fixed by the twisted boundary condition.
//
// Mode indices are 1-based (k = 1..N-1) in every public accessor; the
// center-of-mass coordinate is never part of a mode table.

#include <Eigen/Dense>
#include <vector>

namespace ringdec {

namespace constants {
// CODATA 2018.
inline constexpr double hbar = 1.054571817e-34;    // J s
inline constexpr double k_B = 1.380649e-23;        // J / K
inline constexpr double m_p = 1.67262192369e-27;   // kg
} // namespace constants

struct RingParams {
    int N = 0;              // particle count, >= 3
    double mass = 0.0;      // kg
    double kappa = 0.0;     // N / m
    double radius = 0.0;    // m
    double temperature = 0; // K

    // Throws DomainError naming the offending field.
    void validate() const;

    double perimeter() const;
    // 1 / (k_B T); +inf at T = 0.
    double beta() const;
    // hbar^2 / (2 m N R^2), the center-of-mass kinetic energy per n^2.
    double kinetic_unit() const;
    // sqrt(kappa / m)
    double base_frequency() const;
};

// theta_n = 2 pi n / N, computed from n mod N so that theta_{n+N} == theta_n
// holds bit for bit. Result lies in [0, 2 pi).
double momentum_phase(int N, long long n);

// (N-1) x (N-1) Fourier transform to relative coordinates: row k holds
// sqrt(2/N) cos(2 pi k j / N) for k <= N/2 and sqrt(2/N) sin(2 pi k j / N)
// otherwise, columns j = 1..N-1.
Eigen::MatrixXd build_transform_matrix(const RingParams& params);

// Same rows over all N oscillator columns j = 1..N. These are the rows whose
// mutual orthogonality the coordinate change relies on.
Eigen::MatrixXd build_full_transform_rows(int N);

// omega_k = 2 sqrt(kappa/m) |sin(pi k / N)|, k = 1..N-1 (index k-1).
std::vector<double> mode_frequencies(const RingParams& params);

struct WaveVectorSolution {
    std::vector<double> q; // q_k, index k-1, 1/m
    double residual = 0.0; // max_j |L sum_k M_kj q_k + theta_n|
};

// Closed-form wave vectors q_k(n): q = sqrt(2) n / (sqrt(N) R) for
// k < N/2, q/2 at k = N/2 (even N), zero above. The closed form is checked
// against the boundary-condition system and a ConsistencyError is thrown if
// the residual exceeds 1e-9 max(|theta_n|, 1).
WaveVectorSolution wave_vectors(const RingParams& params, long long n);
WaveVectorSolution wave_vectors(const RingParams& params, const Eigen::MatrixXd& M, long long n);

// q_k per unit n (the closed form is linear in n).
std::vector<double> unit_wave_vectors(const RingParams& params);

struct RelativePeriod {
    double l = 0.0;          // L M_1^k, signed, m
    bool degenerate = false; // |l| < 1e-12 L
};

// l_k = L M_1^k taken from the first column of M.
std::vector<RelativePeriod> relative_periods(const RingParams& params, const Eigen::MatrixXd& M);

struct ModeTable {
    RingParams params;
    Eigen::MatrixXd M;
    std::vector<double> omega;
    std::vector<double> q_unit;
    std::vector<RelativePeriod> period;

    static ModeTable build(const RingParams& params);

    int modes() const { return params.N - 1; }
    double omega_of(int k) const { return omega.at(k - 1); }
    double q_of(int k, long long n) const { return q_unit.at(k - 1) * static_cast<double>(n); }
    const RelativePeriod& period_of(int k) const { return period.at(k - 1); }
    // True for k > N/2, where the closed-form wave vector vanishes for every n.
    bool momentum_free(int k) const { return 2 * k > params.N; }
};

} // namespace ringdec
