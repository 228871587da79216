#pragma once

// Thin spectrum of the ring: per-mode periodic-oscillator levels under a
// twisted (Bloch) boundary condition, their assembly into total energies
// E(n, alpha), the linearized coefficients used by the closed-form decoherence
// approximations, and an independent finite-difference Bloch eigen-solver.

#include <functional>
#include <string>
#include <vector>

#include "ringdec/core_model.hpp"
#include "ringdec/specfun.hpp"

namespace ringdec::spectrum {

struct SolverConfig {
    double scan_step = 1e-3;       // nu step of the root scan
    double nu_tol = 1e-10;         // bisection width
    double lambda_min = 0.5;       // smallest accepted xi |l|
    double lambda_harmonic = 12.0; // at and above: |nu - alpha| is below the bisection tolerance
    int pole_refine_points = 10;
    long max_scan_steps = 20'000'000;
    int fd_grid = 4096;
    specfun::SeriesControl series{};

    void validate() const;
};

// Dimensionless eigenproblem of one relative mode.
struct ModeEigenProblem {
    double lambda = 0.0; // xi_k |l_k|
    double theta = 0.0;  // Bloch phase q_k l_k
    double omega = 0.0;  // rad / s
};

// Phase folded onto [0, pi]; the levels depend on theta only through
// cos^2(theta/2).
double fold_phase(double theta);

struct ParitySolutions {
    double fe, dfe; // even solution and d/ds at s = lambda/2
    double fo, dfo; // odd solution and d/ds at s = lambda/2
};

// Even/odd Kummer solutions of -u''/2 + s^2 u / 2 = (nu + 1/2) u, normalized
// to unit Wronskian, evaluated at the cell edge s = lambda / 2.
ParitySolutions parity_solutions(double nu, double lambda, const specfun::SeriesControl& ctrl = {});

// G(nu) = f_o f_e' cos^2(theta/2) + f_e f_o' sin^2(theta/2) at s = lambda/2.
double eigencondition(double nu, const ModeEigenProblem& prob, const specfun::SeriesControl& ctrl = {});

// F(lambda, nu) = f_o f_e' / (f_e f_o'); eigenlevels satisfy tan^2(theta/2) = -F.
double eigencondition_ratio(double nu, double lambda, const specfun::SeriesControl& ctrl = {});

enum class BracketKind { root, pole };

struct Bracket {
    double lo;
    double hi;
    BracketKind kind;
};

// Uniform scan of f over [lo, hi] with the given step. Every sign change is
// probed at `refine_points` interior points; it is a root candidate when the
// smallest interior |f| lies below the larger endpoint magnitude and a pole
// otherwise. Candidates are bisected to width `tol`; a candidate whose |f|
// grows past the original endpoint magnitudes while narrowing is a pole.
// Stops early once `max_roots` roots were found (0 = no limit).
std::vector<Bracket> scan_sign_changes(const std::function<double(double)>& f, double lo, double hi, double step,
                                       int refine_points, double tol, int max_roots = 0);

struct ModeLevels {
    std::vector<double> nu;        // nu_alpha, alpha = 0..alpha_max
    std::vector<double> residuals; // |G(nu_alpha)|
};

// Lowest alpha_max + 1 roots of the eigencondition. Throws ConvergenceError
// if fewer roots are found and DomainError for lambda below cfg.lambda_min.
ModeLevels solve_mode_levels(const ModeEigenProblem& prob, int alpha_max, const SolverConfig& cfg = {});

// Finite-difference diagonalization of (P + hbar q)^2 / 2m + m omega^2 X^2 / 2
// on one period with periodic boundary conditions; returns nu = eps/(hbar omega) - 1/2.
std::vector<double> fd_bloch_oracle(const ModeEigenProblem& prob, int alpha_max, int grid_points);

// Oracle record: extrapolated levels from grids M and 2M with the change
// between them as error bar.
struct FdReference {
    double lambda = 0.0;
    double theta = 0.0;
    int grid = 0;
    std::vector<double> nu;
    std::vector<double> richardson_err;
};

FdReference fd_bloch_reference(const ModeEigenProblem& prob, int alpha_max, int grid_points);

// Levels of mode k for momentum quantum number n. The mode sees the twist
// q_k(nbar) l_k with nbar the representative of n mod N in (-N/2, N/2].
ModeEigenProblem mode_problem(const ModeTable& table, int k, long long n);

// Modes that carry no momentum dependence: vanishing wave vector, degenerate
// period, or lambda so large that the levels are harmonic to double precision.
bool mode_is_harmonic(const ModeTable& table, int k, const SolverConfig& cfg);

struct ModeEnergy {
    double eps;   // J
    double delta; // nu_alpha - alpha
};

using LevelSolver = std::function<ModeLevels(const ModeEigenProblem&, int)>;

ModeEnergy mode_energy(const ModeTable& table, int k, long long n, int alpha, const SolverConfig& cfg,
                       const LevelSolver& solver);

struct AssemblyOptions {
    bool use_cache = true; // share level solves between equal folded phases
    bool parallel = true;  // OpenMP over independent solves
};

// Thin spectrum. Level data is held for one period of n (the spectrum is
// N-periodic and even in n); n_max sets the range of the materialized E table.
class ThinSpectrum {
public:
    const ModeTable& modes() const { return table_; }
    const RingParams& params() const { return table_.params; }
    int n_max() const { return n_max_; }
    int alpha_max() const { return alpha_max_; }

    // nu of mode k at momentum n and level alpha.
    double nu(int k, long long n, int alpha) const;
    double eps(int k, long long n, int alpha) const;
    double delta(int k, long long n, int alpha) const { return nu(k, n, alpha) - alpha; }

    // eps(n, alpha): mode 1 at level alpha, every other mode in its ground level.
    double thin(long long n, int alpha) const;
    // E(n, alpha) = n^2 hbar^2 / (2 m N R^2) + thin(n, alpha), n in [-n_max, n_max].
    double E(long long n, int alpha) const;
    // E(n, 0) - E(0, 0), accumulated from level differences for accuracy.
    double ground_excess(long long n) const;
    // Delta E(n) = eps_1(n, 1) - eps_1(n, 0).
    double delta_E(long long n) const;

    bool covers(long long n) const { return n >= -n_max_ && n <= n_max_; }

    // Same spectrum with a different table range; no new level solves.
    ThinSpectrum widened(int n_max) const;

    // Index of the folded momentum |nbar| in [0, N/2].
    static int fold_momentum(int N, long long n);

    // Number of distinct eigen-solves performed during assembly.
    long solves() const { return solves_; }

    friend ThinSpectrum assemble_thin_spectrum(const RingParams&, int, int, const SolverConfig&,
                                               const AssemblyOptions&);

private:
    void build_energy_table();
    void check_range(long long n) const;

    ModeTable table_;
    int n_max_ = 0;
    int alpha_max_ = 0;
    long solves_ = 0;
    // levels_[k-1][m][alpha], m = folded momentum index
    std::vector<std::vector<std::vector<double>>> levels_;
    std::vector<double> energy_; // (alpha_max+1) x (2 n_max + 1)
};

ThinSpectrum assemble_thin_spectrum(const RingParams& params, int n_max, int alpha_max,
                                    const SolverConfig& cfg = {}, const AssemblyOptions& opts = {});

struct LinearizedCoeffs {
    // g0[k-1][alpha], g1[k-1][alpha]; zero for modes without momentum dependence.
    std::vector<std::vector<double>> g0;
    std::vector<std::vector<double>> g1;
    std::vector<int> mu;          // expansion branch per mode
    double delta_e = 0.0;         // J, quadratic coefficient of sum_k delta_k(n,0) hbar omega_k
    double delta_e_prime = 0.0;   // J, delta_e + hbar^2 / (2 m N R^2)
    double delta_g = 0.0;         // g1(1,1) - g1(1,0)
    double g = 0.0;               // (Delta E(N/4) - Delta E(0)) / (hbar omega_1)
    double fit_residual = 0.0;    // max |fit - data| / data range
    bool quadratic_fit_poor = false;
    int fit_points = 0;
};

LinearizedCoeffs linearize(const ThinSpectrum& spec, const SolverConfig& cfg = {});

// Delta E at a real momentum value (used for n = N/4 when N is not a
// multiple of 4).
double delta_E_at(const ModeTable& table, double n, const SolverConfig& cfg = {});

} // namespace ringdec::spectrum
