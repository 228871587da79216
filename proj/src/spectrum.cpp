#include "ringdec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <exception>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "ringdec/errors.hpp"
#include "ringdec/summation.hpp"

namespace ringdec::spectrum {

using std::numbers::pi;

void SolverConfig::validate() const {
    if (!(scan_step > 0.0 && scan_step <= 0.1)) {
        throw DomainError("solver.scan_step: must lie in (0, 0.1]");
    }
    if (!(nu_tol > 0.0 && nu_tol <= 1e-6)) {
        throw DomainError("solver.nu_tol: must lie in (0, 1e-6]");
    }
    if (!(lambda_min > 0.0)) {
        throw DomainError("solver.lambda_min: must be positive");
    }
    if (!(lambda_harmonic > lambda_min)) {
        throw DomainError("solver.lambda_harmonic: must exceed lambda_min");
    }
    if (pole_refine_points < 1) {
        throw DomainError("solver.pole_refine_points: must be >= 1");
    }
    if (max_scan_steps < 1000) {
        throw DomainError("solver.max_scan_steps: must be >= 1000");
    }
    if (fd_grid < 512) {
        throw DomainError("solver.fd_grid: must be >= 512");
    }
    series.validate();
}

double fold_phase(double theta) { return std::abs(std::remainder(theta, 2.0 * pi)); }

ParitySolutions parity_solutions(double nu, double lambda, const specfun::SeriesControl& ctrl) {
    const double s = 0.5 * lambda;
    const double z = s * s;
    const double damp = std::exp(-0.5 * z);
    const auto me = specfun::kummer_1f1_with_dz(-0.5 * nu, 0.5, z, ctrl);
    const auto mo = specfun::kummer_1f1_with_dz(0.5 * (1.0 - nu), 1.5, z, ctrl);
    ParitySolutions p{};
    p.fe = damp * me.value;
    p.dfe = damp * s * (2.0 * me.derivative - me.value);
    p.fo = damp * s * mo.value;
    p.dfo = damp * ((1.0 - z) * mo.value + 2.0 * z * mo.derivative);
    return p;
}

double eigencondition(double nu, const ModeEigenProblem& prob, const specfun::SeriesControl& ctrl) {
    if (!(prob.lambda > 0.0)) {
        throw DomainError("eigencondition: lambda must be positive");
    }
    const auto p = parity_solutions(nu, prob.lambda, ctrl);
    const double c = std::cos(0.5 * prob.theta);
    const double s = std::sin(0.5 * prob.theta);
    return p.fo * p.dfe * c * c + p.fe * p.dfo * s * s;
}

double eigencondition_ratio(double nu, double lambda, const specfun::SeriesControl& ctrl) {
    const auto p = parity_solutions(nu, lambda, ctrl);
    return (p.fo * p.dfe) / (p.fe * p.dfo);
}

namespace {

bool opposite(double a, double b) { return (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0); }

// Bisection of a sign-change bracket. Returns false when |f| at the narrowed
// bracket ends exceeds `bound`, the signature of a pole.
bool bisect(const std::function<double(double)>& f, double& lo, double& hi, double flo, double tol, double bound) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        const double fm = f(mid);
        if (fm == 0.0) {
            lo = hi = mid;
            return true;
        }
        if (opposite(flo, fm)) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return std::abs(flo) <= bound;
}

} // namespace

std::vector<Bracket> scan_sign_changes(const std::function<double(double)>& f, double lo, double hi, double step,
                                       int refine_points, double tol, int max_roots) {
    if (!(hi > lo) || !(step > 0.0) || !(tol > 0.0) || refine_points < 1) {
        throw DomainError("scan_sign_changes: need lo < hi, step > 0, tol > 0, refine_points >= 1");
    }
    std::vector<Bracket> out;
    int roots = 0;
    const long steps = static_cast<long>(std::ceil((hi - lo) / step));
    double xa = lo;
    double fa = f(xa);
    for (long i = 1; i <= steps; ++i) {
        const double xb = std::min(hi, lo + static_cast<double>(i) * step);
        const double fb = f(xb);
        if (fb == 0.0) {
            out.push_back({xb, xb, BracketKind::root});
            ++roots;
        } else if (opposite(fa, fb)) {
            const double edge = std::max(std::abs(fa), std::abs(fb));
            double inner = std::numeric_limits<double>::infinity();
            for (int j = 1; j <= refine_points; ++j) {
                const double x = xa + (xb - xa) * j / (refine_points + 1);
                inner = std::min(inner, std::abs(f(x)));
            }
            Bracket b{xa, xb, BracketKind::pole};
            if (inner < edge && bisect(f, b.lo, b.hi, fa, tol, edge)) {
                b.kind = BracketKind::root;
                ++roots;
            } else {
                b = {xa, xb, BracketKind::pole};
            }
            out.push_back(b);
        }
        if (max_roots > 0 && roots >= max_roots) {
            break;
        }
        xa = xb;
        fa = fb;
    }
    return out;
}

namespace {

// Smallest free-particle Bloch energy at the given rank, in units of hbar omega:
// (theta + 2 pi j)^2 / (2 lambda^2) over integers j, theta in [0, pi].
double free_level(double theta, double lambda, int rank) {
    // Ordered momenta: theta, 2pi - theta, 2pi + theta, 4pi - theta, ...
    const int j = (rank + 1) / 2;
    const double p = rank % 2 == 0 ? theta + 2.0 * pi * j : 2.0 * pi * j - theta;
    return p * p / (2.0 * lambda * lambda);
}

std::string describe(const ModeEigenProblem& prob) {
    std::ostringstream os;
    os.precision(17);
    os << "lambda=" << prob.lambda << ", theta=" << prob.theta;
    return os.str();
}

} // namespace

ModeLevels solve_mode_levels(const ModeEigenProblem& prob, int alpha_max, const SolverConfig& cfg) {
    if (alpha_max < 1) {
        throw DomainError("solve_mode_levels: alpha_max must be >= 1");
    }
    if (!std::isfinite(prob.lambda) || !std::isfinite(prob.theta)) {
        throw DomainError("solve_mode_levels: non-finite input (" + describe(prob) + ")");
    }
    if (prob.lambda < cfg.lambda_min) {
        throw DomainError("solve_mode_levels: lambda below lambda_min (" + describe(prob) + ")");
    }
    const double lambda = prob.lambda;
    const double theta = fold_phase(prob.theta);
    const int wanted = alpha_max + 1;

    // Min-max against the free particle (0 <= V <= lambda^2/8) puts level a in
    // [free_level(a), free_level(a) + lambda^2/8] - 1/2. Only the union of
    // these windows is scanned.
    const double width = lambda * lambda / 8.0;
    std::vector<std::pair<double, double>> windows;
    for (int a = 0; a <= alpha_max; ++a) {
        const double wlo = free_level(theta, lambda, a) * (1.0 - 1e-12) - 0.5;
        const double whi = free_level(theta, lambda, a) + width - 0.5 + 0.01;
        if (!windows.empty() && wlo <= windows.back().second) {
            windows.back().second = std::max(windows.back().second, whi);
        } else {
            windows.emplace_back(wlo, whi);
        }
    }
    // Gaps between bands shrink like lambda^2; keep several steps per gap.
    const double step =
        std::min(cfg.scan_step, lambda * lambda / (8.0 * pi * pi * (alpha_max + 2.0) * (alpha_max + 2.0)));
    long budget = cfg.max_scan_steps;

    std::vector<double> roots;
    auto collect = [&](const std::function<double(double)>& f) {
        int found = 0;
        for (const auto& [wlo, whi0] : windows) {
            const double whi = std::min(whi0, wlo + step * static_cast<double>(budget));
            if (!(whi > wlo)) {
                break;
            }
            budget -= static_cast<long>(std::ceil((whi - wlo) / step));
            for (const auto& b :
                 scan_sign_changes(f, wlo, whi, step, cfg.pole_refine_points, cfg.nu_tol, wanted - found)) {
                if (b.kind == BracketKind::root) {
                    roots.push_back(0.5 * (b.lo + b.hi));
                    ++found;
                }
            }
            if (found >= wanted) {
                break;
            }
        }
    };
    // At theta = 0 and pi the condition factorizes; the two factors have
    // well separated roots even where the band gap is narrower than a step.
    if (theta == 0.0) {
        collect([&](double nu) { return parity_solutions(nu, lambda, cfg.series).fo; });
        collect([&](double nu) { return parity_solutions(nu, lambda, cfg.series).dfe; });
    } else if (theta == pi) {
        collect([&](double nu) { return parity_solutions(nu, lambda, cfg.series).fe; });
        collect([&](double nu) { return parity_solutions(nu, lambda, cfg.series).dfo; });
    } else {
        const ModeEigenProblem folded{lambda, theta, prob.omega};
        collect([&](double nu) { return eigencondition(nu, folded, cfg.series); });
    }
    std::sort(roots.begin(), roots.end());

    if (static_cast<int>(roots.size()) < wanted) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "solve_mode_levels: found " << roots.size() << " of " << wanted << " levels in [" << windows.front().first
            << ", " << windows.back().second << "] (" << describe(prob) << "); roots:";
        for (double r : roots) {
            msg << ' ' << r;
        }
        throw ConvergenceError(msg.str(), roots.empty() ? std::numeric_limits<double>::quiet_NaN() : roots.back(),
                               cfg.nu_tol, static_cast<int>(roots.size()));
    }
    roots.resize(static_cast<std::size_t>(wanted));
    for (std::size_t i = 1; i < roots.size(); ++i) {
        if (!(roots[i] > roots[i - 1])) {
            throw ConsistencyError("solve_mode_levels: coincident levels (" + describe(prob) + ")");
        }
    }

    ModeLevels out;
    out.nu = roots;
    out.residuals.reserve(roots.size());
    const ModeEigenProblem folded{lambda, theta, prob.omega};
    for (double nu : roots) {
        out.residuals.push_back(std::abs(eigencondition(nu, folded, cfg.series)));
    }
    return out;
}

namespace {

// Position of grid site j after interleaving 0, M-1, 1, M-2, ...; every ring
// neighbour pair ends up at most two rows apart.
int interleaved(int j, int M) { return 2 * j < M ? 2 * j : 2 * (M - 1 - j) + 1; }

} // namespace

std::vector<double> fd_bloch_oracle(const ModeEigenProblem& prob, int alpha_max, int grid_points) {
    if (grid_points < 512) {
        throw DomainError("fd_bloch_oracle: grid_points must be >= 512");
    }
    if (alpha_max < 0 || alpha_max >= grid_points) {
        throw DomainError("fd_bloch_oracle: alpha_max out of range");
    }
    if (!(prob.lambda > 0.0) || !std::isfinite(prob.lambda) || !std::isfinite(prob.theta)) {
        throw DomainError("fd_bloch_oracle: need finite lambda > 0 and finite theta");
    }
    const int M = grid_points;
    const double h = 0.5 * prob.lambda;
    const double dx = prob.lambda / M;
    const double kin = 1.0 / (dx * dx);
    const std::complex<double> hop = -0.5 * kin * std::polar(1.0, prob.theta / M);

    constexpr int kd = 2;
    constexpr int ldab = kd + 1;
    std::vector<std::complex<double>> ab(static_cast<std::size_t>(ldab) * M, 0.0);
    // Upper band storage, column-major: A(i, j) -> ab[kd + i - j + j * ldab], i <= j.
    auto put = [&](int row, int col, std::complex<double> v) {
        int i = interleaved(row, M);
        int j = interleaved(col, M);
        if (i > j) {
            std::swap(i, j);
            v = std::conj(v);
        }
        if (j - i > kd) {
            throw ConsistencyError("fd_bloch_oracle: band reordering failed");
        }
        ab[static_cast<std::size_t>(kd + i - j + j * ldab)] += v;
    };
    for (int j = 0; j < M; ++j) {
        const double s = -h + (j + 0.5) * dx;
        put(j, j, kin + 0.5 * s * s);
        put(j, (j + 1) % M, hop); // <j| H |j+1>
    }
    for (int j = 0; j < M; ++j) {
        if (ab[static_cast<std::size_t>(kd + j * ldab)].imag() != 0.0) {
            throw ConsistencyError("fd_bloch_oracle: non-Hermitian assembly");
        }
    }

    lapack_int found = 0;
    std::vector<double> w(static_cast<std::size_t>(M));
    std::vector<lapack_int> ifail(static_cast<std::size_t>(M));
    std::complex<double> q_dummy{};
    std::complex<double> z_dummy{};
    const double abstol = 2.0 * LAPACKE_dlamch('S');
    const lapack_int info =
        LAPACKE_zhbevx(LAPACK_COL_MAJOR, 'N', 'I', 'U', M, kd, ab.data(), ldab, &q_dummy, 1, 0.0, 0.0, 1,
                       alpha_max + 1, abstol, &found, w.data(), &z_dummy, 1, ifail.data());
    if (info != 0 || found != alpha_max + 1) {
        throw ConvergenceError("fd_bloch_oracle: zhbevx failed (info=" + std::to_string(info) + ")",
                               std::numeric_limits<double>::quiet_NaN(), 0.0, static_cast<int>(found));
    }
    std::vector<double> nu(static_cast<std::size_t>(alpha_max) + 1);
    for (int a = 0; a <= alpha_max; ++a) {
        nu[a] = w[a] - 0.5;
    }
    return nu;
}

FdReference fd_bloch_reference(const ModeEigenProblem& prob, int alpha_max, int grid_points) {
    const auto coarse = fd_bloch_oracle(prob, alpha_max, grid_points);
    const auto fine = fd_bloch_oracle(prob, alpha_max, 2 * grid_points);
    FdReference ref;
    ref.lambda = prob.lambda;
    ref.theta = prob.theta;
    ref.grid = grid_points;
    for (std::size_t a = 0; a < coarse.size(); ++a) {
        ref.nu.push_back(fine[a] + (fine[a] - coarse[a]) / 3.0);
        ref.richardson_err.push_back(std::abs(fine[a] - coarse[a]));
    }
    return ref;
}

int ThinSpectrum::fold_momentum(int N, long long n) {
    long long r = n % N;
    if (r < 0) {
        r += N;
    }
    if (2 * r > N) {
        r = N - r;
    }
    return static_cast<int>(r);
}

ModeEigenProblem mode_problem(const ModeTable& table, int k, long long n) {
    const int m = ThinSpectrum::fold_momentum(table.params.N, n);
    const double omega = table.omega_of(k);
    const double l = table.period_of(k).l;
    const double xi = std::sqrt(table.params.mass * omega / constants::hbar);
    return {xi * std::abs(l), table.q_unit.at(k - 1) * m * l, omega};
}

bool mode_is_harmonic(const ModeTable& table, int k, const SolverConfig& cfg) {
    if (table.momentum_free(k) || table.period_of(k).degenerate) {
        return true;
    }
    return mode_problem(table, k, 0).lambda >= cfg.lambda_harmonic;
}

ModeEnergy mode_energy(const ModeTable& table, int k, long long n, int alpha, const SolverConfig& cfg,
                       const LevelSolver& solver) {
    if (alpha < 0) {
        throw DomainError("mode_energy: alpha must be >= 0");
    }
    double nu = alpha;
    if (!mode_is_harmonic(table, k, cfg)) {
        nu = solver(mode_problem(table, k, n), std::max(alpha, 1)).nu.at(alpha);
    }
    return {(nu + 0.5) * constants::hbar * table.omega_of(k), nu - alpha};
}

void ThinSpectrum::check_range(long long n) const {
    if (!covers(n)) {
        throw CoverageError("thin spectrum holds n in [-" + std::to_string(n_max_) + ", " + std::to_string(n_max_) +
                            "], requested n=" + std::to_string(n));
    }
}

double ThinSpectrum::nu(int k, long long n, int alpha) const {
    if (k < 1 || k > table_.modes() || alpha < 0 || alpha > alpha_max_) {
        throw DomainError("ThinSpectrum::nu: mode or level index out of range");
    }
    return levels_[k - 1][fold_momentum(table_.params.N, n)][alpha];
}

double ThinSpectrum::eps(int k, long long n, int alpha) const {
    return (nu(k, n, alpha) + 0.5) * constants::hbar * table_.omega_of(k);
}

double ThinSpectrum::thin(long long n, int alpha) const {
    CompensatedSum sum;
    sum.add(eps(1, n, alpha));
    for (int k = 2; k <= table_.modes(); ++k) {
        sum.add(eps(k, n, 0));
    }
    return sum.value();
}

double ThinSpectrum::E(long long n, int alpha) const {
    check_range(n);
    if (alpha < 0 || alpha > alpha_max_) {
        throw DomainError("ThinSpectrum::E: level index out of range");
    }
    return energy_[static_cast<std::size_t>(alpha) * (2 * n_max_ + 1) + static_cast<std::size_t>(n + n_max_)];
}

double ThinSpectrum::ground_excess(long long n) const {
    const int m = fold_momentum(table_.params.N, n);
    CompensatedSum sum;
    sum.add(table_.params.kinetic_unit() * static_cast<double>(n) * static_cast<double>(n));
    for (int k = 1; k <= table_.modes(); ++k) {
        const double d = levels_[k - 1][m][0] - levels_[k - 1][0][0];
        sum.add(d * constants::hbar * table_.omega_of(k));
    }
    return sum.value();
}

double ThinSpectrum::delta_E(long long n) const {
    const auto& lv = levels_[0][fold_momentum(table_.params.N, n)];
    return (lv[1] - lv[0]) * constants::hbar * table_.omega_of(1);
}

void ThinSpectrum::build_energy_table() {
    const int N = table_.params.N;
    const int half = N / 2;
    const std::size_t width = 2 * static_cast<std::size_t>(n_max_) + 1;
    std::vector<std::vector<double>> thin_m(static_cast<std::size_t>(alpha_max_) + 1,
                                            std::vector<double>(static_cast<std::size_t>(half) + 1));
    for (int a = 0; a <= alpha_max_; ++a) {
        for (int m = 0; m <= half; ++m) {
            thin_m[a][m] = thin(m, a);
        }
    }
    energy_.assign((static_cast<std::size_t>(alpha_max_) + 1) * width, 0.0);
    const double unit = table_.params.kinetic_unit();
    for (int a = 0; a <= alpha_max_; ++a) {
        for (long long n = -n_max_; n <= n_max_; ++n) {
            const double nd = static_cast<double>(n);
            energy_[a * width + static_cast<std::size_t>(n + n_max_)] =
                unit * nd * nd + thin_m[a][fold_momentum(N, n)];
        }
    }
}

ThinSpectrum ThinSpectrum::widened(int n_max) const {
    if (n_max < 1) {
        throw DomainError("ThinSpectrum::widened: n_max must be >= 1");
    }
    ThinSpectrum out = *this;
    out.n_max_ = n_max;
    out.build_energy_table();
    return out;
}

ThinSpectrum assemble_thin_spectrum(const RingParams& params, int n_max, int alpha_max, const SolverConfig& cfg,
                                    const AssemblyOptions& opts) {
    cfg.validate();
    if (n_max < 1) {
        throw DomainError("n_max: must be >= 1");
    }
    if (alpha_max < 1) {
        throw DomainError("alpha_max: must be >= 1");
    }
    ThinSpectrum spec;
    spec.table_ = ModeTable::build(params);
    spec.n_max_ = n_max;
    spec.alpha_max_ = alpha_max;
    const int N = params.N;
    const int half = N / 2;
    const int modes = spec.table_.modes();

    spec.levels_.assign(static_cast<std::size_t>(modes),
                        std::vector<std::vector<double>>(static_cast<std::size_t>(half) + 1));

    struct Task {
        int k;
        ModeEigenProblem prob;
    };
    std::vector<Task> tasks;
    // slot[k-1][m] -> index into tasks; -1 for harmonic modes
    std::vector<std::vector<long>> slot(static_cast<std::size_t>(modes),
                                        std::vector<long>(static_cast<std::size_t>(half) + 1, -1));
    for (int k = 1; k <= modes; ++k) {
        if (mode_is_harmonic(spec.table_, k, cfg)) {
            std::vector<double> harmonic(static_cast<std::size_t>(alpha_max) + 1);
            for (int a = 0; a <= alpha_max; ++a) {
                harmonic[a] = a;
            }
            for (int m = 0; m <= half; ++m) {
                spec.levels_[k - 1][m] = harmonic;
            }
            continue;
        }
        std::map<double, long> seen;
        for (int m = 0; m <= half; ++m) {
            ModeEigenProblem prob = mode_problem(spec.table_, k, m);
            prob.theta = fold_phase(prob.theta);
            if (opts.use_cache) {
                const auto it = seen.find(prob.theta);
                if (it != seen.end()) {
                    slot[k - 1][m] = it->second;
                    continue;
                }
                seen.emplace(prob.theta, static_cast<long>(tasks.size()));
            }
            slot[k - 1][m] = static_cast<long>(tasks.size());
            tasks.push_back({k, prob});
        }
    }

    std::vector<ModeLevels> results(tasks.size());
    std::exception_ptr failure;
    auto run = [&](std::size_t i) {
        try {
            results[i] = solve_mode_levels(tasks[i].prob, alpha_max, cfg);
        } catch (const Error& e) {
            std::ostringstream msg;
            msg << "mode k=" << tasks[i].k << ": " << e.what();
            throw ConvergenceError(msg.str(), std::numeric_limits<double>::quiet_NaN(), cfg.nu_tol, 0);
        }
    };
    const long count = static_cast<long>(tasks.size());
    if (opts.parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (long i = 0; i < count; ++i) {
            try {
                run(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical(ringdec_assembly_failure)
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    } else {
        for (long i = 0; i < count; ++i) {
            try {
                run(static_cast<std::size_t>(i));
            } catch (...) {
                failure = std::current_exception();
                break;
            }
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    spec.solves_ = count;

    for (int k = 1; k <= modes; ++k) {
        for (int m = 0; m <= half; ++m) {
            const long s = slot[k - 1][m];
            if (s >= 0) {
                spec.levels_[k - 1][m] = results[static_cast<std::size_t>(s)].nu;
            }
        }
    }
    spec.build_energy_table();
    return spec;
}

double delta_E_at(const ModeTable& table, double n, const SolverConfig& cfg) {
    const double omega = table.omega_of(1);
    if (mode_is_harmonic(table, 1, cfg)) {
        return constants::hbar * omega;
    }
    ModeEigenProblem prob = mode_problem(table, 1, 0);
    prob.theta = table.q_unit.at(0) * n * table.period_of(1).l;
    const auto lv = solve_mode_levels(prob, 1, cfg);
    return (lv.nu[1] - lv.nu[0]) * constants::hbar * omega;
}

LinearizedCoeffs linearize(const ThinSpectrum& spec, const SolverConfig& cfg) {
    const ModeTable& table = spec.modes();
    const RingParams& params = table.params;
    const int N = params.N;
    if (spec.n_max() < N / 2) {
        throw DomainError("linearize: spectrum must hold n_max >= N/2");
    }
    const int modes = table.modes();
    const int amax = spec.alpha_max();
    LinearizedCoeffs c;
    c.g0.assign(static_cast<std::size_t>(modes), std::vector<double>(static_cast<std::size_t>(amax) + 1, 0.0));
    c.g1 = c.g0;
    c.mu.assign(static_cast<std::size_t>(modes), 0);

    const long long n_ref = std::max(1, N / 8);
    const double sqrt2_over_sqrtN = std::sqrt(2.0 / N);
    for (int k = 1; k <= modes; ++k) {
        if (mode_is_harmonic(table, k, cfg)) {
            continue;
        }
        const ModeEigenProblem base = mode_problem(table, k, 0);
        const double theta_ref = table.q_unit.at(k - 1) * static_cast<double>(n_ref) * table.period_of(k).l;
        const int mu = static_cast<int>(std::lround(theta_ref / pi - 0.5));
        c.mu[k - 1] = mu;
        const double sign = (mu % 2 == 0) ? 1.0 : -1.0;
        const auto quarter = solve_mode_levels({base.lambda, 0.5 * pi, base.omega}, amax, cfg);
        for (int a = 0; a <= amax; ++a) {
            const double ap = quarter.nu[a];
            const double h = 1e-6;
            const double G = (eigencondition_ratio(ap + h, base.lambda, cfg.series) -
                              eigencondition_ratio(ap - h, base.lambda, cfg.series)) /
                             (2.0 * h);
            const double F = eigencondition_ratio(a, base.lambda, cfg.series);
            c.g0[k - 1][a] = -(1.0 + F + sign * (1.0 + 2.0 * mu) * pi) / G;
            c.g1[k - 1][a] = sign * 2.0 * pi * table.M(k - 1, 0) / G * sqrt2_over_sqrtN;
        }
    }

    // Least squares of y(n) = sum_k delta_k(n,0) hbar omega_k against c0 + delta_e n^2.
    const int top = std::max(1, N / 8);
    std::vector<double> x2;
    std::vector<double> y;
    for (int n = 0; n <= top; ++n) {
        CompensatedSum s;
        for (int k = 1; k <= modes; ++k) {
            s.add(spec.delta(k, n, 0) * constants::hbar * table.omega_of(k));
        }
        x2.push_back(static_cast<double>(n) * n);
        y.push_back(s.value());
    }
    const double cnt = static_cast<double>(y.size());
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        sx += x2[i];
        sy += y[i];
    }
    const double mx = sx / cnt;
    const double my = sy / cnt;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        sxx += (x2[i] - mx) * (x2[i] - mx);
        sxy += (x2[i] - mx) * (y[i] - my);
    }
    c.delta_e = sxy / sxx;
    const double c0 = my - c.delta_e * mx;
    const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
    const double range = *ymax - *ymin;
    double worst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        worst = std::max(worst, std::abs(c0 + c.delta_e * x2[i] - y[i]));
    }
    c.fit_residual = range > 0.0 ? worst / range : 0.0;
    c.quadratic_fit_poor = c.fit_residual > 0.2;
    c.fit_points = static_cast<int>(y.size());

    c.delta_e_prime = c.delta_e + params.kinetic_unit();
    c.delta_g = c.g1[0][1] - c.g1[0][0];
    const double dE_quarter = (N % 4 == 0) ? spec.delta_E(N / 4) : delta_E_at(table, N / 4.0, cfg);
    c.g = (dE_quarter - spec.delta_E(0)) / (constants::hbar * table.omega_of(1));
    return c;
}

} // namespace ringdec::spectrum
