#pragma once

// Command-line front end: JSON run configuration, the spectrum / decohere /
// sweep / figure scenarios and their CSV or JSON output files.

#include <optional>
#include <string>
#include <vector>

#include "ringdec/decoherence.hpp"
#include "ringdec/errors.hpp"
#include "ringdec/spectrum.hpp"

namespace ringdec::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitIo = 4;

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

struct TimeSpec {
    bool automatic = true;
    double t_max = 0.0; // s
    int points = 2000;
};

struct OutputSpec {
    std::string dir = "out";
    std::string format = "csv"; // csv | json
};

struct SweepSpec {
    std::string axis; // N, T, kappa, R, m, fixed-density-N
    std::vector<double> values;
};

struct RunConfig {
    RingParams params;
    int n_max = 0; // 0 selects N
    int alpha_max = 1;
    std::vector<decoherence::Method> methods{decoherence::Method::exact};
    TimeSpec times;
    OutputSpec output;
    spectrum::SolverConfig solver;
    std::optional<SweepSpec> sweep;
};

// Throws ConfigError with the offending field path.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// Parameters of one sweep point; fixed-density-N rescales R with N.
RunConfig sweep_point(const RunConfig& base, double value);

// Shortest round-trip decimal form.
std::string format_number(double x);

struct DecohereResult {
    spectrum::LinearizedCoeffs coeffs;
    decoherence::RegimeDiagnostics diag;
    std::vector<decoherence::DecoherenceTrace> traces;
    long long n_trunc = 0;
    double first_decay_time = 0.0;
    std::vector<std::string> notes;
};

DecohereResult compute_decohere(const RunConfig& cfg);

// Scenarios; each writes into cfg.output.dir and returns the written paths.
std::vector<std::string> cmd_spectrum(const RunConfig& cfg);
std::vector<std::string> cmd_decohere(const RunConfig& cfg);
std::vector<std::string> cmd_sweep(const RunConfig& cfg, int jobs);

// Named parameter bundles: fig3, fig4a, fig4b, fig5a..fig5f, a1.
std::vector<std::string> figure_presets();
std::vector<std::string> cmd_figure(const std::string& preset, const std::string& out_dir, int jobs);

int run(int argc, char** argv);

} // namespace ringdec::cli
