// Writes finite-difference reference levels for the solver regression tests.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numbers>

#include "ringdec/spectrum.hpp"

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_golden <output.json>\n";
        return 2;
    }
    using std::numbers::pi;
    using ringdec::spectrum::fd_bloch_reference;
    constexpr int kGrid = 4096;
    constexpr int kAlphaMax = 3;

    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    auto record = [&](double lambda, double theta) {
        const auto ref = fd_bloch_reference({lambda, theta, 1.0}, kAlphaMax, kGrid);
        nlohmann::ordered_json r;
        r["lambda"] = ref.lambda;
        r["theta"] = ref.theta;
        r["grid"] = ref.grid;
        r["nu"] = ref.nu;
        r["richardson_err"] = ref.richardson_err;
        records.push_back(r);
        std::fprintf(stderr, "lambda=%g theta=%g nu0=%.10f\n", lambda, theta, ref.nu[0]);
    };
    for (int j = 0; j < 16; ++j) {
        record(5.0, j * pi / 8.0);
    }
    for (int l = 1; l <= 12; ++l) {
        record(static_cast<double>(l), 0.5 * pi);
    }
    std::ofstream out(argv[1]);
    out << records.dump(1) << "\n";
    return out ? 0 : 4;
}
