#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ringdec/core_model.hpp"
#include "ringdec/errors.hpp"

using namespace ringdec;
using std::numbers::pi;

namespace {

RingParams fig3() { return {80, 40.0 * constants::m_p, 1e-13, 0.5e-6, 1e-7}; }

RingParams unit_ring(int N) { return {N, 1.0, 1.0, 1.0, 0.0}; }

} // namespace

TEST_SUITE("core_model") {

TEST_CASE("parameter validation") {
    CHECK_NOTHROW(fig3().validate());
    RingParams p = fig3();
    p.N = 2;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = fig3();
    p.kappa = -1.0;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("kappa"), DomainError);
    p = fig3();
    p.temperature = -1e-9;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = fig3();
    p.temperature = 0.0;
    CHECK_NOTHROW(p.validate());
    CHECK(std::isinf(p.beta()));
    CHECK(fig3().perimeter() == doctest::Approx(2 * pi * 0.5e-6));
}

TEST_CASE("constants") {
    CHECK(constants::hbar == 1.054571817e-34);
    CHECK(constants::k_B == 1.380649e-23);
    CHECK(constants::m_p == 1.67262192369e-27);
}

TEST_CASE("full transform rows are orthogonal") {
    // Every row has norm 1 except the alternating row k = N/2 of even N,
    // whose sqrt(2/N) prefactor gives norm^2 = 2.
    for (int N = 3; N <= 200; ++N) {
        const Eigen::MatrixXd F = build_full_transform_rows(N);
        Eigen::MatrixXd expect = Eigen::MatrixXd::Identity(N - 1, N - 1);
        if (N % 2 == 0) {
            expect(N / 2 - 1, N / 2 - 1) = 2.0;
        }
        const double err = (F * F.transpose() - expect).cwiseAbs().maxCoeff();
        CHECK_MESSAGE(err < 1e-12, "N=" << N);
    }
}

TEST_CASE("truncated transform defect is the dropped column") {
    // Rows over columns 1..N-1 miss column N: M M^T = I - r r^T.
    for (int N : {3, 4, 7, 80}) {
        const Eigen::MatrixXd M = build_transform_matrix(unit_ring(N));
        const Eigen::VectorXd r = build_full_transform_rows(N).col(N - 1);
        Eigen::MatrixXd expect = Eigen::MatrixXd::Identity(N - 1, N - 1) - r * r.transpose();
        if (N % 2 == 0) {
            expect(N / 2 - 1, N / 2 - 1) += 1.0;
        }
        CHECK((M * M.transpose() - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("transform entries") {
    const Eigen::MatrixXd M3 = build_transform_matrix(unit_ring(3));
    CHECK(M3.rows() == 2);
    CHECK(M3.cols() == 2);
    const Eigen::MatrixXd M4 = build_transform_matrix(unit_ring(4));
    CHECK(std::abs(M4(0, 0)) < 1e-16);
    // Brute-force row orthogonality of the full N=80 rows.
    const Eigen::MatrixXd F = build_full_transform_rows(80);
    double worst = 0.0;
    for (int a = 0; a < 79; ++a) {
        for (int b = a + 1; b < 79; ++b) {
            double dot = 0.0;
            for (int j = 0; j < 80; ++j) {
                dot += F(a, j) * F(b, j);
            }
            worst = std::max(worst, std::abs(dot));
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("mode frequencies") {
    const RingParams p = fig3();
    const auto w = mode_frequencies(p);
    for (int k = 1; k < p.N; ++k) {
        CHECK(w[k - 1] == w[p.N - k - 1]);
    }
    const double w0 = std::sqrt(1e-13 / (40.0 * constants::m_p));
    CHECK(w[39] == doctest::Approx(2.0 * w0).epsilon(1e-14));
    CHECK(w[39] == doctest::Approx(2.445e6).epsilon(1e-3));
    CHECK(w[0] == doctest::Approx(9.60e4).epsilon(1e-3));
}

TEST_CASE("wave vectors closed form") {
    const auto z = wave_vectors(fig3(), 0);
    for (double q : z.q) {
        CHECK(q == 0.0);
    }
    const auto q5 = wave_vectors(unit_ring(5), 1);
    CHECK(q5.q[0] == doctest::Approx(std::sqrt(2.0 / 5.0)));
    CHECK(q5.q[1] == doctest::Approx(0.6325).epsilon(1e-4));
    CHECK(q5.q[2] == 0.0);
    CHECK(q5.q[3] == 0.0);
    const auto q4 = wave_vectors(unit_ring(4), 1);
    CHECK(q4.q[1] == doctest::Approx(std::sqrt(2.0) / 4.0));
    CHECK(q4.q[1] == doctest::Approx(0.3536).epsilon(1e-4));
}

TEST_CASE("wave vectors solve the boundary system") {
    for (int N = 3; N <= 64; ++N) {
        const RingParams p = unit_ring(N);
        const Eigen::MatrixXd M = build_transform_matrix(p);
        for (long long n = -2 * N; n <= 2 * N; ++n) {
            const auto sol = wave_vectors(p, M, n);
            const double theta = 2.0 * pi * n / N;
            CHECK(sol.residual < 1e-9 * std::max(std::abs(theta), 1.0));
        }
    }
}

TEST_CASE("momentum phase periodicity") {
    for (int N : {3, 80, 641}) {
        for (long long n = -3 * N; n <= 3 * N; n += 7) {
            CHECK(momentum_phase(N, n + N) == momentum_phase(N, n));
            CHECK(momentum_phase(N, n) >= 0.0);
            CHECK(momentum_phase(N, n) < 2 * pi);
        }
    }
    // q is linear in n, not periodic.
    const RingParams p = unit_ring(7);
    CHECK(wave_vectors(p, 8).q[0] != wave_vectors(p, 1).q[0]);
}

TEST_CASE("relative periods") {
    const RingParams p4 = unit_ring(4);
    const auto per4 = relative_periods(p4, build_transform_matrix(p4));
    CHECK(per4[0].degenerate);
    CHECK_FALSE(per4[1].degenerate);
    const RingParams p3 = unit_ring(3);
    const auto per3 = relative_periods(p3, build_transform_matrix(p3));
    CHECK(per3[0].l == doctest::Approx(2 * pi * std::sqrt(2.0 / 3.0) * std::cos(2 * pi / 3)));
    CHECK(per3[0].l < 0.0);
    for (int N : {5, 12, 80}) {
        const RingParams p = unit_ring(N);
        for (const auto& r : relative_periods(p, build_transform_matrix(p))) {
            CHECK(std::isfinite(r.l));
            CHECK(std::abs(r.l) <= p.perimeter() * std::sqrt(2.0 / N) * (1 + 1e-15));
        }
    }
}

TEST_CASE("mode table") {
    const ModeTable t = ModeTable::build(fig3());
    CHECK(t.modes() == 79);
    CHECK(t.momentum_free(41));
    CHECK_FALSE(t.momentum_free(40));
    CHECK(t.q_of(40, 2) == doctest::Approx(0.5 * t.q_of(1, 2)));
    CHECK(t.period_of(20).degenerate);
}

}
