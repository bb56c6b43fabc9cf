#include "sspec/clifford.hpp"

#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace sspec;
using test_util::max_abs_diff;
using test_util::naive_blade_mul;
using test_util::naive_mul;
using Catch::Approx;

TEST_CASE("blade products against the defining relations") {
    // e_1 e_1 = -1
    auto [s11, b11] = blade_mul(0b1, 0b1, 2);
    CHECK(s11 == -1);
    CHECK(b11 == 0u);
    // e_1 e_2 = e_12, e_2 e_1 = -e_12
    auto [s12, b12] = blade_mul(0b01, 0b10, 2);
    CHECK(s12 == 1);
    CHECK(b12 == 0b11u);
    auto [s21, b21] = blade_mul(0b10, 0b01, 2);
    CHECK(s21 == -1);
    CHECK(b21 == 0b11u);
    // identity blade
    auto [s0, b0] = blade_mul(0, 0b11, 2);
    CHECK(s0 == 1);
    CHECK(b0 == 0b11u);

    CHECK_THROWS_AS(blade_mul(0b100, 0b1, 2), std::invalid_argument);
    CHECK_THROWS_AS(blade_mul(0, 0, 0), std::invalid_argument);
}

TEST_CASE("blade products match the bubble-sort oracle") {
    for (int n = 1; n <= 6; ++n) {
        const BladeMask all = full_mask(n);
        for (BladeMask a = 0; a <= all; ++a)
            for (BladeMask b = 0; b <= all; ++b) {
                auto got = blade_mul(a, b, n);
                auto [sign, mask] = naive_blade_mul(a, b, n);
                REQUIRE(got.sign == sign);
                REQUIRE(got.blade == mask);
            }
    }
}

TEST_CASE("multivector product examples") {
    const int n = 3;
    const Multivector e1 = Multivector::basis(n, 0b001);
    const Multivector e12 = Multivector::basis(n, 0b011);
    const Multivector e23 = Multivector::basis(n, 0b110);

    CHECK(scalar_part(mul(e1, e1)) == -1.0);

    Multivector a = Multivector::scalar(n, 1.0) + e1;
    Multivector b = Multivector::scalar(n, 1.0) - e1;
    CHECK(max_abs_diff(mul(a, b), Multivector::scalar(n, 2.0)) == 0.0);

    // (e1 e2)(e2 e3) = -e1 e3
    CHECK(max_abs_diff(mul(e12, e23), Multivector::basis(n, 0b101, -1.0)) == 0.0);

    CHECK_THROWS_AS(mul(Multivector(2), Multivector(3)), std::invalid_argument);
}

TEST_CASE("random products match the naive oracle") {
    std::mt19937_64 rng(7101);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int n = 1; n <= 5; ++n) {
        for (int trial = 0; trial < 200; ++trial) {
            Multivector x(n), y(n);
            for (BladeMask i = 0; i < x.size(); ++i) {
                x[i] = dist(rng);
                y[i] = dist(rng);
            }
            CHECK(max_abs_diff(mul(x, y), naive_mul(x, y)) <= 1e-14);
        }
    }
}

TEST_CASE("conjugation") {
    const int n = 2;
    const Multivector e1 = Multivector::basis(n, 0b01);
    CHECK(max_abs_diff(conjugate(e1), -e1) == 0.0);

    const Multivector e12 = Multivector::basis(n, 0b11);
    CHECK(max_abs_diff(conjugate(e12), -e12) == 0.0);

    Multivector x = Multivector::scalar(n, 3.0) + 2.0 * e12;
    Multivector want = Multivector::scalar(n, 3.0) - 2.0 * e12;
    CHECK(max_abs_diff(conjugate(x), want) == 0.0);
}

TEST_CASE("conjugation is an anti-automorphism") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int n = 1; n <= 5; ++n) {
        for (int trial = 0; trial < 100; ++trial) {
            Multivector x(n), y(n);
            for (BladeMask i = 0; i < x.size(); ++i) {
                x[i] = dist(rng);
                y[i] = dist(rng);
            }
            CHECK(max_abs_diff(conjugate(mul(x, y)), mul(conjugate(y), conjugate(x))) <= 1e-13);
        }
    }
}

TEST_CASE("scalar part and coefficient extraction") {
    const int n = 2;
    Multivector x = Multivector::scalar(n, 3.0) + Multivector::basis(n, 0b01, 2.0);
    CHECK(scalar_part(x) == 3.0);
    CHECK(scalar_part(Multivector::basis(n, 0b11)) == 0.0);

    Multivector y = Multivector::scalar(n, 1.0) + Multivector::basis(n, 0b01);
    CHECK(scalar_part(mul(conjugate(y), y)) == Approx(2.0));

    Multivector z = Multivector::scalar(n, 3.0) + Multivector::basis(n, 0b11, 2.0);
    CHECK(coefficient(z, 0b11) == 2.0);
    CHECK(coefficient(z, 0) == 3.0);
    CHECK_THROWS_AS(coefficient(z, 0b100), std::invalid_argument);

    // coefficient(x, A) = Sc(x conj(e_A)) on random data
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        Multivector w(3);
        for (BladeMask i = 0; i < w.size(); ++i) w[i] = dist(rng);
        for (BladeMask a = 0; a < w.size(); ++a) {
            const double via_sc = scalar_part(mul(w, conjugate(Multivector::basis(3, a))));
            CHECK(coefficient(w, a) == Approx(via_sc).margin(1e-14));
        }
    }
}

TEST_CASE("norm identities") {
    const int n = 2;
    Multivector x = Multivector::scalar(n, 1.0) + Multivector::basis(n, 0b01);
    CHECK(norm(x) == Approx(std::sqrt(2.0)));

    std::mt19937_64 rng(57);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int nn = 1; nn <= 5; ++nn) {
        const double factor = std::pow(2.0, 0.5 * nn);
        for (int trial = 0; trial < 200; ++trial) {
            Multivector a(nn), b(nn);
            for (BladeMask i = 0; i < a.size(); ++i) {
                a[i] = dist(rng);
                b[i] = dist(rng);
            }
            // |x|^2 = Sc(conj(x) x) = Sc(x conj(x))
            CHECK(norm(a) * norm(a) ==
                  Approx(scalar_part(mul(conjugate(a), a))).margin(1e-12));
            CHECK(norm(a) * norm(a) ==
                  Approx(scalar_part(mul(a, conjugate(a)))).margin(1e-12));
            // submultiplicativity with the 2^{n/2} constant
            CHECK(norm(mul(a, b)) <= factor * norm(a) * norm(b) + 1e-12);

            // paravector factor: |p x| = |p| |x|
            Paravector p;
            p.s0 = dist(rng);
            p.vec.assign(static_cast<std::size_t>(nn), 0.0);
            for (double& v : p.vec) v = dist(rng);
            const Multivector pm = p.to_multivector();
            CHECK(norm(mul(pm, a)) == Approx(p.modulus() * norm(a)).margin(1e-12));
            CHECK(norm(mul(a, pm)) == Approx(p.modulus() * norm(a)).margin(1e-12));
        }
    }
}

TEST_CASE("module inequalities on the algebra itself") {
    // <F,G> = conj(F) G with the coefficient norm
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int n = 1; n <= 5; ++n) {
        const double factor = std::pow(2.0, 0.5 * n);
        for (int trial = 0; trial < 100; ++trial) {
            Multivector f(n), g(n);
            for (BladeMask i = 0; i < f.size(); ++i) {
                f[i] = dist(rng);
                g[i] = dist(rng);
            }
            const Multivector ip = mul(conjugate(f), g);
            CHECK(norm(ip) <= factor * norm(f) * norm(g) + 1e-12);
            CHECK(std::abs(scalar_part(ip)) <= norm(f) * norm(g) + 1e-12);
        }
    }
}

TEST_CASE("associativity on random triples") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int n = 1; n <= 5; ++n) {
        for (int trial = 0; trial < 400; ++trial) {
            Multivector x(n), y(n), z(n);
            for (BladeMask i = 0; i < x.size(); ++i) {
                x[i] = dist(rng);
                y[i] = dist(rng);
                z[i] = dist(rng);
            }
            const double scale = norm(x) * norm(y) * norm(z) + 1.0;
            CHECK(max_abs_diff(mul(mul(x, y), z), mul(x, mul(y, z))) <= 1e-12 * scale);
        }
    }
}

TEST_CASE("generator relations") {
    const int n = 4;
    for (int i = 0; i < n; ++i) {
        const Multivector ei = Multivector::basis(n, BladeMask{1} << i);
        CHECK(max_abs_diff(mul(ei, ei), Multivector::scalar(n, -1.0)) == 0.0);
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const Multivector ej = Multivector::basis(n, BladeMask{1} << j);
            CHECK(max_abs_diff(mul(ei, ej) + mul(ej, ei), Multivector(n)) == 0.0);
        }
    }
}

TEST_CASE("paravector quadratic vanishes on the sphere") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int n = 1; n <= 5; ++n) {
        for (int trial = 0; trial < 200; ++trial) {
            Paravector s;
            s.s0 = dist(rng);
            s.vec.assign(static_cast<std::size_t>(n), 0.0);
            for (double& v : s.vec) v = dist(rng);
            const Multivector sm = s.to_multivector();
            Multivector q = mul(sm, sm) - 2.0 * s.s0 * sm + Multivector::scalar(n, s.modulus2());
            CHECK(q.max_abs() <= 1e-12 * (1.0 + s.modulus2()));
        }
    }
}

TEST_CASE("left representation matrix") {
    // n = 1: left multiplication by e_1 is a rotation by pi/2
    const Multivector e1 = Multivector::basis(1, 0b1);
    Eigen::MatrixXd L = left_rep_matrix(e1);
    CHECK(L(0, 0) == 0.0);
    CHECK(L(0, 1) == -1.0);
    CHECK(L(1, 0) == 1.0);
    CHECK(L(1, 1) == 0.0);

    CHECK(left_rep_matrix(Multivector::scalar(3, 1.0)).isIdentity(0.0));

    // algebra homomorphism L(c) L(d) = L(cd), and action consistency
    std::mt19937_64 rng(83);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int n = 1; n <= 4; ++n) {
        for (int trial = 0; trial < 50; ++trial) {
            Multivector c(n), d(n), x(n);
            for (BladeMask i = 0; i < c.size(); ++i) {
                c[i] = dist(rng);
                d[i] = dist(rng);
                x[i] = dist(rng);
            }
            const Eigen::MatrixXd Lc = left_rep_matrix(c);
            const Eigen::MatrixXd Ld = left_rep_matrix(d);
            CHECK((Lc * Ld - left_rep_matrix(mul(c, d))).cwiseAbs().maxCoeff() <= 1e-12);

            Eigen::VectorXd xv(static_cast<Eigen::Index>(x.size()));
            for (BladeMask i = 0; i < x.size(); ++i) xv(i) = x[i];
            const Eigen::VectorXd yv = Lc * xv;
            const Multivector y = mul(c, x);
            for (BladeMask i = 0; i < x.size(); ++i) CHECK(yv(i) == Approx(y[i]).margin(1e-13));

            // conjugation acts as the transpose
            CHECK((left_rep_matrix(conjugate(c)) - Lc.transpose()).cwiseAbs().maxCoeff() <= 1e-13);
        }
    }
}

TEST_CASE("right multiplication") {
    const int n = 2;
    const Multivector e1 = Multivector::basis(n, 0b01);
    const Multivector e2 = Multivector::basis(n, 0b10);
    CHECK(max_abs_diff(right_mul(e1, e2), Multivector::basis(n, 0b11)) == 0.0);

    Multivector x = Multivector::scalar(n, 0.5) + e1 + Multivector::basis(n, 0b11, -2.0);
    CHECK(max_abs_diff(right_mul(x, Multivector::scalar(n, 1.0)), x) == 0.0);

    const Multivector c = Multivector::scalar(n, -1.75);
    CHECK(max_abs_diff(right_mul(x, c), mul(c, x)) == 0.0);
}
