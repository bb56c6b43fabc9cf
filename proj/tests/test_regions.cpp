#include "sspec/regions.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace sspec;
using Catch::Approx;

namespace {

RegionParams hyper_params(double m = 1.0, double M = 2.0) {
    RegionParams p;
    p.n = 2;
    p.m = m;
    p.M = M;
    return p;
}

RegionParams sphere_params(double m = 0.0, double M = std::sqrt(2.0)) {
    RegionParams p;
    p.n = 2;
    p.m = m;
    p.M = M;
    return p;
}

// Independent route for the second condition: difference of squares around
// the square-root inequality, rather than the printed expanded form.
double hyper_margin2_alt(const RegionParams& p, const SPoint& s, double t) {
    const auto [alpha, beta] = structure_constants(p.n);
    const double g = std::sqrt(1.0 + 4.0 * s.s0 * s.s0);
    const double A = std::abs(s.modulus2() - beta) - alpha * g;
    const double m2 = p.m * p.m;
    const double B = p.M * (2.0 * (1.0 + alpha) + std::sqrt(static_cast<double>(p.n)) * g);
    const double lhs = A + m2 - t;
    return lhs * lhs - (A - m2) * (A - m2) - B * B;
}

double sphere_margin2_alt(const RegionParams& p, const SPoint& s, double u) {
    const double n = p.n;
    const double c1 = (1.0 + p.m * p.m) * (1.0 + p.m * p.m);
    const double P = s.modulus2() + n * n - 2.0 * std::abs(s.s0) * n * p.M;
    const double A = std::sqrt(n) * (1.0 + p.M * p.M) * ((3.0 + n) * p.M + std::abs(s.s0));
    return P * (c1 - u) - A * A - c1 * u + u * u;
}

} // namespace

TEST_CASE("hyperbolic Dirichlet region at reference points") {
    const RegionParams p = hyper_params();

    RegionVerdict far = evaluate_region(RegionKind::hyperbolic_dirichlet, p, {0.0, 10.0});
    CHECK(far.margins[0] == Approx(99.75).margin(1e-12));
    CHECK(far.margins[1] == Approx(317.05887450304573).epsilon(1e-12));
    CHECK(far.constant == Approx(0.80106693595632805).epsilon(1e-12));
    CHECK(far.admissible);

    RegionVerdict origin = evaluate_region(RegionKind::hyperbolic_dirichlet, p, {0.0, 0.0});
    CHECK(origin.margins[0] == Approx(1.25).margin(1e-12));
    CHECK(origin.margins[1] == Approx(-76.941125496954285).epsilon(1e-12));
    CHECK(origin.constant == Approx(-3.8051135848010222).epsilon(1e-12));
    CHECK_FALSE(origin.admissible);

    CHECK_THROWS_AS(evaluate_region(RegionKind::hyperbolic_dirichlet, hyper_params(0.0), {0, 1}),
                    std::invalid_argument);
}

TEST_CASE("excluded circle |s|^2 = beta_n") {
    const RegionParams p = hyper_params();
    const double beta = structure_constants(2).beta;

    RegionVerdict on = evaluate_region(RegionKind::hyperbolic_dirichlet, p,
                                       {0.0, std::sqrt(beta)});
    CHECK(on.excluded_circle);
    CHECK_FALSE(on.admissible);

    // relative tolerance 1e-12 on |s|^2 - beta
    RegionVerdict near = evaluate_region(RegionKind::hyperbolic_dirichlet, p,
                                         {0.0, std::sqrt(beta * (1.0 + 1e-13))});
    CHECK(near.excluded_circle);
    RegionVerdict off = evaluate_region(RegionKind::hyperbolic_dirichlet, p,
                                        {0.0, std::sqrt(beta * (1.0 + 1e-9))});
    CHECK_FALSE(off.excluded_circle);
}

TEST_CASE("hyperbolic Poincare-variant region") {
    RegionParams p = hyper_params();
    p.c_p = 0.1;

    RegionVerdict v = evaluate_region(RegionKind::hyperbolic_dirichlet_poincare, p, {0.0, 10.0});
    CHECK(v.constant == Approx(-0.87034271247461903).epsilon(1e-12));
    CHECK_FALSE(v.admissible);

    // well-defined exactly on the circle the other theorem excludes
    const double beta = structure_constants(2).beta;
    RegionVerdict on = evaluate_region(RegionKind::hyperbolic_dirichlet_poincare, p,
                                       {0.0, std::sqrt(beta)});
    CHECK(on.constant == Approx(0.11215728752538101).epsilon(1e-12));
    CHECK(on.admissible);
    CHECK_FALSE(on.excluded_circle);

    // C_P -> 0 recovers m^2
    RegionParams tiny = p;
    tiny.c_p = 1e-9;
    RegionVerdict lim = evaluate_region(RegionKind::hyperbolic_dirichlet_poincare, tiny, {0.0, 10.0});
    CHECK(lim.constant == Approx(1.0).margin(1e-7));

    RegionParams bad = hyper_params(); // c_p defaults to 0
    CHECK_THROWS_AS(evaluate_region(RegionKind::hyperbolic_dirichlet_poincare, bad, {0, 1}),
                    std::invalid_argument);
}

TEST_CASE("Lambda boundary reduction") {
    RegionParams p = hyper_params();
    p.b_norm = 0.0;
    p.trace_norm = 3.0;
    CHECK(lambda_nmb(p, 2.0) == Approx(2.0).margin(1e-15));
    CHECK(lambda_nmb(p, 1.0) == Approx(1.0).margin(1e-15));

    p.b_norm = 1.0;
    p.trace_norm = 1.0;
    // 2^{n/2-1} = 1 for n = 2
    CHECK(lambda_nmb(p, 2.0) == Approx(1.0).margin(1e-15));
    CHECK(lambda_nmb(p, 2.0) - lambda_nmb(p, 1.0) == Approx(p.m * p.m).margin(1e-15));
}

TEST_CASE("hyperbolic Robin region") {
    RegionParams p = hyper_params();
    p.b_norm = 1.0;
    p.trace_norm = 1.0;
    const SPoint s{0.0, 10.0};

    const RegionVerdict dirichlet = evaluate_region(RegionKind::hyperbolic_dirichlet, p, s);

    p.robin_mode = RobinCoeffMode::statement;
    RegionVerdict st = evaluate_region(RegionKind::hyperbolic_robin, p, s);
    CHECK(st.margins[0] == Approx(98.75).margin(1e-12));
    CHECK(st.margins[1] == Approx(118.55887450304573).epsilon(1e-12));
    CHECK(st.constant == Approx(0.30106693595632805).epsilon(1e-12));
    CHECK(st.admissible);

    p.robin_mode = RobinCoeffMode::proof;
    RegionVerdict pr = evaluate_region(RegionKind::hyperbolic_robin, p, s);
    CHECK(pr.margins[0] == Approx(95.75).margin(1e-12));
    CHECK(pr.margins[1] == Approx(-464.94112549695427).epsilon(1e-12));
    CHECK(pr.constant == Approx(-1.1989330640436719).epsilon(1e-12));
    CHECK_FALSE(pr.admissible);

    // proof-mode constant is K - 2^{n/2} b tau^2 exactly
    CHECK(pr.constant == Approx(dirichlet.constant - 2.0).margin(1e-13));

    // b = 0 degenerates to the Dirichlet constant in both modes
    RegionParams b0 = hyper_params();
    b0.trace_norm = 1.0;
    for (RobinCoeffMode mode : {RobinCoeffMode::statement, RobinCoeffMode::proof}) {
        b0.robin_mode = mode;
        RegionVerdict v = evaluate_region(RegionKind::hyperbolic_robin, b0, s);
        CHECK(v.constant == Approx(dirichlet.constant).margin(1e-14));
        CHECK(v.margins[0] == Approx(dirichlet.margins[0]).margin(1e-14));
        CHECK(v.margins[1] == Approx(dirichlet.margins[1]).margin(1e-14));
    }

    // increasing b never increases the constant
    double prev = std::numeric_limits<double>::infinity();
    for (double b : {0.0, 0.25, 0.5, 1.0, 2.0}) {
        RegionParams q = hyper_params();
        q.b_norm = b;
        q.trace_norm = 1.0;
        const double c = evaluate_region(RegionKind::hyperbolic_robin, q, s).constant;
        CHECK(c <= prev + 1e-15);
        prev = c;
    }
}

TEST_CASE("spherical Dirichlet region at reference points") {
    const RegionParams p = sphere_params();

    RegionVerdict in = evaluate_region(RegionKind::spherical_dirichlet, p, {0.0, 30.0});
    CHECK(in.margins[0] == Approx(905.0).margin(1e-10));
    CHECK(in.margins[1] == Approx(4.0).margin(1e-9));
    CHECK(in.constant == Approx(0.0044199110890872362).epsilon(1e-9));
    CHECK(in.admissible);

    RegionVerdict out = evaluate_region(RegionKind::spherical_dirichlet, p, {0.0, 29.0});
    CHECK(out.margins[1] == Approx(-55.0).margin(1e-9));
    CHECK(out.constant == Approx(-0.065006825192313045).epsilon(1e-9));
    CHECK_FALSE(out.admissible);

    RegionVerdict in31 = evaluate_region(RegionKind::spherical_dirichlet, p, {0.0, 31.0});
    CHECK(in31.margins[1] == Approx(65.0).margin(1e-9));
    CHECK(in31.constant == Approx(0.067292472336248466).epsilon(1e-9));
    CHECK(in31.admissible);

    // admissibility threshold on the s1 axis sits in (29, 30)
    double a = 29.0, b = 30.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (a + b);
        if (evaluate_region(RegionKind::spherical_dirichlet, p, {0.0, mid}).admissible)
            b = mid;
        else
            a = mid;
    }
    CHECK(b == Approx(29.933259094191531).epsilon(1e-10));
}

TEST_CASE("spherical Robin region") {
    RegionParams p = sphere_params();
    p.b_norm = 0.5;
    p.trace_norm = 1.0;

    RegionVerdict v = evaluate_region(RegionKind::spherical_robin, p, {0.0, 40.0});
    CHECK(v.margins[0] == Approx(1603.0).margin(1e-9));
    CHECK(v.margins[1] == Approx(-900.0).margin(1e-8));
    CHECK(v.constant == Approx(-0.56125077826823144).epsilon(1e-9));
    CHECK_FALSE(v.admissible);

    // b = 0 degenerates to the Dirichlet values
    RegionParams b0 = sphere_params();
    b0.trace_norm = 1.0;
    const SPoint s{1.0, 35.0};
    RegionVerdict rob = evaluate_region(RegionKind::spherical_robin, b0, s);
    RegionVerdict dir = evaluate_region(RegionKind::spherical_dirichlet, b0, s);
    CHECK(rob.constant == Approx(dir.constant).margin(1e-14));
    CHECK(rob.margins[0] == Approx(dir.margins[0]).margin(1e-14));
    CHECK(rob.margins[1] == Approx(dir.margins[1]).margin(1e-14));

    // once 2^{n/2} b tau^2 wipes out (1+m^2)^2, the |s|^2 coefficient in the
    // quadratic condition is non-positive and no large |s| can satisfy it
    RegionParams big = sphere_params();
    big.b_norm = 0.6; // u = 1.2 > (1+m^2)^2 = 1
    big.trace_norm = 1.0;
    for (double s1 : {1e2, 1e4, 1e6})
        CHECK_FALSE(evaluate_region(RegionKind::spherical_robin, big, {0.0, s1}).admissible);
}

TEST_CASE("printed conditions equal the difference-of-squares route") {
    std::mt19937_64 rng(321);
    std::uniform_real_distribution<double> ds0(-8.0, 8.0), ds1(0.0, 40.0);
    for (int trial = 0; trial < 300; ++trial) {
        const SPoint s{ds0(rng), ds1(rng)};

        RegionParams hp = hyper_params();
        hp.b_norm = 0.3;
        hp.trace_norm = 1.2;
        for (RobinCoeffMode mode : {RobinCoeffMode::statement, RobinCoeffMode::proof}) {
            hp.robin_mode = mode;
            const double t = (mode == RobinCoeffMode::statement ? std::pow(2.0, 0.0)
                                                                : std::pow(2.0, 2.0)) *
                             hp.b_norm * hp.trace_norm * hp.trace_norm;
            RegionVerdict v = evaluate_region(RegionKind::hyperbolic_robin, hp, s);
            const double alt = hyper_margin2_alt(hp, s, t);
            CHECK(v.margins[1] == Approx(alt).margin(1e-7 * (1.0 + std::abs(alt))));
        }

        RegionParams sp = sphere_params(0.5, 2.0);
        sp.b_norm = 0.2;
        sp.trace_norm = 1.1;
        const double u = 2.0 * sp.b_norm * sp.trace_norm * sp.trace_norm;
        RegionVerdict v = evaluate_region(RegionKind::spherical_robin, sp, s);
        const double alt = sphere_margin2_alt(sp, s, u);
        CHECK(v.margins[1] == Approx(alt).margin(1e-7 * (1.0 + std::abs(alt))));
    }
}

TEST_CASE("constant positivity is equivalent to the conditions") {
    std::mt19937_64 rng(654);
    std::uniform_real_distribution<double> ds0(-6.283, 6.283), ds1(0.0, 37.41);
    RegionParams hp = hyper_params();
    RegionParams hr = hyper_params();
    hr.b_norm = 0.2;
    hr.trace_norm = 1.3;
    RegionParams sd = sphere_params();
    RegionParams sr = sphere_params(0.3, 1.7);
    sr.b_norm = 0.1;
    sr.trace_norm = 1.1;

    const struct {
        RegionKind kind;
        const RegionParams* p;
    } cases[] = {{RegionKind::hyperbolic_dirichlet, &hp},
                 {RegionKind::hyperbolic_robin, &hr},
                 {RegionKind::spherical_dirichlet, &sd},
                 {RegionKind::spherical_robin, &sr}};

    for (const auto& c : cases) {
        for (int trial = 0; trial < 2000; ++trial) {
            const SPoint s{ds0(rng), ds1(rng)};
            RegionVerdict v = evaluate_region(c.kind, *c.p, s);
            const bool margins_pos = v.margins[0] > 0.0 && v.margins[1] > 0.0;
            // skip points too close to the boundary for a sign comparison
            if (std::abs(v.constant) < 1e-10) continue;
            CHECK(margins_pos == (v.constant > 0.0));
            if (c.kind == RegionKind::hyperbolic_dirichlet)
                CHECK(v.admissible == (margins_pos && !v.excluded_circle));
            else
                CHECK(v.admissible == margins_pos);
            CHECK(std::isfinite(v.constant));
        }
    }
}

TEST_CASE("s0 parity") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ds0(0.0, 7.0), ds1(0.0, 35.0);
    RegionParams hp = hyper_params();
    hp.b_norm = 0.2;
    hp.trace_norm = 1.0;
    hp.c_p = 0.05;
    RegionParams sp = sphere_params();
    sp.b_norm = 0.1;
    sp.trace_norm = 1.0;
    for (int trial = 0; trial < 400; ++trial) {
        const double s0 = ds0(rng), s1 = ds1(rng);
        for (RegionKind kind : {RegionKind::hyperbolic_dirichlet,
                                RegionKind::hyperbolic_dirichlet_poincare,
                                RegionKind::hyperbolic_robin}) {
            RegionVerdict a = evaluate_region(kind, hp, {s0, s1});
            RegionVerdict b = evaluate_region(kind, hp, {-s0, s1});
            CHECK(a.admissible == b.admissible);
            CHECK(a.constant == b.constant);
        }
        for (RegionKind kind : {RegionKind::spherical_dirichlet, RegionKind::spherical_robin}) {
            RegionVerdict a = evaluate_region(kind, sp, {s0, s1});
            RegionVerdict b = evaluate_region(kind, sp, {-s0, s1});
            CHECK(a.admissible == b.admissible);
            CHECK(a.constant == b.constant);
        }
    }
}

TEST_CASE("resolvent bound") {
    const RegionParams p = hyper_params();
    CHECK(s_resolvent_bound_hyperbolic(p, {0.0, 10.0}) ==
          Approx(16.638343846802858).epsilon(1e-12));
    CHECK_THROWS_AS(s_resolvent_bound_hyperbolic(p, {0.0, 0.0}), std::domain_error);

    // grows like |s|/K along the axis once inside the region
    double prev = 0.0;
    for (double s1 : {20.0, 40.0, 80.0, 160.0, 320.0}) {
        const double b = s_resolvent_bound_hyperbolic(p, {0.0, s1});
        CHECK(b > prev);
        prev = b;
    }

    // diverges while approaching the region boundary from inside
    double lo = 0.0, hi = 10.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (evaluate_region(RegionKind::hyperbolic_dirichlet, p, {0.0, mid}).admissible)
            hi = mid;
        else
            lo = mid;
    }
    double prev_bound = 0.0;
    for (double eps : {1e-1, 1e-3, 1e-5}) {
        const double b = s_resolvent_bound_hyperbolic(p, {0.0, hi + eps});
        CHECK(b > prev_bound);
        prev_bound = b;
    }
    CHECK(prev_bound > 1e4);
}

TEST_CASE("region map sampling") {
    const RegionParams p = hyper_params();
    RegionMap map = region_sample(RegionKind::hyperbolic_dirichlet, p, -5.0, 5.0, 0.0, 15.0,
                                  101, 151);
    // contains (0,10), excludes (0,0)
    const std::size_t i0 = 50, i10 = 100, iorigin = 0;
    CHECK(map.s0s[i0] == Approx(0.0).margin(1e-12));
    CHECK(map.s1s[i10] == Approx(10.0).margin(1e-12));
    CHECK(map.at(i0, i10).admissible);
    CHECK_FALSE(map.at(i0, iorigin).admissible);

    // s0 mirror symmetry of the sampled verdicts (grid points are negatives
    // of each other only up to roundoff, hence the tolerance)
    for (std::size_t a = 0; a < map.s0s.size(); ++a)
        for (std::size_t b = 0; b < map.s1s.size(); ++b) {
            const RegionVerdict& v = map.at(a, b);
            const RegionVerdict& w = map.at(map.s0s.size() - 1 - a, b);
            REQUIRE(v.admissible == w.admissible);
            REQUIRE(v.constant == Approx(w.constant).epsilon(1e-12).margin(1e-12));
        }

    // cells straddling the excluded circle are flagged
    RegionMap fine = region_sample(RegionKind::hyperbolic_dirichlet, p, -2.0, 2.0, 0.0, 2.0,
                                   81, 41);
    const double rad = std::sqrt(structure_constants(2).beta);
    const double half_cell = 0.5 * 0.05;
    long flagged = 0;
    std::size_t idx = 0;
    for (double s0 : fine.s0s)
        for (double s1 : fine.s1s) {
            const RegionVerdict& v = fine.verdicts[idx++];
            const double d = std::abs(std::hypot(s0, s1) - rad);
            if (d <= half_cell) {
                REQUIRE(v.excluded_circle);
                REQUIRE_FALSE(v.admissible);
                ++flagged;
            }
        }
    CHECK(flagged > 0);

    CHECK_THROWS_AS(region_sample(RegionKind::hyperbolic_dirichlet, p, 1.0, -1.0, 0, 1, 10, 10),
                    std::invalid_argument);

    // CSV header matches the schema
    const std::string csv = region_map_to_csv(map);
    CHECK(csv.rfind("s0,s1,admissible,constant,margin_1,margin_2\n", 0) == 0);
}

TEST_CASE("spherical geometry classification") {
    RegionParams two = sphere_params(0.1, 2.0);
    two.n = 3;
    SphericalGeometryReport r = classify_spherical_geometry(two, 200, 200);
    CHECK(r.disc == Approx(25.979900000000001).epsilon(1e-14));
    CHECK(r.two_circle_case);
    CHECK(r.circle_center == Approx(6.0));
    CHECK(r.derived_radius_sq == Approx(r.disc));
    CHECK(r.printed_radius_sq == Approx(27.0 + 1.0201).epsilon(1e-12));
    CHECK(r.hyperbola_center_defined);
    CHECK(r.hyperbola_center == Approx(12.248199848877872).epsilon(1e-12));
    CHECK(r.implication_violations == 0);
    CHECK(r.points_checked == 200L * 200L);

    RegionParams whole = sphere_params(1.0, 1.01);
    SphericalGeometryReport w = classify_spherical_geometry(whole, 100, 100);
    CHECK(w.disc == Approx(-3.9196).epsilon(1e-12));
    CHECK_FALSE(w.two_circle_case);
    CHECK(w.implication_violations == 0);
}
