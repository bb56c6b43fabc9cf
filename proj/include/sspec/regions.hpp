#pragma once

#include "sspec/io.hpp"
#include "sspec/operators.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sspec {

// Point of the s-plane: every region formula depends on s only through s0 and
// the modulus of the imaginary part.
struct SPoint {
    double s0 = 0.0;
    double s1 = 0.0; // |s_underline| >= 0

    double modulus2() const { return s0 * s0 + s1 * s1; }
    double modulus() const { return std::sqrt(modulus2()); }
};

enum class RegionKind {
    hyperbolic_dirichlet,
    hyperbolic_dirichlet_poincare,
    hyperbolic_robin,
    spherical_dirichlet,
    spherical_robin,
};

inline const char* to_string(RegionKind k) {
    switch (k) {
        case RegionKind::hyperbolic_dirichlet: return "hyperbolic-dirichlet";
        case RegionKind::hyperbolic_dirichlet_poincare: return "hyperbolic-dirichlet-poincare";
        case RegionKind::hyperbolic_robin: return "hyperbolic-robin";
        case RegionKind::spherical_dirichlet: return "spherical-dirichlet";
        case RegionKind::spherical_robin: return "spherical-robin";
    }
    return "?";
}

inline RegionKind parse_region_kind(const std::string& s) {
    for (RegionKind k : {RegionKind::hyperbolic_dirichlet, RegionKind::hyperbolic_dirichlet_poincare,
                         RegionKind::hyperbolic_robin, RegionKind::spherical_dirichlet,
                         RegionKind::spherical_robin})
        if (s == to_string(k)) return k;
    throw std::invalid_argument("unknown region kind: " + s);
}

inline bool is_hyperbolic(RegionKind k) {
    return k == RegionKind::hyperbolic_dirichlet || k == RegionKind::hyperbolic_dirichlet_poincare ||
           k == RegionKind::hyperbolic_robin;
}
inline bool is_robin(RegionKind k) {
    return k == RegionKind::hyperbolic_robin || k == RegionKind::spherical_robin;
}

// The printed statement carries the boundary term with coefficient
// 2^{n/2-2}, the coercivity chain in the proof with 2^{n/2}. Both are exposed;
// proof is the conservative default and the one the solvability argument
// actually delivers.
enum class RobinCoeffMode { statement, proof };

inline const char* to_string(RobinCoeffMode m) {
    return m == RobinCoeffMode::statement ? "statement" : "proof";
}

inline RobinCoeffMode parse_robin_mode(const std::string& s) {
    if (s == "statement") return RobinCoeffMode::statement;
    if (s == "proof") return RobinCoeffMode::proof;
    throw std::invalid_argument("robin mode must be 'statement' or 'proof'");
}

struct RegionParams {
    int n = 2;
    double m = 0.0;
    double M = 1.0;
    double b_norm = 0.0;     // ||b||_{L^inf(boundary)}
    double trace_norm = 1.0; // ||tau_D||
    double c_p = 0.0;        // Poincare constant
    RobinCoeffMode robin_mode = RobinCoeffMode::proof;

    void validate(RegionKind kind) const {
        if (n < 2) throw std::invalid_argument("region parameters require n >= 2");
        if (!(m >= 0.0 && m < M)) throw std::invalid_argument("require 0 <= m < M");
        if (is_hyperbolic(kind) && !(m > 0.0))
            throw std::invalid_argument("hyperbolic regions require m > 0");
        if (is_robin(kind)) {
            if (!(b_norm >= 0.0)) throw std::invalid_argument("b_norm must be nonnegative");
            if (!(trace_norm > 0.0)) throw std::invalid_argument("trace_norm must be positive");
        }
        if (kind == RegionKind::hyperbolic_dirichlet_poincare && !(c_p > 0.0))
            throw std::invalid_argument("Poincare variant requires c_p > 0");
    }
};

struct RegionVerdict {
    bool admissible = false;
    double constant = 0.0;
    std::vector<double> margins; // named per margin_names(kind)
    bool excluded_circle = false;
};

inline std::vector<std::string> margin_names(RegionKind kind) {
    if (kind == RegionKind::hyperbolic_dirichlet_poincare) return {"margin_1"};
    return {"margin_1", "margin_2"};
}

// Lambda_{n,m,b}(p) = p m^2 - 2^{n/2-1} ||b|| ||tau||^2 (as printed; the
// sweep below generalizes the boundary reduction to match the selected mode).
inline double lambda_nmb(const RegionParams& p, double pp) {
    return pp * p.m * p.m -
           std::pow(2.0, 0.5 * p.n - 1.0) * p.b_norm * p.trace_norm * p.trace_norm;
}

namespace detail {

// Shared hyperbolic evaluation: boundary reduction t >= 0 (0 for Dirichlet).
// margin_1 and margin_2 are exactly the printed conditions, and
// constant > 0 <=> both margins > 0.
inline RegionVerdict hyperbolic_family(const RegionParams& p, const SPoint& s, double t) {
    const auto [alpha, beta] = structure_constants(p.n);
    const double s2 = s.modulus2();
    const double X = std::abs(s2 - beta);
    const double g = std::sqrt(1.0 + 4.0 * s.s0 * s.s0);
    const double A = X - alpha * g;
    const double m2 = p.m * p.m;
    const double B = p.M * (2.0 * (1.0 + alpha) + std::sqrt(static_cast<double>(p.n)) * g);

    const double margin1 = A + m2 - t;
    const double lam2 = 2.0 * m2 - t;
    const double lam1 = m2 - t;
    const double margin2 =
        2.0 * lam2 * X - 4.0 * p.n * p.M * p.M * s.s0 * s.s0 -
        2.0 * (alpha * lam2 + 2.0 * p.M * p.M * (1.0 + alpha) * std::sqrt(static_cast<double>(p.n))) * g -
        (m2 * m2 + p.M * p.M * (p.n + 4.0 * (1.0 + alpha) * (1.0 + alpha)) - lam1 * lam1);

    RegionVerdict v;
    v.constant = 0.5 * (A + m2 - t) -
                 0.5 * std::sqrt((A - m2) * (A - m2) + B * B);
    v.margins = {margin1, margin2};
    v.admissible = margin1 > 0.0 && margin2 > 0.0;
    return v;
}

// Shared spherical evaluation: boundary reduction u >= 0 (0 for Dirichlet).
inline RegionVerdict spherical_family(const RegionParams& p, const SPoint& s, double u) {
    const double n = static_cast<double>(p.n);
    const double c1 = (1.0 + p.m * p.m) * (1.0 + p.m * p.m);
    const double q = (1.0 + p.M * p.M) * (1.0 + p.M * p.M);
    const double s2 = s.modulus2();
    const double a0 = std::abs(s.s0);
    const double P = s2 + n * n - 2.0 * a0 * n * p.M;
    const double A = std::sqrt(n) * (1.0 + p.M * p.M) * ((3.0 + n) * p.M + a0);

    const double margin1 = P + c1 - 2.0 * u;
    const double margin2 = s2 * (c1 - u) - n * q * s.s0 * s.s0 -
                           2.0 * a0 * n * p.M * (c1 + (3.0 + n) * q - u) -
                           (n * q * (3.0 + n) * (3.0 + n) * p.M * p.M + c1 * u -
                            n * n * (c1 - u) - u * u);

    RegionVerdict v;
    v.constant = 0.5 * (P + c1 - 2.0 * u) -
                 0.5 * std::sqrt((P - c1) * (P - c1) + 4.0 * A * A);
    v.margins = {margin1, margin2};
    v.admissible = margin1 > 0.0 && margin2 > 0.0;
    return v;
}

inline double hyperbolic_robin_reduction(const RegionParams& p) {
    const double bt2 = p.b_norm * p.trace_norm * p.trace_norm;
    return p.robin_mode == RobinCoeffMode::statement
               ? std::pow(2.0, 0.5 * p.n - 1.0) * bt2
               : std::pow(2.0, 0.5 * p.n + 1.0) * bt2;
}

} // namespace detail

// circle_half_width < 0 selects the pointwise relative-tolerance test of
// |s|^2 = beta_n; map sampling passes half the cell size instead.
inline RegionVerdict evaluate_region(RegionKind kind, const RegionParams& p, const SPoint& s,
                                     double circle_half_width = -1.0) {
    p.validate(kind);
    switch (kind) {
        case RegionKind::hyperbolic_dirichlet: {
            RegionVerdict v = detail::hyperbolic_family(p, s, 0.0);
            const double beta = structure_constants(p.n).beta;
            const double s2 = s.modulus2();
            if (circle_half_width < 0.0) {
                const double tol = 1e-12 * std::max(1.0, std::max(s2, beta));
                v.excluded_circle = std::abs(s2 - beta) <= tol;
            } else {
                v.excluded_circle =
                    std::abs(s.modulus() - std::sqrt(beta)) <= circle_half_width;
            }
            v.admissible = v.admissible && !v.excluded_circle;
            return v;
        }
        case RegionKind::hyperbolic_dirichlet_poincare: {
            const auto [alpha, beta] = structure_constants(p.n);
            const double g = std::sqrt(1.0 + 4.0 * s.s0 * s.s0);
            const double A = std::abs(s.modulus2() - beta) - alpha * g;
            RegionVerdict v;
            v.constant = p.m * p.m -
                         p.c_p * p.M * (2.0 * (1.0 + alpha) + std::sqrt(static_cast<double>(p.n)) * g) -
                         std::abs(A) * p.c_p * p.c_p;
            v.margins = {v.constant};
            v.admissible = v.constant > 0.0;
            return v;
        }
        case RegionKind::hyperbolic_robin:
            return detail::hyperbolic_family(p, s, detail::hyperbolic_robin_reduction(p));
        case RegionKind::spherical_dirichlet:
            return detail::spherical_family(p, s, 0.0);
        case RegionKind::spherical_robin:
            return detail::spherical_family(
                p, s, std::pow(2.0, 0.5 * p.n) * p.b_norm * p.trace_norm * p.trace_norm);
    }
    throw std::logic_error("unreachable");
}

// (|s| + alpha_n + M sqrt n) / K_{n,m,M}(s); only defined on the certified region.
inline double s_resolvent_bound_hyperbolic(const RegionParams& p, const SPoint& s) {
    const RegionVerdict v = evaluate_region(RegionKind::hyperbolic_dirichlet, p, s);
    if (!v.admissible)
        throw std::domain_error("s outside the certified hyperbolic Dirichlet region");
    const double alpha = structure_constants(p.n).alpha;
    return (s.modulus() + alpha + p.M * std::sqrt(static_cast<double>(p.n))) / v.constant;
}

struct RegionMap {
    RegionKind kind = RegionKind::hyperbolic_dirichlet;
    RegionParams params;
    std::vector<double> s0s, s1s;
    std::vector<RegionVerdict> verdicts; // s0-major, s1-minor

    const RegionVerdict& at(std::size_t i0, std::size_t i1) const {
        return verdicts[i0 * s1s.size() + i1];
    }
};

inline std::vector<double> linspace(double a, double b, int count) {
    if (count < 2) throw std::invalid_argument("need at least 2 samples per axis");
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        v[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / (count - 1);
    return v;
}

// Dense evaluation over a rectangle of the s-plane. Cells straddling the
// excluded circle are flagged through the half-cell exclusion width.
inline RegionMap region_sample(RegionKind kind, const RegionParams& p, double s0_min,
                               double s0_max, double s1_min, double s1_max, int res0, int res1) {
    p.validate(kind);
    if (!(s0_min <= s0_max) || !(s1_min <= s1_max))
        throw std::invalid_argument("empty sampling range");
    RegionMap map;
    map.kind = kind;
    map.params = p;
    map.s0s = linspace(s0_min, s0_max, res0);
    map.s1s = linspace(s1_min, s1_max, res1);
    const double step0 = res0 > 1 ? (s0_max - s0_min) / (res0 - 1) : 0.0;
    const double step1 = res1 > 1 ? (s1_max - s1_min) / (res1 - 1) : 0.0;
    const double half_cell = 0.5 * std::max(step0, step1);
    map.verdicts.reserve(map.s0s.size() * map.s1s.size());
    for (double s0 : map.s0s)
        for (double s1 : map.s1s)
            map.verdicts.push_back(evaluate_region(kind, p, {s0, s1},
                                                   kind == RegionKind::hyperbolic_dirichlet
                                                       ? half_cell
                                                       : -1.0));
    return map;
}

inline std::string region_map_to_csv(const RegionMap& map) {
    std::ostringstream out;
    out << "s0,s1,admissible,constant";
    for (const std::string& name : margin_names(map.kind)) out << ',' << name;
    out << '\n';
    std::size_t idx = 0;
    for (double s0 : map.s0s) {
        for (double s1 : map.s1s) {
            const RegionVerdict& v = map.verdicts[idx++];
            out << fmt17(s0) << ',' << fmt17(s1) << ',' << (v.admissible ? 1 : 0) << ','
                << fmt17(v.constant);
            for (double m : v.margins) out << ',' << fmt17(m);
            out << '\n';
        }
    }
    return out.str();
}

struct SphericalGeometryReport {
    double disc = 0.0;          // n^2(M^2-1) - (1+m^2)^2, from completing the square
    bool two_circle_case = false;
    double circle_center = 0.0; // centers at (+-nM, 0)
    double derived_radius_sq = 0.0;
    double printed_radius_sq = 0.0; // n^2(M^2-1) + (1+m^2)^2, reported only
    bool hyperbola_center_defined = false;
    double hyperbola_center = 0.0;
    long implication_violations = 0; // points with margin_2 > 0 but margin_1 <= 0
    long points_checked = 0;
    double s0_min = 0.0, s0_max = 0.0, s1_min = 0.0, s1_max = 0.0;
    int res0 = 0, res1 = 0;
};

inline SphericalGeometryReport classify_spherical_geometry(const RegionParams& p, int res0 = 400,
                                                           int res1 = 400, double s0_span = 0.0,
                                                           double s1_max = 0.0) {
    p.validate(RegionKind::spherical_dirichlet);
    const double n = static_cast<double>(p.n);
    const double c1 = (1.0 + p.m * p.m) * (1.0 + p.m * p.m);
    const double q = (1.0 + p.M * p.M) * (1.0 + p.M * p.M);

    SphericalGeometryReport r;
    r.disc = n * n * (p.M * p.M - 1.0) - c1;
    r.two_circle_case = r.disc > 0.0;
    r.circle_center = n * p.M;
    r.derived_radius_sq = r.disc;
    r.printed_radius_sq = n * n * (p.M * p.M - 1.0) + c1;
    const double denom = n * q - c1;
    if (denom != 0.0) {
        r.hyperbola_center_defined = true;
        r.hyperbola_center = n * p.M * ((3.0 + n) * q + c1) / denom;
    }

    // sampling window: wide enough to cover both circles and the onset of the
    // quadratic condition on the s1-axis
    const double s1_threshold =
        std::sqrt(std::max(0.0, (n * (3.0 + n) * (3.0 + n) * p.M * p.M * q - n * n * c1) / c1));
    if (s0_span <= 0.0) s0_span = 2.0 * n * p.M + std::sqrt(std::max(r.disc, 1.0)) + 1.0;
    if (s1_max <= 0.0) s1_max = std::max(1.2 * s1_threshold, s0_span);
    r.s0_min = -s0_span;
    r.s0_max = s0_span;
    r.s1_min = 0.0;
    r.s1_max = s1_max;
    r.res0 = res0;
    r.res1 = res1;

    for (double s0 : linspace(r.s0_min, r.s0_max, res0)) {
        for (double s1 : linspace(r.s1_min, r.s1_max, res1)) {
            const RegionVerdict v = detail::spherical_family(p, {s0, s1}, 0.0);
            ++r.points_checked;
            if (v.margins[1] > 0.0 && v.margins[0] <= 0.0) ++r.implication_violations;
        }
    }
    return r;
}

inline nlohmann::json to_json(const RegionParams& p) {
    return {{"n", p.n},
            {"m", p.m},
            {"M", p.M},
            {"b_norm", p.b_norm},
            {"trace_norm", p.trace_norm},
            {"c_p", p.c_p},
            {"robin_mode", to_string(p.robin_mode)}};
}

inline nlohmann::json to_json(const SphericalGeometryReport& r) {
    return {{"disc", r.disc},
            {"two_circle_case", r.two_circle_case},
            {"circle_center", r.circle_center},
            {"derived_radius_sq", r.derived_radius_sq},
            {"printed_radius_sq", r.printed_radius_sq},
            {"hyperbola_center_defined", r.hyperbola_center_defined},
            {"hyperbola_center", r.hyperbola_center},
            {"implication_violations", r.implication_violations},
            {"points_checked", r.points_checked},
            {"window", {{"s0_min", r.s0_min},
                        {"s0_max", r.s0_max},
                        {"s1_min", r.s1_min},
                        {"s1_max", r.s1_max},
                        {"res0", r.res0},
                        {"res1", r.res1}}}};
}

inline nlohmann::json region_map_summary(const RegionMap& map) {
    long admissible = 0;
    double cmin = 0.0, cmax = 0.0;
    bool first = true;
    for (const RegionVerdict& v : map.verdicts) {
        if (!v.admissible) continue;
        ++admissible;
        if (first) {
            cmin = cmax = v.constant;
            first = false;
        } else {
            cmin = std::min(cmin, v.constant);
            cmax = std::max(cmax, v.constant);
        }
    }
    nlohmann::json j{{"kind", to_string(map.kind)},
                     {"params", to_json(map.params)},
                     {"points", static_cast<long>(map.verdicts.size())},
                     {"admissible_count", admissible},
                     {"admissible_fraction",
                      map.verdicts.empty() ? 0.0
                                           : static_cast<double>(admissible) /
                                                 static_cast<double>(map.verdicts.size())},
                     {"margin_names", margin_names(map.kind)}};
    if (admissible > 0) {
        j["constant_min_admissible"] = cmin;
        j["constant_max_admissible"] = cmax;
    }
    if (!is_hyperbolic(map.kind))
        j["spherical_geometry"] = to_json(classify_spherical_geometry(map.params));
    return j;
}

} // namespace sspec
