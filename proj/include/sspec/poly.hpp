#pragma once

#include "sspec/clifford.hpp"

#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace sspec {

// Exponent multi-index of a monomial x_1^{e_1} ... x_n^{e_n}.
using Exponents = std::vector<int>;

inline int total_degree(const Exponents& e) { return std::accumulate(e.begin(), e.end(), 0); }

// Multivariate polynomial with Multivector coefficients over as many variables
// as algebra generators. Arithmetic is exact in structure: terms are stored in
// a normalized map with no zero coefficients, and the total degree is capped
// so repeated operator application cannot silently blow up a test.
class PolyField {
public:
    static constexpr int default_degree_cap = 8;

    explicit PolyField(int n, int degree_cap = default_degree_cap)
        : n_(n), cap_(degree_cap) {
        check_dimension(n);
        if (cap_ < 0) throw std::invalid_argument("degree cap must be nonnegative");
    }

    static PolyField constant(const Multivector& c, int degree_cap = default_degree_cap) {
        PolyField f(c.dim(), degree_cap);
        f.add_term(Exponents(static_cast<std::size_t>(c.dim()), 0), c);
        return f;
    }

    static PolyField scalar_constant(int n, double v, int degree_cap = default_degree_cap) {
        return constant(Multivector::scalar(n, v), degree_cap);
    }

    static PolyField monomial(const Exponents& e, const Multivector& c,
                              int degree_cap = default_degree_cap) {
        PolyField f(c.dim(), degree_cap);
        f.add_term(e, c);
        return f;
    }

    int dim() const { return n_; }
    int degree_cap() const { return cap_; }
    const std::map<Exponents, Multivector>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    int degree() const {
        int d = 0;
        for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
        return d;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& [e, c] : terms_) m = std::max(m, c.max_abs());
        return m;
    }

    void add_term(const Exponents& e, const Multivector& c) {
        if (static_cast<int>(e.size()) != n_)
            throw std::invalid_argument("exponent multi-index length mismatch");
        for (int k : e)
            if (k < 0) throw std::invalid_argument("negative exponent");
        if (total_degree(e) > cap_)
            throw std::domain_error("polynomial degree cap exceeded");
        if (c.dim() != n_) throw std::invalid_argument("coefficient dimension mismatch");
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            if (c.max_abs() != 0.0) terms_.emplace(e, c);
        } else {
            it->second += c;
            if (it->second.max_abs() == 0.0) terms_.erase(it);
        }
    }

    PolyField& operator+=(const PolyField& o) {
        require_same(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    PolyField& operator-=(const PolyField& o) {
        require_same(o);
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    friend PolyField operator+(PolyField a, const PolyField& b) { return a += b; }
    friend PolyField operator-(PolyField a, const PolyField& b) { return a -= b; }

    PolyField scale(double s) const {
        PolyField out(n_, cap_);
        if (s == 0.0) return out;
        for (const auto& [e, c] : terms_) out.terms_.emplace(e, c * s);
        return out;
    }

    // Left multiplication by a Clifford constant, term by term.
    PolyField left_mul(const Multivector& c) const {
        PolyField out(n_, cap_);
        for (const auto& [e, coef] : terms_) out.add_term(e, mul(c, coef));
        return out;
    }

    // Multiply by a scalar monomial x^m.
    PolyField coord_mul(const Exponents& m) const {
        if (static_cast<int>(m.size()) != n_)
            throw std::invalid_argument("monomial multi-index length mismatch");
        PolyField out(n_, cap_);
        for (const auto& [e, coef] : terms_) {
            Exponents shifted(e);
            for (int i = 0; i < n_; ++i) shifted[static_cast<std::size_t>(i)] += m[static_cast<std::size_t>(i)];
            out.add_term(shifted, coef);
        }
        return out;
    }

    // Exact formal partial derivative in the given (0-based) axis.
    PolyField derive(int axis) const {
        if (axis < 0 || axis >= n_) throw std::invalid_argument("derivative axis out of range");
        PolyField out(n_, cap_);
        for (const auto& [e, coef] : terms_) {
            const int k = e[static_cast<std::size_t>(axis)];
            if (k == 0) continue;
            Exponents d(e);
            d[static_cast<std::size_t>(axis)] = k - 1;
            out.add_term(d, coef * static_cast<double>(k));
        }
        return out;
    }

    Multivector eval(const std::vector<double>& x) const {
        if (static_cast<int>(x.size()) != n_)
            throw std::invalid_argument("evaluation point dimension mismatch");
        Multivector acc(n_);
        for (const auto& [e, coef] : terms_) {
            double mono = 1.0;
            for (int i = 0; i < n_; ++i) {
                const int k = e[static_cast<std::size_t>(i)];
                for (int j = 0; j < k; ++j) mono *= x[static_cast<std::size_t>(i)];
            }
            acc += coef * mono;
        }
        return acc;
    }

    void require_same(const PolyField& o) const {
        if (n_ != o.n_) throw std::invalid_argument("polynomial dimension mismatch");
    }

private:
    int n_;
    int cap_;
    std::map<Exponents, Multivector> terms_;
};

// x = x_1 e_1 + ... + x_n e_n as a polynomial field.
inline PolyField coordinate_vector_field(int n, int degree_cap = PolyField::default_degree_cap) {
    PolyField x(n, degree_cap);
    for (int i = 0; i < n; ++i) {
        Exponents e(static_cast<std::size_t>(n), 0);
        e[static_cast<std::size_t>(i)] = 1;
        x.add_term(e, Multivector::basis(n, BladeMask{1} << i));
    }
    return x;
}

// Multiply F on the left by a PolyField with paravector-style coefficients,
// i.e. (sum_m x^m c_m) * F term by term. Used for x * D_e F and friends.
inline PolyField poly_left_mul(const PolyField& g, const PolyField& f) {
    g.require_same(f);
    PolyField out(f.dim(), f.degree_cap());
    for (const auto& [eg, cg] : g.terms()) {
        for (const auto& [ef, cf] : f.terms()) {
            Exponents e(eg);
            for (std::size_t i = 0; i < e.size(); ++i) e[i] += ef[i];
            out.add_term(e, mul(cg, cf));
        }
    }
    return out;
}

} // namespace sspec
