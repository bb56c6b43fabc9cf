#pragma once

#include <Eigen/Dense>

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sspec {

// Blade = subset of the generators e_1..e_n, encoded as a bitmask with
// generator i at bit i-1. The empty set is the scalar blade e_0 = 1.
using BladeMask = std::uint32_t;

inline constexpr int max_dimension = 12;

inline void check_dimension(int n) {
    if (n < 1 || n > max_dimension)
        throw std::invalid_argument("algebra dimension must be in 1.." +
                                    std::to_string(max_dimension) + ", got " + std::to_string(n));
}

inline BladeMask full_mask(int n) { return (BladeMask{1} << n) - 1; }

// Number of transpositions (mod 2) needed to interleave the generators of a
// past those of b when forming the canonical product e_a e_b.
inline int reorder_sign(BladeMask a, BladeMask b) {
    int swaps = 0;
    a >>= 1;
    while (a) {
        swaps += std::popcount(a & b);
        a >>= 1;
    }
    return (swaps & 1) ? -1 : 1;
}

struct BladeProduct {
    int sign;        // +1 or -1
    BladeMask blade; // a ^ b
};

// e_a e_b = sign * e_{a xor b}: transposition count for the reordering plus
// one factor -1 per repeated generator (e_i^2 = -1).
inline BladeProduct blade_mul(BladeMask a, BladeMask b, int n) {
    check_dimension(n);
    const BladeMask all = full_mask(n);
    if ((a & ~all) || (b & ~all))
        throw std::invalid_argument("blade index uses a generator beyond dimension " +
                                    std::to_string(n));
    int s = reorder_sign(a, b);
    if (std::popcount(a & b) & 1) s = -s;
    return {s, a ^ b};
}

namespace detail {

// The product sign depends on the masks only, not on n, so one 256x256 table
// covers every n <= 8. Assembly multiplies constants by blades millions of
// times; the table keeps that loop branch-free.
inline const std::vector<std::int8_t>& sign_table8() {
    static const std::vector<std::int8_t> table = [] {
        std::vector<std::int8_t> t(256 * 256);
        for (BladeMask a = 0; a < 256; ++a) {
            for (BladeMask b = 0; b < 256; ++b) {
                int s = reorder_sign(a, b);
                if (std::popcount(a & b) & 1) s = -s;
                t[(a << 8) | b] = static_cast<std::int8_t>(s);
            }
        }
        return t;
    }();
    return table;
}

inline int product_sign(BladeMask a, BladeMask b) {
    if (a < 256 && b < 256) return sign_table8()[(a << 8) | b];
    int s = reorder_sign(a, b);
    if (std::popcount(a & b) & 1) s = -s;
    return s;
}

// conj(e_A) = (-1)^{r(r+1)/2} e_A for a grade-r blade.
inline int conjugation_sign(BladeMask a) {
    const int r = std::popcount(a);
    return ((r * (r + 1) / 2) & 1) ? -1 : 1;
}

} // namespace detail

// Element of the Clifford algebra R_n as 2^n real coefficients indexed by
// blade mask. Immutable value semantics: every operation returns a fresh value.
class Multivector {
public:
    explicit Multivector(int n) : n_(n), c_(std::size_t{1} << n, 0.0) { check_dimension(n); }

    static Multivector scalar(int n, double v) {
        Multivector x(n);
        x.c_[0] = v;
        return x;
    }

    static Multivector basis(int n, BladeMask a, double v = 1.0) {
        check_dimension(n);
        if (a & ~full_mask(n))
            throw std::invalid_argument("blade index out of range for dimension " +
                                        std::to_string(n));
        Multivector x(n);
        x.c_[a] = v;
        return x;
    }

    int dim() const { return n_; }
    std::size_t size() const { return c_.size(); }

    double operator[](BladeMask a) const { return c_[a]; }
    double& operator[](BladeMask a) { return c_[a]; }

    const std::vector<double>& coeffs() const { return c_; }

    Multivector& operator+=(const Multivector& o) {
        require_same_dim(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    Multivector& operator-=(const Multivector& o) {
        require_same_dim(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Multivector& operator*=(double s) {
        for (double& v : c_) v *= s;
        return *this;
    }

    friend Multivector operator+(Multivector a, const Multivector& b) { return a += b; }
    friend Multivector operator-(Multivector a, const Multivector& b) { return a -= b; }
    friend Multivector operator*(Multivector a, double s) { return a *= s; }
    friend Multivector operator*(double s, Multivector a) { return a *= s; }
    friend Multivector operator-(Multivector a) { return a *= -1.0; }

    double max_abs() const {
        double m = 0.0;
        for (double v : c_) m = std::max(m, std::abs(v));
        return m;
    }

    void require_same_dim(const Multivector& o) const {
        if (n_ != o.n_) throw std::invalid_argument("multivector dimension mismatch");
    }

private:
    int n_;
    std::vector<double> c_;
};

// Bilinear extension of the blade product.
inline Multivector mul(const Multivector& x, const Multivector& y) {
    x.require_same_dim(y);
    const int n = x.dim();
    const std::size_t N = x.size();
    Multivector out(n);
    for (BladeMask a = 0; a < N; ++a) {
        const double xa = x[a];
        if (xa == 0.0) continue;
        for (BladeMask b = 0; b < N; ++b) {
            const double yb = y[b];
            if (yb == 0.0) continue;
            out[a ^ b] += detail::product_sign(a, b) * xa * yb;
        }
    }
    return out;
}

// Right multiplication x*c; kept as a named entry point because the left
// S-resolvent applies the spectral parameter from the right.
inline Multivector right_mul(const Multivector& x, const Multivector& c) { return mul(x, c); }

inline Multivector conjugate(const Multivector& x) {
    Multivector out(x.dim());
    for (BladeMask a = 0; a < x.size(); ++a)
        out[a] = detail::conjugation_sign(a) * x[a];
    return out;
}

inline double scalar_part(const Multivector& x) { return x[0]; }

inline double coefficient(const Multivector& x, BladeMask a) {
    if (a & ~full_mask(x.dim()))
        throw std::invalid_argument("blade index out of range");
    return x[a];
}

inline double norm(const Multivector& x) {
    double s = 0.0;
    for (double v : x.coeffs()) s += v * v;
    return std::sqrt(s);
}

// Real matrix of left multiplication: vec(c*x) = left_rep_matrix(c) * vec(x).
inline Eigen::MatrixXd left_rep_matrix(const Multivector& c) {
    const std::size_t N = c.size();
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N),
                                              static_cast<Eigen::Index>(N));
    for (BladeMask cc = 0; cc < N; ++cc) {
        const double v = c[cc];
        if (v == 0.0) continue;
        for (BladeMask a = 0; a < N; ++a)
            L(cc ^ a, a) += detail::product_sign(cc, a) * v;
    }
    return L;
}

// Paravector s = s0 + s_1 e_1 + ... + s_n e_n.
struct Paravector {
    double s0 = 0.0;
    std::vector<double> vec; // coefficients of e_1..e_n

    Paravector() = default;
    Paravector(double real, std::vector<double> imag) : s0(real), vec(std::move(imag)) {
        check_dimension(dim());
    }

    int dim() const { return static_cast<int>(vec.size()); }

    double modulus2() const {
        double m = s0 * s0;
        for (double v : vec) m += v * v;
        return m;
    }
    double modulus() const { return std::sqrt(modulus2()); }

    // |s_1 e_1 + ... + s_n e_n|
    double imag_modulus() const {
        double m = 0.0;
        for (double v : vec) m += v * v;
        return std::sqrt(m);
    }

    Multivector to_multivector() const {
        Multivector x(dim());
        x[0] = s0;
        for (int i = 0; i < dim(); ++i) x[BladeMask{1} << i] = vec[static_cast<std::size_t>(i)];
        return x;
    }

    Paravector conj() const {
        Paravector c = *this;
        for (double& v : c.vec) v = -v;
        return c;
    }
};

} // namespace sspec
