#pragma once

#include "sspec/clifford.hpp"
#include "sspec/poly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace sspec {

enum class Geometry { euclidean, hyperbolic, spherical };

inline const char* to_string(Geometry g) {
    switch (g) {
        case Geometry::euclidean: return "euclidean";
        case Geometry::hyperbolic: return "hyperbolic";
        case Geometry::spherical: return "spherical";
    }
    return "?";
}

// Axis-aligned box; for hyperbolic geometry the last coordinate is y and the
// box must stay in the upper half space.
struct BoxDomain {
    int dim = 0;
    std::vector<double> lo, hi;
    Geometry geometry = Geometry::euclidean;

    BoxDomain() = default;
    BoxDomain(std::vector<double> lo_, std::vector<double> hi_,
              Geometry g = Geometry::euclidean)
        : dim(static_cast<int>(lo_.size())), lo(std::move(lo_)), hi(std::move(hi_)), geometry(g) {
        validate();
    }

    void validate() const {
        check_dimension(dim);
        if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim)
            throw std::invalid_argument("box bounds length mismatch");
        for (int i = 0; i < dim; ++i)
            if (!(lo[static_cast<std::size_t>(i)] < hi[static_cast<std::size_t>(i)]))
                throw std::invalid_argument("box requires lo < hi per axis");
        if (geometry == Geometry::hyperbolic && !(lo[static_cast<std::size_t>(dim - 1)] > 0.0))
            throw std::invalid_argument("hyperbolic domain requires lo_n > 0 (last axis is y)");
    }

    double length(int axis) const { return hi[static_cast<std::size_t>(axis)] - lo[static_cast<std::size_t>(axis)]; }
};

struct DomainExtrema {
    double m, M;
};

// Hyperbolic: extrema of y over the box. Spherical: extrema of |x| over the
// closed box. Euclidean: (0, farthest corner).
inline DomainExtrema domain_extrema(const BoxDomain& d) {
    d.validate();
    const std::size_t last = static_cast<std::size_t>(d.dim - 1);
    switch (d.geometry) {
        case Geometry::hyperbolic:
            return {d.lo[last], d.hi[last]};
        case Geometry::spherical: {
            double near2 = 0.0, far2 = 0.0;
            for (int i = 0; i < d.dim; ++i) {
                const double a = d.lo[static_cast<std::size_t>(i)], b = d.hi[static_cast<std::size_t>(i)];
                const double nearest = std::max({a, -b, 0.0});
                near2 += nearest * nearest;
                far2 += std::max(a * a, b * b);
            }
            return {std::sqrt(near2), std::sqrt(far2)};
        }
        case Geometry::euclidean: {
            double far2 = 0.0;
            for (int i = 0; i < d.dim; ++i) {
                const double a = d.lo[static_cast<std::size_t>(i)], b = d.hi[static_cast<std::size_t>(i)];
                far2 += std::max(a * a, b * b);
            }
            return {0.0, std::sqrt(far2)};
        }
    }
    throw std::logic_error("unreachable");
}

// Sharp Poincare constant for a box: the lowest Dirichlet Laplacian eigenvalue
// is sum_i (pi/L_i)^2, so C_P = (sum_i (pi/L_i)^2)^{-1/2}.
inline double poincare_constant_box(const BoxDomain& d) {
    d.validate();
    double s = 0.0;
    for (int i = 0; i < d.dim; ++i) {
        const double li = d.length(i);
        s += (M_PI / li) * (M_PI / li);
    }
    return 1.0 / std::sqrt(s);
}

// 4-point Gauss-Legendre rule on [0,1]: exact through degree 7 per variable.
// Every integrand in the assembled forms is a coefficient of per-variable
// degree <= 4 times a product of multilinear factors (degree <= 3), so all
// quadratures here are exact and the discrete forms equal the true forms on
// the discrete space.
struct Quad4 {
    static constexpr int count = 4;

    static const std::array<double, 4>& nodes() {
        static const std::array<double, 4> x = [] {
            const double a1 = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(1.2));
            const double a2 = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(1.2));
            return std::array<double, 4>{0.5 * (1 - a2), 0.5 * (1 - a1), 0.5 * (1 + a1),
                                         0.5 * (1 + a2)};
        }();
        return x;
    }

    static const std::array<double, 4>& weights() {
        static const std::array<double, 4> w = [] {
            const double w1 = (18.0 + std::sqrt(30.0)) / 36.0;
            const double w2 = (18.0 - std::sqrt(30.0)) / 36.0;
            return std::array<double, 4>{0.5 * w2, 0.5 * w1, 0.5 * w1, 0.5 * w2};
        }();
        return w;
    }
};

// Tensor-product grid over a box; nodes ordered lexicographically with the
// last axis fastest.
struct Grid {
    BoxDomain domain;
    std::vector<int> res; // cells per axis, >= 2 each

    Grid() = default;
    Grid(BoxDomain d, std::vector<int> r) : domain(std::move(d)), res(std::move(r)) {
        domain.validate();
        if (static_cast<int>(res.size()) != domain.dim)
            throw std::invalid_argument("grid resolution length mismatch");
        for (int r_i : res)
            if (r_i < 2) throw std::invalid_argument("grid needs at least 2 cells per axis");
    }

    int dim() const { return domain.dim; }

    long node_count() const {
        long n = 1;
        for (int r : res) n *= (r + 1);
        return n;
    }

    long cell_count() const {
        long n = 1;
        for (int r : res) n *= r;
        return n;
    }

    double spacing(int axis) const { return domain.length(axis) / res[static_cast<std::size_t>(axis)]; }

    long node_index(const std::vector<int>& iv) const {
        long idx = 0;
        for (int k = 0; k < dim(); ++k) idx = idx * (res[static_cast<std::size_t>(k)] + 1) + iv[static_cast<std::size_t>(k)];
        return idx;
    }

    std::vector<int> node_multi(long idx) const {
        std::vector<int> iv(static_cast<std::size_t>(dim()));
        for (int k = dim() - 1; k >= 0; --k) {
            const int span = res[static_cast<std::size_t>(k)] + 1;
            iv[static_cast<std::size_t>(k)] = static_cast<int>(idx % span);
            idx /= span;
        }
        return iv;
    }

    bool is_boundary_multi(const std::vector<int>& iv) const {
        for (int k = 0; k < dim(); ++k) {
            const int i = iv[static_cast<std::size_t>(k)];
            if (i == 0 || i == res[static_cast<std::size_t>(k)]) return true;
        }
        return false;
    }

    bool is_boundary_node(long idx) const { return is_boundary_multi(node_multi(idx)); }

    std::vector<double> node_coords(const std::vector<int>& iv) const {
        std::vector<double> x(static_cast<std::size_t>(dim()));
        for (int k = 0; k < dim(); ++k)
            x[static_cast<std::size_t>(k)] = domain.lo[static_cast<std::size_t>(k)] + iv[static_cast<std::size_t>(k)] * spacing(k);
        return x;
    }

    long cell_index(const std::vector<int>& ic) const {
        long idx = 0;
        for (int k = 0; k < dim(); ++k) idx = idx * res[static_cast<std::size_t>(k)] + ic[static_cast<std::size_t>(k)];
        return idx;
    }

    std::vector<int> cell_multi(long idx) const {
        std::vector<int> ic(static_cast<std::size_t>(dim()));
        for (int k = dim() - 1; k >= 0; --k) {
            ic[static_cast<std::size_t>(k)] = static_cast<int>(idx % res[static_cast<std::size_t>(k)]);
            idx /= res[static_cast<std::size_t>(k)];
        }
        return ic;
    }

    // Node index of cell corner `corner` (bit k set = upper end along axis k).
    long cell_corner_node(const std::vector<int>& ic, unsigned corner) const {
        std::vector<int> iv(ic);
        for (int k = 0; k < dim(); ++k)
            if (corner & (1u << k)) ++iv[static_cast<std::size_t>(k)];
        return node_index(iv);
    }

    bool same_as(const Grid& o) const {
        return domain.dim == o.domain.dim && domain.lo == o.domain.lo && domain.hi == o.domain.hi &&
               domain.geometry == o.domain.geometry && res == o.res;
    }
};

// Nodal multivector values on a grid, stored node-major / blade-minor.
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(Grid g)
        : grid_(std::move(g)), blades_(std::size_t{1} << grid_.dim()),
          v_(static_cast<std::size_t>(grid_.node_count()) * blades_, 0.0) {}

    const Grid& grid() const { return grid_; }
    int dim() const { return grid_.dim(); }
    std::size_t blades() const { return blades_; }
    long nodes() const { return grid_.node_count(); }

    double at(long node, BladeMask blade) const { return v_[static_cast<std::size_t>(node) * blades_ + blade]; }
    double& at(long node, BladeMask blade) { return v_[static_cast<std::size_t>(node) * blades_ + blade]; }

    Multivector value(long node) const {
        Multivector m(grid_.dim());
        for (BladeMask b = 0; b < blades_; ++b) m[b] = at(node, b);
        return m;
    }
    void set_value(long node, const Multivector& m) {
        for (BladeMask b = 0; b < blades_; ++b) at(node, b) = m[b];
    }

    const std::vector<double>& data() const { return v_; }
    std::vector<double>& data() { return v_; }

    void zero_boundary() {
        for (long k = 0; k < nodes(); ++k)
            if (grid_.is_boundary_node(k))
                for (BladeMask b = 0; b < blades_; ++b) at(k, b) = 0.0;
    }

    bool boundary_is_zero() const {
        for (long k = 0; k < nodes(); ++k)
            if (grid_.is_boundary_node(k))
                for (BladeMask b = 0; b < blades_; ++b)
                    if (at(k, b) != 0.0) return false;
        return true;
    }

    GridFunction& operator+=(const GridFunction& o) {
        require_same_grid(o);
        for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
        return *this;
    }
    GridFunction& operator-=(const GridFunction& o) {
        require_same_grid(o);
        for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
        return *this;
    }
    GridFunction& operator*=(double s) {
        for (double& x : v_) x *= s;
        return *this;
    }
    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(GridFunction a, double s) { return a *= s; }

    void require_same_grid(const GridFunction& o) const {
        if (!grid_.same_as(o.grid_)) throw std::invalid_argument("grid mismatch");
    }

private:
    Grid grid_;
    std::size_t blades_ = 0;
    std::vector<double> v_;
};

inline GridFunction left_mul(const Multivector& c, const GridFunction& f) {
    GridFunction out(f.grid());
    for (long k = 0; k < f.nodes(); ++k) out.set_value(k, mul(c, f.value(k)));
    return out;
}

inline GridFunction right_mul(const GridFunction& f, const Multivector& c) {
    GridFunction out(f.grid());
    for (long k = 0; k < f.nodes(); ++k) out.set_value(k, mul(f.value(k), c));
    return out;
}

namespace detail {

// Per-cell evaluation scaffold for the multilinear interpolant: corner basis
// values and derivatives at one quadrature point.
struct CellBasis {
    std::vector<double> phi;             // per corner
    std::vector<std::vector<double>> dphi; // per corner, per axis (global derivative)

    void resize(int dim) {
        const std::size_t corners = std::size_t{1} << dim;
        phi.assign(corners, 0.0);
        dphi.assign(corners, std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    }

    // t = local coordinates in [0,1]^dim, h = spacings
    void eval(const std::vector<double>& t, const std::vector<double>& h) {
        const int dim = static_cast<int>(t.size());
        const std::size_t corners = std::size_t{1} << dim;
        for (unsigned c = 0; c < corners; ++c) {
            double p = 1.0;
            for (int k = 0; k < dim; ++k)
                p *= (c & (1u << k)) ? t[static_cast<std::size_t>(k)] : 1.0 - t[static_cast<std::size_t>(k)];
            phi[c] = p;
            for (int k = 0; k < dim; ++k) {
                double g = (c & (1u << k)) ? 1.0 : -1.0;
                for (int j = 0; j < dim; ++j) {
                    if (j == k) continue;
                    g *= (c & (1u << j)) ? t[static_cast<std::size_t>(j)] : 1.0 - t[static_cast<std::size_t>(j)];
                }
                dphi[c][static_cast<std::size_t>(k)] = g / h[static_cast<std::size_t>(k)];
            }
        }
    }
};

// Visit every (cell, quadrature point): fn(corner_nodes, basis, x, weight).
template <typename Fn>
void for_each_quad_point(const Grid& g, Fn&& fn) {
    const int dim = g.dim();
    const std::size_t corners = std::size_t{1} << dim;
    std::vector<double> h(static_cast<std::size_t>(dim));
    double cellvol = 1.0;
    for (int k = 0; k < dim; ++k) {
        h[static_cast<std::size_t>(k)] = g.spacing(k);
        cellvol *= h[static_cast<std::size_t>(k)];
    }
    const auto& qn = Quad4::nodes();
    const auto& qw = Quad4::weights();

    CellBasis basis;
    basis.resize(dim);
    std::vector<long> corner_nodes(corners);
    std::vector<double> t(static_cast<std::size_t>(dim)), x(static_cast<std::size_t>(dim));
    std::vector<int> qi(static_cast<std::size_t>(dim), 0);

    const long ncells = g.cell_count();
    for (long ci = 0; ci < ncells; ++ci) {
        const std::vector<int> ic = g.cell_multi(ci);
        for (unsigned c = 0; c < corners; ++c) corner_nodes[c] = g.cell_corner_node(ic, c);
        std::vector<double> cell_lo(static_cast<std::size_t>(dim));
        for (int k = 0; k < dim; ++k)
            cell_lo[static_cast<std::size_t>(k)] = g.domain.lo[static_cast<std::size_t>(k)] + ic[static_cast<std::size_t>(k)] * h[static_cast<std::size_t>(k)];

        std::fill(qi.begin(), qi.end(), 0);
        while (true) {
            double w = cellvol;
            for (int k = 0; k < dim; ++k) {
                t[static_cast<std::size_t>(k)] = qn[static_cast<std::size_t>(qi[static_cast<std::size_t>(k)])];
                w *= qw[static_cast<std::size_t>(qi[static_cast<std::size_t>(k)])];
                x[static_cast<std::size_t>(k)] = cell_lo[static_cast<std::size_t>(k)] + t[static_cast<std::size_t>(k)] * h[static_cast<std::size_t>(k)];
            }
            basis.eval(t, h);
            fn(corner_nodes, basis, x, w);

            int k = dim - 1;
            while (k >= 0 && ++qi[static_cast<std::size_t>(k)] == Quad4::count) {
                qi[static_cast<std::size_t>(k)] = 0;
                --k;
            }
            if (k < 0) break;
        }
    }
}

} // namespace detail

// Integral of conj(F) G over the box, with F and G the multilinear
// interpolants of the nodal data. Fixed summation order keeps this
// deterministic.
inline Multivector inner_product_L2(const GridFunction& F, const GridFunction& G) {
    F.require_same_grid(G);
    const int n = F.dim();
    const std::size_t blades = F.blades();
    Multivector acc(n);
    std::vector<double> fq(blades), gq(blades);
    detail::for_each_quad_point(F.grid(), [&](const std::vector<long>& nodes,
                                              const detail::CellBasis& b,
                                              const std::vector<double>&, double w) {
        std::fill(fq.begin(), fq.end(), 0.0);
        std::fill(gq.begin(), gq.end(), 0.0);
        for (std::size_t c = 0; c < nodes.size(); ++c) {
            const double p = b.phi[c];
            if (p == 0.0) continue;
            for (BladeMask a = 0; a < blades; ++a) {
                fq[a] += p * F.at(nodes[c], a);
                gq[a] += p * G.at(nodes[c], a);
            }
        }
        // conj(f) g expanded over blades
        for (BladeMask a = 0; a < blades; ++a) {
            const double fa = fq[a];
            if (fa == 0.0) continue;
            const double ca = detail::conjugation_sign(a) * fa;
            for (BladeMask bq = 0; bq < blades; ++bq) {
                const double gb = gq[bq];
                if (gb == 0.0) continue;
                acc[a ^ bq] += w * detail::product_sign(a, bq) * ca * gb;
            }
        }
    });
    return acc;
}

// Sc<F,G>_2 = sum_A integral F_A G_A; cheaper than the full product.
inline double sc_inner_product_L2(const GridFunction& F, const GridFunction& G) {
    F.require_same_grid(G);
    const std::size_t blades = F.blades();
    double acc = 0.0;
    std::vector<double> fq(blades), gq(blades);
    detail::for_each_quad_point(F.grid(), [&](const std::vector<long>& nodes,
                                              const detail::CellBasis& b,
                                              const std::vector<double>&, double w) {
        std::fill(fq.begin(), fq.end(), 0.0);
        std::fill(gq.begin(), gq.end(), 0.0);
        for (std::size_t c = 0; c < nodes.size(); ++c) {
            const double p = b.phi[c];
            for (BladeMask a = 0; a < blades; ++a) {
                fq[a] += p * F.at(nodes[c], a);
                gq[a] += p * G.at(nodes[c], a);
            }
        }
        for (BladeMask a = 0; a < blades; ++a) acc += w * fq[a] * gq[a];
    });
    return acc;
}

inline double norm_L2(const GridFunction& F) { return std::sqrt(std::max(0.0, sc_inner_product_L2(F, F))); }

// Sobolev seminorm: L2 norm of the interpolant's exact gradient.
inline double seminorm_D(const GridFunction& F) {
    const int dim = F.dim();
    const std::size_t blades = F.blades();
    double acc = 0.0;
    std::vector<double> dq(static_cast<std::size_t>(dim) * blades);
    detail::for_each_quad_point(F.grid(), [&](const std::vector<long>& nodes,
                                              const detail::CellBasis& b,
                                              const std::vector<double>&, double w) {
        std::fill(dq.begin(), dq.end(), 0.0);
        for (std::size_t c = 0; c < nodes.size(); ++c) {
            for (int k = 0; k < dim; ++k) {
                const double d = b.dphi[c][static_cast<std::size_t>(k)];
                if (d == 0.0) continue;
                for (BladeMask a = 0; a < blades; ++a)
                    dq[static_cast<std::size_t>(k) * blades + a] += d * F.at(nodes[c], a);
            }
        }
        for (double v : dq) acc += w * v * v;
    });
    return std::sqrt(std::max(0.0, acc));
}

inline GridFunction sample_poly_to_grid(const PolyField& f, const Grid& g) {
    if (f.dim() != g.dim()) throw std::invalid_argument("polynomial/grid dimension mismatch");
    GridFunction out(g);
    for (long k = 0; k < g.node_count(); ++k)
        out.set_value(k, f.eval(g.node_coords(g.node_multi(k))));
    return out;
}

// Seeded random nodal data with coefficients in [-1,1]; optionally
// Dirichlet-constrained (zero at boundary nodes).
inline GridFunction random_grid_function(const Grid& g, std::mt19937_64& rng, bool constrained) {
    GridFunction out(g);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (long k = 0; k < g.node_count(); ++k)
        for (BladeMask b = 0; b < out.blades(); ++b) out.at(k, b) = dist(rng);
    if (constrained) out.zero_boundary();
    return out;
}

inline Multivector random_multivector(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Multivector m(n);
    for (BladeMask b = 0; b < m.size(); ++b) m[b] = dist(rng);
    return m;
}

// Random polynomial field of total degree <= max_degree with coefficients in [-1,1].
inline PolyField random_poly_field(int n, int max_degree, std::mt19937_64& rng,
                                   int degree_cap = PolyField::default_degree_cap) {
    PolyField f(n, degree_cap);
    // enumerate all exponent multi-indices of total degree <= max_degree
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    while (true) {
        if (total_degree(e) <= max_degree) f.add_term(e, random_multivector(n, rng));
        int k = n - 1;
        while (k >= 0 && ++e[static_cast<std::size_t>(k)] > max_degree) {
            e[static_cast<std::size_t>(k)] = 0;
            --k;
        }
        if (k < 0) break;
    }
    return f;
}

} // namespace sspec
