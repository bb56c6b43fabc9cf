#pragma once

#include "sspec/fields.hpp"
#include "sspec/operators.hpp"
#include "sspec/regions.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace sspec {

enum class BoundaryCondition { dirichlet, robin };

inline const char* to_string(BoundaryCondition bc) {
    return bc == BoundaryCondition::dirichlet ? "dirichlet" : "robin";
}
inline BoundaryCondition parse_boundary_condition(const std::string& s) {
    if (s == "dirichlet") return BoundaryCondition::dirichlet;
    if (s == "robin") return BoundaryCondition::robin;
    throw std::invalid_argument("boundary condition must be 'dirichlet' or 'robin'");
}

struct FormSpec {
    Geometry geometry = Geometry::hyperbolic;
    BoundaryCondition bc = BoundaryCondition::dirichlet;
    Paravector s;
    std::optional<double> b;             // constant Robin coefficient
    double trace_norm = std::numeric_limits<double>::quiet_NaN(); // reporting only
    RobinCoeffMode robin_mode = RobinCoeffMode::proof;
};

using SparseMat = Eigen::SparseMatrix<double>;

// Discrete realization of the sesquilinear form: one real block-sparse system
// of dimension 2^n * N_free, rows indexed by (test node, test blade). The
// scalar mass/stiffness/boundary-mass companions act blade-diagonally.
struct FormOperator {
    Grid grid;
    FormSpec spec;
    std::size_t blades = 0;
    long n_free = 0;
    std::vector<long> free_index; // node -> free slot, -1 when constrained
    std::vector<long> free_nodes; // free slot -> node
    SparseMat system;
    SparseMat mass, stiffness, boundary_mass;

    long system_dim() const { return n_free * static_cast<long>(blades); }
};

namespace detail {

// Face-restricted quadrature: visits every quadrature point of every boundary
// facet with the facet's corner nodes and multilinear basis values.
template <typename Fn>
void for_each_boundary_quad_point(const Grid& g, Fn&& fn) {
    const int dim = g.dim();
    const auto& qn = Quad4::nodes();
    const auto& qw = Quad4::weights();

    for (int axis = 0; axis < dim; ++axis) {
        for (int side = 0; side <= 1; ++side) {
            const int fixed_i = side == 0 ? 0 : g.res[static_cast<std::size_t>(axis)];
            std::vector<int> other;
            for (int k = 0; k < dim; ++k)
                if (k != axis) other.push_back(k);
            const int fdim = dim - 1;
            double facet_vol = 1.0;
            for (int k : other) facet_vol *= g.spacing(k);

            // iterate face cells (multi-index over `other` axes)
            std::vector<int> fc(static_cast<std::size_t>(fdim), 0);
            const std::size_t fcorners = std::size_t{1} << fdim;
            std::vector<long> nodes(fcorners);
            std::vector<double> phi(fcorners), t(static_cast<std::size_t>(fdim)),
                x(static_cast<std::size_t>(dim));
            std::vector<int> qi(static_cast<std::size_t>(fdim), 0);
            while (true) {
                // corner nodes of this facet
                for (unsigned c = 0; c < fcorners; ++c) {
                    std::vector<int> iv(static_cast<std::size_t>(dim));
                    iv[static_cast<std::size_t>(axis)] = fixed_i;
                    for (int j = 0; j < fdim; ++j)
                        iv[static_cast<std::size_t>(other[static_cast<std::size_t>(j)])] =
                            fc[static_cast<std::size_t>(j)] + ((c >> j) & 1u);
                    nodes[c] = g.node_index(iv);
                }
                // tensor quadrature over the facet
                std::fill(qi.begin(), qi.end(), 0);
                while (true) {
                    double w = facet_vol;
                    for (int j = 0; j < fdim; ++j) {
                        t[static_cast<std::size_t>(j)] = qn[static_cast<std::size_t>(qi[static_cast<std::size_t>(j)])];
                        w *= qw[static_cast<std::size_t>(qi[static_cast<std::size_t>(j)])];
                    }
                    x[static_cast<std::size_t>(axis)] =
                        g.domain.lo[static_cast<std::size_t>(axis)] + fixed_i * g.spacing(axis);
                    for (int j = 0; j < fdim; ++j) {
                        const int k = other[static_cast<std::size_t>(j)];
                        x[static_cast<std::size_t>(k)] =
                            g.domain.lo[static_cast<std::size_t>(k)] +
                            (fc[static_cast<std::size_t>(j)] + t[static_cast<std::size_t>(j)]) * g.spacing(k);
                    }
                    for (unsigned c = 0; c < fcorners; ++c) {
                        double p = 1.0;
                        for (int j = 0; j < fdim; ++j)
                            p *= (c & (1u << j)) ? t[static_cast<std::size_t>(j)]
                                                 : 1.0 - t[static_cast<std::size_t>(j)];
                        phi[c] = p;
                    }
                    fn(axis, side, nodes, phi, x, w);

                    int j = fdim - 1;
                    while (j >= 0 && ++qi[static_cast<std::size_t>(j)] == Quad4::count) {
                        qi[static_cast<std::size_t>(j)] = 0;
                        --j;
                    }
                    if (j < 0) break;
                }

                int j = fdim - 1;
                while (j >= 0 && ++fc[static_cast<std::size_t>(j)] ==
                                     g.res[static_cast<std::size_t>(other[static_cast<std::size_t>(j)])]) {
                    fc[static_cast<std::size_t>(j)] = 0;
                    --j;
                }
                if (j < 0) break;
            }
        }
    }
}

} // namespace detail

// Scalar nodal mass matrix  M[a,b] = integral phi_a phi_b.
inline SparseMat scalar_mass(const Grid& g) {
    const long N = g.node_count();
    std::vector<Eigen::Triplet<double>> trip;
    detail::for_each_quad_point(g, [&](const std::vector<long>& nodes, const detail::CellBasis& b,
                                       const std::vector<double>&, double w) {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            for (std::size_t j = 0; j < nodes.size(); ++j)
                trip.emplace_back(static_cast<int>(nodes[i]), static_cast<int>(nodes[j]),
                                  w * b.phi[i] * b.phi[j]);
    });
    SparseMat M(static_cast<int>(N), static_cast<int>(N));
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

// Scalar stiffness  S[a,b] = sum_k integral d_k phi_a d_k phi_b.
inline SparseMat scalar_stiffness(const Grid& g) {
    const long N = g.node_count();
    const int dim = g.dim();
    std::vector<Eigen::Triplet<double>> trip;
    detail::for_each_quad_point(g, [&](const std::vector<long>& nodes, const detail::CellBasis& b,
                                       const std::vector<double>&, double w) {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            for (std::size_t j = 0; j < nodes.size(); ++j) {
                double acc = 0.0;
                for (int k = 0; k < dim; ++k)
                    acc += b.dphi[i][static_cast<std::size_t>(k)] * b.dphi[j][static_cast<std::size_t>(k)];
                trip.emplace_back(static_cast<int>(nodes[i]), static_cast<int>(nodes[j]), w * acc);
            }
    });
    SparseMat S(static_cast<int>(N), static_cast<int>(N));
    S.setFromTriplets(trip.begin(), trip.end());
    return S;
}

// Scalar boundary mass  B[a,b] = integral_{dOmega} phi_a phi_b.
inline SparseMat scalar_boundary_mass(const Grid& g) {
    const long N = g.node_count();
    std::vector<Eigen::Triplet<double>> trip;
    detail::for_each_boundary_quad_point(
        g, [&](int, int, const std::vector<long>& nodes, const std::vector<double>& phi,
               const std::vector<double>&, double w) {
            for (std::size_t i = 0; i < nodes.size(); ++i)
                for (std::size_t j = 0; j < nodes.size(); ++j)
                    trip.emplace_back(static_cast<int>(nodes[i]), static_cast<int>(nodes[j]),
                                      w * phi[i] * phi[j]);
        });
    SparseMat B(static_cast<int>(N), static_cast<int>(N));
    B.setFromTriplets(trip.begin(), trip.end());
    return B;
}

namespace detail {

// One bilinear contribution  Sc< coeff(x) * cliff * D1 F , D2 G >: Clifford
// constants enter through their left-representation matrix, scalar constants
// stay blade-diagonal.
struct VolumeTerm {
    Eigen::MatrixXd L;
    bool scalar = false;
    double scalar_value = 0.0;
    std::function<double(const std::vector<double>&)> coeff;
    int d1 = -1;
    int d2 = -1;
};

inline VolumeTerm scalar_term(int n, double value,
                              std::function<double(const std::vector<double>&)> coeff, int d1,
                              int d2) {
    VolumeTerm t;
    t.scalar = true;
    t.scalar_value = value;
    t.L = value * Eigen::MatrixXd::Identity(1 << n, 1 << n);
    t.coeff = std::move(coeff);
    t.d1 = d1;
    t.d2 = d2;
    return t;
}

inline VolumeTerm clifford_term(const Multivector& c,
                                std::function<double(const std::vector<double>&)> coeff, int d1,
                                int d2) {
    VolumeTerm t;
    t.L = left_rep_matrix(c);
    t.coeff = std::move(coeff);
    t.d1 = d1;
    t.d2 = d2;
    return t;
}

inline std::vector<VolumeTerm> hyperbolic_terms(int n, const Paravector& s) {
    const auto [alpha, beta] = structure_constants(n);
    const int y_axis = n - 1;
    auto y2 = [y_axis](const std::vector<double>& x) {
        const double y = x[static_cast<std::size_t>(y_axis)];
        return y * y;
    };
    auto y1 = [y_axis](const std::vector<double>& x) { return x[static_cast<std::size_t>(y_axis)]; };
    auto one = [](const std::vector<double>&) { return 1.0; };

    std::vector<VolumeTerm> terms;
    // sum_i <y^2 d_i F, d_i G>
    for (int i = 0; i < n; ++i) terms.push_back(scalar_term(n, 1.0, y2, i, i));
    // 2(1+alpha) <y d_y F, G>
    terms.push_back(scalar_term(n, 2.0 * (1.0 + alpha), y1, y_axis, -1));
    // <(e_n - 2 s0) D_H F, G> with D_H = sum_i e_i y d_i - alpha e_n
    Multivector c = Multivector::basis(n, BladeMask{1} << y_axis);
    c[0] -= 2.0 * s.s0;
    for (int i = 0; i < n; ++i)
        terms.push_back(clifford_term(mul(c, Multivector::basis(n, BladeMask{1} << i)), y1, i, -1));
    terms.push_back(clifford_term(
        mul(c, Multivector::basis(n, BladeMask{1} << y_axis, -alpha)), one, -1, -1));
    // (|s|^2 - beta) <F, G>
    terms.push_back(scalar_term(n, s.modulus2() - beta, one, -1, -1));
    return terms;
}

inline std::vector<VolumeTerm> spherical_terms(int n, const Paravector& s) {
    auto r2p1 = [](const std::vector<double>& x) {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        return 1.0 + r2;
    };
    auto r2p1_sq = [r2p1](const std::vector<double>& x) {
        const double v = r2p1(x);
        return v * v;
    };
    auto one = [](const std::vector<double>&) { return 1.0; };

    std::vector<VolumeTerm> terms;
    // sum_i <(1+|x|^2)^2 d_i F, d_i G>
    for (int i = 0; i < n; ++i) terms.push_back(scalar_term(n, 1.0, r2p1_sq, i, i));
    // 2(2+n) <(1+|x|^2) E F, G>
    for (int j = 0; j < n; ++j) {
        auto cj = [r2p1, j](const std::vector<double>& x) {
            return r2p1(x) * x[static_cast<std::size_t>(j)];
        };
        terms.push_back(scalar_term(n, 2.0 * (2.0 + n), cj, j, -1));
    }
    // 2 <(1+|x|^2) x D_e F, G>
    for (int j = 0; j < n; ++j) {
        auto cj = [r2p1, j](const std::vector<double>& x) {
            return r2p1(x) * x[static_cast<std::size_t>(j)];
        };
        for (int i = 0; i < n; ++i) {
            const Multivector eji = mul(Multivector::basis(n, BladeMask{1} << j, 2.0),
                                        Multivector::basis(n, BladeMask{1} << i));
            terms.push_back(clifford_term(eji, cj, i, -1));
        }
    }
    // -2 s0 <D_S F, G> with D_S = (1+|x|^2) sum_i e_i d_i - n x
    if (s.s0 != 0.0) {
        for (int i = 0; i < n; ++i)
            terms.push_back(clifford_term(Multivector::basis(n, BladeMask{1} << i, -2.0 * s.s0),
                                          r2p1, i, -1));
        for (int j = 0; j < n; ++j) {
            auto xj = [j](const std::vector<double>& x) { return x[static_cast<std::size_t>(j)]; };
            terms.push_back(clifford_term(
                Multivector::basis(n, BladeMask{1} << j, 2.0 * s.s0 * static_cast<double>(n)), xj,
                -1, -1));
        }
    }
    // (|s|^2 + n^2) <F, G>
    terms.push_back(scalar_term(n, s.modulus2() + static_cast<double>(n) * n, one, -1, -1));
    return terms;
}

} // namespace detail

// Galerkin assembly of the sesquilinear form over the nodal multilinear space.
// Rows are Sc(q_s(., phi_k e_B)); Dirichlet eliminates boundary rows/columns,
// Robin keeps every node and adds the b-weighted boundary mass.
inline FormOperator assemble(const Grid& grid, const FormSpec& spec) {
    const int n = grid.dim();
    if (n < 2 || n > 4) throw std::invalid_argument("solver supports dimensions 2..4");
    if (spec.geometry != grid.domain.geometry)
        throw std::invalid_argument("form geometry does not match the grid domain");
    if (spec.geometry == Geometry::euclidean)
        throw std::invalid_argument("forms are defined for hyperbolic and spherical geometry");
    if (spec.s.dim() != n) throw std::invalid_argument("paravector dimension mismatch");
    if (spec.bc == BoundaryCondition::robin && !spec.b.has_value())
        throw std::invalid_argument("robin form requires the boundary coefficient b");
    grid.domain.validate();

    FormOperator op;
    op.grid = grid;
    op.spec = spec;
    op.blades = std::size_t{1} << n;

    const long N = grid.node_count();
    op.free_index.assign(static_cast<std::size_t>(N), -1);
    for (long k = 0; k < N; ++k) {
        if (spec.bc == BoundaryCondition::dirichlet && grid.is_boundary_node(k)) continue;
        op.free_index[static_cast<std::size_t>(k)] = static_cast<long>(op.free_nodes.size());
        op.free_nodes.push_back(k);
    }
    op.n_free = static_cast<long>(op.free_nodes.size());

    op.mass = scalar_mass(grid);
    op.stiffness = scalar_stiffness(grid);
    op.boundary_mass = scalar_boundary_mass(grid);

    const std::vector<detail::VolumeTerm> terms = spec.geometry == Geometry::hyperbolic
                                                      ? detail::hyperbolic_terms(n, spec.s)
                                                      : detail::spherical_terms(n, spec.s);

    const std::size_t corners = std::size_t{1} << n;
    const std::size_t blades = op.blades;
    const long dim_sys = op.system_dim();
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::MatrixXd Aloc(static_cast<Eigen::Index>(corners * blades),
                         static_cast<Eigen::Index>(corners * blades));

    long current_cell = -1;
    std::vector<long> cell_nodes(corners);
    auto flush_cell = [&]() {
        if (current_cell < 0) return;
        for (std::size_t a = 0; a < corners; ++a) {
            const long fa = op.free_index[static_cast<std::size_t>(cell_nodes[a])];
            if (fa < 0) continue;
            for (std::size_t b = 0; b < corners; ++b) {
                const long fb = op.free_index[static_cast<std::size_t>(cell_nodes[b])];
                if (fb < 0) continue;
                for (std::size_t r = 0; r < blades; ++r)
                    for (std::size_t c = 0; c < blades; ++c) {
                        const double v = Aloc(static_cast<Eigen::Index>(b * blades + r),
                                              static_cast<Eigen::Index>(a * blades + c));
                        if (v != 0.0)
                            trip.emplace_back(static_cast<int>(fb * static_cast<long>(blades) + static_cast<long>(r)),
                                              static_cast<int>(fa * static_cast<long>(blades) + static_cast<long>(c)), v);
                    }
            }
        }
    };

    detail::for_each_quad_point(grid, [&](const std::vector<long>& nodes,
                                          const detail::CellBasis& basis,
                                          const std::vector<double>& x, double w) {
        if (nodes != cell_nodes) {
            flush_cell();
            cell_nodes = nodes;
            current_cell = 0;
            Aloc.setZero();
        }
        for (const detail::VolumeTerm& term : terms) {
            const double cf = w * term.coeff(x);
            if (cf == 0.0) continue;
            for (std::size_t a = 0; a < corners; ++a) {
                const double fa = term.d1 < 0 ? basis.phi[a]
                                              : basis.dphi[a][static_cast<std::size_t>(term.d1)];
                if (fa == 0.0) continue;
                for (std::size_t b = 0; b < corners; ++b) {
                    const double fb = term.d2 < 0
                                          ? basis.phi[b]
                                          : basis.dphi[b][static_cast<std::size_t>(term.d2)];
                    if (fb == 0.0) continue;
                    const double scale = cf * fa * fb;
                    if (term.scalar) {
                        for (std::size_t r = 0; r < blades; ++r)
                            Aloc(static_cast<Eigen::Index>(b * blades + r),
                                 static_cast<Eigen::Index>(a * blades + r)) +=
                                scale * term.scalar_value;
                    } else {
                        Aloc.block(static_cast<Eigen::Index>(b * blades),
                                   static_cast<Eigen::Index>(a * blades),
                                   static_cast<Eigen::Index>(blades),
                                   static_cast<Eigen::Index>(blades)) += scale * term.L;
                    }
                }
            }
        }
    });
    flush_cell();

    // Robin boundary term <b tau F, tau G>: blade-diagonal face mass
    if (spec.bc == BoundaryCondition::robin && *spec.b != 0.0) {
        const double bcoef = *spec.b;
        for (int col = 0; col < op.boundary_mass.outerSize(); ++col) {
            for (SparseMat::InnerIterator it(op.boundary_mass, col); it; ++it) {
                const long fa = op.free_index[static_cast<std::size_t>(it.col())];
                const long fb = op.free_index[static_cast<std::size_t>(it.row())];
                if (fa < 0 || fb < 0) continue;
                for (std::size_t r = 0; r < blades; ++r)
                    trip.emplace_back(static_cast<int>(fb * static_cast<long>(blades) + static_cast<long>(r)),
                                      static_cast<int>(fa * static_cast<long>(blades) + static_cast<long>(r)),
                                      bcoef * it.value());
            }
        }
    }

    op.system.resize(static_cast<int>(dim_sys), static_cast<int>(dim_sys));
    op.system.setFromTriplets(trip.begin(), trip.end());
    op.system.makeCompressed();
    return op;
}

inline Eigen::VectorXd gather_free(const FormOperator& op, const GridFunction& f) {
    Eigen::VectorXd v(op.system_dim());
    const std::size_t blades = op.blades;
    for (long fi = 0; fi < op.n_free; ++fi)
        for (std::size_t b = 0; b < blades; ++b)
            v(fi * static_cast<long>(blades) + static_cast<long>(b)) =
                f.at(op.free_nodes[static_cast<std::size_t>(fi)], static_cast<BladeMask>(b));
    return v;
}

inline GridFunction scatter_free(const FormOperator& op, const Eigen::VectorXd& v) {
    GridFunction f(op.grid);
    const std::size_t blades = op.blades;
    for (long fi = 0; fi < op.n_free; ++fi)
        for (std::size_t b = 0; b < blades; ++b)
            f.at(op.free_nodes[static_cast<std::size_t>(fi)], static_cast<BladeMask>(b)) =
                v(fi * static_cast<long>(blades) + static_cast<long>(b));
    return f;
}

// rhs[(k,B)] = Sc<f, phi_k e_B>_2 = (mass f_B)(k): the scalar mass applied per blade.
inline Eigen::VectorXd assemble_rhs(const FormOperator& op, const GridFunction& f) {
    f.require_same_grid(GridFunction(op.grid));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(op.system_dim());
    const std::size_t blades = op.blades;
    for (int col = 0; col < op.mass.outerSize(); ++col) {
        for (SparseMat::InnerIterator it(op.mass, col); it; ++it) {
            const long fr = op.free_index[static_cast<std::size_t>(it.row())];
            if (fr < 0) continue;
            for (std::size_t b = 0; b < blades; ++b)
                rhs(fr * static_cast<long>(blades) + static_cast<long>(b)) +=
                    it.value() * f.at(it.col(), static_cast<BladeMask>(b));
        }
    }
    return rhs;
}

// ||F||_2^2 through the scalar mass matrix; identical to the quadrature route
// because the quadrature is exact on the discrete space.
inline double norm_l2_sq(const FormOperator& op, const GridFunction& f) {
    double acc = 0.0;
    const std::size_t blades = op.blades;
    for (int col = 0; col < op.mass.outerSize(); ++col)
        for (SparseMat::InnerIterator it(op.mass, col); it; ++it) {
            double dot = 0.0;
            for (std::size_t b = 0; b < blades; ++b)
                dot += f.at(it.row(), static_cast<BladeMask>(b)) *
                       f.at(it.col(), static_cast<BladeMask>(b));
            acc += it.value() * dot;
        }
    return acc;
}

inline double seminorm_d_sq(const FormOperator& op, const GridFunction& f) {
    double acc = 0.0;
    const std::size_t blades = op.blades;
    for (int col = 0; col < op.stiffness.outerSize(); ++col)
        for (SparseMat::InnerIterator it(op.stiffness, col); it; ++it) {
            double dot = 0.0;
            for (std::size_t b = 0; b < blades; ++b)
                dot += f.at(it.row(), static_cast<BladeMask>(b)) *
                       f.at(it.col(), static_cast<BladeMask>(b));
            acc += it.value() * dot;
        }
    return acc;
}

// Sc q_s(F, G) = vec(G)^T system vec(F); Dirichlet operators evaluate on the
// constrained subspace (boundary values ignored).
inline double sc_form_value(const FormOperator& op, const GridFunction& F, const GridFunction& G) {
    F.require_same_grid(G);
    const Eigen::VectorXd fv = gather_free(op, F);
    const Eigen::VectorXd gv = gather_free(op, G);
    return gv.dot(op.system * fv);
}

// Full R_n value of the form, reconstructed from per-blade tests
// q_s(F,G)_C = Sc q_s(F, G conj(e_C)).
inline Multivector form_value(const FormOperator& op, const GridFunction& F,
                              const GridFunction& G) {
    const int n = op.grid.dim();
    Multivector out(n);
    for (BladeMask c = 0; c < op.blades; ++c) {
        const Multivector ec = conjugate(Multivector::basis(n, c));
        out[c] = sc_form_value(op, F, right_mul(G, ec));
    }
    return out;
}

struct SolveReport {
    double s0 = 0.0, s1 = 0.0;
    double norm_l2 = 0.0, norm_d = 0.0, rhs_norm_l2 = 0.0;
    double constant = std::numeric_limits<double>::quiet_NaN();
    double ratio_l2 = std::numeric_limits<double>::quiet_NaN();
    double ratio_d = std::numeric_limits<double>::quiet_NaN();
    double residual = 0.0;
    double pivot_min = 0.0;
    bool singular = false;
    bool admissible = false;
};

inline RegionKind region_kind_for(const FormSpec& spec) {
    if (spec.geometry == Geometry::hyperbolic)
        return spec.bc == BoundaryCondition::dirichlet ? RegionKind::hyperbolic_dirichlet
                                                       : RegionKind::hyperbolic_robin;
    return spec.bc == BoundaryCondition::dirichlet ? RegionKind::spherical_dirichlet
                                                   : RegionKind::spherical_robin;
}

inline RegionParams region_params_for(const FormOperator& op) {
    const DomainExtrema ext = domain_extrema(op.grid.domain);
    RegionParams p;
    p.n = op.grid.dim();
    p.m = ext.m;
    p.M = ext.M;
    p.b_norm = op.spec.b ? std::abs(*op.spec.b) : 0.0;
    p.trace_norm = op.spec.trace_norm;
    p.c_p = poincare_constant_box(op.grid.domain);
    p.robin_mode = op.spec.robin_mode;
    return p;
}

// Direct factorization of the assembled system, reusable across right-hand
// sides. Singularity is a reportable outcome: pivot_min is an estimate of the
// smallest singular value from inverse iteration on the factorization.
class WeakSolver {
public:
    explicit WeakSolver(FormOperator op) : op_(std::move(op)) {
        lu_.compute(op_.system);
        factorized_ = lu_.info() == Eigen::Success;
        sigma_max_ = estimate_sigma_max();
        sigma_min_ = factorized_ ? estimate_sigma_min() : 0.0;
    }

    const FormOperator& op() const { return op_; }
    bool factorization_ok() const { return factorized_; }
    double sigma_max() const { return sigma_max_; }
    double pivot_min() const { return sigma_min_; }
    bool singular() const {
        return !factorized_ || sigma_min_ < 1e-12 * std::max(sigma_max_, 1e-300);
    }

    std::pair<GridFunction, SolveReport> solve(const GridFunction& f) const {
        SolveReport rep;
        rep.s0 = op_.spec.s.s0;
        rep.s1 = op_.spec.s.imag_modulus();
        rep.pivot_min = sigma_min_;
        rep.singular = singular();
        rep.rhs_norm_l2 = std::sqrt(std::max(0.0, norm_l2_sq(op_, f)));

        GridFunction F(op_.grid);
        if (!factorized_) {
            rep.residual = std::numeric_limits<double>::quiet_NaN();
            return {F, rep};
        }
        const Eigen::VectorXd rhs = assemble_rhs(op_, f);
        const Eigen::VectorXd u = lu_.solve(rhs);
        const double rhs_norm = rhs.norm();
        rep.residual = rhs_norm > 0.0 ? (op_.system * u - rhs).norm() / rhs_norm : 0.0;
        F = scatter_free(op_, u); // Dirichlet zeros reinstated by construction

        rep.norm_l2 = std::sqrt(std::max(0.0, norm_l2_sq(op_, F)));
        rep.norm_d = std::sqrt(std::max(0.0, seminorm_d_sq(op_, F)));

        const RegionKind kind = region_kind_for(op_.spec);
        RegionParams params = region_params_for(op_);
        if (!is_robin(kind) || params.trace_norm > 0.0) {
            const RegionVerdict v =
                evaluate_region(kind, params, {rep.s0, rep.s1});
            rep.constant = v.constant;
            rep.admissible = v.admissible;
            if (v.admissible && rep.rhs_norm_l2 > 0.0) {
                rep.ratio_l2 = rep.norm_l2 * v.constant / rep.rhs_norm_l2;
                rep.ratio_d = rep.norm_d * v.constant / rep.rhs_norm_l2;
            }
        }
        return {F, rep};
    }

private:
    double estimate_sigma_max() const {
        if (op_.system_dim() == 0) return 0.0;
        Eigen::VectorXd v = Eigen::VectorXd::Ones(op_.system_dim()).normalized();
        double lam = 0.0;
        for (int it = 0; it < 30; ++it) {
            Eigen::VectorXd w = op_.system.transpose() * (op_.system * v);
            lam = w.norm();
            if (lam == 0.0) return 0.0;
            v = w / lam;
        }
        return std::sqrt(lam);
    }

    // inverse iteration on A^T A through the LU factors
    double estimate_sigma_min() {
        if (op_.system_dim() == 0) return 0.0;
        Eigen::VectorXd v = Eigen::VectorXd::Ones(op_.system_dim()).normalized();
        double lam = 0.0;
        for (int it = 0; it < 20; ++it) {
            Eigen::VectorXd w = lu_.solve(lu_.transpose().solve(v));
            lam = w.norm();
            if (!std::isfinite(lam) || lam == 0.0) return 0.0;
            v = w / lam;
        }
        return 1.0 / std::sqrt(lam);
    }

    FormOperator op_;
    Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>> lu_;
    bool factorized_ = false;
    double sigma_max_ = 0.0;
    double sigma_min_ = 0.0;
};

inline std::pair<GridFunction, SolveReport> solve_weak(const FormOperator& op,
                                                       const GridFunction& f) {
    return WeakSolver(op).solve(f);
}

struct TraceIterationError : std::runtime_error {
    double last_estimate;
    explicit TraceIterationError(double est)
        : std::runtime_error("trace norm iteration did not converge"), last_estimate(est) {}
};

// Largest generalized eigenvalue of  boundary_mass v = lambda (mass+stiffness) v
// by power iteration on the pencil; sqrt gives the discrete H^1 -> L^2(dOmega)
// operator norm, a lower bound of the continuum trace norm.
inline double estimate_trace_norm(const Grid& grid, int max_iters = 10000, double tol = 1e-12) {
    const SparseMat M = scalar_mass(grid);
    const SparseMat S = scalar_stiffness(grid);
    const SparseMat B = scalar_boundary_mass(grid);
    SparseMat H = M + S;
    Eigen::SimplicialLDLT<SparseMat> ldlt(H);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("H1 Gram matrix factorization failed");

    Eigen::VectorXd v = Eigen::VectorXd::Ones(H.rows());
    v /= std::sqrt(v.dot(H * v));
    double lambda = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXd w = ldlt.solve(B * v);
        const double hn = std::sqrt(w.dot(H * w));
        if (hn == 0.0) return 0.0; // B v vanished: boundary norm is zero
        w /= hn;
        const double next = w.dot(B * w); // Rayleigh quotient, H-normalized
        const bool converged = std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next));
        lambda = next;
        v = w;
        if (converged) return std::sqrt(std::max(0.0, lambda));
    }
    throw TraceIterationError(std::sqrt(std::max(0.0, lambda)));
}

// Nodal application of the Dirac operator: centered differences inside,
// second-order one-sided stencils at the boundary, exact zero-order terms.
inline GridFunction apply_discrete_dirac(OperatorKind kind, const GridFunction& F) {
    if (kind != OperatorKind::dirac_hyperbolic && kind != OperatorKind::dirac_spherical)
        throw std::invalid_argument("discrete application supports the hyperbolic and spherical operators");
    const Grid& g = F.grid();
    const int n = g.dim();
    if (kind == OperatorKind::dirac_hyperbolic && n < 2)
        throw std::invalid_argument("hyperbolic operator requires n >= 2");
    const std::size_t blades = F.blades();

    // nodal partial derivative along one axis
    auto derivative = [&](int axis) {
        GridFunction d(g);
        const double h = g.spacing(axis);
        const int top = g.res[static_cast<std::size_t>(axis)];
        for (long k = 0; k < g.node_count(); ++k) {
            std::vector<int> iv = g.node_multi(k);
            const int i = iv[static_cast<std::size_t>(axis)];
            auto shifted = [&](int di) {
                std::vector<int> jv(iv);
                jv[static_cast<std::size_t>(axis)] += di;
                return g.node_index(jv);
            };
            for (BladeMask b = 0; b < blades; ++b) {
                double val;
                if (i == 0)
                    val = (-3.0 * F.at(k, b) + 4.0 * F.at(shifted(1), b) - F.at(shifted(2), b)) /
                          (2.0 * h);
                else if (i == top)
                    val = (3.0 * F.at(k, b) - 4.0 * F.at(shifted(-1), b) + F.at(shifted(-2), b)) /
                          (2.0 * h);
                else
                    val = (F.at(shifted(1), b) - F.at(shifted(-1), b)) / (2.0 * h);
                d.at(k, b) = val;
            }
        }
        return d;
    };

    GridFunction out(g);
    std::vector<GridFunction> dF;
    dF.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) dF.push_back(derivative(i));

    if (kind == OperatorKind::dirac_hyperbolic) {
        const double alpha = structure_constants(n).alpha;
        const int y_axis = n - 1;
        for (long k = 0; k < g.node_count(); ++k) {
            const double y = g.node_coords(g.node_multi(k))[static_cast<std::size_t>(y_axis)];
            Multivector acc(n);
            for (int i = 0; i < n; ++i)
                acc += mul(Multivector::basis(n, BladeMask{1} << i, y), dF[static_cast<std::size_t>(i)].value(k));
            acc += mul(Multivector::basis(n, BladeMask{1} << y_axis, -alpha), F.value(k));
            out.set_value(k, acc);
        }
    } else {
        for (long k = 0; k < g.node_count(); ++k) {
            const std::vector<double> x = g.node_coords(g.node_multi(k));
            double r2 = 0.0;
            for (double v : x) r2 += v * v;
            Multivector acc(n);
            for (int i = 0; i < n; ++i)
                acc += mul(Multivector::basis(n, BladeMask{1} << i, 1.0 + r2),
                           dF[static_cast<std::size_t>(i)].value(k));
            Multivector xmv(n);
            for (int i = 0; i < n; ++i) xmv[BladeMask{1} << i] = x[static_cast<std::size_t>(i)];
            acc -= mul(xmv * static_cast<double>(n), F.value(k));
            out.set_value(k, acc);
        }
    }
    return out;
}

enum class ResolventSide { left, right };

inline const char* to_string(ResolventSide s) { return s == ResolventSide::left ? "left" : "right"; }
inline ResolventSide parse_resolvent_side(const std::string& s) {
    if (s == "left") return ResolventSide::left;
    if (s == "right") return ResolventSide::right;
    throw std::invalid_argument("resolvent side must be 'left' or 'right'");
}

struct ResolventReport {
    SolveReport solve;
    double result_norm_l2 = 0.0;
    double bound = std::numeric_limits<double>::quiet_NaN(); // hyperbolic right-resolvent bound
    double bound_ratio = std::numeric_limits<double>::quiet_NaN();
};

// Right: S_R^{-1} f = (conj(s) - D) Q_s^{-1} f.
// Left:  S_L^{-1} f = Q_s^{-1} f conj(s) - D Q_s^{-1} f.
inline std::pair<GridFunction, ResolventReport> s_resolvent_apply(ResolventSide side,
                                                                  const WeakSolver& solver,
                                                                  const GridFunction& f) {
    const FormOperator& op = solver.op();
    auto [F, rep] = solver.solve(f);
    const OperatorKind kind = op.spec.geometry == Geometry::hyperbolic
                                  ? OperatorKind::dirac_hyperbolic
                                  : OperatorKind::dirac_spherical;
    const Multivector sbar = op.spec.s.conj().to_multivector();
    const GridFunction DF = apply_discrete_dirac(kind, F);
    GridFunction R = side == ResolventSide::right ? left_mul(sbar, F) - DF
                                                  : right_mul(F, sbar) - DF;
    ResolventReport rr;
    rr.solve = rep;
    rr.result_norm_l2 = std::sqrt(std::max(0.0, norm_l2_sq(op, R)));
    if (op.spec.geometry == Geometry::hyperbolic && op.spec.bc == BoundaryCondition::dirichlet) {
        const RegionParams params = region_params_for(op);
        const SPoint s{rep.s0, rep.s1};
        const RegionVerdict v = evaluate_region(RegionKind::hyperbolic_dirichlet, params, s);
        if (v.admissible) {
            rr.bound = s_resolvent_bound_hyperbolic(params, s);
            if (rep.rhs_norm_l2 > 0.0) rr.bound_ratio = rr.result_norm_l2 / (rr.bound * rep.rhs_norm_l2);
        }
    }
    return {R, rr};
}

inline nlohmann::json to_json(const SolveReport& r) {
    return {{"s0", r.s0},
            {"s1", r.s1},
            {"norm_l2", r.norm_l2},
            {"norm_d", r.norm_d},
            {"rhs_norm_l2", r.rhs_norm_l2},
            {"constant", r.constant},
            {"ratio_l2", r.ratio_l2},
            {"ratio_d", r.ratio_d},
            {"residual", r.residual},
            {"pivot_min", r.pivot_min},
            {"singular", r.singular},
            {"admissible", r.admissible}};
}

} // namespace sspec
