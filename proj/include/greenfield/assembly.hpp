#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "greenfield/errors.hpp"
#include "greenfield/mesh.hpp"

namespace greenfield {

/// Scalar coefficient field over the domain. The model file exposes the
/// same three built-ins.
class CoefficientField {
public:
    static CoefficientField constant(double v) {
        CoefficientField f;
        f.kind_ = Kind::Constant;
        f.c0_ = v;
        return f;
    }

    /// c0 + cx*x + cy*y
    static CoefficientField affine(double c0, double cx, double cy = 0.0) {
        CoefficientField f;
        f.kind_ = Kind::Affine;
        f.c0_ = c0;
        f.cx_ = cx;
        f.cy_ = cy;
        return f;
    }

    /// Piecewise constant in x: values[k] on [breaks[k-1], breaks[k]), with
    /// values.size() == breaks.size() + 1.
    static CoefficientField piecewise_x(std::vector<double> breaks,
                                        std::vector<double> values) {
        if (values.size() != breaks.size() + 1)
            throw ConfigError("piecewise_x: need one more value than breaks");
        if (!std::is_sorted(breaks.begin(), breaks.end()))
            throw ConfigError("piecewise_x: breaks must be sorted");
        CoefficientField f;
        f.kind_ = Kind::PiecewiseX;
        f.breaks_ = std::move(breaks);
        f.values_ = std::move(values);
        return f;
    }

    double operator()(double x, double y = 0.0) const {
        switch (kind_) {
            case Kind::Constant: return c0_;
            case Kind::Affine: return c0_ + cx_ * x + cy_ * y;
            case Kind::PiecewiseX: {
                std::size_t k = 0;
                while (k < breaks_.size() && x >= breaks_[k]) ++k;
                return values_[k];
            }
        }
        return c0_;
    }

private:
    enum class Kind { Constant, Affine, PiecewiseX };
    Kind kind_ = Kind::Constant;
    double c0_ = 1.0, cx_ = 0.0, cy_ = 0.0;
    std::vector<double> breaks_, values_;
};

/// Constant symmetric 2x2 anisotropy; the full diffusion tensor is
/// A(x) = a(x) * [[axx,axy],[axy,ayy]].
struct Anisotropy {
    double axx = 1.0, axy = 0.0, ayy = 1.0;

    double eig_min() const {
        const double tr = axx + ayy;
        const double det = axx * ayy - axy * axy;
        return 0.5 * (tr - std::sqrt(std::max(tr * tr - 4.0 * det, 0.0)));
    }
};

struct OperatorSpec {
    CoefficientField a = CoefficientField::constant(1.0);
    Anisotropy anisotropy;  // 2D only
    CoefficientField c = CoefficientField::constant(1.0);
    std::map<std::string, BoundaryCondition> bcs;
    std::map<std::string, double> interface_penalties;

    /// -a u'' + m^2 u with unit diffusion; boundary pieces still need tags.
    static OperatorSpec helmholtz(double m) {
        OperatorSpec s;
        s.c = CoefficientField::constant(m * m);
        return s;
    }

    BoundaryCondition bc_for(const std::string& tag) const {
        auto it = bcs.find(tag);
        if (it == bcs.end())
            throw ConfigError("no boundary condition for piece '" + tag + "'");
        return it->second;
    }

    double penalty_for(const std::string& id) const {
        auto it = interface_penalties.find(id);
        if (it == interface_penalties.end()) return 0.0;
        if (!(it->second >= 0.0))
            throw ModelError("interface penalty must be >= 0");
        return it->second;
    }
};

/// Free degrees of freedom after Dirichlet elimination, with the node
/// bookkeeping and per-dof coordinates.
struct DofMap {
    int dim = 1;
    std::vector<std::size_t> node_of_dof;
    std::vector<std::ptrdiff_t> dof_of_node;  // -1 for eliminated nodes
    std::vector<double> x, y;                 // per dof; y unused in 1D

    std::size_t size() const { return node_of_dof.size(); }
};

struct SparsePrecision {
    Eigen::SparseMatrix<double> Q;
    DofMap dofs;

    std::size_t size() const { return static_cast<std::size_t>(Q.rows()); }
};

namespace detail {

inline void check_positive(double v, const char* what, double where_x, double where_y = 0.0) {
    if (!(v > 0.0))
        throw ModelError(std::string(what) + " violated at (" + std::to_string(where_x) +
                         ", " + std::to_string(where_y) + ")");
}

struct AssemblyAccumulator {
    std::vector<Eigen::Triplet<double>> triplets;
    const std::vector<std::ptrdiff_t>& dof_of_node;

    explicit AssemblyAccumulator(const std::vector<std::ptrdiff_t>& map)
        : dof_of_node(map) {}

    void add(std::size_t node_i, std::size_t node_j, double v) {
        const auto di = dof_of_node[node_i];
        const auto dj = dof_of_node[node_j];
        if (di < 0 || dj < 0) return;  // Dirichlet row/column eliminated
        triplets.emplace_back(static_cast<int>(di), static_cast<int>(dj), v);
    }
};

inline DofMap make_dof_map_1d(const Mesh1D& mesh, bool left_dirichlet, bool right_dirichlet) {
    DofMap map;
    map.dim = 1;
    const std::size_t N = mesh.node_count();
    map.dof_of_node.assign(N, -1);
    for (std::size_t i = 0; i < N; ++i) {
        if (i == 0 && left_dirichlet) continue;
        if (i == N - 1 && right_dirichlet) continue;
        map.dof_of_node[i] = static_cast<std::ptrdiff_t>(map.node_of_dof.size());
        map.node_of_dof.push_back(i);
        map.x.push_back(mesh.nodes[i]);
    }
    return map;
}

}  // namespace detail

/// Galerkin matrix of  int a u'v' + int c uv  over piecewise-linear hats,
/// with Robin boundary mass, per-interface-node point penalties, and
/// Dirichlet elimination. Coefficients are sampled at element midpoints.
inline SparsePrecision assemble_1d(const Mesh1D& mesh, const OperatorSpec& spec) {
    mesh.validate();
    const auto bc_l = spec.bc_for(mesh.boundary_left);
    const auto bc_r = spec.bc_for(mesh.boundary_right);
    const bool has_dirichlet = bc_l.kind == BoundaryCondition::Kind::Dirichlet ||
                               bc_r.kind == BoundaryCondition::Kind::Dirichlet;

    double c_min = std::numeric_limits<double>::infinity();
    const std::size_t n = mesh.element_count();
    for (std::size_t e = 0; e < n; ++e) {
        const double xm = 0.5 * (mesh.nodes[e] + mesh.nodes[e + 1]);
        detail::check_positive(spec.a(xm), "ellipticity (a > 0)", xm);
        const double ce = spec.c(xm);
        if (ce < 0.0)
            throw ModelError("positivity (c >= 0) violated at " + std::to_string(xm));
        c_min = std::min(c_min, ce);
    }
    if (!(c_min > 0.0) && !has_dirichlet)
        throw ModelError("operator not positive definite: c not bounded below "
                         "by c0 > 0 and no Dirichlet piece");

    DofMap map = detail::make_dof_map_1d(mesh,
                                         bc_l.kind == BoundaryCondition::Kind::Dirichlet,
                                         bc_r.kind == BoundaryCondition::Kind::Dirichlet);
    detail::AssemblyAccumulator acc(map.dof_of_node);

    for (std::size_t e = 0; e < n; ++e) {
        const double h = mesh.nodes[e + 1] - mesh.nodes[e];
        const double xm = 0.5 * (mesh.nodes[e] + mesh.nodes[e + 1]);
        const double ae = spec.a(xm);
        const double ce = spec.c(xm);
        const double k = ae / h;
        const double mm = ce * h / 6.0;
        const std::size_t i0 = e, i1 = e + 1;
        acc.add(i0, i0, k + 2.0 * mm);
        acc.add(i1, i1, k + 2.0 * mm);
        acc.add(i0, i1, -k + mm);
        acc.add(i1, i0, -k + mm);
    }
    if (bc_l.kind == BoundaryCondition::Kind::Robin)
        acc.add(0, 0, bc_l.robin_beta);
    if (bc_r.kind == BoundaryCondition::Kind::Robin)
        acc.add(mesh.node_count() - 1, mesh.node_count() - 1, bc_r.robin_beta);
    for (const auto& f : mesh.interfaces)
        acc.add(f.node, f.node, spec.penalty_for(f.id));

    SparsePrecision out;
    out.dofs = std::move(map);
    out.Q.resize(static_cast<int>(out.dofs.size()), static_cast<int>(out.dofs.size()));
    out.Q.setFromTriplets(acc.triplets.begin(), acc.triplets.end());
    out.Q.makeCompressed();
    return out;
}

/// Mass matrix with unit coefficient over the same free dofs as an
/// assemble_1d call with the given spec (used for mode shifts).
inline Eigen::SparseMatrix<double> mass_matrix_1d(const Mesh1D& mesh,
                                                  const OperatorSpec& spec) {
    const auto bc_l = spec.bc_for(mesh.boundary_left);
    const auto bc_r = spec.bc_for(mesh.boundary_right);
    DofMap map = detail::make_dof_map_1d(mesh,
                                         bc_l.kind == BoundaryCondition::Kind::Dirichlet,
                                         bc_r.kind == BoundaryCondition::Kind::Dirichlet);
    detail::AssemblyAccumulator acc(map.dof_of_node);
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const double h = mesh.nodes[e + 1] - mesh.nodes[e];
        const double mm = h / 6.0;
        acc.add(e, e, 2.0 * mm);
        acc.add(e + 1, e + 1, 2.0 * mm);
        acc.add(e, e + 1, mm);
        acc.add(e + 1, e, mm);
    }
    Eigen::SparseMatrix<double> M(static_cast<int>(map.size()), static_cast<int>(map.size()));
    M.setFromTriplets(acc.triplets.begin(), acc.triplets.end());
    M.makeCompressed();
    return M;
}

/// Bilinear quadrilateral assembly on a structured grid with 2x2 Gauss
/// quadrature; Neumann natural, Robin edge mass, Dirichlet eliminated.
/// Interface lines add alpha times the 1D linear mass matrix along the line
/// (the discrete surface term). Corner nodes shared by two interface lines
/// accumulate both penalties.
inline SparsePrecision assemble_2d(const Grid2D& grid, const OperatorSpec& spec) {
    grid.validate();
    const auto bc_left = spec.bc_for(grid.tag_left);
    const auto bc_right = spec.bc_for(grid.tag_right);
    const auto bc_bottom = spec.bc_for(grid.tag_bottom);
    const auto bc_top = spec.bc_for(grid.tag_top);
    const bool has_dirichlet =
        bc_left.kind == BoundaryCondition::Kind::Dirichlet ||
        bc_right.kind == BoundaryCondition::Kind::Dirichlet ||
        bc_bottom.kind == BoundaryCondition::Kind::Dirichlet ||
        bc_top.kind == BoundaryCondition::Kind::Dirichlet;

    if (!(spec.anisotropy.eig_min() > 0.0))
        throw ModelError("anisotropy tensor is not positive definite");

    const std::size_t nxn = grid.x_nodes.size();
    const std::size_t nyn = grid.y_nodes.size();

    // Dirichlet node marking per outer side.
    std::vector<bool> eliminated(grid.node_count(), false);
    const auto mark_side = [&](const BoundaryCondition& bc, bool vertical, std::size_t fixed) {
        if (bc.kind != BoundaryCondition::Kind::Dirichlet) return;
        if (vertical)
            for (std::size_t j = 0; j < nyn; ++j) eliminated[grid.node_index(fixed, j)] = true;
        else
            for (std::size_t i = 0; i < nxn; ++i) eliminated[grid.node_index(i, fixed)] = true;
    };
    mark_side(bc_left, true, 0);
    mark_side(bc_right, true, nxn - 1);
    mark_side(bc_bottom, false, 0);
    mark_side(bc_top, false, nyn - 1);

    DofMap map;
    map.dim = 2;
    map.dof_of_node.assign(grid.node_count(), -1);
    for (std::size_t j = 0; j < nyn; ++j)
        for (std::size_t i = 0; i < nxn; ++i) {
            const std::size_t node = grid.node_index(i, j);
            if (eliminated[node]) continue;
            map.dof_of_node[node] = static_cast<std::ptrdiff_t>(map.node_of_dof.size());
            map.node_of_dof.push_back(node);
            map.x.push_back(grid.x_nodes[i]);
            map.y.push_back(grid.y_nodes[j]);
        }
    detail::AssemblyAccumulator acc(map.dof_of_node);

    // 2-point Gauss rule on [-1,1].
    static constexpr double gp = 0.57735026918962576451;  // 1/sqrt(3)
    const double qpts[2] = {-gp, gp};

    double c_min = std::numeric_limits<double>::infinity();
    for (std::size_t ej = 0; ej < grid.ny(); ++ej) {
        for (std::size_t ei = 0; ei < grid.nx(); ++ei) {
            const double hx = grid.x_nodes[ei + 1] - grid.x_nodes[ei];
            const double hy = grid.y_nodes[ej + 1] - grid.y_nodes[ej];
            const double x0 = grid.x_nodes[ei], y0 = grid.y_nodes[ej];
            const std::size_t nodes[4] = {
                grid.node_index(ei, ej), grid.node_index(ei + 1, ej),
                grid.node_index(ei + 1, ej + 1), grid.node_index(ei, ej + 1)};
            Eigen::Matrix4d Ke = Eigen::Matrix4d::Zero();
            Eigen::Matrix4d Me = Eigen::Matrix4d::Zero();
            for (double xi : qpts) {
                for (double eta : qpts) {
                    const double xq = x0 + 0.5 * (1.0 + xi) * hx;
                    const double yq = y0 + 0.5 * (1.0 + eta) * hy;
                    const double aq = spec.a(xq, yq);
                    detail::check_positive(aq, "ellipticity (a > 0)", xq, yq);
                    const double cq = spec.c(xq, yq);
                    if (cq < 0.0)
                        throw ModelError("positivity (c >= 0) violated at (" +
                                         std::to_string(xq) + ", " + std::to_string(yq) + ")");
                    c_min = std::min(c_min, cq);

                    const double Ns[4] = {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
                                          0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta)};
                    const double dNdxi[4] = {-0.25 * (1 - eta), 0.25 * (1 - eta),
                                             0.25 * (1 + eta), -0.25 * (1 + eta)};
                    const double dNdeta[4] = {-0.25 * (1 - xi), -0.25 * (1 + xi),
                                              0.25 * (1 + xi), 0.25 * (1 - xi)};
                    const double w = 0.25 * hx * hy;  // quadrature weight 1 each, |J| = hx*hy/4
                    const double Axx = aq * spec.anisotropy.axx;
                    const double Axy = aq * spec.anisotropy.axy;
                    const double Ayy = aq * spec.anisotropy.ayy;
                    for (int r = 0; r < 4; ++r) {
                        const double gx_r = dNdxi[r] * 2.0 / hx;
                        const double gy_r = dNdeta[r] * 2.0 / hy;
                        for (int s = 0; s < 4; ++s) {
                            const double gx_s = dNdxi[s] * 2.0 / hx;
                            const double gy_s = dNdeta[s] * 2.0 / hy;
                            Ke(r, s) += w * (gx_r * (Axx * gx_s + Axy * gy_s) +
                                             gy_r * (Axy * gx_s + Ayy * gy_s));
                            Me(r, s) += w * cq * Ns[r] * Ns[s];
                        }
                    }
                }
            }
            for (int r = 0; r < 4; ++r)
                for (int s = 0; s < 4; ++s) acc.add(nodes[r], nodes[s], Ke(r, s) + Me(r, s));
        }
    }
    if (!(c_min > 0.0) && !has_dirichlet)
        throw ModelError("operator not positive definite: c not bounded below "
                         "by c0 > 0 and no Dirichlet piece");

    // Robin boundary mass along outer edges.
    const auto robin_side = [&](const BoundaryCondition& bc, bool vertical, std::size_t fixed) {
        if (bc.kind != BoundaryCondition::Kind::Robin || bc.robin_beta == 0.0) return;
        const auto& line = vertical ? grid.y_nodes : grid.x_nodes;
        for (std::size_t e = 0; e + 1 < line.size(); ++e) {
            const double h = line[e + 1] - line[e];
            const std::size_t a_node = vertical ? grid.node_index(fixed, e) : grid.node_index(e, fixed);
            const std::size_t b_node = vertical ? grid.node_index(fixed, e + 1) : grid.node_index(e + 1, fixed);
            const double mm = bc.robin_beta * h / 6.0;
            acc.add(a_node, a_node, 2.0 * mm);
            acc.add(b_node, b_node, 2.0 * mm);
            acc.add(a_node, b_node, mm);
            acc.add(b_node, a_node, mm);
        }
    };
    robin_side(bc_left, true, 0);
    robin_side(bc_right, true, nxn - 1);
    robin_side(bc_bottom, false, 0);
    robin_side(bc_top, false, nyn - 1);

    // Interface-line surface mass.
    for (const auto& f : grid.interfaces) {
        const double alpha = spec.penalty_for(f.id);
        if (alpha == 0.0) continue;
        const auto& along = (f.axis == 0) ? grid.y_nodes : grid.x_nodes;
        for (std::size_t e = 0; e + 1 < along.size(); ++e) {
            const double h = along[e + 1] - along[e];
            const std::size_t a_node =
                (f.axis == 0) ? grid.node_index(f.index, e) : grid.node_index(e, f.index);
            const std::size_t b_node =
                (f.axis == 0) ? grid.node_index(f.index, e + 1) : grid.node_index(e + 1, f.index);
            const double mm = alpha * h / 6.0;
            acc.add(a_node, a_node, 2.0 * mm);
            acc.add(b_node, b_node, 2.0 * mm);
            acc.add(a_node, b_node, mm);
            acc.add(b_node, a_node, mm);
        }
    }

    SparsePrecision out;
    out.dofs = std::move(map);
    out.Q.resize(static_cast<int>(out.dofs.size()), static_cast<int>(out.dofs.size()));
    out.Q.setFromTriplets(acc.triplets.begin(), acc.triplets.end());
    out.Q.makeCompressed();
    return out;
}

/// Hat-function interpolation weights of a point evaluation at x, expressed
/// over free dofs. Weights on eliminated (Dirichlet) nodes drop out: the
/// field is identically zero there.
inline std::vector<std::pair<std::size_t, double>> interpolation_weights_1d(
    const Mesh1D& mesh, const DofMap& map, double x) {
    if (!(x >= mesh.nodes.front() && x <= mesh.nodes.back()))
        throw std::domain_error("interpolation point outside the mesh");
    const auto it = std::upper_bound(mesh.nodes.begin(), mesh.nodes.end(), x);
    std::size_t e = (it == mesh.nodes.begin())
                        ? 0
                        : static_cast<std::size_t>(it - mesh.nodes.begin()) - 1;
    e = std::min(e, mesh.element_count() - 1);
    const double h = mesh.nodes[e + 1] - mesh.nodes[e];
    const double t = (x - mesh.nodes[e]) / h;
    std::vector<std::pair<std::size_t, double>> w;
    if (map.dof_of_node[e] >= 0 && 1.0 - t != 0.0)
        w.push_back({static_cast<std::size_t>(map.dof_of_node[e]), 1.0 - t});
    if (map.dof_of_node[e + 1] >= 0 && t != 0.0)
        w.push_back({static_cast<std::size_t>(map.dof_of_node[e + 1]), t});
    return w;
}

/// Bilinear interpolation weights at (x, y) over free dofs of a grid.
inline std::vector<std::pair<std::size_t, double>> interpolation_weights_2d(
    const Grid2D& grid, const DofMap& map, double x, double y) {
    if (!(x >= grid.x_nodes.front() && x <= grid.x_nodes.back() &&
          y >= grid.y_nodes.front() && y <= grid.y_nodes.back()))
        throw std::domain_error("interpolation point outside the grid");
    const auto locate = [](const std::vector<double>& v, double p) {
        const auto it = std::upper_bound(v.begin(), v.end(), p);
        std::size_t e = (it == v.begin()) ? 0 : static_cast<std::size_t>(it - v.begin()) - 1;
        return std::min(e, v.size() - 2);
    };
    const std::size_t ei = locate(grid.x_nodes, x);
    const std::size_t ej = locate(grid.y_nodes, y);
    const double tx = (x - grid.x_nodes[ei]) / (grid.x_nodes[ei + 1] - grid.x_nodes[ei]);
    const double ty = (y - grid.y_nodes[ej]) / (grid.y_nodes[ej + 1] - grid.y_nodes[ej]);
    const std::pair<std::size_t, double> corners[4] = {
        {grid.node_index(ei, ej), (1 - tx) * (1 - ty)},
        {grid.node_index(ei + 1, ej), tx * (1 - ty)},
        {grid.node_index(ei + 1, ej + 1), tx * ty},
        {grid.node_index(ei, ej + 1), (1 - tx) * ty}};
    std::vector<std::pair<std::size_t, double>> w;
    for (const auto& [node, weight] : corners)
        if (map.dof_of_node[node] >= 0 && weight != 0.0)
            w.push_back({static_cast<std::size_t>(map.dof_of_node[node]), weight});
    return w;
}

/// Compact internal factor: a circle of the given radius, eigenvalues
/// lambda_n = (n/r)^2 with multiplicity 2 for n >= 1.
struct CircleFactor {
    double radius = 1.0;
    int truncation = 16;

    double eigenvalue(int n) const {
        const double k = static_cast<double>(n) / radius;
        return k * k;
    }
};

/// Per-mode solves (Q + lambda_n M) u_n = f_n for the retained modes.
inline std::map<int, Eigen::VectorXd> product_mode_solve(
    const Mesh1D& mesh, const OperatorSpec& spec, const CircleFactor& factor,
    const std::map<int, Eigen::VectorXd>& rhs_modes) {
    if (factor.truncation < 0) throw ConfigError("mode truncation must be >= 0");
    const SparsePrecision base = assemble_1d(mesh, spec);
    const Eigen::SparseMatrix<double> M = mass_matrix_1d(mesh, spec);
    std::map<int, Eigen::VectorXd> out;
    for (const auto& [n, f] : rhs_modes) {
        if (n < 0 || n > factor.truncation)
            throw ConfigError("rhs mode " + std::to_string(n) + " outside retained range");
        if (f.size() != base.Q.rows())
            throw ConfigError("rhs mode vector has wrong dimension");
        Eigen::SparseMatrix<double> Qn = base.Q + factor.eigenvalue(n) * M;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Qn);
        if (ldlt.info() != Eigen::Success)
            throw NumericError("mode solve factorization failed");
        out[n] = ldlt.solve(f);
    }
    return out;
}

/// Covariance of the field on interval x circle through the truncated mode
/// expansion: C((x,y),(x',y')) = sum_n G_n(x,x') phi_n(y) phi_n(y') over the
/// L2-orthonormal circle eigenbasis, so that the mode sum converges to the
/// kernel a 2D periodic-strip discretization produces.
class ProductModeCovariance {
public:
    ProductModeCovariance(const Mesh1D& mesh, const OperatorSpec& spec,
                          const CircleFactor& factor)
        : mesh_(mesh), factor_(factor), base_(assemble_1d(mesh, spec)) {
        const Eigen::SparseMatrix<double> M = mass_matrix_1d(mesh, spec);
        solvers_.resize(static_cast<std::size_t>(factor.truncation) + 1);
        for (int n = 0; n <= factor.truncation; ++n) {
            Eigen::SparseMatrix<double> Qn = base_.Q + factor.eigenvalue(n) * M;
            solvers_[static_cast<std::size_t>(n)] =
                std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(Qn);
            if (solvers_[static_cast<std::size_t>(n)]->info() != Eigen::Success)
                throw NumericError("mode factorization failed");
        }
        double h_min = std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < mesh.element_count(); ++e)
            h_min = std::min(h_min, mesh.nodes[e + 1] - mesh.nodes[e]);
        h_min_ = h_min;
    }

    double covariance(double x1, double y1, double x2, double y2) const {
        const auto w1 = interpolation_weights_1d(mesh_, base_.dofs, x1);
        const auto w2 = interpolation_weights_1d(mesh_, base_.dofs, x2);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(base_.Q.rows());
        for (const auto& [d, w] : w2) rhs[static_cast<Eigen::Index>(d)] = w;
        const double r = factor_.radius;
        const double pi = 3.14159265358979323846;
        double total = 0.0;
        for (int n = 0; n <= factor_.truncation; ++n) {
            const Eigen::VectorXd col = solvers_[static_cast<std::size_t>(n)]->solve(rhs);
            double g = 0.0;
            for (const auto& [d, w] : w1) g += w * col[static_cast<Eigen::Index>(d)];
            if (n == 0)
                total += g / (2.0 * pi * r);
            else
                total += g * std::cos(static_cast<double>(n) * (y1 - y2) / r) / (pi * r);
        }
        return total;
    }

    const SparsePrecision& base() const { return base_; }

    /// Upper bound on the truncated per-point variance tail
    /// sum_{n>N} of mode variances, via (Q_n^{-1})_ii <= 3/(lambda_n h_min).
    double tail_bound() const {
        const double pi = 3.14159265358979323846;
        return 3.0 * factor_.radius / (pi * h_min_ * static_cast<double>(factor_.truncation));
    }

private:
    Mesh1D mesh_;
    CircleFactor factor_;
    SparsePrecision base_;
    std::vector<std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>> solvers_;
    double h_min_ = 0.0;
};

}  // namespace greenfield
