#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "greenfield/errors.hpp"

namespace greenfield {

struct BoundaryCondition {
    enum class Kind { Dirichlet, Neumann, Robin };

    Kind kind = Kind::Dirichlet;
    double robin_beta = 0.0;

    static BoundaryCondition dirichlet() { return {Kind::Dirichlet, 0.0}; }
    static BoundaryCondition neumann() { return {Kind::Neumann, 0.0}; }
    static BoundaryCondition robin(double beta) {
        if (!(beta >= 0.0) || !std::isfinite(beta))
            throw ModelError("Robin coefficient must be finite and >= 0");
        return {Kind::Robin, beta};
    }
};

struct InterfaceNode {
    std::size_t node;
    std::string id;
};

/// How far an interface position moved when snapped to the mesh.
struct SnapReport {
    double requested;
    double snapped;
    std::size_t index;
    double distance;
};

struct Mesh1D {
    std::vector<double> nodes;  // strictly increasing, n+1 entries
    std::string boundary_left = "left";
    std::string boundary_right = "right";
    std::vector<InterfaceNode> interfaces;

    std::size_t element_count() const { return nodes.size() - 1; }
    std::size_t node_count() const { return nodes.size(); }

    void validate() const {
        if (nodes.size() < 3) throw ConfigError("Mesh1D needs at least 2 elements");
        for (std::size_t i = 1; i < nodes.size(); ++i)
            if (!(nodes[i] > nodes[i - 1]))
                throw ConfigError("Mesh1D nodes must be strictly increasing");
        std::set<std::size_t> seen;
        for (const auto& f : interfaces) {
            if (f.node == 0 || f.node >= nodes.size() - 1)
                throw ConfigError("interface node must be interior");
            if (!seen.insert(f.node).second)
                throw ConfigError("node " + std::to_string(f.node) +
                                  " carries two interface identifiers");
        }
    }
};

struct InterfaceLine {
    int axis;           // 0: line of constant x, 1: line of constant y
    std::size_t index;  // grid-line index along that axis
    std::string id;
};

struct Grid2D {
    std::vector<double> x_nodes, y_nodes;  // strictly increasing
    std::string tag_left = "left";
    std::string tag_right = "right";
    std::string tag_bottom = "bottom";
    std::string tag_top = "top";
    std::vector<InterfaceLine> interfaces;

    std::size_t nx() const { return x_nodes.size() - 1; }  // elements along x
    std::size_t ny() const { return y_nodes.size() - 1; }
    std::size_t node_count() const { return x_nodes.size() * y_nodes.size(); }
    std::size_t node_index(std::size_t i, std::size_t j) const {
        return j * x_nodes.size() + i;
    }

    void validate() const {
        if (x_nodes.size() < 2 || y_nodes.size() < 2)
            throw ConfigError("Grid2D needs at least 2 nodes per axis");
        for (std::size_t i = 1; i < x_nodes.size(); ++i)
            if (!(x_nodes[i] > x_nodes[i - 1]))
                throw ConfigError("Grid2D x_nodes must be strictly increasing");
        for (std::size_t j = 1; j < y_nodes.size(); ++j)
            if (!(y_nodes[j] > y_nodes[j - 1]))
                throw ConfigError("Grid2D y_nodes must be strictly increasing");
        std::set<std::pair<int, std::size_t>> seen;
        for (const auto& f : interfaces) {
            const auto& line = (f.axis == 0) ? x_nodes : y_nodes;
            if (f.axis != 0 && f.axis != 1)
                throw ConfigError("interface line axis must be 0 or 1");
            if (f.index == 0 || f.index >= line.size() - 1)
                throw ConfigError("interface line must be an interior grid line");
            if (!seen.insert({f.axis, f.index}).second)
                throw ConfigError("duplicate interface line");
        }
    }
};

namespace detail {

/// Nearest entry of an ascending list; exact ties go to the smaller index.
inline std::size_t nearest_index(const std::vector<double>& xs, double v) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double d = std::abs(xs[i] - v);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace detail

/// Equally spaced mesh on (0, L), or (-L, L) with `symmetric` set.
/// Interface positions snap to the nearest node.
inline Mesh1D uniform_interval(double L, std::size_t n,
                               const std::vector<double>& interfaces = {},
                               bool symmetric = false,
                               std::vector<SnapReport>* snaps = nullptr) {
    if (!(L > 0.0)) throw ConfigError("uniform_interval: L must be positive");
    if (n < 2) throw ConfigError("uniform_interval: need at least 2 elements");
    const double lo = symmetric ? -L : 0.0;
    const double hi = L;
    Mesh1D mesh;
    mesh.nodes.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        mesh.nodes[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
    mesh.nodes.front() = lo;
    mesh.nodes.back() = hi;

    std::set<std::size_t> taken;
    for (std::size_t k = 0; k < interfaces.size(); ++k) {
        const double p = interfaces[k];
        if (!(p > lo && p < hi))
            throw std::domain_error("interface position outside open domain");
        const std::size_t idx = detail::nearest_index(mesh.nodes, p);
        if (idx == 0 || idx == n)
            throw std::domain_error("interface position snapped onto the boundary");
        if (!taken.insert(idx).second)
            throw ConfigError("two interfaces snap to the same node");
        mesh.interfaces.push_back({idx, "s" + std::to_string(k)});
        if (snaps)
            snaps->push_back({p, mesh.nodes[idx], idx, std::abs(mesh.nodes[idx] - p)});
    }
    mesh.validate();
    return mesh;
}

/// Structured grid on (0,Lx) x (0,Ly); vertical interface lines snap to the
/// nearest x grid line.
inline Grid2D uniform_grid(double Lx, double Ly, std::size_t nx, std::size_t ny,
                           const std::vector<double>& interface_x_positions = {},
                           std::vector<SnapReport>* snaps = nullptr) {
    if (!(Lx > 0.0) || !(Ly > 0.0)) throw ConfigError("uniform_grid: lengths must be positive");
    if (nx < 2 || ny < 2) throw ConfigError("uniform_grid: need at least 2 elements per axis");
    Grid2D g;
    g.x_nodes.resize(nx + 1);
    g.y_nodes.resize(ny + 1);
    for (std::size_t i = 0; i <= nx; ++i)
        g.x_nodes[i] = Lx * static_cast<double>(i) / static_cast<double>(nx);
    for (std::size_t j = 0; j <= ny; ++j)
        g.y_nodes[j] = Ly * static_cast<double>(j) / static_cast<double>(ny);
    g.x_nodes.back() = Lx;
    g.y_nodes.back() = Ly;

    std::set<std::size_t> taken;
    for (std::size_t k = 0; k < interface_x_positions.size(); ++k) {
        const double p = interface_x_positions[k];
        if (!(p > 0.0 && p < Lx))
            throw std::domain_error("interface line outside open domain");
        const std::size_t idx = detail::nearest_index(g.x_nodes, p);
        if (idx == 0 || idx == nx)
            throw std::domain_error("interface line snapped onto the boundary");
        if (!taken.insert(idx).second)
            throw ConfigError("two interface lines snap to the same grid line");
        g.interfaces.push_back({0, idx, "s" + std::to_string(k)});
        if (snaps)
            snaps->push_back({p, g.x_nodes[idx], idx, std::abs(g.x_nodes[idx] - p)});
    }
    g.validate();
    return g;
}

}  // namespace greenfield
