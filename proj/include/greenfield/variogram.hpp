#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "greenfield/assembly.hpp"
#include "greenfield/errors.hpp"
#include "greenfield/mesh.hpp"

namespace greenfield {

/// gamma_ij = (C_ii + C_jj - 2 C_ij) / 2 entrywise.
inline Eigen::MatrixXd variogram_matrix(const Eigen::MatrixXd& C) {
    if (C.rows() != C.cols()) throw ConfigError("variogram_matrix: C must be square");
    const Eigen::VectorXd d = C.diagonal();
    Eigen::MatrixXd g = 0.5 * (d.replicate(1, C.cols()) + d.transpose().replicate(C.rows(), 1)) - C;
    g.diagonal().setZero();
    return g;
}

enum class PairClass { All, Interior, NearBoundary, SameSide, CrossInterface };

inline const char* pair_class_name(PairClass c) {
    switch (c) {
        case PairClass::All: return "all";
        case PairClass::Interior: return "interior";
        case PairClass::NearBoundary: return "near_boundary";
        case PairClass::SameSide: return "same_side";
        case PairClass::CrossInterface: return "cross_interface";
    }
    return "?";
}

/// Pair classification inputs: the domain box (for boundary distance), a
/// buffer width, and interface positions (x = const lines; 1D points).
struct PairClassConfig {
    int dim = 1;
    double lo_x = 0.0, hi_x = 1.0;
    double lo_y = 0.0, hi_y = 1.0;
    double boundary_buffer = 0.0;
    std::vector<double> interface_x;

    double boundary_distance(double x, double y = 0.0) const {
        double d = std::min(x - lo_x, hi_x - x);
        if (dim == 2) d = std::min(d, std::min(y - lo_y, hi_y - y));
        return d;
    }
    bool near_boundary(double x, double y = 0.0) const {
        return boundary_distance(x, y) <= boundary_buffer;
    }
    bool crosses_interface(double x1, double x2) const {
        for (double s : interface_x)
            if ((x1 - s) * (x2 - s) < 0.0) return true;
        return false;
    }
};

struct VariogramRow {
    double lag = 0.0;  // bin center
    PairClass cls = PairClass::All;
    std::size_t count = 0;  // point pairs in the bin
    double semivariance = 0.0;
};

struct VariogramTable {
    std::vector<VariogramRow> rows;
};

/// Evenly spaced bin edges up to half the domain diameter (the default
/// binning used by the CLI).
inline std::vector<double> default_bin_edges(double diameter, std::size_t bins = 15) {
    std::vector<double> edges(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b)
        edges[b] = 0.5 * diameter * static_cast<double>(b) / static_cast<double>(bins);
    return edges;
}

/// Empirical semivariances (1/2) mean (Z(s)-Z(t))^2 over pairs and samples,
/// stratified by lag bin and pair class. samples is dofs x n_samples;
/// points_x/points_y give per-dof coordinates. Empty class/bin combinations
/// are omitted.
inline VariogramTable empirical_variogram(const Eigen::MatrixXd& samples,
                                          const std::vector<double>& points_x,
                                          const std::vector<double>& points_y,
                                          const std::vector<double>& bin_edges,
                                          const PairClassConfig& cfg) {
    const std::size_t n = points_x.size();
    if (static_cast<std::size_t>(samples.rows()) != n)
        throw ConfigError("empirical_variogram: samples/points size mismatch");
    if (samples.cols() < 1) throw ConfigError("empirical_variogram: need at least one sample");
    if (bin_edges.size() < 2 || !std::is_sorted(bin_edges.begin(), bin_edges.end()))
        throw ConfigError("empirical_variogram: bin edges must be monotone");
    if (cfg.dim == 2 && points_y.size() != n)
        throw ConfigError("empirical_variogram: missing y coordinates");

    const std::size_t nbins = bin_edges.size() - 1;
    struct Acc {
        double sum = 0.0;
        std::size_t pairs = 0;
    };
    std::map<std::pair<int, std::size_t>, Acc> acc;  // (class, bin) -> accumulator

    const double nsamp = static_cast<double>(samples.cols());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = points_x[i] - points_x[j];
            const double dy = (cfg.dim == 2) ? points_y[i] - points_y[j] : 0.0;
            const double lag = std::sqrt(dx * dx + dy * dy);
            if (lag < bin_edges.front() || lag >= bin_edges.back()) continue;
            std::size_t b = 0;
            while (b + 1 < nbins && lag >= bin_edges[b + 1]) ++b;

            double sq = 0.0;
            for (Eigen::Index s = 0; s < samples.cols(); ++s) {
                const double diff = samples(static_cast<Eigen::Index>(i), s) -
                                    samples(static_cast<Eigen::Index>(j), s);
                sq += 0.5 * diff * diff;
            }
            sq /= nsamp;

            const bool nb = cfg.near_boundary(points_x[i], cfg.dim == 2 ? points_y[i] : 0.0) ||
                            cfg.near_boundary(points_x[j], cfg.dim == 2 ? points_y[j] : 0.0);
            const bool cross = cfg.crosses_interface(points_x[i], points_x[j]);
            const PairClass classes[3] = {PairClass::All,
                                          nb ? PairClass::NearBoundary : PairClass::Interior,
                                          cross ? PairClass::CrossInterface : PairClass::SameSide};
            for (PairClass c : classes) {
                auto& slot = acc[{static_cast<int>(c), b}];
                slot.sum += sq;
                slot.pairs += 1;
            }
        }
    }

    VariogramTable table;
    for (const auto& [key, slot] : acc) {
        VariogramRow row;
        row.cls = static_cast<PairClass>(key.first);
        row.lag = 0.5 * (bin_edges[key.second] + bin_edges[key.second + 1]);
        row.count = slot.pairs;
        row.semivariance = slot.sum / static_cast<double>(slot.pairs);
        table.rows.push_back(row);
    }
    return table;
}

/// Covariance of the pulled-back field Z = W . f on a 1D point set:
/// C_Z(x,x') = C_W(f(x), f(x')). f must map into [lo, hi], the domain of
/// the kernel.
template <typename Kernel, typename Map>
Eigen::MatrixXd pullback_covariance(Kernel&& C_W, Map&& f, const std::vector<double>& points,
                                    double lo, double hi) {
    const Eigen::Index n = static_cast<Eigen::Index>(points.size());
    std::vector<double> mapped(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        mapped[i] = f(points[i]);
        if (!(mapped[i] >= lo && mapped[i] <= hi))
            throw std::domain_error("pullback map leaves the kernel domain");
    }
    Eigen::MatrixXd C(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
            C(i, j) = C_W(mapped[static_cast<std::size_t>(i)], mapped[static_cast<std::size_t>(j)]);
            C(j, i) = C(i, j);
        }
    return C;
}

/// Dirichlet-vs-Neumann variogram comparison on a common mesh/operator.
/// Both assemblies are restricted to the interior nodes (the Dirichlet free
/// set) so the matrices share an index space.
struct BcCompareResult {
    std::vector<double> x;  // node coordinate per index
    Eigen::MatrixXd gamma_dirichlet;
    Eigen::MatrixXd gamma_neumann;
    Eigen::MatrixXd difference;  // gamma_D - gamma_N
};

inline BcCompareResult bc_compare(const Mesh1D& mesh, const OperatorSpec& base_spec) {
    if (mesh.node_count() > 502)
        throw ConfigError("bc_compare: dense comparison limited to 500 interior nodes");
    OperatorSpec spec_d = base_spec;
    spec_d.bcs[mesh.boundary_left] = BoundaryCondition::dirichlet();
    spec_d.bcs[mesh.boundary_right] = BoundaryCondition::dirichlet();
    OperatorSpec spec_n = base_spec;
    spec_n.bcs[mesh.boundary_left] = BoundaryCondition::neumann();
    spec_n.bcs[mesh.boundary_right] = BoundaryCondition::neumann();

    const SparsePrecision qd = assemble_1d(mesh, spec_d);
    const SparsePrecision qn = assemble_1d(mesh, spec_n);

    const Eigen::MatrixXd cd = Eigen::MatrixXd(qd.Q).llt().solve(
        Eigen::MatrixXd::Identity(qd.Q.rows(), qd.Q.cols()));
    const Eigen::MatrixXd cn_full = Eigen::MatrixXd(qn.Q).llt().solve(
        Eigen::MatrixXd::Identity(qn.Q.rows(), qn.Q.cols()));

    // Interior nodes indexed by the Dirichlet dof order.
    BcCompareResult out;
    const Eigen::Index n = qd.Q.rows();
    Eigen::MatrixXd cn(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t node_i = qd.dofs.node_of_dof[static_cast<std::size_t>(i)];
        const auto ni = qn.dofs.dof_of_node[node_i];
        for (Eigen::Index j = 0; j < n; ++j) {
            const std::size_t node_j = qd.dofs.node_of_dof[static_cast<std::size_t>(j)];
            const auto nj = qn.dofs.dof_of_node[node_j];
            cn(i, j) = cn_full(ni, nj);
        }
        out.x.push_back(qd.dofs.x[static_cast<std::size_t>(i)]);
    }
    out.gamma_dirichlet = variogram_matrix(cd);
    out.gamma_neumann = variogram_matrix(cn);
    out.difference = out.gamma_dirichlet - out.gamma_neumann;
    return out;
}

}  // namespace greenfield
