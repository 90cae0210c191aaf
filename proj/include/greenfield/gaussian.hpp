#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "greenfield/assembly.hpp"
#include "greenfield/errors.hpp"
#include "greenfield/rng.hpp"

namespace greenfield {

/// Sparse symmetric factorization (LDL^T with fill-reducing ordering); the
/// single backend for solves, log-determinants and sampling.
class PrecisionFactor {
public:
    explicit PrecisionFactor(const Eigen::SparseMatrix<double>& Q) : n_(Q.rows()) {
        ldlt_.compute(Q);
        if (ldlt_.info() != Eigen::Success)
            throw NumericError("precision factorization failed");
        if (ldlt_.vectorD().minCoeff() <= 0.0)
            throw NumericError("precision matrix is not positive definite");
    }

    Eigen::Index size() const { return n_; }

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return ldlt_.solve(b); }
    Eigen::MatrixXd solve(const Eigen::MatrixXd& B) const { return ldlt_.solve(B); }

    double log_det() const { return ldlt_.vectorD().array().log().sum(); }

    /// eta with Cov(eta) = Q^{-1}: draw xi ~ N(0,I) and back-substitute
    /// through the transposed factor (Q = P^T L D L^T P, so
    /// eta = P^T L^{-T} D^{-1/2} xi).
    Eigen::VectorXd fluctuation(GaussianStream& stream) const {
        Eigen::VectorXd xi(n_);
        for (Eigen::Index i = 0; i < n_; ++i) xi[i] = stream.next();
        return fluctuation_from(xi);
    }

    Eigen::VectorXd fluctuation_from(const Eigen::VectorXd& xi) const {
        Eigen::VectorXd w = xi.array() / ldlt_.vectorD().array().sqrt();
        Eigen::VectorXd v = ldlt_.matrixU().solve(w);
        return ldlt_.permutationPinv() * v;
    }

private:
    Eigen::Index n_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

/// Point-evaluation design: rows of R over free dofs, observed values and a
/// diagonal noise covariance.
struct ObservationSet {
    Eigen::SparseMatrix<double> R;  // n_obs x n_dofs
    Eigen::VectorXd values;
    Eigen::VectorXd noise_var;  // diagonal of N

    Eigen::Index count() const { return R.rows(); }

    void validate() const {
        if (values.size() != R.rows() || noise_var.size() != R.rows())
            throw ConfigError("observation set: inconsistent row counts");
        for (Eigen::Index i = 0; i < noise_var.size(); ++i)
            if (!(noise_var[i] >= 0.0))
                throw ConfigError("observation noise variance must be >= 0");
        Eigen::VectorXd row_nnz = Eigen::VectorXd::Zero(R.rows());
        for (int k = 0; k < R.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(R, k); it; ++it)
                row_nnz[it.row()] += (it.value() != 0.0) ? 1.0 : 0.0;
        for (Eigen::Index i = 0; i < R.rows(); ++i)
            if (row_nnz[i] == 0.0)
                throw ConfigError("observation row " + std::to_string(i) +
                                  " touches no free dof");
    }
};

/// Builds an ObservationSet from point observations (x[, y], value, sd).
struct PointObservation {
    double x = 0.0, y = 0.0;
    double value = 0.0;
    double noise_sd = 0.0;
};

inline ObservationSet make_point_observations(const Mesh1D& mesh, const DofMap& map,
                                              const std::vector<PointObservation>& pts) {
    ObservationSet obs;
    std::vector<Eigen::Triplet<double>> trip;
    obs.values.resize(static_cast<Eigen::Index>(pts.size()));
    obs.noise_var.resize(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t k = 0; k < pts.size(); ++k) {
        for (const auto& [dof, w] : interpolation_weights_1d(mesh, map, pts[k].x))
            trip.emplace_back(static_cast<int>(k), static_cast<int>(dof), w);
        obs.values[static_cast<Eigen::Index>(k)] = pts[k].value;
        obs.noise_var[static_cast<Eigen::Index>(k)] = pts[k].noise_sd * pts[k].noise_sd;
    }
    obs.R.resize(static_cast<int>(pts.size()), static_cast<int>(map.size()));
    obs.R.setFromTriplets(trip.begin(), trip.end());
    obs.validate();
    return obs;
}

inline ObservationSet make_point_observations(const Grid2D& grid, const DofMap& map,
                                              const std::vector<PointObservation>& pts) {
    ObservationSet obs;
    std::vector<Eigen::Triplet<double>> trip;
    obs.values.resize(static_cast<Eigen::Index>(pts.size()));
    obs.noise_var.resize(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t k = 0; k < pts.size(); ++k) {
        for (const auto& [dof, w] : interpolation_weights_2d(grid, map, pts[k].x, pts[k].y))
            trip.emplace_back(static_cast<int>(k), static_cast<int>(dof), w);
        obs.values[static_cast<Eigen::Index>(k)] = pts[k].value;
        obs.noise_var[static_cast<Eigen::Index>(k)] = pts[k].noise_sd * pts[k].noise_sd;
    }
    obs.R.resize(static_cast<int>(pts.size()), static_cast<int>(map.size()));
    obs.R.setFromTriplets(trip.begin(), trip.end());
    obs.validate();
    return obs;
}

/// Posterior after a linear-Gaussian update: mean, factorized posterior
/// precision, and its log-determinant.
struct Posterior {
    Eigen::VectorXd mean;
    std::shared_ptr<const PrecisionFactor> factor;
    double log_det = 0.0;
};

struct ConditionalMoments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

/// Covariance-form conditioning of a joint Gaussian (X observed, Y queried):
/// mean = Syx Sxx^{-1} x, covariance = Syy - Syx Sxx^{-1} Sxy.
inline ConditionalMoments condition_covariance(const Eigen::MatrixXd& Sxx,
                                               const Eigen::MatrixXd& Sxy,
                                               const Eigen::MatrixXd& Syy,
                                               const Eigen::VectorXd& x) {
    if (Sxx.rows() != Sxx.cols() || Sxx.rows() != Sxy.rows() || Syy.rows() != Sxy.cols() ||
        Syy.rows() != Syy.cols() || x.size() != Sxx.rows())
        throw ConfigError("condition_covariance: inconsistent block dimensions");
    Eigen::LLT<Eigen::MatrixXd> llt(Sxx);
    if (llt.info() != Eigen::Success)
        throw NumericError("condition_covariance: Sxx is not positive definite");
    ConditionalMoments out;
    out.mean = Sxy.transpose() * llt.solve(x);
    out.covariance = Syy - Sxy.transpose() * llt.solve(Sxy);
    return out;
}

/// Precision-form update: Q_post = Q + R^T N^{-1} R, mean solves
/// Q_post zbar = R^T N^{-1} z. Requires strictly positive noise; exact
/// interpolation goes through hard_condition.
inline Posterior condition_precision(const Eigen::SparseMatrix<double>& Q,
                                     const ObservationSet& obs) {
    obs.validate();
    for (Eigen::Index i = 0; i < obs.noise_var.size(); ++i)
        if (obs.noise_var[i] <= 0.0)
            throw ConfigError("zero observation noise: use hard_condition for "
                              "exact interpolation");
    Eigen::SparseMatrix<double> Ninv(obs.count(), obs.count());
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index i = 0; i < obs.count(); ++i)
        trip.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0 / obs.noise_var[i]);
    Ninv.setFromTriplets(trip.begin(), trip.end());

    Eigen::SparseMatrix<double> Qpost = Q + Eigen::SparseMatrix<double>(
                                                obs.R.transpose() * Ninv * obs.R);
    Posterior post;
    post.factor = std::make_shared<PrecisionFactor>(Qpost);
    post.log_det = post.factor->log_det();
    if (obs.count() > 0) {
        Eigen::VectorXd rhs = obs.R.transpose() * (obs.values.array() / obs.noise_var.array()).matrix();
        post.mean = post.factor->solve(rhs);
    } else {
        post.mean = Eigen::VectorXd::Zero(Q.rows());
    }
    return post;
}

/// Hard (zero-noise) conditioning via the kriging identity with solves
/// against the prior precision: mu = C R^T (R C R^T)^{-1} z. R mu = z holds
/// exactly and observed functionals get zero posterior variance.
struct HardPosterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cross;           // W = Q^{-1} R^T  (n_dofs x k)
    Eigen::LDLT<Eigen::MatrixXd> gram;  // factorization of R W
    std::shared_ptr<const PrecisionFactor> prior;

    /// Posterior covariance of the dofs listed in `subset` (dense columns of
    /// the prior covariance are formed by solves).
    Eigen::MatrixXd covariance_subset(const std::vector<Eigen::Index>& subset) const {
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(cross.rows(),
                                                  static_cast<Eigen::Index>(subset.size()));
        for (Eigen::Index j = 0; j < E.cols(); ++j) E(subset[static_cast<std::size_t>(j)], j) = 1.0;
        Eigen::MatrixXd Ccols = prior->solve(E);  // n x s
        Eigen::MatrixXd Wsub(static_cast<Eigen::Index>(subset.size()), cross.cols());
        for (Eigen::Index j = 0; j < Wsub.rows(); ++j)
            Wsub.row(j) = cross.row(subset[static_cast<std::size_t>(j)]);
        Eigen::MatrixXd corr = Wsub * gram.solve(Wsub.transpose());
        Eigen::MatrixXd Csub(Wsub.rows(), Wsub.rows());
        for (Eigen::Index i = 0; i < Csub.rows(); ++i)
            for (Eigen::Index j = 0; j < Csub.cols(); ++j)
                Csub(i, j) = Ccols(subset[static_cast<std::size_t>(i)], j);
        return 0.5 * (Csub + Csub.transpose()) - 0.5 * (corr + corr.transpose());
    }
};

inline HardPosterior hard_condition(const Eigen::SparseMatrix<double>& Q,
                                    const Eigen::SparseMatrix<double>& R,
                                    const Eigen::VectorXd& z) {
    if (R.rows() != z.size()) throw ConfigError("hard_condition: R/z size mismatch");
    if (R.rows() == 0) throw ConfigError("hard_condition: no constraints");
    HardPosterior out;
    out.prior = std::make_shared<PrecisionFactor>(Q);
    Eigen::MatrixXd Rt = Eigen::MatrixXd(R.transpose());
    out.cross = out.prior->solve(Rt);                    // W = C R^T
    Eigen::MatrixXd S = Eigen::MatrixXd(R) * out.cross;  // R C R^T
    S = 0.5 * (S + S.transpose());
    out.gram.compute(S);
    if (out.gram.info() != Eigen::Success)
        throw NumericError("hard_condition: constraint Gram matrix is degenerate");
    // LDLT succeeds on semidefinite input; reject near-singular pivots.
    const double dmax = out.gram.vectorD().cwiseAbs().maxCoeff();
    if (out.gram.vectorD().minCoeff() <= 1e-12 * dmax)
        throw NumericError("hard_condition: constraints are (nearly) linearly dependent");
    out.mean = out.cross * out.gram.solve(z);
    return out;
}

/// Marginal precision of the kept dofs: Q_eff = Q_KK - Q_KE Q_EE^{-1} Q_EK.
inline Eigen::MatrixXd schur_complement(const Eigen::SparseMatrix<double>& Q,
                                        const std::vector<Eigen::Index>& keep) {
    if (keep.empty()) throw std::domain_error("schur_complement: empty keep set");
    const Eigen::Index n = Q.rows();
    std::vector<char> is_kept(static_cast<std::size_t>(n), 0);
    for (auto k : keep) {
        if (k < 0 || k >= n) throw std::domain_error("schur_complement: keep index out of range");
        if (is_kept[static_cast<std::size_t>(k)])
            throw std::domain_error("schur_complement: duplicate keep index");
        is_kept[static_cast<std::size_t>(k)] = 1;
    }
    std::vector<Eigen::Index> elim;
    for (Eigen::Index i = 0; i < n; ++i)
        if (!is_kept[static_cast<std::size_t>(i)]) elim.push_back(i);

    const Eigen::Index nk = static_cast<Eigen::Index>(keep.size());
    const Eigen::Index ne = static_cast<Eigen::Index>(elim.size());
    if (ne == 0) return Eigen::MatrixXd(Q);

    std::vector<Eigen::Index> pos(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < nk; ++i) pos[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])] = i;
    for (Eigen::Index i = 0; i < ne; ++i) pos[static_cast<std::size_t>(elim[static_cast<std::size_t>(i)])] = i;

    Eigen::MatrixXd Qkk = Eigen::MatrixXd::Zero(nk, nk);
    Eigen::MatrixXd Qek = Eigen::MatrixXd::Zero(ne, nk);
    std::vector<Eigen::Triplet<double>> tee;
    for (int col = 0; col < Q.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(Q, col); it; ++it) {
            const bool rk = is_kept[static_cast<std::size_t>(it.row())];
            const bool ck = is_kept[static_cast<std::size_t>(it.col())];
            if (rk && ck)
                Qkk(pos[static_cast<std::size_t>(it.row())], pos[static_cast<std::size_t>(it.col())]) = it.value();
            else if (!rk && ck)
                Qek(pos[static_cast<std::size_t>(it.row())], pos[static_cast<std::size_t>(it.col())]) = it.value();
            else if (!rk && !ck)
                tee.emplace_back(static_cast<int>(pos[static_cast<std::size_t>(it.row())]),
                                 static_cast<int>(pos[static_cast<std::size_t>(it.col())]), it.value());
        }
    }
    Eigen::SparseMatrix<double> Qee(ne, ne);
    Qee.setFromTriplets(tee.begin(), tee.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Qee);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0)
        throw NumericError("schur_complement: eliminated block is not positive definite");
    Eigen::MatrixXd X = ldlt.solve(Qek);  // Q_EE^{-1} Q_EK
    Eigen::MatrixXd S = Qkk - Qek.transpose() * X;
    return 0.5 * (S + S.transpose());
}

/// Schur complement packaged back as a SparsePrecision over the kept dofs.
inline SparsePrecision schur_marginal(const SparsePrecision& P,
                                      const std::vector<Eigen::Index>& keep) {
    Eigen::MatrixXd S = schur_complement(P.Q, keep);
    SparsePrecision out;
    out.Q = S.sparseView(1.0, 0.0);
    out.Q.makeCompressed();
    out.dofs.dim = P.dofs.dim;
    for (auto k : keep) {
        out.dofs.node_of_dof.push_back(P.dofs.node_of_dof[static_cast<std::size_t>(k)]);
        out.dofs.x.push_back(P.dofs.x[static_cast<std::size_t>(k)]);
        if (P.dofs.dim == 2) out.dofs.y.push_back(P.dofs.y[static_cast<std::size_t>(k)]);
    }
    return out;
}

/// Discrete Dirichlet-to-Neumann operator: the Schur complement of a
/// Neumann-assembled precision onto the boundary dofs.
inline Eigen::MatrixXd dtn_discrete(const Eigen::SparseMatrix<double>& Q,
                                    const std::vector<Eigen::Index>& boundary_dofs) {
    if (boundary_dofs.empty()) throw std::domain_error("dtn_discrete: empty boundary set");
    return schur_complement(Q, boundary_dofs);
}

/// Conditional simulation: column s is zbar + eta_s, with eta_s drawn
/// through the posterior factor from the stream seeded by (seed, s).
inline Eigen::MatrixXd sample(const Posterior& post, int count, std::uint64_t seed) {
    Eigen::MatrixXd out(post.mean.size(), count);
    for (int s = 0; s < count; ++s) {
        GaussianStream stream(stream_seed(seed, static_cast<std::uint64_t>(s)));
        out.col(s) = post.mean + post.factor->fluctuation(stream);
    }
    return out;
}

struct GeneratingFunctionalCheck {
    double empirical = 0.0;
    double exact = 0.0;
    double ratio() const { return empirical / exact; }
};

/// Monte-Carlo check of E[exp(J^T z)] = exp(J^T Q^{-1} J / 2) on prior
/// samples. Guards against exponent overflow.
inline GeneratingFunctionalCheck generating_functional_check(
    const Eigen::SparseMatrix<double>& Q, const Eigen::VectorXd& J, int n_samples,
    std::uint64_t seed) {
    PrecisionFactor factor(Q);
    const double s = J.dot(factor.solve(J));
    if (s > 40.0)
        throw NumericError("generating functional exponent J^T Q^{-1} J too large");
    GeneratingFunctionalCheck out;
    out.exact = std::exp(0.5 * s);
    double acc = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        GaussianStream stream(stream_seed(seed, static_cast<std::uint64_t>(k)));
        acc += std::exp(J.dot(factor.fluctuation(stream)));
    }
    out.empirical = acc / static_cast<double>(n_samples);
    return out;
}

/// Covariance of A Z for Z ~ N(0, C): A C A^T.
inline Eigen::MatrixXd linear_image(const Eigen::MatrixXd& C, const Eigen::MatrixXd& A) {
    if (C.rows() != C.cols() || A.cols() != C.rows())
        throw ConfigError("linear_image: dimension mismatch");
    Eigen::MatrixXd out = A * C * A.transpose();
    return 0.5 * (out + out.transpose());
}

/// Separable multivariate precision Q = G^{-1} (x) Q0 (Kronecker product),
/// so that the covariance factorizes as G (x) Q0^{-1}. Block dof (v, i) maps
/// to index v * n + i.
inline Eigen::SparseMatrix<double> separable_precision(const Eigen::MatrixXd& G,
                                                       const Eigen::SparseMatrix<double>& Q0) {
    if (G.rows() != G.cols()) throw ConfigError("separable_precision: G must be square");
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success)
        throw ModelError("separable_precision: G is not positive definite");
    const Eigen::MatrixXd Ginv =
        llt.solve(Eigen::MatrixXd::Identity(G.rows(), G.cols()));
    const Eigen::Index p = G.rows();
    const Eigen::Index n = Q0.rows();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(Q0.nonZeros()) * static_cast<std::size_t>(p * p));
    for (Eigen::Index u = 0; u < p; ++u)
        for (Eigen::Index v = 0; v < p; ++v) {
            const double g = Ginv(u, v);
            if (g == 0.0) continue;
            for (int col = 0; col < Q0.outerSize(); ++col)
                for (Eigen::SparseMatrix<double>::InnerIterator it(Q0, col); it; ++it)
                    trip.emplace_back(static_cast<int>(u * n + it.row()),
                                      static_cast<int>(v * n + it.col()), g * it.value());
        }
    Eigen::SparseMatrix<double> Q(p * n, p * n);
    Q.setFromTriplets(trip.begin(), trip.end());
    Q.makeCompressed();
    return Q;
}

}  // namespace greenfield
