#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "greenfield/errors.hpp"
#include "greenfield/gaussian.hpp"

namespace greenfield {

/// Optimizer-internal coordinate for a parameter: positive parameters move
/// on log scale, penalties on log(1+alpha).
enum class ParamTransform { Identity, Log, Log1p };

struct Parameter {
    std::string name;
    double value = 0.0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    ParamTransform transform = ParamTransform::Identity;

    static Parameter positive(std::string name, double value,
                              double lower = 1e-8, double upper = 1e8) {
        return {std::move(name), value, lower, upper, ParamTransform::Log};
    }
    static Parameter penalty(std::string name, double value, double upper = 1e8) {
        return {std::move(name), value, 0.0, upper, ParamTransform::Log1p};
    }

    double to_internal() const {
        switch (transform) {
            case ParamTransform::Log: return std::log(value);
            case ParamTransform::Log1p: return std::log1p(value);
            case ParamTransform::Identity: return value;
        }
        return value;
    }
    double from_internal(double t) const {
        switch (transform) {
            case ParamTransform::Log: return std::exp(t);
            case ParamTransform::Log1p: return std::expm1(t);
            case ParamTransform::Identity: return t;
        }
        return t;
    }
    bool in_bounds() const { return value >= lower && value <= upper; }
};

struct ParameterVector {
    std::vector<Parameter> params;

    double get(const std::string& name) const {
        for (const auto& p : params)
            if (p.name == name) return p.value;
        throw ConfigError("unknown parameter '" + name + "'");
    }
    void validate() const {
        if (params.empty() || params.size() > 4)
            throw ConfigError("fit supports 1-4 free parameters");
        for (const auto& p : params)
            if (!p.in_bounds())
                throw ConfigError("parameter '" + p.name + "' outside bounds");
    }
};

using ModelBuilder = std::function<Eigen::SparseMatrix<double>(const ParameterVector&)>;

/// Marginal log-likelihood of z under Sigma = R Q^{-1} R^T + N, dense in the
/// observation dimension; the additive -(n/2) log 2pi constant is included.
inline double marginal_loglik(const Eigen::SparseMatrix<double>& Q,
                              const ObservationSet& obs) {
    obs.validate();
    const Eigen::Index k = obs.count();
    if (k > 2000) throw ConfigError("marginal_loglik: observation count exceeds dense limit");
    PrecisionFactor factor(Q);
    Eigen::MatrixXd Rt = Eigen::MatrixXd(obs.R.transpose());
    Eigen::MatrixXd CRt = factor.solve(Rt);
    Eigen::MatrixXd Sigma = Eigen::MatrixXd(obs.R) * CRt;
    Sigma += obs.noise_var.asDiagonal();
    Sigma = 0.5 * (Sigma + Sigma.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
    if (llt.info() != Eigen::Success)
        throw ModelError("marginal_loglik: Sigma_theta is not positive definite");
    const Eigen::VectorXd alpha = llt.solve(obs.values);
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
    return -0.5 * obs.values.dot(alpha) - 0.5 * log_det -
           0.5 * static_cast<double>(k) * std::log(2.0 * std::numbers::pi);
}

inline double marginal_loglik(const ModelBuilder& build, const ParameterVector& theta,
                              const ObservationSet& obs) {
    theta.validate();
    try {
        return marginal_loglik(build(theta), obs);
    } catch (const NumericError& e) {
        throw ModelError(std::string(e.what()) + " at theta=" + [&] {
            std::string s;
            for (const auto& p : theta.params) s += p.name + "=" + std::to_string(p.value) + " ";
            return s;
        }());
    }
}

/// Same likelihood through the precision-form identities
///   log det Sigma = log det Q_post - log det Q + sum log N_ii
///   z^T Sigma^{-1} z = z^T N^{-1} z - b^T Q_post^{-1} b,  b = R^T N^{-1} z.
/// Kept as an independent algebraic route for cross-validation.
inline double marginal_loglik_precision_form(const Eigen::SparseMatrix<double>& Q,
                                             const ObservationSet& obs) {
    obs.validate();
    for (Eigen::Index i = 0; i < obs.noise_var.size(); ++i)
        if (obs.noise_var[i] <= 0.0)
            throw ConfigError("precision-form likelihood needs positive noise");
    PrecisionFactor prior(Q);
    Posterior post = condition_precision(Q, obs);
    double log_det_noise = obs.noise_var.array().log().sum();
    const double log_det_sigma = post.log_det - prior.log_det() + log_det_noise;
    const Eigen::VectorXd b = obs.R.transpose() * (obs.values.array() / obs.noise_var.array()).matrix();
    const double quad = (obs.values.array().square() / obs.noise_var.array()).sum() -
                        b.dot(post.factor->solve(b));
    return -0.5 * quad - 0.5 * log_det_sigma -
           0.5 * static_cast<double>(obs.count()) * std::log(2.0 * std::numbers::pi);
}

struct FitOptions {
    int budget = 200;       // objective evaluations
    double xtol = 1e-6;     // simplex spread in internal coordinates
    double ftol = 1e-9;
};

struct FitTraceEntry {
    std::vector<double> theta;  // natural coordinates, order of ParameterVector
    double loglik = 0.0;
};

struct FitResult {
    ParameterVector theta;
    double loglik = -std::numeric_limits<double>::infinity();
    bool converged = false;
    int evaluations = 0;
    std::vector<FitTraceEntry> trace;
};

/// Nelder-Mead ascent of the marginal log-likelihood over 1-4 transformed
/// parameters. Deterministic given theta_init; out-of-bounds or failing
/// evaluations are rejected with -inf.
inline FitResult fit(const ModelBuilder& build, const ObservationSet& obs,
                     const ParameterVector& theta_init, const FitOptions& opt = {}) {
    theta_init.validate();
    const std::size_t d = theta_init.params.size();
    FitResult result;
    result.theta = theta_init;

    const auto to_theta = [&](const Eigen::VectorXd& t) {
        ParameterVector th = theta_init;
        for (std::size_t i = 0; i < d; ++i)
            th.params[i].value = th.params[i].from_internal(t[static_cast<Eigen::Index>(i)]);
        return th;
    };
    const auto objective = [&](const Eigen::VectorXd& t) -> double {
        ParameterVector th = to_theta(t);
        for (const auto& p : th.params)
            if (!p.in_bounds()) return -std::numeric_limits<double>::infinity();
        double value;
        try {
            value = marginal_loglik(build(th), obs);
        } catch (const ModelError&) {
            return -std::numeric_limits<double>::infinity();
        } catch (const NumericError&) {
            return -std::numeric_limits<double>::infinity();
        }
        FitTraceEntry entry;
        for (const auto& p : th.params) entry.theta.push_back(p.value);
        entry.loglik = value;
        result.trace.push_back(std::move(entry));
        return value;
    };

    // simplex of d+1 points in internal coordinates
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> fs;
    Eigen::VectorXd x0(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) x0[static_cast<Eigen::Index>(i)] = theta_init.params[i].to_internal();
    xs.push_back(x0);
    for (std::size_t i = 0; i < d; ++i) {
        Eigen::VectorXd xi = x0;
        xi[static_cast<Eigen::Index>(i)] += 0.25;
        xs.push_back(xi);
    }
    int evals = 0;
    const auto eval = [&](const Eigen::VectorXd& x) {
        ++evals;
        return objective(x);
    };
    for (const auto& x : xs) fs.push_back(eval(x));

    const auto order = [&] {
        for (std::size_t i = 1; i < xs.size(); ++i) {  // insertion sort, descending f
            auto x = xs[i];
            auto f = fs[i];
            std::size_t j = i;
            while (j > 0 && fs[j - 1] < f) {
                xs[j] = xs[j - 1];
                fs[j] = fs[j - 1];
                --j;
            }
            xs[j] = x;
            fs[j] = f;
        }
    };

    bool converged = false;
    while (evals < opt.budget) {
        order();
        double spread_f = std::abs(fs.front() - fs.back());
        double spread_x = 0.0;
        for (std::size_t i = 1; i < xs.size(); ++i)
            spread_x = std::max(spread_x, (xs[i] - xs[0]).cwiseAbs().maxCoeff());
        if (std::isfinite(fs.front()) && spread_f < opt.ftol && spread_x < opt.xtol) {
            converged = true;
            break;
        }
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) centroid += xs[i];
        centroid /= static_cast<double>(d);
        const Eigen::VectorXd& worst = xs.back();

        Eigen::VectorXd xr = centroid + (centroid - worst);
        const double fr = eval(xr);
        if (fr > fs.front()) {
            Eigen::VectorXd xe = centroid + 2.0 * (centroid - worst);
            const double fe = (evals < opt.budget) ? eval(xe) : -std::numeric_limits<double>::infinity();
            if (fe > fr) {
                xs.back() = xe;
                fs.back() = fe;
            } else {
                xs.back() = xr;
                fs.back() = fr;
            }
        } else if (fr > fs[fs.size() - 2]) {
            xs.back() = xr;
            fs.back() = fr;
        } else {
            const bool outside = fr > fs.back();
            Eigen::VectorXd xc = outside ? centroid + 0.5 * (xr - centroid)
                                         : centroid - 0.5 * (centroid - worst);
            const double fc = (evals < opt.budget) ? eval(xc) : -std::numeric_limits<double>::infinity();
            if (fc > (outside ? fr : fs.back())) {
                xs.back() = xc;
                fs.back() = fc;
            } else {
                for (std::size_t i = 1; i < xs.size(); ++i) {  // shrink toward best
                    xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
                    fs[i] = (evals < opt.budget) ? eval(xs[i]) : -std::numeric_limits<double>::infinity();
                }
            }
        }
    }
    order();
    result.theta = to_theta(xs.front());
    result.loglik = fs.front();
    result.converged = converged;
    result.evaluations = evals;
    return result;
}

}  // namespace greenfield
