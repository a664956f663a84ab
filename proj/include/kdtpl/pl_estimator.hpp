#pragma once

#include "kdtpl/coupling.hpp"
#include "kdtpl/points.hpp"

#include <cstddef>
#include <vector>

namespace kdtpl {

/// Covariate and response at both members of each couplet, aligned with the
/// couplet order.
struct PairedSample {
    std::vector<double> x_i, y_i, x_l, y_l;

    std::size_t q() const noexcept { return x_i.size(); }
};

/// The six sums from which the closed-form estimators are computed.
struct SufficientStats {
    double a1 = 0.0; // sum of x^2 over both members
    double a2 = 0.0; // sum of y^2 over both members
    double a3 = 0.0; // sum of x*y within each member
    double a4 = 0.0; // sum of cross-member x*y, both directions
    double a5 = 0.0; // sum of x_i * x_l
    double a6 = 0.0; // sum of y_i * y_l
    std::size_t q = 0;
};

struct PlParams {
    double beta = 0.0;
    double sigma2 = 1.0;
    double psi = 0.0;
};

struct PlFit {
    PlParams params;
    std::size_t iterations = 0;
    bool converged = false;
    double loglik = 0.0;
    std::size_t q = 0;
};

struct PlSolverOptions {
    double tolerance = 1e-10;
    std::size_t max_iterations = 1000;
    double psi_clamp = 0.999;
};

/// Throws MissingData when the points carry no covariate/response.
PairedSample extract_paired_sample(const PointSet& points, const CoupletSet& cs);

/// Throws EmptySample for q = 0.
SufficientStats sufficient_statistics(const PairedSample& s);

/// Sum over couples of the bivariate normal log density of the residuals
/// (y - beta*x) with variance sigma2 and correlation psi. Throws
/// InvalidParams unless sigma2 > 0 and |psi| < 1.
double pairwise_loglik(const PairedSample& s, const PlParams& p);

/// Same quantity evaluated from the sufficient statistics alone.
double pairwise_loglik(const SufficientStats& st, const PlParams& p);

/// One Gauss-Seidel pass over the score equations: beta from psi, sigma2 from
/// (beta, psi), then the unclamped psi from (beta, sigma2).
PlParams pl_sweep(const SufficientStats& st, double psi);

/// Closed-form pairwise-likelihood estimate, iterating pl_sweep from psi = 0.
/// Throws InsufficientCouples (q < 3), SingularSystem, DegenerateVariance.
PlFit solve_pl(const SufficientStats& st, const PlSolverOptions& options = {});

/// Derivative-free maximization of pairwise_loglik, started from a coarse
/// psi grid. Independent of the closed form; used as its oracle.
PlFit numerical_pl_mle(const PairedSample& s);

} // namespace kdtpl
