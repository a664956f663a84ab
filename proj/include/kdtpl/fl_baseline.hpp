#pragma once

#include "kdtpl/points.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace kdtpl {

/// Row-standardized weights from a symmetrized k-nearest-neighbor adjacency,
/// stored in CSR form, with the real spectrum of the row-standardized
/// operator.
class WeightsMatrix {
public:
    std::size_t n() const noexcept { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
    std::size_t k() const noexcept { return k_; }

    std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
    std::span<const Index> cols() const noexcept { return cols_; }
    std::span<const double> values() const noexcept { return vals_; }

    /// Ascending. Empty when the spectrum was not requested.
    const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
    bool has_spectrum() const noexcept { return !eigenvalues_.empty(); }
    double lambda_min() const { return eigenvalues_.front(); }
    double lambda_max() const { return eigenvalues_.back(); }

    /// out = W v
    void apply(std::span<const double> v, std::span<double> out) const;

    /// Row-major dense copy, for small-n checks.
    std::vector<double> to_dense() const;

private:
    friend WeightsMatrix build_knn_weights(const PointSet&, std::size_t, bool);

    std::size_t k_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<Index> cols_;
    std::vector<double> vals_;
    std::vector<double> eigenvalues_;
};

/// Throws InvalidK unless n > k >= 1.
WeightsMatrix build_knn_weights(const PointSet& points, std::size_t k, bool spectrum = true);

/// Open interval of admissible rho, shrunk by 1e-6 on both sides.
std::pair<double, double> admissible_rho(const WeightsMatrix& w);

/// Sum of log(1 - rho * lambda) over the spectrum. Throws InvalidRho outside
/// the admissible interval.
double log_det_filter(const WeightsMatrix& w, double rho);

/// Full SEM log-likelihood of y = beta x + u, u = rho W u + eps.
double sem_loglik(std::span<const double> y, std::span<const double> x, const WeightsMatrix& w,
                  double beta, double sigma2, double rho);

struct SemScore {
    double d_beta = 0.0;
    double d_sigma2 = 0.0;
    double d_rho = 0.0;
};

/// Analytic gradient of sem_loglik.
SemScore sem_score(std::span<const double> y, std::span<const double> x, const WeightsMatrix& w,
                   double beta, double sigma2, double rho);

struct SemProfile {
    double beta = 0.0;
    double sigma2 = 0.0;
    double loglik = 0.0;
};

/// GLS beta and mean squared filtered residual at fixed rho, with the
/// resulting (concentrated) log-likelihood.
SemProfile profile_rho(std::span<const double> y, std::span<const double> x,
                       const WeightsMatrix& w, double rho);

struct SemFit {
    double beta = 0.0;
    double sigma2 = 0.0;
    double rho = 0.0;
    double loglik = 0.0;
    bool converged = false;
};

/// Maximum likelihood by golden-section search on the concentrated
/// likelihood, bracketed by a 41-point scan of the admissible interval.
SemFit fit_sem_ml(std::span<const double> y, std::span<const double> x, const WeightsMatrix& w);

/// (I - rho W)^{-1} eps by fixed-point iteration; |rho| < 1 required.
std::vector<double> spatial_filter_inverse(const WeightsMatrix& w, double rho,
                                           std::span<const double> eps);

} // namespace kdtpl
