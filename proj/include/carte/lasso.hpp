#pragma once

#include "carte/rng.hpp"
#include "carte/trial_data.hpp"

#include <Eigen/Core>

#include <vector>

namespace carte {

/**
 * One (stratum, arm) cell with outcomes and covariates centered by the cell
 * means. Column second moments m_j = (1/N) sum_i xc_ij^2 drive the
 * coordinate updates; columns with m_j = 0 are frozen at coefficient zero.
 */
struct CenteredDesign {
    Eigen::MatrixXd xc;             // N x p
    Eigen::VectorXd yc;             // N
    Eigen::VectorXd second_moment;  // p
    int stratum = 0;
    int arm = 0;

    int rows() const { return static_cast<int>(xc.rows()); }
    int dim() const { return static_cast<int>(xc.cols()); }
};

// Extract and center the (k, a) cell. Requires at least 2 rows.
CenteredDesign center_cell(const TrialDataset& d, const StrataIndex& idx,
                           const StratumArmStats& stats, int k, int a);

// Copy of cd with yc replaced by yc - xc * offset. Solving the copy at
// offset zero matches solving cd with the offset.
CenteredDesign residualize(const CenteredDesign& cd, const Eigen::VectorXd& offset);

struct SolverOptions {
    double tol = 1e-7;       // max coordinate change per sweep
    double kkt_tol = 1e-6;   // stationarity certificate
    int max_iter = 100000;   // sweeps
};

struct LassoFit {
    Eigen::VectorXd coef;  // solved vector (beta for offset zero, delta otherwise)
    double lambda = 0.0;
    int iterations = 0;
    double kkt_violation = 0.0;
    double objective = 0.0;
};

/**
 * Cyclic coordinate descent for
 *
 *   min_delta (1/N) ||yc - xc (offset + delta)||^2 + lambda ||delta||_1.
 *
 * The objective is checked to be non-increasing across sweeps. Convergence
 * requires both the coordinate-change and the KKT tolerance; failure to
 * converge within max_iter sweeps throws ConvergenceError carrying the last
 * iterate and its violation.
 */
LassoFit lasso_cd(const CenteredDesign& cd, double lambda,
                  const Eigen::VectorXd* offset = nullptr, const SolverOptions& opt = {},
                  const Eigen::VectorXd* warm_start = nullptr);

// Max subgradient violation of coef for the problem above: for inactive j,
// max(|g_j| - lambda, 0); for active j, |g_j - lambda * sign(coef_j)|, where
// g = (2/N) xc^T residual. Zero-variance columns are excluded.
double kkt_check(const CenteredDesign& cd, const Eigen::VectorXd& coef, double lambda,
                 const Eigen::VectorXd* offset = nullptr);

// Descending log-spaced grid from lambda_max = 2 max_j |(1/N) xc_j^T yc|
// (the smallest lambda with an all-zero solution) down to
// ratio_min * lambda_max. Returns {0} when lambda_max is 0.
std::vector<double> lambda_grid(const CenteredDesign& cd, int n_grid = 50,
                                double ratio_min = 1e-3);

// K-fold cross-validation over a descending grid with warm starts. Folds are
// a random partition from rng; rule: minimum mean held-out squared error,
// ties broken toward larger lambda.
double cv_lambda(const CenteredDesign& cd, int folds, const std::vector<double>& grid, Rng rng,
                 const SolverOptions& opt = {});

/**
 * Per-cell lambda policy: cross-validation by default, or one fixed value.
 */
struct LassoConfig {
    bool use_cv = true;
    double fixed_lambda = 0.0;
    int cv_folds = 5;
    int grid_size = 50;
    double grid_ratio_min = 1e-3;
    SolverOptions solver;
};

// Resolve the lambda for one cell under the policy (runs CV when enabled).
double choose_lambda(const CenteredDesign& cd, const LassoConfig& cfg, Rng rng);

}  // namespace carte
