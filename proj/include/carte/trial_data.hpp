#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace carte {

/**
 * Column naming for trial CSV files. The outcome, arm and stratum columns
 * are located by name; every remaining column is a covariate unless an
 * explicit covariate list is given. Covariate order in the file defines the
 * covariate index used by all coefficient vectors.
 */
struct ColumnSpec {
    std::string outcome = "y";
    std::string arm = "arm";
    std::string stratum = "stratum";
    std::vector<std::string> covariates;  // empty: all remaining columns, file order
};

/**
 * One randomized trial: outcomes y, arm labels in {0..A} (0 = control),
 * stratum labels in {1..K} and an n x p matrix of additional baseline
 * covariates. Immutable after construction; construction validates lengths,
 * label ranges and finiteness.
 */
class TrialDataset {
public:
    // declared_arms / declared_strata: -1 infers A (resp. K) as the max label
    // present. A label above a declared bound is a schema error.
    TrialDataset(Eigen::VectorXd y, std::vector<int> arm, std::vector<int> stratum,
                 Eigen::MatrixXd x, int declared_arms = -1, int declared_strata = -1,
                 std::vector<std::string> covariate_names = {});

    int n() const { return static_cast<int>(y_.size()); }
    int num_arms() const { return num_arms_; }      // A: treatments, arms are 0..A
    int num_strata() const { return num_strata_; }  // K
    int dim() const { return static_cast<int>(x_.cols()); }  // p

    const Eigen::VectorXd& y() const { return y_; }
    const std::vector<int>& arm() const { return arm_; }
    const std::vector<int>& stratum() const { return stratum_; }
    const Eigen::MatrixXd& x() const { return x_; }
    const std::vector<std::string>& covariate_names() const { return covariate_names_; }

private:
    Eigen::VectorXd y_;
    std::vector<int> arm_;
    std::vector<int> stratum_;
    Eigen::MatrixXd x_;
    int num_arms_ = 0;
    int num_strata_ = 0;
    std::vector<std::string> covariate_names_;
};

/**
 * Row indices grouped by (stratum, arm) cell. Cells partition 0..n-1.
 */
class StrataIndex {
public:
    static StrataIndex build(const TrialDataset& d);

    // k in 1..K, a in 0..A.
    const std::vector<int>& cell(int k, int a) const { return cells_[flat(k, a)]; }
    int cell_count(int k, int a) const { return static_cast<int>(cells_[flat(k, a)].size()); }
    int stratum_count(int k) const { return stratum_counts_[k - 1]; }
    int num_strata() const { return num_strata_; }
    int num_arms() const { return num_arms_; }

private:
    int flat(int k, int a) const { return (k - 1) * (num_arms_ + 1) + a; }

    std::vector<std::vector<int>> cells_;
    std::vector<int> stratum_counts_;
    int num_strata_ = 0;
    int num_arms_ = 0;
};

/**
 * Per-cell outcome and covariate means, per-stratum covariate means and the
 * estimated stratum proportions p_n[k] = n[k]/n.
 */
struct StratumArmStats {
    int num_strata = 0;
    int num_arms = 0;
    int dim = 0;
    Eigen::MatrixXd y_cell_mean;                   // K x (A+1)
    std::vector<Eigen::VectorXd> x_cell_mean;      // K*(A+1) vectors of length p
    std::vector<Eigen::VectorXd> x_stratum_mean;   // K vectors of length p
    Eigen::VectorXd stratum_prop;                  // length K

    double y_mean(int k, int a) const { return y_cell_mean(k - 1, a); }
    const Eigen::VectorXd& x_mean(int k, int a) const {
        return x_cell_mean[(k - 1) * (num_arms + 1) + a];
    }
    const Eigen::VectorXd& x_mean(int k) const { return x_stratum_mean[k - 1]; }
    double prop(int k) const { return stratum_prop(k - 1); }
};

// Exact sample means per cell; requires every (k,a) cell nonempty, otherwise
// throws DegenerateDesignError naming the cell.
StratumArmStats compute_stats(const TrialDataset& d, const StrataIndex& idx);

/**
 * Design health report: per-cell counts, cells below min_cell, and covariate
 * columns with zero variance within a stratum. A report, never an exception.
 */
struct ValidationReport {
    struct CellFlag {
        int stratum;
        int arm;
        int count;
    };
    struct ZeroVarFlag {
        int stratum;
        int column;  // 0-based covariate index
    };

    Eigen::MatrixXi cell_counts;  // K x (A+1)
    std::vector<CellFlag> small_cells;
    std::vector<ZeroVarFlag> zero_variance;

    bool cells_ok() const { return small_cells.empty(); }
};

ValidationReport validate(const TrialDataset& d, int min_cell = 2);

// CSV schema: header `y,arm,stratum,x1,...,xp`, '.' decimal point, integer arm
// and stratum labels. A sidecar `<path>.json` may declare A, K and covariate
// names; without one, A and K are inferred from the labels present.
TrialDataset load_trial_csv(const std::string& path, const ColumnSpec& schema = {});

// Writes the dataset plus a `<path>.json` sidecar declaring A, K and the
// covariate names. Doubles are written in shortest round-trip form, so
// load_trial_csv(write_trial_csv(d)) reproduces d bit for bit.
// `meta_json`, if nonempty, must be a JSON object; it is stored under "meta".
void write_trial_csv(const std::string& path, const TrialDataset& d,
                     const std::string& meta_json = {});

}  // namespace carte
