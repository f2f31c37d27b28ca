#pragma once

#include "carte/rng.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace carte {

enum class Procedure { StratifiedBlock, StratifiedBiasedCoin, Simple };

Procedure procedure_from_string(const std::string& s);
std::string to_string(Procedure p);

/**
 * Treatment allocation plan: per-stratum integer arm ratios (length A+1,
 * control first), per-stratum block sizes for the stratified block design,
 * and the procedure tag. Target proportions are pi[k][a] = ratio/sum(ratio).
 */
struct AllocationSpec {
    Procedure procedure = Procedure::StratifiedBlock;
    std::vector<std::vector<int>> ratios;  // one row per stratum
    std::vector<int> block_size;           // one entry per stratum
    double bias = 2.0 / 3.0;               // biased coin only, in (0.5, 1]

    // Same ratios and block size in every stratum.
    static AllocationSpec uniform(Procedure proc, int num_strata, std::vector<int> ratio,
                                  int block = 0, double bias = 2.0 / 3.0);

    int num_strata() const { return static_cast<int>(ratios.size()); }
    int num_arms() const;  // A
    std::vector<double> target_props(int k) const;

    // Throws SpecError on invalid ratios, block sizes or bias.
    void check() const;
};

// Stratified permuted-block assignment. Within each stratum units are filled
// by consecutive shuffled blocks with exact ratio counts; the final partial
// block is a prefix of a fresh shuffled block. Each stratum draws from an
// independent substream of rng, so its assignment depends only on
// (seed, stratum, count).
std::vector<int> stratified_block_assign(const std::vector<int>& strata,
                                         const AllocationSpec& spec, const Rng& rng);

// Sequential per-stratum biased coin. With zero within-stratum imbalance the
// draw follows pi[k]; otherwise arms with a positive deficit d_a (target
// count so far minus actual) get weight pi_a * (1 + c * d_a) with
// c = (2*bias - 1) / ((1 - bias) * max|d|), which reduces to Efron's rule for
// two arms and becomes deterministic as bias -> 1.
std::vector<int> biased_coin_assign(const std::vector<int>& strata, const AllocationSpec& spec,
                                    double bias, const Rng& rng);

// i.i.d. categorical draws.
std::vector<int> simple_assign(int n, const std::vector<double>& probs, const Rng& rng);

// Dispatch on spec.procedure.
std::vector<int> assign(const std::vector<int>& strata, const AllocationSpec& spec,
                        const Rng& rng);

/**
 * Empirical allocation check: per-stratum absolute deviations
 * |n[k]a / n[k] - pi[k]a|. Strata with no units report zero deviation.
 */
struct AllocationReport {
    Eigen::MatrixXd deviation;   // K x (A+1)
    Eigen::MatrixXi cell_count;  // K x (A+1)
    std::vector<int> stratum_count;
    double max_deviation = 0.0;
};

AllocationReport allocation_report(const std::vector<int>& arms, const std::vector<int>& strata,
                                   const AllocationSpec& spec);

}  // namespace carte
