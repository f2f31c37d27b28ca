#include "carte/randomizer.hpp"

#include "carte/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace carte {

namespace {

constexpr double kProbTol = 1e-9;

int max_stratum_label(const std::vector<int>& strata) {
    int k_max = 0;
    for (const int k : strata) {
        if (k < 1) throw SpecError("stratum label " + std::to_string(k) + " below 1");
        k_max = std::max(k_max, k);
    }
    return k_max;
}

// Unit positions per stratum, in order of appearance.
std::vector<std::vector<int>> positions_by_stratum(const std::vector<int>& strata, int K) {
    std::vector<std::vector<int>> pos(K);
    for (std::size_t i = 0; i < strata.size(); ++i) {
        const int k = strata[i];
        if (k > K) {
            throw SpecError("stratum label " + std::to_string(k) +
                            " exceeds the allocation spec's " + std::to_string(K) + " strata");
        }
        pos[k - 1].push_back(static_cast<int>(i));
    }
    return pos;
}

}  // namespace

Procedure procedure_from_string(const std::string& s) {
    if (s == "stratified-block") return Procedure::StratifiedBlock;
    if (s == "stratified-biased-coin") return Procedure::StratifiedBiasedCoin;
    if (s == "simple") return Procedure::Simple;
    throw SpecError("unknown procedure '" + s + "'");
}

std::string to_string(Procedure p) {
    switch (p) {
        case Procedure::StratifiedBlock: return "stratified-block";
        case Procedure::StratifiedBiasedCoin: return "stratified-biased-coin";
        case Procedure::Simple: return "simple";
    }
    return "?";
}

AllocationSpec AllocationSpec::uniform(Procedure proc, int num_strata, std::vector<int> ratio,
                                       int block, double bias) {
    AllocationSpec spec;
    spec.procedure = proc;
    spec.ratios.assign(num_strata, ratio);
    spec.block_size.assign(num_strata, block);
    spec.bias = bias;
    spec.check();
    return spec;
}

int AllocationSpec::num_arms() const {
    if (ratios.empty()) throw SpecError("allocation spec has no strata");
    return static_cast<int>(ratios.front().size()) - 1;
}

std::vector<double> AllocationSpec::target_props(int k) const {
    const auto& r = ratios.at(k - 1);
    const double total = std::accumulate(r.begin(), r.end(), 0.0);
    std::vector<double> pi(r.size());
    for (std::size_t a = 0; a < r.size(); ++a) pi[a] = r[a] / total;
    return pi;
}

void AllocationSpec::check() const {
    if (ratios.empty()) throw SpecError("allocation spec has no strata");
    const std::size_t arms = ratios.front().size();
    if (arms < 2) throw SpecError("allocation needs a control and at least one treatment");
    for (std::size_t k = 0; k < ratios.size(); ++k) {
        if (ratios[k].size() != arms) {
            throw SpecError("ratio rows must all have the same number of arms");
        }
        int sum = 0;
        for (const int r : ratios[k]) {
            if (r <= 0) throw SpecError("ratio entries must be positive");
            sum += r;
        }
        if (procedure == Procedure::StratifiedBlock) {
            if (block_size.size() != ratios.size()) {
                throw SpecError("one block size per stratum is required");
            }
            if (block_size[k] <= 0 || block_size[k] % sum != 0) {
                throw SpecError("block size " + std::to_string(block_size[k]) +
                                " is not a positive multiple of the ratio sum " +
                                std::to_string(sum) + " in stratum " + std::to_string(k + 1));
            }
        }
    }
    if (procedure == Procedure::StratifiedBiasedCoin && (bias <= 0.5 || bias > 1.0)) {
        throw SpecError("biased-coin bias must lie in (0.5, 1]");
    }
}

std::vector<int> stratified_block_assign(const std::vector<int>& strata,
                                         const AllocationSpec& spec, const Rng& rng) {
    spec.check();
    if (spec.procedure != Procedure::StratifiedBlock) {
        throw SpecError("stratified_block_assign requires the stratified-block procedure");
    }
    max_stratum_label(strata);
    const int K = spec.num_strata();
    const auto pos = positions_by_stratum(strata, K);

    std::vector<int> arms(strata.size(), 0);
    for (int k = 1; k <= K; ++k) {
        const auto& units = pos[k - 1];
        if (units.empty()) continue;
        Rng sub = rng.derive("stratum", static_cast<std::uint64_t>(k));
        const auto& ratio = spec.ratios[k - 1];
        const int block = spec.block_size[k - 1];
        const int ratio_sum = std::accumulate(ratio.begin(), ratio.end(), 0);
        const int copies = block / ratio_sum;

        std::vector<int> block_content;
        block_content.reserve(block);
        std::size_t filled = 0;
        while (filled < units.size()) {
            block_content.clear();
            for (std::size_t a = 0; a < ratio.size(); ++a) {
                block_content.insert(block_content.end(),
                                     static_cast<std::size_t>(copies) * ratio[a],
                                     static_cast<int>(a));
            }
            sub.shuffle(block_content);
            const std::size_t take =
                std::min(static_cast<std::size_t>(block), units.size() - filled);
            for (std::size_t t = 0; t < take; ++t) {
                arms[units[filled + t]] = block_content[t];
            }
            filled += take;
        }
    }
    return arms;
}

std::vector<int> biased_coin_assign(const std::vector<int>& strata, const AllocationSpec& spec,
                                    double bias, const Rng& rng) {
    spec.check();
    if (spec.procedure != Procedure::StratifiedBiasedCoin) {
        throw SpecError("biased_coin_assign requires the stratified-biased-coin procedure");
    }
    if (bias <= 0.5 || bias > 1.0) throw SpecError("bias must lie in (0.5, 1]");
    max_stratum_label(strata);
    const int K = spec.num_strata();
    const auto pos = positions_by_stratum(strata, K);

    std::vector<int> arms(strata.size(), 0);
    for (int k = 1; k <= K; ++k) {
        const auto& units = pos[k - 1];
        if (units.empty()) continue;
        Rng sub = rng.derive("stratum", static_cast<std::uint64_t>(k));
        const std::vector<double> pi = spec.target_props(k);
        const int n_arms = static_cast<int>(pi.size());
        std::vector<int> count(n_arms, 0);
        std::vector<double> weight(n_arms);

        for (std::size_t t = 0; t < units.size(); ++t) {
            double max_abs_deficit = 0.0;
            double max_deficit = 0.0;
            for (int a = 0; a < n_arms; ++a) {
                const double deficit = static_cast<double>(t) * pi[a] - count[a];
                weight[a] = deficit;  // stash deficits first
                max_abs_deficit = std::max(max_abs_deficit, std::abs(deficit));
                max_deficit = std::max(max_deficit, deficit);
            }
            int drawn;
            if (max_abs_deficit < 1e-12) {
                drawn = sub.categorical(pi);
            } else if (bias >= 1.0) {
                // all weight on the most under-represented arms
                double total = 0.0;
                for (int a = 0; a < n_arms; ++a) {
                    const bool top = weight[a] >= max_deficit - 1e-12;
                    weight[a] = top ? pi[a] : 0.0;
                    total += weight[a];
                }
                for (int a = 0; a < n_arms; ++a) weight[a] /= total;
                drawn = sub.categorical(weight);
            } else {
                const double c = (2.0 * bias - 1.0) / ((1.0 - bias) * max_abs_deficit);
                double total = 0.0;
                for (int a = 0; a < n_arms; ++a) {
                    weight[a] = pi[a] * (1.0 + c * std::max(weight[a], 0.0));
                    total += weight[a];
                }
                for (int a = 0; a < n_arms; ++a) weight[a] /= total;
                drawn = sub.categorical(weight);
            }
            ++count[drawn];
            arms[units[t]] = drawn;
        }
    }
    return arms;
}

std::vector<int> simple_assign(int n, const std::vector<double>& probs, const Rng& rng) {
    if (n < 0) throw SpecError("negative sample size");
    double total = 0.0;
    for (const double p : probs) {
        if (p < 0.0) throw SpecError("negative assignment probability");
        total += p;
    }
    if (probs.empty() || std::abs(total - 1.0) > kProbTol) {
        throw SpecError("assignment probabilities must sum to 1");
    }
    Rng sub = rng.derive("simple");
    std::vector<int> arms(n);
    for (int i = 0; i < n; ++i) arms[i] = sub.categorical(probs);
    return arms;
}

std::vector<int> assign(const std::vector<int>& strata, const AllocationSpec& spec,
                        const Rng& rng) {
    switch (spec.procedure) {
        case Procedure::StratifiedBlock: return stratified_block_assign(strata, spec, rng);
        case Procedure::StratifiedBiasedCoin:
            return biased_coin_assign(strata, spec, spec.bias, rng);
        case Procedure::Simple:
            return simple_assign(static_cast<int>(strata.size()), spec.target_props(1), rng);
    }
    throw SpecError("unknown procedure");
}

AllocationReport allocation_report(const std::vector<int>& arms, const std::vector<int>& strata,
                                   const AllocationSpec& spec) {
    if (arms.size() != strata.size()) throw SpecError("arms and strata lengths differ");
    const int K = spec.num_strata();
    const int A = spec.num_arms();

    AllocationReport rep;
    rep.deviation.setZero(K, A + 1);
    rep.cell_count.setZero(K, A + 1);
    rep.stratum_count.assign(K, 0);
    for (std::size_t i = 0; i < arms.size(); ++i) {
        const int k = strata[i];
        if (k < 1 || k > K) throw SpecError("stratum label out of range");
        if (arms[i] < 0 || arms[i] > A) throw SpecError("arm label out of range");
        ++rep.cell_count(k - 1, arms[i]);
        ++rep.stratum_count[k - 1];
    }
    for (int k = 1; k <= K; ++k) {
        if (rep.stratum_count[k - 1] == 0) continue;
        const std::vector<double> pi = spec.target_props(k);
        for (int a = 0; a <= A; ++a) {
            const double frac = static_cast<double>(rep.cell_count(k - 1, a)) /
                                static_cast<double>(rep.stratum_count[k - 1]);
            rep.deviation(k - 1, a) = std::abs(frac - pi[a]);
            rep.max_deviation = std::max(rep.max_deviation, rep.deviation(k - 1, a));
        }
    }
    return rep;
}

}  // namespace carte
