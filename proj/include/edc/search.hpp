#pragma once

#include <cstdint>
#include <functional>

#include "edc/dataset.hpp"
#include "edc/equation.hpp"
#include "edc/optimizer.hpp"

namespace edc {

struct SearchConfig {
    int beam_width = 10;
    int max_depth = 3;  // three product summands already use six distinct features
    int restarts_per_candidate = 3;
    std::uint64_t seed = 0;
    int workers = 0;  // 0 = hardware concurrency

    void validate() const;
};

struct ScoredCandidate {
    Equation equation;
    double train_loss = 0.0;
    int depth = 0;  // summand count
};

using ProgressFn = std::function<void(int depth, long candidates_evaluated, double best_loss)>;

// Beam search over equation structures. Level 0 is the optimized constant
// model; each level extends every beam member by one summand, optimizes the
// children, and keeps the top beam_width structurally distinct candidates by
// training log loss (ties: fewer constants, then canonical structure order).
// Un-extended parents stay in the pool, so the best loss never degrades with
// depth. Returns the best candidate seen at any level.
//
// Deterministic for a fixed seed regardless of worker count. The contract for
// per-candidate seeding: the candidate at enumeration position i of depth d is
// optimized restarts_per_candidate times with optimizer seeds
// mix_seed(mix_seed(cfg.seed, d, i), r); the root candidate uses d = 0, i = 0.
// Results merge in enumeration order, never completion order.
ScoredCandidate beam_search(const EncodedDataset& data, const GrammarConfig& grammar,
                            const SearchConfig& cfg, const OptimizerConfig& opt,
                            const ProgressFn& progress = {});

}  // namespace edc
