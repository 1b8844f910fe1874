#include "edc/search.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>
#include <vector>

namespace edc {

namespace {

using StructureKey = std::vector<std::array<int, 4>>;

StructureKey structure_key(const Equation& eq) {
    StructureKey key;
    key.reserve(eq.summands.size());
    for (const auto& s : eq.summands) key.push_back(s.structure());
    return key;
}

// loss, then parsimony, then canonical structure: a strict total order that
// pins down every selection the search makes.
bool better(const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.train_loss != b.train_loss) return a.train_loss < b.train_loss;
    if (a.equation.constant_count() != b.equation.constant_count()) {
        return a.equation.constant_count() < b.equation.constant_count();
    }
    return compare_structure(a.equation, b.equation) < 0;
}

FitResult fit_with_restarts(const Equation& eq, const EncodedDataset& data,
                            const OptimizerConfig& opt, int restarts, std::uint64_t child_seed) {
    FitResult best;
    for (int r = 0; r < restarts; ++r) {
        OptimizerConfig run = opt;
        run.seed = mix_seed(child_seed, static_cast<std::uint64_t>(r));
        FitResult fit = optimize_constants(eq, data, run);
        if (r == 0 || fit.final_loss < best.final_loss) best = std::move(fit);
    }
    return best;
}

}  // namespace

void SearchConfig::validate() const {
    if (beam_width < 1) throw_config("invalid-search", "beam_width must be >= 1");
    if (max_depth < 1) throw_config("invalid-search", "max_depth must be >= 1");
    if (restarts_per_candidate < 1) throw_config("invalid-search", "restarts must be >= 1");
    if (workers < 0) throw_config("invalid-search", "workers must be >= 0");
}

ScoredCandidate beam_search(const EncodedDataset& data, const GrammarConfig& grammar,
                            const SearchConfig& cfg, const OptimizerConfig& opt,
                            const ProgressFn& progress) {
    cfg.validate();
    grammar.validate();
    data.validate();
    if (!data.has_both_classes()) {
        throw_unlearnable("single-class-labels", "training data contains one class only");
    }

    int workers = cfg.workers > 0 ? cfg.workers
                                  : std::max(1u, std::thread::hardware_concurrency());

    // level 0: the constant model
    Equation root;
    FitResult root_fit =
        fit_with_restarts(root, data, opt, cfg.restarts_per_candidate, mix_seed(cfg.seed, 0, 0));
    ScoredCandidate global_best{root_fit.equation, root_fit.final_loss, 0};
    std::vector<ScoredCandidate> beam{global_best};
    long evaluated = 1;
    if (progress) progress(0, evaluated, global_best.train_loss);

    for (int depth = 1; depth <= cfg.max_depth; ++depth) {
        // enumerate children of the whole beam, de-duplicated by structure
        std::set<StructureKey> seen;
        for (const auto& parent : beam) seen.insert(structure_key(parent.equation));
        std::vector<Equation> children;
        for (const auto& parent : beam) {
            for (auto& child : refinements(parent.equation, grammar)) {
                if (seen.insert(structure_key(child)).second) children.push_back(std::move(child));
            }
        }
        if (children.empty()) break;

        std::vector<ScoredCandidate> scored(children.size());
        const int n_threads = std::min<int>(workers, static_cast<int>(children.size()));
        std::atomic<std::size_t> next{0};
        const auto run = [&] {
            for (std::size_t i = next.fetch_add(1); i < children.size(); i = next.fetch_add(1)) {
                FitResult fit =
                    fit_with_restarts(children[i], data, opt, cfg.restarts_per_candidate,
                                      mix_seed(cfg.seed, static_cast<std::uint64_t>(depth),
                                               static_cast<std::uint64_t>(i)));
                scored[i] = ScoredCandidate{std::move(fit.equation), fit.final_loss,
                                            static_cast<int>(children[i].summands.size())};
            }
        };
        if (n_threads <= 1) {
            run();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(n_threads);
            for (int t = 0; t < n_threads; ++t) pool.emplace_back(run);
            for (auto& t : pool) t.join();
        }
        evaluated += static_cast<long>(children.size());

        // pool = carried-forward parents + scored children, in enumeration order
        std::vector<ScoredCandidate> pool = beam;
        pool.insert(pool.end(), std::make_move_iterator(scored.begin()),
                    std::make_move_iterator(scored.end()));
        std::stable_sort(pool.begin(), pool.end(), better);

        if (better(pool.front(), global_best)) global_best = pool.front();
        beam.assign(pool.begin(),
                    pool.begin() + std::min<std::size_t>(cfg.beam_width, pool.size()));
        if (progress) progress(depth, evaluated, global_best.train_loss);
    }

    return global_best;
}

}  // namespace edc
