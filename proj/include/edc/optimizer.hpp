#pragma once

#include <cstdint>

#include "edc/dataset.hpp"
#include "edc/equation.hpp"
#include "edc/rng.hpp"

namespace edc {

struct SgdConfig {
    double learning_rate = 0.1;
    int epochs = 200;
    int batch_size = 32;
};

struct HillConfig {
    int budget = 2000;           // total loss evaluations n
    double random_fraction = 0.2;  // share spent on random probes
    int top_k = 5;               // probes promoted to climb starts
    double step_size = 0.05;     // +- step per coordinate
};

struct OptimizerConfig {
    SgdConfig sgd;
    HillConfig hill;
    double init_range = 1.0;  // constants start Uniform(-init_range, init_range)
    std::uint64_t seed = 0;
    bool force_sgd = false;   // ablation: gradient path even for exponentials

    void validate() const;
};

enum class FitStatus { ok, budget_exhausted, diverged };

struct FitResult {
    Equation equation;
    double final_loss = 0.0;
    long evaluations_used = 0;
    FitStatus status = FitStatus::ok;
};

// Training objective throughout: mean log loss of sigmoid(f(x)) against y.
double score(const Equation& eq, const EncodedDataset& data);

// Routes on structure: equations with an exponential summand go to the hill
// climber, everything else to SGD with analytic gradients. Constants are
// freshly initialized from the config seed; the incoming values are ignored.
FitResult optimize_constants(const Equation& eq, const EncodedDataset& data,
                             const OptimizerConfig& cfg);

// Minibatch SGD from the equation's current constants. Tracks the best
// full-data loss seen at each epoch boundary and returns those constants.
// On divergence the learning rate is halved and the run restarted, up to
// five times.
FitResult sgd_fit(const Equation& eq, const EncodedDataset& data, const OptimizerConfig& cfg,
                  Rng& rng);

// Random probing phase followed by steepest-descent coordinate steps from the
// top_k probes. Budget split per start is hill_per_start_budget.
FitResult hill_climb(const Equation& eq, const EncodedDataset& data, const OptimizerConfig& cfg,
                     Rng& rng);

// floor(n * (1 - f) / (2 * k * p)) iterations per climb start, where p is the
// number of constants being optimized.
long hill_per_start_budget(long n, double f, long k, long p);

}  // namespace edc
