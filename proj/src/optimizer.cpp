#include "edc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "edc/metrics.hpp"

namespace edc {

namespace {

// Per-structure evaluation cache. Everything except the exponential terms is
// linear in the constants, so those columns are assembled once; each loss
// evaluation is then one matrix-vector product plus one exp() pass per
// exponential summand.
class LossWorkspace {
public:
    LossWorkspace(const Equation& eq, const EncodedDataset& data) : y_(data.y) {
        const int p = eq.constant_count();
        base_col_of_constant_.assign(p, -1);

        int base_cols = 1;  // intercept
        int k = 1;
        for (const auto& s : eq.summands) {
            if (s.kind == SummandKind::exponential) {
                exp_terms_.push_back({k, k + 1, s.f1});
                k += 2;
            } else {
                ++base_cols;
                ++k;
            }
        }

        phi_.resize(data.X.rows(), base_cols);
        phi_.col(0).setOnes();
        base_col_of_constant_[0] = 0;
        int col = 1;
        k = 1;
        for (const auto& s : eq.summands) {
            switch (s.kind) {
                case SummandKind::linear:
                    phi_.col(col) = data.X.col(s.f1);
                    base_col_of_constant_[k++] = col++;
                    break;
                case SummandKind::product:
                    phi_.col(col) = data.X.col(s.f1).cwiseProduct(data.X.col(s.f2));
                    base_col_of_constant_[k++] = col++;
                    break;
                case SummandKind::power: {
                    Eigen::ArrayXd t = data.X.col(s.f1).array();
                    for (int i = 1; i < s.degree; ++i) t *= data.X.col(s.f1).array();
                    phi_.col(col) = t.matrix();
                    base_col_of_constant_[k++] = col++;
                    break;
                }
                case SummandKind::exponential:
                    exp_feature_cols_.push_back(data.X.col(s.f1));
                    k += 2;
                    break;
            }
        }
    }

    Eigen::VectorXd margins(const Eigen::VectorXd& constants) const {
        Eigen::VectorXd m = Eigen::VectorXd::Zero(phi_.rows());
        for (std::size_t i = 0; i < base_col_of_constant_.size(); ++i) {
            const int col = base_col_of_constant_[i];
            if (col >= 0) m.noalias() += constants[static_cast<Eigen::Index>(i)] * phi_.col(col);
        }
        for (std::size_t e = 0; e < exp_terms_.size(); ++e) {
            const auto& [out_idx, in_idx, feature] = exp_terms_[e];
            m.array() += constants[out_idx] * (constants[in_idx] * exp_feature_cols_[e].array())
                                                  .min(kExpArgLimit)
                                                  .max(-kExpArgLimit)
                                                  .exp();
        }
        return m;
    }

    double loss(const Eigen::VectorXd& constants) const {
        return log_loss_from_margins(margins(constants), y_);
    }

    const Eigen::MatrixXd& phi() const { return phi_; }
    bool exp_free() const { return exp_terms_.empty(); }

private:
    struct ExpTerm {
        int out_idx;
        int in_idx;
        int feature;
    };
    Eigen::MatrixXd phi_;                      // columns for constants f is linear in
    std::vector<int> base_col_of_constant_;    // constant index -> phi column (-1 for exp constants)
    std::vector<ExpTerm> exp_terms_;
    std::vector<Eigen::VectorXd> exp_feature_cols_;
    Eigen::VectorXd y_;
};

Eigen::VectorXd random_constants(int p, double range, Rng& rng) {
    Eigen::VectorXd c(p);
    for (int i = 0; i < p; ++i) c[i] = rng.uniform(-range, range);
    return c;
}

}  // namespace

void OptimizerConfig::validate() const {
    if (sgd.learning_rate <= 0.0) throw_config("invalid-optimizer", "learning_rate must be > 0");
    if (sgd.epochs < 1) throw_config("invalid-optimizer", "epochs must be >= 1");
    if (sgd.batch_size < 1) throw_config("invalid-optimizer", "batch_size must be >= 1");
    if (hill.budget < 1) throw_config("invalid-optimizer", "hill budget must be >= 1");
    if (hill.random_fraction <= 0.0 || hill.random_fraction >= 1.0) {
        throw_config("invalid-optimizer", "random_fraction must lie in (0, 1)");
    }
    if (hill.top_k < 1) throw_config("invalid-optimizer", "top_k must be >= 1");
    if (static_cast<double>(hill.budget) * hill.random_fraction < hill.top_k) {
        throw_config("invalid-optimizer", "random phase too small to seed top_k starts");
    }
    if (hill.step_size <= 0.0) throw_config("invalid-optimizer", "step_size must be > 0");
    if (init_range <= 0.0) throw_config("invalid-optimizer", "init_range must be > 0");
}

double score(const Equation& eq, const EncodedDataset& data) {
    return log_loss_from_margins(evaluate_all(eq, data.X), data.y);
}

long hill_per_start_budget(long n, double f, long k, long p) {
    return static_cast<long>(std::floor(static_cast<double>(n) * (1.0 - f) /
                                        (2.0 * static_cast<double>(k) * static_cast<double>(p))));
}

FitResult sgd_fit(const Equation& eq, const EncodedDataset& data, const OptimizerConfig& cfg,
                  Rng& rng) {
    cfg.validate();
    data.validate();
    const Eigen::Index n = data.size();
    const Eigen::VectorXd initial = constants_of(eq);

    LossWorkspace ws(eq, data);
    const bool fixed_jacobian = ws.exp_free();

    Equation work = eq;
    double lr = cfg.sgd.learning_rate;
    FitResult result;
    result.status = FitStatus::diverged;  // until one attempt survives

    for (int attempt = 0; attempt <= 5; ++attempt) {
        Eigen::VectorXd c = initial;
        Eigen::VectorXd best_c = c;
        double best_loss = ws.loss(c);
        long evals = 1;
        bool diverged = false;

        std::vector<Eigen::Index> perm(n);
        std::iota(perm.begin(), perm.end(), Eigen::Index{0});

        // reshuffled copies per epoch; batches are then contiguous blocks
        Eigen::MatrixXd Jp;
        Eigen::VectorXd yp(n);
        Eigen::VectorXd residual;

        for (int epoch = 0; epoch < cfg.sgd.epochs && !diverged; ++epoch) {
            rng.shuffle(perm);
            if (fixed_jacobian) Jp = ws.phi()(perm, Eigen::all);
            for (Eigen::Index i = 0; i < n; ++i) yp[i] = data.y[perm[i]];

            for (Eigen::Index start = 0; start < n; start += cfg.sgd.batch_size) {
                const Eigen::Index len = std::min<Eigen::Index>(cfg.sgd.batch_size, n - start);
                if (fixed_jacobian) {
                    const auto Jb = Jp.middleRows(start, len);
                    residual = sigmoid(Eigen::VectorXd(Jb * c)) - yp.segment(start, len);
                    c.noalias() -= (lr / static_cast<double>(len)) * (Jb.transpose() * residual);
                } else {
                    set_constants(work, c);
                    Eigen::MatrixXd Xb(len, data.X.cols());
                    for (Eigen::Index i = 0; i < len; ++i) Xb.row(i) = data.X.row(perm[start + i]);
                    const Eigen::MatrixXd Jb = constant_jacobian(work, Xb);
                    residual = sigmoid(evaluate_all(work, Xb)) - yp.segment(start, len);
                    c.noalias() -= (lr / static_cast<double>(len)) * (Jb.transpose() * residual);
                }
                if (!c.allFinite()) {
                    diverged = true;
                    break;
                }
            }

            if (!diverged) {
                const double loss = ws.loss(c);
                ++evals;
                if (!std::isfinite(loss)) {
                    diverged = true;
                } else if (loss < best_loss) {
                    best_loss = loss;
                    best_c = c;
                }
            }
        }

        result.evaluations_used += evals;
        if (!diverged) {
            set_constants(work, best_c);
            result.equation = work;
            result.final_loss = best_loss;
            result.status = FitStatus::ok;
            return result;
        }
        lr *= 0.5;
    }

    // every attempt diverged; report the initial point
    set_constants(work, initial);
    result.equation = work;
    result.final_loss = ws.loss(initial);
    result.status = FitStatus::diverged;
    return result;
}

FitResult hill_climb(const Equation& eq, const EncodedDataset& data, const OptimizerConfig& cfg,
                     Rng& rng) {
    cfg.validate();
    data.validate();
    const int p = eq.constant_count();
    const long n = cfg.hill.budget;
    const long n_random = static_cast<long>(std::floor(static_cast<double>(n) * cfg.hill.random_fraction));
    const long k = std::min<long>(cfg.hill.top_k, n_random);
    const double alpha = cfg.hill.step_size;

    LossWorkspace ws(eq, data);

    std::vector<Eigen::VectorXd> samples;
    std::vector<double> losses;
    samples.reserve(n_random);
    losses.reserve(n_random);
    long evals = 0;
    for (long i = 0; i < n_random; ++i) {
        samples.push_back(random_constants(p, cfg.init_range, rng));
        losses.push_back(ws.loss(samples.back()));
        ++evals;
    }

    std::vector<long> order(samples.size());
    std::iota(order.begin(), order.end(), 0L);
    std::stable_sort(order.begin(), order.end(),
                     [&](long a, long b) { return losses[a] < losses[b]; });

    Eigen::VectorXd best_c = samples[order[0]];
    double best_loss = losses[order[0]];

    FitResult result;
    const long per_start = hill_per_start_budget(n, cfg.hill.random_fraction, k, p);
    if (per_start < 1) {
        result.status = FitStatus::budget_exhausted;
    } else {
        for (long s = 0; s < k; ++s) {
            Eigen::VectorXd c = samples[order[s]];
            double current = losses[order[s]];
            for (long iter = 0; iter < per_start; ++iter) {
                double neighbor_best = current;
                int move_coord = -1;
                double move_delta = 0.0;
                for (int j = 0; j < p; ++j) {
                    const double saved = c[j];
                    for (double delta : {alpha, -alpha}) {
                        c[j] = saved + delta;
                        const double l = ws.loss(c);
                        ++evals;
                        if (l < neighbor_best) {
                            neighbor_best = l;
                            move_coord = j;
                            move_delta = delta;
                        }
                    }
                    c[j] = saved;
                }
                if (move_coord < 0) break;  // no strict improvement
                c[move_coord] += move_delta;
                current = neighbor_best;
            }
            if (current < best_loss) {
                best_loss = current;
                best_c = c;
            }
        }
        result.status = FitStatus::ok;
    }

    Equation fitted = eq;
    set_constants(fitted, best_c);
    result.equation = std::move(fitted);
    result.final_loss = best_loss;
    result.evaluations_used = evals;
    return result;
}

FitResult optimize_constants(const Equation& eq, const EncodedDataset& data,
                             const OptimizerConfig& cfg) {
    cfg.validate();
    if (!is_canonical(eq)) throw_config("not-canonical", "optimize requires a canonical equation");
    Rng rng(mix_seed(cfg.seed, 0x6f707469ULL));  // optimizer stream

    if (eq.contains_exp() && !cfg.force_sgd) {
        return hill_climb(eq, data, cfg, rng);
    }
    Equation start = eq;
    Eigen::VectorXd init = random_constants(eq.constant_count(), cfg.init_range, rng);
    set_constants(start, init);
    return sgd_fit(start, data, cfg, rng);
}

}  // namespace edc
