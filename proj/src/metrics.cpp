#include "edc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "edc/errors.hpp"

namespace edc {

namespace {

void check_labels(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
    if (scores.size() != labels.size()) {
        throw_data("length-mismatch", "scores and labels differ in length");
    }
    if (scores.size() == 0) throw_data("empty-input", "no samples");
}

}  // namespace

double sigmoid(double z) {
    z = std::clamp(z, -kSigmoidClamp, kSigmoidClamp);
    return 1.0 / (1.0 + std::exp(-z));
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
    return (1.0 / (1.0 + (-z.array().min(kSigmoidClamp).max(-kSigmoidClamp)).exp())).matrix();
}

double log_loss(const Eigen::VectorXd& probs, const Eigen::VectorXd& labels) {
    check_labels(probs, labels);
    const Eigen::ArrayXd p = probs.array().min(1.0 - kProbClip).max(kProbClip);
    const Eigen::ArrayXd y = labels.array();
    return -(y * p.log() + (1.0 - y) * (1.0 - p).log()).mean();
}

double log_loss_from_margins(const Eigen::VectorXd& margins, const Eigen::VectorXd& labels) {
    return log_loss(sigmoid(margins), labels);
}

double auc(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
    check_labels(scores, labels);
    const Eigen::Index n = scores.size();
    const double n_pos = labels.sum();
    const double n_neg = static_cast<double>(n) - n_pos;
    if (n_pos == 0.0 || n_neg == 0.0) {
        throw_data("undefined-metric", "AUC needs both classes present");
    }

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return scores[a] < scores[b]; });

    // rank sum of the positive class with average ranks over tie groups
    double rank_sum_pos = 0.0;
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + j + 1);  // 1-based
        for (Eigen::Index k = i; k < j; ++k) {
            if (labels[order[k]] > 0.5) rank_sum_pos += avg_rank;
        }
        i = j;
    }
    const double u = rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0;
    return u / (n_pos * n_neg);
}

ThresholdResult best_threshold(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
    check_labels(scores, labels);
    const Eigen::Index n = scores.size();

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return scores[a] < scores[b]; });

    const double total_pos = labels.sum();

    // Walk candidates from low to high. At -inf everything is predicted
    // positive; moving the threshold past a tie group flips that group to
    // negative. Strict improvement keeps the lowest threshold on ties.
    double correct = total_pos;  // all predicted positive
    ThresholdResult best{-std::numeric_limits<double>::infinity(),
                         correct / static_cast<double>(n)};
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        double pos_in_group = 0.0;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] > 0.5) pos_in_group += 1.0;
            ++j;
        }
        correct += (static_cast<double>(j - i) - pos_in_group) - pos_in_group;
        const double threshold = j < n
                                     ? 0.5 * (scores[order[j - 1]] + scores[order[j]])
                                     : std::numeric_limits<double>::infinity();
        const double accuracy = correct / static_cast<double>(n);
        if (accuracy > best.accuracy) best = ThresholdResult{threshold, accuracy};
        i = j;
    }
    return best;
}

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;

    // modified Lentz continued fraction
    const auto contfrac = [](double a_, double b_, double x_) {
        constexpr int kMaxIter = 300;
        constexpr double kEps = 3e-16;
        constexpr double kTiny = 1e-300;
        const double qab = a_ + b_;
        const double qap = a_ + 1.0;
        const double qam = a_ - 1.0;
        double c = 1.0;
        double d = 1.0 - qab * x_ / qap;
        if (std::abs(d) < kTiny) d = kTiny;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= kMaxIter; ++m) {
            const double m2 = 2.0 * m;
            double aa = m * (b_ - m) * x_ / ((qam + m2) * (a_ + m2));
            d = 1.0 + aa * d;
            if (std::abs(d) < kTiny) d = kTiny;
            c = 1.0 + aa / c;
            if (std::abs(c) < kTiny) c = kTiny;
            d = 1.0 / d;
            h *= d * c;
            aa = -(a_ + m) * (qab + m) * x_ / ((a_ + m2) * (qap + m2));
            d = 1.0 + aa * d;
            if (std::abs(d) < kTiny) d = kTiny;
            c = 1.0 + aa / c;
            if (std::abs(c) < kTiny) c = kTiny;
            d = 1.0 / d;
            const double del = d * c;
            h *= del;
            if (std::abs(del - 1.0) < kEps) break;
        }
        return h;
    };

    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * contfrac(a, b, x) / a;
    }
    return 1.0 - front * contfrac(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, long df) {
    if (df < 1) throw_config("invalid-df", "degrees of freedom must be >= 1");
    const double d = static_cast<double>(df);
    const double p_two = incomplete_beta(d / 2.0, 0.5, d / (d + t * t));
    return t >= 0.0 ? p_two / 2.0 : 1.0 - p_two / 2.0;
}

TTestResult paired_t_test(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw_data("length-mismatch", "paired samples differ in length");
    const Eigen::Index n = a.size();
    if (n < 2) throw_data("degenerate-test", "need at least two pairs");

    const Eigen::ArrayXd d = a.array() - b.array();
    const double mean = d.mean();
    const double ss = (d - mean).square().sum();
    if (ss == 0.0) throw_data("degenerate-test", "paired differences have zero variance");
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    TTestResult r;
    r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    r.df = static_cast<long>(n - 1);
    r.p_two_sided = incomplete_beta(static_cast<double>(r.df) / 2.0, 0.5,
                                    static_cast<double>(r.df) / (static_cast<double>(r.df) + r.t * r.t));
    return r;
}

}  // namespace edc
