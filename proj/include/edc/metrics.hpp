#pragma once

#include <Eigen/Dense>

namespace edc {

// Pre-activation clamp; sigma(35) is already within 1e-15 of 1.
inline constexpr double kSigmoidClamp = 35.0;
// Probabilities are clipped into [kProbClip, 1 - kProbClip] before log loss.
inline constexpr double kProbClip = 1e-12;

double sigmoid(double z);
Eigen::VectorXd sigmoid(const Eigen::VectorXd& z);

// -mean[y ln p + (1-y) ln(1-p)] with probability clipping.
double log_loss(const Eigen::VectorXd& probs, const Eigen::VectorXd& labels);

// log loss of sigmoid(margins); the training objective of the whole pipeline.
double log_loss_from_margins(const Eigen::VectorXd& margins, const Eigen::VectorXd& labels);

// Probability that a random positive outranks a random negative; ties count
// one half. Identical to the trapezoidal area under the ROC curve.
double auc(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels);

struct ThresholdResult {
    double threshold = 0.0;  // classify positive iff score >= threshold
    double accuracy = 0.0;
};

// Accuracy-maximizing threshold over midpoints of adjacent distinct scores
// plus -inf/+inf sentinels; equal accuracy resolves to the lowest threshold.
ThresholdResult best_threshold(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels);

struct TTestResult {
    double t = 0.0;
    long df = 0;
    double p_two_sided = 1.0;
};

TTestResult paired_t_test(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Upper tail P(T > t) for Student's t with df degrees of freedom.
double student_t_sf(double t, long df);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

}  // namespace edc
