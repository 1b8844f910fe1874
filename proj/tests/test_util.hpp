#pragma once

#include <cstring>
#include <vector>

#include "edc/dataset.hpp"
#include "edc/equation.hpp"
#include "edc/rng.hpp"

namespace edc::test {

inline bool bit_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

// Random structurally valid equation for property tests.
inline Equation random_equation(Rng& rng, const GrammarConfig& g, int max_summands,
                                double constant_range) {
    Equation eq;
    eq.intercept = rng.uniform(-constant_range, constant_range);
    const int count = static_cast<int>(rng.uniform_int(max_summands + 1));
    for (int i = 0; i < count; ++i) {
        std::vector<Summand> admissible;
        for (const Summand& shape : grammar_structures(g)) {
            bool dup = false;
            for (const auto& s : eq.summands) dup = dup || same_structure(s, shape);
            if (!dup) admissible.push_back(shape);
        }
        if (admissible.empty()) break;
        Summand s = admissible[rng.uniform_int(admissible.size())];
        s.c = rng.uniform(-constant_range, constant_range);
        if (s.kind == SummandKind::exponential) s.c_in = rng.uniform(-constant_range, constant_range);
        eq.summands.push_back(s);
        eq = canonicalize(eq);
    }
    return eq;
}

// Independent oracle: central finite differences of f over the constants.
inline Eigen::VectorXd fd_gradient(const Equation& eq, const Eigen::VectorXd& x, double h = 1e-6) {
    const Eigen::VectorXd c0 = constants_of(eq);
    Eigen::VectorXd g(c0.size());
    Equation work = eq;
    for (Eigen::Index i = 0; i < c0.size(); ++i) {
        Eigen::VectorXd c = c0;
        c[i] = c0[i] + h;
        set_constants(work, c);
        const double hi = evaluate(work, x);
        c[i] = c0[i] - h;
        set_constants(work, c);
        const double lo = evaluate(work, x);
        g[i] = (hi - lo) / (2.0 * h);
    }
    return g;
}

inline EncodedDataset dataset_from(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    EncodedDataset ds;
    ds.X = X;
    ds.y = y;
    ds.feature_names.reserve(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));
    ds.norm.mins = Eigen::VectorXd::Zero(X.cols());
    ds.norm.ranges = Eigen::VectorXd::Ones(X.cols());
    ds.norm.degenerate.assign(X.cols(), false);
    ds.validate();
    return ds;
}

// n points uniform on [0,1]^m labeled by the equation's sign.
inline EncodedDataset labeled_by(const Equation& eq, int n, int m, Rng& rng) {
    Eigen::MatrixXd X(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) X(i, j) = rng.uniform();
    Eigen::VectorXd f = evaluate_all(eq, X);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = f[i] >= 0.0 ? 1.0 : 0.0;
    return dataset_from(X, y);
}

}  // namespace edc::test
