#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "edc/errors.hpp"

namespace edc {

using FeatureId = int;

// Order doubles as the canonical sort rank of summands within an equation.
enum class SummandKind : int { linear = 0, product = 1, exponential = 2, power = 3 };

// One additive building block: c*x, c*x*y, c*exp(c_in*x) or c*x^degree.
// The power form exists for data generation only; the search grammar never
// emits it unless explicitly enabled.
struct Summand {
    SummandKind kind = SummandKind::linear;
    FeatureId f1 = 0;
    FeatureId f2 = 0;  // product partner, stored with f1 <= f2 (f1 == f2 is the quadratic)
    int degree = 0;    // power only: 3 or 4
    double c = 0.0;    // leading constant (c_out for exponential)
    double c_in = 0.0; // exponential only

    static Summand linear(double c, FeatureId f);
    static Summand product(double c, FeatureId a, FeatureId b);
    static Summand exponential(double c_out, double c_in, FeatureId f);
    static Summand power(double c, FeatureId f, int degree);

    int constant_count() const noexcept { return kind == SummandKind::exponential ? 2 : 1; }

    // Term shape with constants erased; equality of keys means the terms
    // collapse analytically and may not coexist in one equation.
    std::array<int, 4> structure() const noexcept {
        return {static_cast<int>(kind), f1, kind == SummandKind::product ? f2 : -1, degree};
    }
};

inline bool same_structure(const Summand& a, const Summand& b) noexcept {
    return a.structure() == b.structure();
}

// The hypothesis: intercept plus a canonically ordered, duplicate-free list
// of summands. Classification rule downstream: positive iff value >= 0.
struct Equation {
    double intercept = 0.0;
    std::vector<Summand> summands;

    int constant_count() const noexcept;
    bool contains_exp() const noexcept;
    FeatureId max_feature() const noexcept;  // -1 for a constant-only equation
};

// Enabled summand shapes and size limits of the expression language.
struct GrammarConfig {
    int feature_count = 2;
    int max_summands = 3;
    int max_constants = std::numeric_limits<int>::max();
    bool with_linear = true;
    bool with_exp = true;
    bool with_product = true;
    bool with_power = false;

    void validate() const;
};

// Every admissible summand shape (constants zeroed), in canonical order.
std::vector<Summand> grammar_structures(const GrammarConfig& g);

// exp() arguments are clamped here; values past it would overflow double anyway.
inline constexpr double kExpArgLimit = 700.0;

// f(x). Out-of-range feature indices and non-finite inputs throw; overflowing
// terms saturate at +-max double and set *overflow when provided.
double evaluate(const Equation& eq, const Eigen::VectorXd& x, bool* overflow = nullptr);

// f over every row of X (rows are samples, columns features).
Eigen::VectorXd evaluate_all(const Equation& eq, const Eigen::MatrixXd& X, bool* overflow = nullptr);

// Flat view of all constants in canonical order: intercept, then per summand
// (c) or (c, c_in) for exponentials.
Eigen::VectorXd constants_of(const Equation& eq);
void set_constants(Equation& eq, const Eigen::VectorXd& c);

// d f / d constants at x, same ordering as constants_of.
Eigen::VectorXd gradient(const Equation& eq, const Eigen::VectorXd& x);

// Row i = gradient at X.row(i). For equations without exponential summands
// this is independent of the constants (f is linear in them).
Eigen::MatrixXd constant_jacobian(const Equation& eq, const Eigen::MatrixXd& X);

// Sorted canonical form. Throws "duplicate-summand" instead of merging.
Equation canonicalize(const Equation& eq);
bool is_canonical(const Equation& eq);

// All one-summand extensions admitted by the grammar: canonical, de-duplicated
// against the parent's terms, new constants left at zero for the optimizer.
std::vector<Equation> refinements(const Equation& eq, const GrammarConfig& g);

// Lexicographic order on term shapes; ties broken by shorter summand list.
// Used for deterministic tie-breaking among equally scored candidates.
int compare_structure(const Equation& a, const Equation& b) noexcept;

std::string to_infix(const Equation& eq, const std::vector<std::string>& names, int precision = 2);

// An equation over normalized variables re-expressed on the raw scale: every
// occurrence of x_i reads ((x_i - min_i) / range_i). No algebraic expansion.
struct DisplayExpression {
    Equation equation;
    Eigen::VectorXd mins;
    Eigen::VectorXd ranges;
};

DisplayExpression denormalize(const Equation& eq, const Eigen::VectorXd& mins,
                              const Eigen::VectorXd& ranges);
double evaluate(const DisplayExpression& expr, const Eigen::VectorXd& raw_x, bool* overflow = nullptr);
std::string to_infix(const DisplayExpression& expr, const std::vector<std::string>& names,
                     int precision = 2);

}  // namespace edc
