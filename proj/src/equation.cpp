#include "edc/equation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace edc {

namespace {

constexpr double kMaxFinite = std::numeric_limits<double>::max();

double saturate(double v, bool* overflow) {
    if (v > kMaxFinite) {
        if (overflow) *overflow = true;
        return kMaxFinite;
    }
    if (v < -kMaxFinite) {
        if (overflow) *overflow = true;
        return -kMaxFinite;
    }
    return v;
}

double pow_int(double x, int degree) {
    double r = x;
    for (int i = 1; i < degree; ++i) r *= x;
    return r;
}

void check_features(const Equation& eq, Eigen::Index dim) {
    if (eq.max_feature() >= dim) {
        throw_data("feature-index-out-of-range",
                   "equation references feature " + std::to_string(eq.max_feature()) +
                       " but input has " + std::to_string(dim));
    }
}

}  // namespace

Summand Summand::linear(double c, FeatureId f) {
    Summand s;
    s.kind = SummandKind::linear;
    s.f1 = f;
    s.c = c;
    return s;
}

Summand Summand::product(double c, FeatureId a, FeatureId b) {
    Summand s;
    s.kind = SummandKind::product;
    s.f1 = std::min(a, b);
    s.f2 = std::max(a, b);
    s.c = c;
    return s;
}

Summand Summand::exponential(double c_out, double c_in, FeatureId f) {
    Summand s;
    s.kind = SummandKind::exponential;
    s.f1 = f;
    s.c = c_out;
    s.c_in = c_in;
    return s;
}

Summand Summand::power(double c, FeatureId f, int degree) {
    if (degree != 3 && degree != 4) {
        throw_config("invalid-power-degree", "power degree must be 3 or 4, got " + std::to_string(degree));
    }
    Summand s;
    s.kind = SummandKind::power;
    s.f1 = f;
    s.degree = degree;
    s.c = c;
    return s;
}

int Equation::constant_count() const noexcept {
    int n = 1;
    for (const auto& s : summands) n += s.constant_count();
    return n;
}

bool Equation::contains_exp() const noexcept {
    return std::any_of(summands.begin(), summands.end(),
                       [](const Summand& s) { return s.kind == SummandKind::exponential; });
}

FeatureId Equation::max_feature() const noexcept {
    FeatureId m = -1;
    for (const auto& s : summands) {
        m = std::max(m, s.f1);
        if (s.kind == SummandKind::product) m = std::max(m, s.f2);
    }
    return m;
}

void GrammarConfig::validate() const {
    if (feature_count < 1) throw_config("invalid-grammar", "feature_count must be >= 1");
    if (max_summands < 0) throw_config("invalid-grammar", "max_summands must be >= 0");
    if (max_constants < 1) throw_config("invalid-grammar", "max_constants must be >= 1");
}

std::vector<Summand> grammar_structures(const GrammarConfig& g) {
    g.validate();
    std::vector<Summand> out;
    if (g.with_linear) {
        for (FeatureId f = 0; f < g.feature_count; ++f) out.push_back(Summand::linear(0.0, f));
    }
    if (g.with_product) {
        for (FeatureId a = 0; a < g.feature_count; ++a)
            for (FeatureId b = a; b < g.feature_count; ++b) out.push_back(Summand::product(0.0, a, b));
    }
    if (g.with_exp) {
        for (FeatureId f = 0; f < g.feature_count; ++f) out.push_back(Summand::exponential(0.0, 0.0, f));
    }
    if (g.with_power) {
        for (FeatureId f = 0; f < g.feature_count; ++f)
            for (int d : {3, 4}) out.push_back(Summand::power(0.0, f, d));
    }
    return out;
}

double evaluate(const Equation& eq, const Eigen::VectorXd& x, bool* overflow) {
    check_features(eq, x.size());
    if (!x.allFinite()) throw_data("non-finite-input", "input vector contains NaN or infinity");
    double acc = eq.intercept;
    for (const auto& s : eq.summands) {
        double v = 0.0;
        switch (s.kind) {
            case SummandKind::linear:
                v = s.c * x[s.f1];
                break;
            case SummandKind::product:
                v = s.c * x[s.f1] * x[s.f2];
                break;
            case SummandKind::exponential:
                v = s.c * std::exp(std::clamp(s.c_in * x[s.f1], -kExpArgLimit, kExpArgLimit));
                break;
            case SummandKind::power:
                v = s.c * pow_int(x[s.f1], s.degree);
                break;
        }
        acc += saturate(v, overflow);
    }
    return saturate(acc, overflow);
}

Eigen::VectorXd evaluate_all(const Equation& eq, const Eigen::MatrixXd& X, bool* overflow) {
    check_features(eq, X.cols());
    if (!X.allFinite()) throw_data("non-finite-input", "input matrix contains NaN or infinity");
    Eigen::ArrayXd acc = Eigen::ArrayXd::Constant(X.rows(), eq.intercept);
    Eigen::ArrayXd term(X.rows());
    for (const auto& s : eq.summands) {
        switch (s.kind) {
            case SummandKind::linear:
                term = s.c * X.col(s.f1).array();
                break;
            case SummandKind::product:
                term = s.c * (X.col(s.f1).array() * X.col(s.f2).array());
                break;
            case SummandKind::exponential:
                term = s.c * (s.c_in * X.col(s.f1).array()).min(kExpArgLimit).max(-kExpArgLimit).exp();
                break;
            case SummandKind::power: {
                term = X.col(s.f1).array();
                for (int i = 1; i < s.degree; ++i) term *= X.col(s.f1).array();
                term *= s.c;
                break;
            }
        }
        if (overflow && (term > kMaxFinite).any()) *overflow = true;
        if (overflow && (term < -kMaxFinite).any()) *overflow = true;
        acc += term.min(kMaxFinite).max(-kMaxFinite);
    }
    if (overflow && ((acc > kMaxFinite).any() || (acc < -kMaxFinite).any())) *overflow = true;
    return acc.min(kMaxFinite).max(-kMaxFinite).matrix();
}

Eigen::VectorXd constants_of(const Equation& eq) {
    Eigen::VectorXd c(eq.constant_count());
    c[0] = eq.intercept;
    Eigen::Index k = 1;
    for (const auto& s : eq.summands) {
        c[k++] = s.c;
        if (s.kind == SummandKind::exponential) c[k++] = s.c_in;
    }
    return c;
}

void set_constants(Equation& eq, const Eigen::VectorXd& c) {
    if (c.size() != eq.constant_count()) {
        throw_internal("constant-count-mismatch",
                       "expected " + std::to_string(eq.constant_count()) + " constants, got " +
                           std::to_string(c.size()));
    }
    eq.intercept = c[0];
    Eigen::Index k = 1;
    for (auto& s : eq.summands) {
        s.c = c[k++];
        if (s.kind == SummandKind::exponential) s.c_in = c[k++];
    }
}

Eigen::VectorXd gradient(const Equation& eq, const Eigen::VectorXd& x) {
    check_features(eq, x.size());
    if (!x.allFinite()) throw_data("non-finite-input", "input vector contains NaN or infinity");
    Eigen::VectorXd g(eq.constant_count());
    g[0] = 1.0;
    Eigen::Index k = 1;
    for (const auto& s : eq.summands) {
        switch (s.kind) {
            case SummandKind::linear:
                g[k++] = x[s.f1];
                break;
            case SummandKind::product:
                g[k++] = x[s.f1] * x[s.f2];
                break;
            case SummandKind::exponential: {
                const double e = std::exp(std::clamp(s.c_in * x[s.f1], -kExpArgLimit, kExpArgLimit));
                g[k++] = e;
                g[k++] = s.c * x[s.f1] * e;
                break;
            }
            case SummandKind::power:
                g[k++] = pow_int(x[s.f1], s.degree);
                break;
        }
    }
    return g;
}

Eigen::MatrixXd constant_jacobian(const Equation& eq, const Eigen::MatrixXd& X) {
    check_features(eq, X.cols());
    Eigen::MatrixXd J(X.rows(), eq.constant_count());
    J.col(0).setOnes();
    Eigen::Index k = 1;
    for (const auto& s : eq.summands) {
        switch (s.kind) {
            case SummandKind::linear:
                J.col(k++) = X.col(s.f1);
                break;
            case SummandKind::product:
                J.col(k++) = X.col(s.f1).cwiseProduct(X.col(s.f2));
                break;
            case SummandKind::exponential: {
                Eigen::ArrayXd e =
                    (s.c_in * X.col(s.f1).array()).min(kExpArgLimit).max(-kExpArgLimit).exp();
                J.col(k++) = e.matrix();
                J.col(k++) = (s.c * X.col(s.f1).array() * e).matrix();
                break;
            }
            case SummandKind::power: {
                Eigen::ArrayXd t = X.col(s.f1).array();
                for (int i = 1; i < s.degree; ++i) t *= X.col(s.f1).array();
                J.col(k++) = t.matrix();
                break;
            }
        }
    }
    return J;
}

Equation canonicalize(const Equation& eq) {
    Equation out = eq;
    std::stable_sort(out.summands.begin(), out.summands.end(),
                     [](const Summand& a, const Summand& b) { return a.structure() < b.structure(); });
    for (std::size_t i = 1; i < out.summands.size(); ++i) {
        if (same_structure(out.summands[i - 1], out.summands[i])) {
            throw_data("duplicate-summand", "two summands share one structure and collapse analytically");
        }
    }
    return out;
}

bool is_canonical(const Equation& eq) {
    for (std::size_t i = 1; i < eq.summands.size(); ++i) {
        if (!(eq.summands[i - 1].structure() < eq.summands[i].structure())) return false;
    }
    for (const auto& s : eq.summands) {
        if (s.kind == SummandKind::product && s.f1 > s.f2) return false;
    }
    return true;
}

std::vector<Equation> refinements(const Equation& eq, const GrammarConfig& g) {
    g.validate();
    std::vector<Equation> children;
    if (static_cast<int>(eq.summands.size()) >= g.max_summands) return children;
    for (const Summand& shape : grammar_structures(g)) {
        const bool dup = std::any_of(eq.summands.begin(), eq.summands.end(),
                                     [&](const Summand& s) { return same_structure(s, shape); });
        if (dup) continue;
        Equation child = eq;
        child.summands.push_back(shape);
        child = canonicalize(child);
        if (child.constant_count() > g.max_constants) continue;
        children.push_back(std::move(child));
    }
    return children;
}

int compare_structure(const Equation& a, const Equation& b) noexcept {
    const std::size_t n = std::min(a.summands.size(), b.summands.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto ka = a.summands[i].structure();
        const auto kb = b.summands[i].structure();
        if (ka < kb) return -1;
        if (kb < ka) return 1;
    }
    if (a.summands.size() != b.summands.size()) return a.summands.size() < b.summands.size() ? -1 : 1;
    return 0;
}

namespace {

std::string format_constant(double v, int precision) {
    if (v == 0.0) v = 0.0;  // normalize -0
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

// Renders one variable occurrence; the denormalized form spells out the
// affine rescaling unless it is the identity.
std::string var_text(FeatureId f, const std::vector<std::string>& names, const DisplayExpression* d,
                     int precision) {
    if (static_cast<std::size_t>(f) >= names.size()) {
        throw_data("missing-feature-name", "no name for feature " + std::to_string(f));
    }
    if (!d) return names[f];
    const double min = d->mins[f];
    const double range = d->ranges[f];
    if (min == 0.0 && range == 1.0) return names[f];
    const std::string shift = min < 0.0 ? " + " + format_constant(-min, precision)
                                        : " - " + format_constant(min, precision);
    return "((" + names[f] + shift + ") / " + format_constant(range, precision) + ")";
}

std::string infix_impl(const Equation& eq, const std::vector<std::string>& names,
                       const DisplayExpression* d, int precision) {
    std::ostringstream out;
    out << format_constant(eq.intercept, precision);
    for (const auto& s : eq.summands) {
        out << (s.c < 0.0 ? " - " : " + ") << format_constant(std::abs(s.c), precision);
        switch (s.kind) {
            case SummandKind::linear:
                out << " \xc2\xb7 " << var_text(s.f1, names, d, precision);
                break;
            case SummandKind::product:
                out << " \xc2\xb7 " << var_text(s.f1, names, d, precision) << " \xc2\xb7 "
                    << var_text(s.f2, names, d, precision);
                break;
            case SummandKind::exponential:
                out << " \xc2\xb7 exp(" << format_constant(s.c_in, precision) << " \xc2\xb7 "
                    << var_text(s.f1, names, d, precision) << ")";
                break;
            case SummandKind::power:
                out << " \xc2\xb7 " << var_text(s.f1, names, d, precision) << "^" << s.degree;
                break;
        }
    }
    return out.str();
}

}  // namespace

std::string to_infix(const Equation& eq, const std::vector<std::string>& names, int precision) {
    return infix_impl(eq, names, nullptr, precision);
}

DisplayExpression denormalize(const Equation& eq, const Eigen::VectorXd& mins,
                              const Eigen::VectorXd& ranges) {
    if (mins.size() != ranges.size()) {
        throw_config("norm-params-mismatch", "mins and ranges differ in length");
    }
    if (eq.max_feature() >= mins.size()) {
        throw_data("feature-index-out-of-range", "equation uses a feature with no normalization params");
    }
    for (const auto& s : eq.summands) {
        for (FeatureId f : {s.f1, s.kind == SummandKind::product ? s.f2 : s.f1}) {
            if (ranges[f] <= 0.0) {
                throw_data("degenerate-feature",
                           "feature " + std::to_string(f) + " has non-positive range");
            }
        }
    }
    return DisplayExpression{eq, mins, ranges};
}

double evaluate(const DisplayExpression& expr, const Eigen::VectorXd& raw_x, bool* overflow) {
    if (raw_x.size() < expr.mins.size()) {
        throw_data("feature-index-out-of-range", "raw input shorter than normalization params");
    }
    Eigen::VectorXd normalized(expr.mins.size());
    for (Eigen::Index f = 0; f < normalized.size(); ++f) {
        // zero-range features map to the constant 0, mirroring the normalizer
        normalized[f] = expr.ranges[f] > 0.0 ? (raw_x[f] - expr.mins[f]) / expr.ranges[f] : 0.0;
    }
    return evaluate(expr.equation, normalized, overflow);
}

std::string to_infix(const DisplayExpression& expr, const std::vector<std::string>& names,
                     int precision) {
    return infix_impl(expr.equation, names, &expr, precision);
}

}  // namespace edc
