#include "edc/model_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace edc {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const char* kind_name(SummandKind k) {
    switch (k) {
        case SummandKind::linear: return "linear";
        case SummandKind::product: return "product";
        case SummandKind::exponential: return "exp";
        case SummandKind::power: return "power";
    }
    throw_internal("unknown-summand-kind", "unhandled enum value");
}

SummandKind kind_from_name(const std::string& name) {
    if (name == "linear") return SummandKind::linear;
    if (name == "product") return SummandKind::product;
    if (name == "exp") return SummandKind::exponential;
    if (name == "power") return SummandKind::power;
    throw_data("invalid-model", "unknown summand kind '" + name + "'");
}

// JSON has no infinities; the threshold can be a -inf sentinel when training
// labels were one-sided, so encode non-finite values as strings.
ordered_json encode_double(double v) {
    if (std::isfinite(v)) return v;
    if (v > 0) return "inf";
    if (v < 0) return "-inf";
    return "nan";
}

double decode_double(const json& j) {
    if (j.is_number()) return j.get<double>();
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw_data("invalid-model", "expected a number, got '" + s + "'");
}

const char* feature_kind_name(FeatureSpec::Kind k) {
    switch (k) {
        case FeatureSpec::Kind::numeric: return "numeric";
        case FeatureSpec::Kind::category: return "category";
        case FeatureSpec::Kind::rare_group: return "rare_group";
    }
    throw_internal("unknown-feature-kind", "unhandled enum value");
}

FeatureSpec::Kind feature_kind_from_name(const std::string& name) {
    if (name == "numeric") return FeatureSpec::Kind::numeric;
    if (name == "category") return FeatureSpec::Kind::category;
    if (name == "rare_group") return FeatureSpec::Kind::rare_group;
    throw_data("invalid-model", "unknown feature kind '" + name + "'");
}

}  // namespace

ordered_json equation_to_json(const Equation& eq) {
    ordered_json j;
    j["version"] = kModelFormatVersion;
    j["intercept"] = eq.intercept;
    ordered_json summands = ordered_json::array();
    for (const auto& s : eq.summands) {
        ordered_json t;
        t["kind"] = kind_name(s.kind);
        switch (s.kind) {
            case SummandKind::linear:
                t["features"] = {s.f1};
                t["constants"] = {s.c};
                break;
            case SummandKind::product:
                t["features"] = {s.f1, s.f2};
                t["constants"] = {s.c};
                break;
            case SummandKind::exponential:
                t["features"] = {s.f1};
                t["constants"] = {s.c, s.c_in};
                break;
            case SummandKind::power:
                t["features"] = {s.f1};
                t["degree"] = s.degree;
                t["constants"] = {s.c};
                break;
        }
        summands.push_back(std::move(t));
    }
    j["summands"] = std::move(summands);
    return j;
}

Equation equation_from_json(const json& j) {
    if (!j.contains("version") || j.at("version").get<int>() != kModelFormatVersion) {
        throw_data("version-mismatch", "unsupported equation format version");
    }
    Equation eq;
    eq.intercept = j.at("intercept").get<double>();
    for (const auto& t : j.at("summands")) {
        const SummandKind kind = kind_from_name(t.at("kind").get<std::string>());
        const auto& features = t.at("features");
        const auto& constants = t.at("constants");
        switch (kind) {
            case SummandKind::linear:
                eq.summands.push_back(Summand::linear(constants.at(0), features.at(0)));
                break;
            case SummandKind::product:
                eq.summands.push_back(
                    Summand::product(constants.at(0), features.at(0), features.at(1)));
                break;
            case SummandKind::exponential:
                eq.summands.push_back(
                    Summand::exponential(constants.at(0), constants.at(1), features.at(0)));
                break;
            case SummandKind::power:
                eq.summands.push_back(
                    Summand::power(constants.at(0), features.at(0), t.at("degree").get<int>()));
                break;
        }
    }
    return eq;
}

std::string serialize_equation(const Equation& eq) { return equation_to_json(eq).dump(2); }

Equation deserialize_equation(const std::string& text) {
    return equation_from_json(json::parse(text));
}

std::string serialize_model(const ModelFile& model) {
    ordered_json j;
    j["version"] = model.version;
    j["equation"] = equation_to_json(model.equation);

    ordered_json features = ordered_json::array();
    for (const auto& f : model.features) {
        ordered_json spec;
        spec["name"] = f.name;
        spec["source"] = f.source;
        spec["type"] = feature_kind_name(f.kind);
        switch (f.kind) {
            case FeatureSpec::Kind::numeric:
                spec["median"] = f.median;
                break;
            case FeatureSpec::Kind::category:
                spec["category"] = f.category;
                break;
            case FeatureSpec::Kind::rare_group:
                spec["rare_categories"] = f.rare_categories;
                break;
        }
        features.push_back(std::move(spec));
    }
    j["features"] = std::move(features);

    ordered_json norm;
    norm["mins"] = std::vector<double>(model.norm.mins.begin(), model.norm.mins.end());
    norm["ranges"] = std::vector<double>(model.norm.ranges.begin(), model.norm.ranges.end());
    norm["degenerate"] = model.norm.degenerate;
    j["norm"] = std::move(norm);

    j["threshold"] = encode_double(model.threshold);
    ordered_json meta;
    meta["seed"] = model.seed;
    meta["config_digest"] = model.config_digest;
    meta["train_loss"] = model.train_loss;
    meta["train_auc"] = model.train_auc;
    j["metadata"] = std::move(meta);
    return j.dump(2) + "\n";
}

ModelFile deserialize_model(const std::string& text) {
    const json j = json::parse(text);
    if (!j.contains("version") || j.at("version").get<int>() != kModelFormatVersion) {
        throw_data("version-mismatch", "unsupported model format version");
    }
    ModelFile model;
    model.version = j.at("version").get<int>();
    model.equation = equation_from_json(j.at("equation"));

    for (const auto& spec : j.at("features")) {
        FeatureSpec f;
        f.name = spec.at("name").get<std::string>();
        f.source = spec.at("source").get<std::string>();
        f.kind = feature_kind_from_name(spec.at("type").get<std::string>());
        switch (f.kind) {
            case FeatureSpec::Kind::numeric:
                f.median = spec.at("median").get<double>();
                break;
            case FeatureSpec::Kind::category:
                f.category = spec.at("category").get<std::string>();
                break;
            case FeatureSpec::Kind::rare_group:
                f.rare_categories = spec.at("rare_categories").get<std::vector<std::string>>();
                break;
        }
        model.features.push_back(std::move(f));
    }

    const auto& norm = j.at("norm");
    const auto mins = norm.at("mins").get<std::vector<double>>();
    const auto ranges = norm.at("ranges").get<std::vector<double>>();
    model.norm.mins = Eigen::Map<const Eigen::VectorXd>(mins.data(), mins.size());
    model.norm.ranges = Eigen::Map<const Eigen::VectorXd>(ranges.data(), ranges.size());
    model.norm.degenerate = norm.at("degenerate").get<std::vector<bool>>();

    model.threshold = decode_double(j.at("threshold"));
    const auto& meta = j.at("metadata");
    model.seed = meta.at("seed").get<std::uint64_t>();
    model.config_digest = meta.at("config_digest").get<std::string>();
    model.train_loss = meta.at("train_loss").get<double>();
    model.train_auc = meta.at("train_auc").get<double>();
    return model;
}

void save_model(const ModelFile& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_data("io-error", "cannot write " + path);
    out << serialize_model(model);
    if (!out) throw_data("io-error", "write failed for " + path);
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_data("io-error", "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return deserialize_model(buf.str());
    } catch (const json::exception& e) {
        throw_data("invalid-model", std::string("malformed model file: ") + e.what());
    }
}

std::string config_digest(const std::string& canonical_text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace edc
