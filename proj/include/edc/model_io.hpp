#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edc/dataset.hpp"
#include "edc/equation.hpp"

namespace edc {

inline constexpr int kModelFormatVersion = 1;

// Everything needed to score raw rows later: the discovered equation, the
// frozen encoding and normalization, and the decision threshold in
// probability space. Round-trips through JSON bit-exactly.
struct ModelFile {
    int version = kModelFormatVersion;
    Equation equation;
    std::vector<FeatureSpec> features;
    NormParams norm;
    double threshold = 0.5;  // probability-space: positive iff p >= threshold
    std::uint64_t seed = 0;
    std::string config_digest;
    double train_loss = 0.0;
    double train_auc = 0.0;
};

nlohmann::ordered_json equation_to_json(const Equation& eq);
Equation equation_from_json(const nlohmann::json& j);

std::string serialize_equation(const Equation& eq);
Equation deserialize_equation(const std::string& text);

void save_model(const ModelFile& model, const std::string& path);
ModelFile load_model(const std::string& path);
std::string serialize_model(const ModelFile& model);
ModelFile deserialize_model(const std::string& text);

// FNV-1a over a canonical rendering of the configuration, hex-encoded.
std::string config_digest(const std::string& canonical_text);

}  // namespace edc
