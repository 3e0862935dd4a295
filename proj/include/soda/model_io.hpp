#pragma once

#include "soda/glm.hpp"
#include "soda/ssoda.hpp"
#include "soda/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace soda {

// Self-describing JSON model document, format_version 1. Exactly one of
// `logistic` / `sliced` is present, per model_kind.
struct ModelDocument {
    std::string model_kind;  // "logistic" or "sliced_gaussian"
    std::vector<std::string> column_names;
    double gamma = 0.5;
    std::optional<ModelFit> logistic;
    std::optional<SlicedModel> sliced;
};

std::string serialize_model(const ModelDocument& doc);
void save_model(const std::string& path, const ModelDocument& doc);
ModelDocument load_model(const std::string& path);

}  // namespace soda
