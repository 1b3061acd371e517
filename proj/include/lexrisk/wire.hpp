#pragma once

// JSON forms shared by the on-disk logs and the HTTP API.

#include <nlohmann/json.hpp>

#include "lexrisk/pipeline.hpp"

namespace lexrisk {

void to_json(nlohmann::json& j, const Finding& f);
void from_json(const nlohmann::json& j, Finding& f);
void to_json(nlohmann::json& j, const StoreRecord& r);
void from_json(const nlohmann::json& j, StoreRecord& r);
void to_json(nlohmann::json& j, const AnalysisWarning& w);
void from_json(const nlohmann::json& j, AnalysisWarning& w);

}  // namespace lexrisk
