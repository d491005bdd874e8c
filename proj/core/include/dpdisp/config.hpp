#pragma once

#include <nlohmann/json.hpp>

#include "dpdisp/errmodel.hpp"
#include "dpdisp/eval.hpp"
#include "dpdisp/matching.hpp"
#include "dpdisp/optics.hpp"
#include "dpdisp/refine.hpp"

// JSON mappings for every configuration struct. Readers accept partial
// objects: missing keys keep their defaults, unknown keys are rejected.

namespace dpdisp {

void to_json(nlohmann::json& j, const MatchConfig& c);
void from_json(const nlohmann::json& j, MatchConfig& c);

void to_json(nlohmann::json& j, const SimConfig& c);
void from_json(const nlohmann::json& j, SimConfig& c);

void to_json(nlohmann::json& j, const FgsConfig& c);
void from_json(const nlohmann::json& j, FgsConfig& c);

void to_json(nlohmann::json& j, const CompletionConfig& c);
void from_json(const nlohmann::json& j, CompletionConfig& c);

void to_json(nlohmann::json& j, const RefineConfig& c);
void from_json(const nlohmann::json& j, RefineConfig& c);

void to_json(nlohmann::json& j, const ErrorModel& m);
void from_json(const nlohmann::json& j, ErrorModel& m);

void to_json(nlohmann::json& j, const SweepConfig& c);
void from_json(const nlohmann::json& j, SweepConfig& c);

void to_json(nlohmann::json& j, const SweepRecord& r);

void to_json(nlohmann::json& j, const MetricReport& r);

void to_json(nlohmann::json& j, const CameraSampler& s);
void from_json(const nlohmann::json& j, CameraSampler& s);

}  // namespace dpdisp
