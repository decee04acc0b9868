#ifndef EVOSA_JSON_IO_HPP
#define EVOSA_JSON_IO_HPP

#include <string>
#include <string_view>

#include <json.hpp>

#include "evosa/evaluator.hpp"
#include "evosa/pipeline.hpp"

namespace evosa {

auto PipelineToJson(Pipeline const& pipeline) -> nlohmann::json;
// `location` prefixes error locations (e.g. "$.pipeline").
auto PipelineFromJson(nlohmann::json const& doc, std::string const& location = "$") -> Pipeline;

auto FitnessToJson(FitnessReport const& report) -> nlohmann::json;
auto FitnessFromJson(nlohmann::json const& doc, std::string const& location = "$") -> FitnessReport;

// Parses text and converts nlohmann parse errors into ParseError with a line/column location.
auto ParseJsonDocument(std::string_view text) -> nlohmann::json;

} // namespace evosa

#endif
