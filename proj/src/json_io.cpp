#include "evosa/json_io.hpp"

#include "evosa/error.hpp"

namespace evosa {

auto PipelineToJson(Pipeline const& pipeline) -> nlohmann::json
{
    nlohmann::json nodes = nlohmann::json::array();
    for (auto const& n : pipeline.Nodes()) {
        nodes.push_back({ { "id", n.id }, { "operation", n.operation }, { "params", n.params } });
    }
    nlohmann::json edges = nlohmann::json::array();
    for (auto const& e : pipeline.Edges()) {
        edges.push_back({ e.source, e.target });
    }
    return { { "format_version", 1 }, { "nodes", nodes }, { "edges", edges } };
}

auto PipelineFromJson(nlohmann::json const& doc, std::string const& location) -> Pipeline
{
    if (!doc.is_object()) {
        throw ParseError("pipeline document must be an object", location);
    }
    if (!doc.contains("format_version") || !doc["format_version"].is_number_integer() || doc["format_version"].get<int>() != 1) {
        throw ParseError("format_version must be 1", location + ".format_version");
    }
    if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
        throw ParseError("missing 'nodes' array", location + ".nodes");
    }
    if (!doc.contains("edges") || !doc["edges"].is_array()) {
        throw ParseError("missing 'edges' array", location + ".edges");
    }
    std::vector<OperationNode> nodes;
    auto const& jnodes = doc["nodes"];
    for (std::size_t i = 0; i < jnodes.size(); ++i) {
        auto const where = location + ".nodes[" + std::to_string(i) + "]";
        auto const& jn = jnodes[i];
        if (!jn.is_object() || !jn.contains("id") || !jn["id"].is_string() || !jn.contains("operation") || !jn["operation"].is_string()) {
            throw ParseError("node needs string 'id' and 'operation'", where);
        }
        OperationNode node { jn["id"].get<std::string>(), jn["operation"].get<std::string>(), {} };
        if (jn.contains("params")) {
            if (!jn["params"].is_object()) {
                throw ParseError("'params' must be an object", where + ".params");
            }
            for (auto const& [key, value] : jn["params"].items()) {
                if (!value.is_number()) {
                    throw ParseError("parameter values must be numbers", where + ".params." + key);
                }
                node.params[key] = value.get<double>();
            }
        }
        nodes.push_back(std::move(node));
    }
    std::vector<Edge> edges;
    auto const& jedges = doc["edges"];
    for (std::size_t i = 0; i < jedges.size(); ++i) {
        auto const& je = jedges[i];
        if (!je.is_array() || je.size() != 2 || !je[0].is_string() || !je[1].is_string()) {
            throw ParseError("edge must be [source, target]", location + ".edges[" + std::to_string(i) + "]");
        }
        edges.push_back({ je[0].get<std::string>(), je[1].get<std::string>() });
    }
    return { std::move(nodes), std::move(edges) };
}

auto FitnessToJson(FitnessReport const& report) -> nlohmann::json
{
    nlohmann::json doc {
        { "quality", report.quality },
        { "complexity", report.complexity },
        { "train_seconds", report.train_seconds },
        { "inference_seconds", report.inference_seconds },
        { "valid", report.valid },
    };
    if (!report.reason.empty()) {
        doc["reason"] = report.reason;
    }
    return doc;
}

auto FitnessFromJson(nlohmann::json const& doc, std::string const& location) -> FitnessReport
{
    if (!doc.is_object() || !doc.contains("quality") || !doc["quality"].is_number() || !doc.contains("valid") || !doc["valid"].is_boolean()) {
        throw ParseError("fitness needs numeric 'quality' and boolean 'valid'", location);
    }
    FitnessReport report;
    report.quality = doc["quality"].get<double>();
    report.valid = doc["valid"].get<bool>();
    report.complexity = doc.value("complexity", std::size_t { 0 });
    report.train_seconds = doc.value("train_seconds", 0.0);
    report.inference_seconds = doc.value("inference_seconds", 0.0);
    report.reason = doc.value("reason", std::string {});
    return report;
}

auto ParseJsonDocument(std::string_view text) -> nlohmann::json
{
    try {
        return nlohmann::json::parse(text);
    } catch (nlohmann::json::parse_error const& e) {
        std::size_t line = 1;
        std::size_t column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ParseError("malformed document", "line " + std::to_string(line) + ", column " + std::to_string(column));
    }
}

} // namespace evosa
