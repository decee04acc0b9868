#include "evosa/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "evosa/error.hpp"

namespace evosa {

auto ToString(OperationKind kind) -> std::string_view
{
    return kind == OperationKind::Model ? "model" : "preprocessor";
}

auto ParseOperationKind(std::string_view text) -> std::optional<OperationKind>
{
    if (text == "model") {
        return OperationKind::Model;
    }
    if (text == "preprocessor") {
        return OperationKind::Preprocessor;
    }
    return std::nullopt;
}

OperationCatalog::OperationCatalog(std::vector<OperationSpec> specs)
    : specs_(std::move(specs))
{
    std::ranges::sort(specs_, {}, &OperationSpec::name);
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        auto const& spec = specs_[i];
        if (spec.name.empty()) {
            throw ConfigError("operation with empty name");
        }
        if (i > 0 && specs_[i - 1].name == spec.name) {
            throw ConfigError("duplicate operation '" + spec.name + "'");
        }
        if (spec.may_be_sink && spec.kind != OperationKind::Model) {
            throw ConfigError("operation '" + spec.name + "' may be a sink but is not a model");
        }
    }
}

auto OperationCatalog::Find(std::string_view name) const -> OperationSpec const*
{
    auto it = std::ranges::lower_bound(specs_, name, {}, [](auto const& s) -> std::string_view { return s.name; });
    return (it != specs_.end() && it->name == name) ? &*it : nullptr;
}

auto OperationCatalog::IndexOf(std::string_view name) const -> std::optional<std::size_t>
{
    if (auto const* spec = Find(name)) {
        return static_cast<std::size_t>(spec - specs_.data());
    }
    return std::nullopt;
}

auto OperationCatalog::Names() const -> std::vector<std::string>
{
    std::vector<std::string> names;
    names.reserve(specs_.size());
    for (auto const& s : specs_) {
        names.push_back(s.name);
    }
    return names;
}

auto OperationCatalog::SinkNames() const -> std::vector<std::string>
{
    std::vector<std::string> names;
    for (auto const& s : specs_) {
        if (s.may_be_sink) {
            names.push_back(s.name);
        }
    }
    return names;
}

auto OperationCatalog::NamesOfKind(OperationKind kind) const -> std::vector<std::string>
{
    std::vector<std::string> names;
    for (auto const& s : specs_) {
        if (s.kind == kind) {
            names.push_back(s.name);
        }
    }
    return names;
}

auto DefaultCatalog() -> OperationCatalog
{
    using K = OperationKind;
    return OperationCatalog({
        { "zscore_scaler", K::Preprocessor, false, {} },
        { "minmax_scaler", K::Preprocessor, false, {} },
        { "select_k_best", K::Preprocessor, false, { { "k", 5.0 } } },
        { "ridge", K::Model, true, { { "alpha", 1.0 } } },
        { "knn", K::Model, true, { { "k", 5.0 } } },
        { "stump", K::Model, true, {} },
    });
}

auto ParseCatalog(std::string_view document) -> OperationCatalog
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document);
    } catch (nlohmann::json::parse_error const& e) {
        throw ParseError(e.what(), "byte " + std::to_string(e.byte));
    }
    if (!doc.is_object() || !doc.contains("operations") || !doc["operations"].is_array()) {
        throw ParseError("expected an object with an 'operations' array", "$");
    }
    if (doc.value("format_version", 1) != 1) {
        throw ParseError("unsupported format_version", "$.format_version");
    }
    std::vector<OperationSpec> specs;
    auto const& ops = doc["operations"];
    for (std::size_t i = 0; i < ops.size(); ++i) {
        auto const where = "$.operations[" + std::to_string(i) + "]";
        auto const& op = ops[i];
        if (!op.is_object() || !op.contains("name") || !op["name"].is_string() || !op.contains("kind") || !op["kind"].is_string()) {
            throw ParseError("operation needs string 'name' and 'kind'", where);
        }
        auto kind = ParseOperationKind(op["kind"].get<std::string>());
        if (!kind) {
            throw ParseError("kind must be 'model' or 'preprocessor'", where + ".kind");
        }
        OperationSpec spec { op["name"].get<std::string>(), *kind, op.value("may_be_sink", *kind == OperationKind::Model), {} };
        if (op.contains("default_params")) {
            for (auto const& [key, value] : op["default_params"].items()) {
                if (!value.is_number()) {
                    throw ParseError("parameter values must be numbers", where + ".default_params." + key);
                }
                spec.default_params[key] = value.get<double>();
            }
        }
        specs.push_back(std::move(spec));
    }
    return OperationCatalog(std::move(specs));
}

auto LoadCatalog(std::filesystem::path const& path) -> OperationCatalog
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read catalog file " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return ParseCatalog(buffer.str());
}

auto SerializeCatalog(OperationCatalog const& catalog) -> std::string
{
    nlohmann::json ops = nlohmann::json::array();
    for (auto const& s : catalog.Specs()) {
        ops.push_back({ { "name", s.name }, { "kind", ToString(s.kind) }, { "may_be_sink", s.may_be_sink }, { "default_params", s.default_params } });
    }
    nlohmann::json doc { { "format_version", 1 }, { "operations", ops } };
    return doc.dump(2) + "\n";
}

void StructuralConstraints::Check() const
{
    if (max_nodes < 1 || max_depth < 1 || max_parents_per_node < 1) {
        throw ConfigError("structural constraints must all be >= 1");
    }
}

} // namespace evosa
