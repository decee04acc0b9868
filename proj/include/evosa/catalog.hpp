#ifndef EVOSA_CATALOG_HPP
#define EVOSA_CATALOG_HPP

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evosa {

using Params = std::map<std::string, double>;

enum class OperationKind { Preprocessor, Model };

auto ToString(OperationKind kind) -> std::string_view;
auto ParseOperationKind(std::string_view text) -> std::optional<OperationKind>;

struct OperationSpec {
    std::string name;
    OperationKind kind { OperationKind::Preprocessor };
    bool may_be_sink { false };
    Params default_params;
};

// Immutable, name-sorted set of operations: the search space the optimizer draws from.
class OperationCatalog {
public:
    OperationCatalog() = default;
    // Throws ConfigError on duplicate names or a sink-capable preprocessor.
    explicit OperationCatalog(std::vector<OperationSpec> specs);

    [[nodiscard]] auto Find(std::string_view name) const -> OperationSpec const*;
    [[nodiscard]] auto Contains(std::string_view name) const -> bool { return Find(name) != nullptr; }
    [[nodiscard]] auto Specs() const -> std::vector<OperationSpec> const& { return specs_; }
    [[nodiscard]] auto Names() const -> std::vector<std::string>;
    [[nodiscard]] auto SinkNames() const -> std::vector<std::string>;
    [[nodiscard]] auto NamesOfKind(OperationKind kind) const -> std::vector<std::string>;
    [[nodiscard]] auto IndexOf(std::string_view name) const -> std::optional<std::size_t>;
    [[nodiscard]] auto Size() const -> std::size_t { return specs_.size(); }

private:
    std::vector<OperationSpec> specs_;
};

// preprocessors {zscore_scaler, minmax_scaler, select_k_best}; models {ridge, knn, stump}
auto DefaultCatalog() -> OperationCatalog;

// Catalog override document: {"format_version": 1, "operations": [{name, kind, may_be_sink, default_params}]}
auto ParseCatalog(std::string_view document) -> OperationCatalog;
auto LoadCatalog(std::filesystem::path const& path) -> OperationCatalog;
auto SerializeCatalog(OperationCatalog const& catalog) -> std::string;

struct StructuralConstraints {
    std::size_t max_nodes { 8 };
    std::size_t max_depth { 5 };
    std::size_t max_parents_per_node { 3 };

    void Check() const; // throws ConfigError when any bound is zero
};

} // namespace evosa

#endif
