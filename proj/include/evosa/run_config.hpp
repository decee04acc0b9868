#ifndef EVOSA_RUN_CONFIG_HPP
#define EVOSA_RUN_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evosa/catalog.hpp"
#include "evosa/dataset.hpp"
#include "evosa/evaluator.hpp"
#include "evosa/optimizer.hpp"
#include "evosa/reporting.hpp"

namespace evosa {

struct DatasetManifest {
    std::filesystem::path path;
    std::string target;
    Task task { Task::Classification };
};

enum class EvaluatorKind { Synthetic, ToyMl };

struct EvaluatorSpec {
    EvaluatorKind kind { EvaluatorKind::Synthetic };
    std::uint64_t landscape_seed { 1 };
    std::optional<DatasetManifest> dataset;
    std::uint64_t split_seed { 0 };
};

struct BenchSpec {
    std::size_t repeats { 30 };
    std::vector<std::uint64_t> landscapes { 1, 2, 3 }; // synthetic evaluator only
    std::vector<BenchArm> arms { BenchArm::Plain, BenchArm::LocalSa, BenchArm::GlobalSa };
    GlobalSaMode global_mode { GlobalSaMode::Suitability };
    std::size_t history_records { 500 };
    HistoryDesign history_design { HistoryDesign::Balanced };
};

// Everything a CLI command needs. Relative paths in a config file resolve
// against the file's directory.
struct RunConfig {
    EvaluatorSpec evaluator;
    EvolutionConfig evolution;
    bool evolution_given { false }; // the file had an "evolution" section
    StructuralConstraints constraints;
    std::optional<std::filesystem::path> catalog_path;
    std::optional<std::filesystem::path> history_path;
    std::optional<std::string> dataset_id;
    std::filesystem::path output_dir { "evosa-out" };
    bool write_dot { true };
    bool reproducible { false };
    BenchSpec bench;
};

// Unknown keys and out-of-range values throw ConfigError naming the key.
auto ParseRunConfig(std::string_view text, std::filesystem::path const& base_dir = {}) -> RunConfig;
auto LoadRunConfig(std::filesystem::path const& path) -> RunConfig;
auto RunConfigToJson(RunConfig const& config) -> nlohmann::json;

auto EvolutionConfigFromJson(nlohmann::json const& doc, std::string const& location = "evolution") -> EvolutionConfig;
auto EvolutionConfigToJson(EvolutionConfig const& config) -> nlohmann::json;

auto CatalogFor(RunConfig const& config) -> OperationCatalog;
// Loads the dataset for toy_ml; DataError names the path when it cannot be read.
auto MakeEvaluator(RunConfig const& config, OperationCatalog const& catalog) -> std::shared_ptr<Evaluator const>;
// Explicit dataset_id, else "synthetic-<seed>" or the dataset file stem.
auto DatasetIdFor(RunConfig const& config) -> std::string;

} // namespace evosa

#endif
