#ifndef EVOSA_HISTORY_HPP
#define EVOSA_HISTORY_HPP

#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evosa/optimizer.hpp"
#include "evosa/pipeline.hpp"

namespace evosa {

inline constexpr int kHistoryFormatVersion = 1;

struct HistoryRecord {
    std::string run_id;
    std::string dataset_id;
    Pipeline pipeline;
    double fitness { 0.0 };
    std::string timestamp;

    friend auto operator==(HistoryRecord const&, HistoryRecord const&) -> bool = default;
};

// Throws DataError when the fitness is not finite or the pipeline is invalid.
void CheckRecord(HistoryRecord const& record);

// One line of the history file, without the trailing newline.
auto SerializeRecord(HistoryRecord const& record) -> std::string;
auto ParseRecord(std::string_view line) -> HistoryRecord; // throws ParseError / DataError

struct HistoryLoad {
    std::vector<HistoryRecord> records;
    std::vector<std::string> warnings; // one per skipped line
};

auto ParseHistory(std::string_view text) -> HistoryLoad;

// Append-only line-delimited JSON file. Appends from several threads are
// serialized; each record is written with a single flush.
class HistoryStore {
public:
    explicit HistoryStore(std::filesystem::path path);

    [[nodiscard]] auto Path() const -> std::filesystem::path const& { return path_; }

    void Append(HistoryRecord const& record);
    void Append(std::span<HistoryRecord const> records);

    // Throws DataError if the file cannot be read; corrupt lines become warnings.
    [[nodiscard]] auto Load() const -> HistoryLoad;

private:
    std::filesystem::path path_;
    mutable std::mutex mutex_;
};

// Empty filters match everything.
auto QueryHistory(std::span<HistoryRecord const> records, std::optional<std::string_view> dataset_id,
    std::optional<std::string_view> run_id = std::nullopt) -> std::vector<HistoryRecord>;

auto DatasetIds(std::span<HistoryRecord const> records) -> std::vector<std::string>;
auto RunIds(std::span<HistoryRecord const> records) -> std::vector<std::string>;

// Collects valid evaluations of a run as history records.
class HistoryRecorder final : public HistorySink {
public:
    HistoryRecorder(std::string run_id, std::string dataset_id, std::string timestamp = {});

    void Record(EvaluationEvent const& event) override;

    [[nodiscard]] auto Records() const -> std::vector<HistoryRecord>;

private:
    std::string run_id_;
    std::string dataset_id_;
    std::string timestamp_;
    mutable std::mutex mutex_;
    std::vector<HistoryRecord> records_;
};

// UTC time as "YYYY-MM-DDTHH:MM:SSZ".
auto CurrentTimestamp() -> std::string;

} // namespace evosa

#endif
