#include "evosa/history.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "evosa/error.hpp"
#include "evosa/json_io.hpp"

namespace evosa {

void CheckRecord(HistoryRecord const& record)
{
    if (!std::isfinite(record.fitness)) {
        throw DataError(fmt::format("history record for run '{}' has non-finite fitness", record.run_id));
    }
    // operation labels belong to whatever catalog produced the run, so only
    // the graph rules are checked here
    auto result = Validate(record.pipeline, OperationCatalog {});
    std::erase_if(result.violations, [](auto const& v) {
        return v.kind == ViolationKind::UnknownOperation || v.kind == ViolationKind::SinkNotModel;
    });
    if (!result.Ok()) {
        throw DataError(fmt::format("history record for run '{}' has an invalid pipeline: {}", record.run_id, result.Describe()));
    }
}

auto SerializeRecord(HistoryRecord const& record) -> std::string
{
    nlohmann::json doc {
        { "format_version", kHistoryFormatVersion },
        { "run_id", record.run_id },
        { "dataset_id", record.dataset_id },
        { "pipeline", PipelineToJson(record.pipeline) },
        { "fitness", record.fitness },
        { "timestamp", record.timestamp },
    };
    return doc.dump();
}

auto ParseRecord(std::string_view line) -> HistoryRecord
{
    auto doc = ParseJsonDocument(line);
    if (!doc.is_object()) {
        throw ParseError("history record is not an object", "$");
    }
    auto field = [&](char const* key) -> nlohmann::json const& {
        if (!doc.contains(key)) {
            throw ParseError(fmt::format("missing field '{}'", key), "$");
        }
        return doc.at(key);
    };
    if (auto const& version = field("format_version"); !version.is_number_integer() || version.get<int>() != kHistoryFormatVersion) {
        throw ParseError(fmt::format("unsupported format_version {}", version.dump()), "$.format_version");
    }
    HistoryRecord record;
    try {
        record.run_id = field("run_id").get<std::string>();
        record.dataset_id = field("dataset_id").get<std::string>();
        record.fitness = field("fitness").get<double>();
        record.timestamp = doc.value("timestamp", std::string {});
    } catch (nlohmann::json::exception const& e) {
        throw ParseError(e.what(), "$");
    }
    record.pipeline = PipelineFromJson(field("pipeline"), "$.pipeline");
    CheckRecord(record);
    return record;
}

auto ParseHistory(std::string_view text) -> HistoryLoad
{
    HistoryLoad load;
    std::size_t line_number = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        auto line = text.substr(start, end - start);
        start = end + 1;
        ++line_number;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.find_first_not_of(" \t") == std::string_view::npos) {
            continue;
        }
        try {
            load.records.push_back(ParseRecord(line));
        } catch (Error const& e) {
            load.warnings.push_back(fmt::format("line {}: {}", line_number, e.what()));
        }
    }
    return load;
}

HistoryStore::HistoryStore(std::filesystem::path path)
    : path_(std::move(path))
{
}

void HistoryStore::Append(HistoryRecord const& record)
{
    Append(std::span(&record, 1));
}

void HistoryStore::Append(std::span<HistoryRecord const> records)
{
    std::string block;
    for (auto const& r : records) {
        CheckRecord(r);
        block += SerializeRecord(r);
        block += '\n';
    }
    std::scoped_lock lock(mutex_);
    if (path_.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path_.parent_path(), ec);
    }
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) {
        throw DataError(fmt::format("cannot open history file {} for writing", path_.string()));
    }
    out << block;
    out.flush();
    if (!out) {
        throw DataError(fmt::format("failed writing history file {}", path_.string()));
    }
}

auto HistoryStore::Load() const -> HistoryLoad
{
    std::scoped_lock lock(mutex_);
    std::ifstream in(path_, std::ios::binary);
    if (!in) {
        throw DataError(fmt::format("cannot open history file {}", path_.string()));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return ParseHistory(buffer.str());
}

auto QueryHistory(std::span<HistoryRecord const> records, std::optional<std::string_view> dataset_id,
    std::optional<std::string_view> run_id) -> std::vector<HistoryRecord>
{
    std::vector<HistoryRecord> out;
    for (auto const& r : records) {
        if ((!dataset_id || r.dataset_id == *dataset_id) && (!run_id || r.run_id == *run_id)) {
            out.push_back(r);
        }
    }
    return out;
}

auto DatasetIds(std::span<HistoryRecord const> records) -> std::vector<std::string>
{
    std::set<std::string> ids;
    for (auto const& r : records) {
        ids.insert(r.dataset_id);
    }
    return { ids.begin(), ids.end() };
}

auto RunIds(std::span<HistoryRecord const> records) -> std::vector<std::string>
{
    std::set<std::string> ids;
    for (auto const& r : records) {
        ids.insert(r.run_id);
    }
    return { ids.begin(), ids.end() };
}

HistoryRecorder::HistoryRecorder(std::string run_id, std::string dataset_id, std::string timestamp)
    : run_id_(std::move(run_id))
    , dataset_id_(std::move(dataset_id))
    , timestamp_(std::move(timestamp))
{
}

void HistoryRecorder::Record(EvaluationEvent const& event)
{
    if (!event.fitness.valid || !std::isfinite(event.fitness.quality)) {
        return;
    }
    std::scoped_lock lock(mutex_);
    records_.push_back({ run_id_, dataset_id_, event.pipeline, event.fitness.quality, timestamp_ });
}

auto HistoryRecorder::Records() const -> std::vector<HistoryRecord>
{
    std::scoped_lock lock(mutex_);
    return records_;
}

auto CurrentTimestamp() -> std::string
{
    auto const now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc {};
    gmtime_r(&now, &utc);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buffer;
}

} // namespace evosa
