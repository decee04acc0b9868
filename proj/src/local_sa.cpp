#include "evosa/local_sa.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "evosa/error.hpp"
#include "evosa/json_io.hpp"
#include "evosa/search_space.hpp"

namespace evosa {

auto SensitivityIndex(double quality_before, double quality_after) -> double
{
    auto const low = std::min(quality_before, quality_after);
    auto const shift = low < kPositivityEpsilon ? kPositivityEpsilon - low : 0.0;
    return 1.0 - (quality_before + shift) / (quality_after + shift);
}

auto ToString(SaTarget target) -> std::string_view
{
    return target == SaTarget::Node ? "node" : "edge";
}

auto ToString(SaAction action) -> std::string_view
{
    return action == SaAction::Delete ? "delete" : "replace";
}

auto SensitivityRecord::Describe() const -> std::string
{
    if (target == SaTarget::Node) {
        return action == SaAction::Delete ? "delete node " + node_id
                                          : "replace node " + node_id + " with " + replacement_operation;
    }
    return action == SaAction::Delete ? "delete edge " + ToString(edge)
                                      : "replace edge " + ToString(edge) + " with " + ToString(*replacement_edge);
}

auto SAReport::Count(SaTarget target, SaAction action) const -> std::size_t
{
    return static_cast<std::size_t>(std::ranges::count_if(records, [&](auto const& r) { return r.target == target && r.action == action; }));
}

auto ApplyRecord(Pipeline const& pipeline, SensitivityRecord const& record, OperationCatalog const& catalog) -> Pipeline
{
    if (record.target == SaTarget::Node) {
        return record.action == SaAction::Delete ? DeleteNode(pipeline, record.node_id, catalog)
                                                 : ReplaceNode(pipeline, record.node_id, record.replacement_operation, catalog);
    }
    if (record.action == SaAction::Delete) {
        return DeleteEdge(pipeline, record.edge, catalog);
    }
    if (!record.replacement_edge) {
        throw StructuralError("edge replacement record without a candidate edge");
    }
    if (*record.replacement_edge == record.edge) {
        throw StructuralError("replacement edge equals the replaced edge");
    }
    return ReplaceEdge(pipeline, record.edge, *record.replacement_edge, catalog);
}

namespace {

    struct Probe {
        SensitivityRecord record;
        std::optional<Pipeline> edited;
    };

    auto MakeProbe(Pipeline const& pipeline, SensitivityRecord record, OperationCatalog const& catalog,
        std::optional<StructuralConstraints> const& constraints) -> Probe
    {
        try {
            auto edited = ApplyRecord(pipeline, record, catalog);
            if (constraints && !SatisfiesConstraints(edited, *constraints)) {
                record.note = "violates structural constraints";
                return { std::move(record), std::nullopt };
            }
            return { std::move(record), std::move(edited) };
        } catch (Error const& e) {
            record.note = e.what();
            return { std::move(record), std::nullopt };
        }
    }

    auto NodeRecord(std::string const& id, SaAction action, std::string replacement = {}) -> SensitivityRecord
    {
        SensitivityRecord r;
        r.target = SaTarget::Node;
        r.action = action;
        r.node_id = id;
        r.replacement_operation = std::move(replacement);
        return r;
    }

    auto EdgeRecord(Edge const& edge, SaAction action, std::optional<Edge> replacement = std::nullopt) -> SensitivityRecord
    {
        SensitivityRecord r;
        r.target = SaTarget::Edge;
        r.action = action;
        r.edge = edge;
        r.replacement_edge = std::move(replacement);
        return r;
    }

    auto ReplacementOperations(Pipeline const& pipeline, std::string const& id, OperationCatalog const& catalog) -> std::vector<std::string>
    {
        PositionContext context;
        for (auto const& p : pipeline.Parents(id)) {
            if (auto const* s = catalog.Find(pipeline.OperationOf(p))) {
                context.parent_kinds.push_back(s->kind);
            }
        }
        for (auto const& c : pipeline.Children(id)) {
            if (auto const* s = catalog.Find(pipeline.OperationOf(c))) {
                context.child_kinds.push_back(s->kind);
            }
        }
        context.is_sink = pipeline.Children(id).empty();
        auto ops = CandidateOperations(catalog, context);
        std::erase(ops, pipeline.OperationOf(id));
        return ops;
    }

    auto FeasibleNonEdges(Pipeline const& pipeline, Edge const& edge, OperationCatalog const& catalog,
        std::optional<StructuralConstraints> const& constraints) -> std::vector<Edge>
    {
        std::vector<Edge> out;
        for (auto const& u : pipeline.Nodes()) {
            for (auto const& v : pipeline.Nodes()) {
                Edge candidate { u.id, v.id };
                if (u.id == v.id || pipeline.HasEdge(candidate)) {
                    continue;
                }
                try {
                    auto edited = ReplaceEdge(pipeline, edge, candidate, catalog);
                    if (!constraints || SatisfiesConstraints(edited, *constraints)) {
                        out.push_back(std::move(candidate));
                    }
                } catch (Error const&) {
                }
            }
        }
        return out;
    }

    template <typename T>
    auto SampleBudget(std::vector<T> items, std::size_t budget, Rng& rng) -> std::vector<T>
    {
        rng.Shuffle(std::span(items));
        if (items.size() > budget) {
            items.resize(budget);
        }
        return items;
    }

    // Probes restricted to the given nodes / edges (all when empty optional), in sweep order.
    auto PlanSweep(Pipeline const& pipeline, OperationCatalog const& catalog, SweepOptions const& options,
        std::optional<std::set<std::string>> const& nodes, std::optional<std::set<Edge>> const& edges) -> std::vector<Probe>
    {
        Rng rng(MixSeed(options.seed, 0xA11));
        auto node_selected = [&](std::string const& id) { return !nodes || nodes->contains(id); };
        auto edge_selected = [&](Edge const& e) { return !edges || edges->contains(e); };
        std::vector<Probe> probes;
        for (auto const& n : pipeline.Nodes()) {
            if (node_selected(n.id)) {
                probes.push_back(MakeProbe(pipeline, NodeRecord(n.id, SaAction::Delete), catalog, options.constraints));
            }
        }
        for (auto const& n : pipeline.Nodes()) {
            if (!node_selected(n.id)) {
                continue;
            }
            for (auto& op : SampleBudget(ReplacementOperations(pipeline, n.id, catalog), options.candidate_budget, rng)) {
                probes.push_back(MakeProbe(pipeline, NodeRecord(n.id, SaAction::Replace, std::move(op)), catalog, options.constraints));
            }
        }
        for (auto const& e : pipeline.Edges()) {
            if (edge_selected(e)) {
                probes.push_back(MakeProbe(pipeline, EdgeRecord(e, SaAction::Delete), catalog, options.constraints));
            }
        }
        for (auto const& e : pipeline.Edges()) {
            if (!edge_selected(e)) {
                continue;
            }
            for (auto& candidate : SampleBudget(FeasibleNonEdges(pipeline, e, catalog, options.constraints), options.candidate_budget, rng)) {
                probes.push_back(MakeProbe(pipeline, EdgeRecord(e, SaAction::Replace, std::move(candidate)), catalog, options.constraints));
            }
        }
        return probes;
    }

    // Evaluates feasible probes and fills qualities/indices against `baseline`.
    auto RunProbes(std::vector<Probe>& probes, double baseline, Evaluator const& evaluator, int jobs, std::size_t& evaluations) -> std::vector<FitnessReport>
    {
        std::vector<Pipeline> batch;
        std::vector<std::size_t> slots;
        for (std::size_t i = 0; i < probes.size(); ++i) {
            if (probes[i].edited) {
                batch.push_back(*probes[i].edited);
                slots.push_back(i);
            }
        }
        auto reports = jobs == 1 ? EvaluateBatchSerial(batch, evaluator) : EvaluateBatchParallel(batch, evaluator, jobs);
        evaluations += batch.size();

        std::vector<FitnessReport> out(probes.size());
        for (std::size_t i = 0; i < probes.size(); ++i) {
            auto& r = probes[i].record;
            r.quality_before = baseline;
            out[i] = FitnessReport::Invalid(0, r.note);
        }
        for (std::size_t k = 0; k < slots.size(); ++k) {
            auto& r = probes[slots[k]].record;
            auto const& report = reports[k];
            out[slots[k]] = report;
            if (!report.valid) {
                r.note = "evaluation failed: " + report.reason;
                continue;
            }
            r.feasible = true;
            r.quality_after = report.quality;
            r.index = SensitivityIndex(baseline, report.quality);
        }
        return out;
    }

    auto SingleProbe(Pipeline const& pipeline, SensitivityRecord record, Evaluator const& evaluator,
        OperationCatalog const& catalog, std::optional<double> baseline) -> SensitivityRecord
    {
        auto const before = baseline ? *baseline : evaluator.Evaluate(pipeline).quality;
        std::vector<Probe> probes { MakeProbe(pipeline, std::move(record), catalog, std::nullopt) };
        std::size_t evaluations = 0;
        RunProbes(probes, before, evaluator, 1, evaluations);
        return probes.front().record;
    }

    auto Simplicity(FitnessReport const& report) -> double
    {
        return report.complexity == 0 ? 0.0 : 1.0 / static_cast<double>(report.complexity);
    }

    auto SweepImpl(Pipeline const& pipeline, Evaluator const& evaluator, OperationCatalog const& catalog, SweepOptions const& options) -> SAReport
    {
        SAReport report;
        report.pipeline = pipeline;
        report.baseline = evaluator.Evaluate(pipeline);
        report.evaluations = 1;
        auto probes = PlanSweep(pipeline, catalog, options, std::nullopt, std::nullopt);
        report.probes = RunProbes(probes, report.baseline.quality, evaluator, options.jobs, report.evaluations);
        for (auto& p : probes) {
            report.records.push_back(std::move(p.record));
        }
        if (options.per_metric) {
            auto simplicity = report.records;
            auto const before = Simplicity(report.baseline);
            for (std::size_t i = 0; i < simplicity.size(); ++i) {
                auto& r = simplicity[i];
                r.quality_before = before;
                if (r.feasible) {
                    r.quality_after = Simplicity(report.probes[i]);
                    r.index = SensitivityIndex(before, r.quality_after);
                }
            }
            report.metric_reports["simplicity"] = std::move(simplicity);
        }
        return report;
    }

} // namespace

auto NodeDeletionIndex(Pipeline const& pipeline, std::string_view node_id, Evaluator const& evaluator,
    OperationCatalog const& catalog, std::optional<double> baseline) -> SensitivityRecord
{
    return SingleProbe(pipeline, NodeRecord(std::string(node_id), SaAction::Delete), evaluator, catalog, baseline);
}

auto NodeReplacementIndex(Pipeline const& pipeline, std::string_view node_id, std::string_view replacement,
    Evaluator const& evaluator, OperationCatalog const& catalog, std::optional<double> baseline) -> SensitivityRecord
{
    return SingleProbe(pipeline, NodeRecord(std::string(node_id), SaAction::Replace, std::string(replacement)), evaluator, catalog, baseline);
}

auto EdgeDeletionIndex(Pipeline const& pipeline, Edge const& edge, Evaluator const& evaluator,
    OperationCatalog const& catalog, std::optional<double> baseline) -> SensitivityRecord
{
    return SingleProbe(pipeline, EdgeRecord(edge, SaAction::Delete), evaluator, catalog, baseline);
}

auto EdgeReplacementIndex(Pipeline const& pipeline, Edge const& edge, Edge const& candidate, Evaluator const& evaluator,
    OperationCatalog const& catalog, std::optional<double> baseline) -> SensitivityRecord
{
    return SingleProbe(pipeline, EdgeRecord(edge, SaAction::Replace, candidate), evaluator, catalog, baseline);
}

auto FullSweep(Pipeline const& pipeline, Evaluator const& evaluator, OperationCatalog const& catalog, SweepOptions const& options) -> SAReport
{
    return SweepImpl(pipeline, evaluator, catalog, options);
}

auto FullSweepSerial(Pipeline const& pipeline, Evaluator const& evaluator, OperationCatalog const& catalog, SweepOptions options) -> SAReport
{
    options.jobs = 1;
    return SweepImpl(pipeline, evaluator, catalog, options);
}

namespace {

    struct Entry {
        SensitivityRecord record;
        FitnessReport probe;
        bool fresh { true };
    };

    auto TouchedNodes(Pipeline const& before, SensitivityRecord const& r) -> std::set<std::string>
    {
        std::set<std::string> touched;
        if (r.target == SaTarget::Node) {
            if (r.action == SaAction::Delete) {
                for (auto& p : before.Parents(r.node_id)) {
                    touched.insert(std::move(p));
                }
                for (auto& c : before.Children(r.node_id)) {
                    touched.insert(std::move(c));
                }
            } else {
                touched.insert(r.node_id);
            }
            return touched;
        }
        touched.insert(r.edge.source);
        touched.insert(r.edge.target);
        if (r.replacement_edge) {
            touched.insert(r.replacement_edge->source);
            touched.insert(r.replacement_edge->target);
        }
        return touched;
    }

    auto SameTarget(SensitivityRecord const& a, SensitivityRecord const& b) -> bool
    {
        return a.target == b.target && a.action == b.action && a.node_id == b.node_id && a.edge == b.edge
            && a.replacement_operation == b.replacement_operation && a.replacement_edge == b.replacement_edge;
    }

} // namespace

auto ApplySimplifications(Pipeline const& pipeline, SAReport const& report, Evaluator const& evaluator,
    OperationCatalog const& catalog, double threshold, SweepOptions const& options) -> SimplificationResult
{
    SimplificationResult result { pipeline, report.baseline, {}, 0 };
    bool const same_pipeline = report.pipeline == pipeline;
    if (!same_pipeline) {
        result.fitness = evaluator.Evaluate(pipeline);
        ++result.evaluations;
    }
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < report.records.size(); ++i) {
        auto probe = i < report.probes.size() ? report.probes[i] : FitnessReport::Invalid(0, "missing probe");
        entries.push_back({ report.records[i], std::move(probe), same_pipeline });
    }

    std::size_t steps = 0;
    while (steps < kMaxSimplificationSteps) {
        Entry* best = nullptr;
        for (auto& e : entries) {
            if (e.record.feasible && e.record.index > threshold && (best == nullptr || e.record.index > best->record.index)) {
                best = &e;
            }
        }
        if (best == nullptr) {
            break;
        }
        if (!best->fresh) {
            std::vector<Probe> probes { MakeProbe(result.pipeline, best->record, catalog, options.constraints) };
            probes.front().record.feasible = false;
            probes.front().record.index = 0.0;
            auto reports = RunProbes(probes, result.fitness.quality, evaluator, 1, result.evaluations);
            best->record = std::move(probes.front().record);
            best->probe = std::move(reports.front());
            best->fresh = true;
            continue;
        }

        auto const previous = result.pipeline;
        result.pipeline = ApplyRecord(previous, best->record, catalog);
        result.fitness = best->probe;
        result.applied.push_back(best->record);
        ++steps;

        std::set<std::string> neighbourhood;
        for (auto const& id : TouchedNodes(previous, best->record)) {
            if (!result.pipeline.Contains(id)) {
                continue;
            }
            neighbourhood.insert(id);
            for (auto& p : result.pipeline.Parents(id)) {
                neighbourhood.insert(std::move(p));
            }
            for (auto& c : result.pipeline.Children(id)) {
                neighbourhood.insert(std::move(c));
            }
        }
        std::set<Edge> local_edges;
        for (auto const& e : result.pipeline.Edges()) {
            if (neighbourhood.contains(e.source) || neighbourhood.contains(e.target)) {
                local_edges.insert(e);
            }
        }
        auto local_options = options;
        local_options.seed = MixSeed(options.seed, steps);
        auto probes = PlanSweep(result.pipeline, catalog, local_options, neighbourhood, local_edges);
        auto reports = RunProbes(probes, result.fitness.quality, evaluator, options.jobs, result.evaluations);

        std::vector<Entry> next;
        for (std::size_t i = 0; i < probes.size(); ++i) {
            next.push_back({ std::move(probes[i].record), std::move(reports[i]), true });
        }
        for (auto& e : entries) {
            if (&e == best) {
                continue;
            }
            bool const local = e.record.target == SaTarget::Node ? neighbourhood.contains(e.record.node_id) : local_edges.contains(e.record.edge);
            bool const duplicate = std::ranges::any_of(next, [&](auto const& n) { return SameTarget(n.record, e.record); });
            if (!local && !duplicate) {
                e.fresh = false;
                next.push_back(std::move(e));
            }
        }
        entries = std::move(next);
    }
    return result;
}

auto SaEvolutionHook(std::vector<Individual>& population, GenerationContext const& context) -> std::vector<std::size_t>
{
    auto const& config = context.config;
    if (context.generation == 0 || context.generation % config.sa_cadence_K != 0) {
        return {};
    }
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < population.size(); ++i) {
        if (population[i].Valid()) {
            order.push_back(i);
        }
    }
    std::ranges::stable_sort(order, [&](auto a, auto b) { return population[a].Quality() > population[b].Quality(); });
    if (order.size() > config.sa_top_N) {
        order.resize(config.sa_top_N);
    }

    std::vector<std::size_t> replaced;
    for (auto i : order) {
        SweepOptions options;
        options.candidate_budget = config.sa_candidate_budget;
        options.seed = context.rng.Fork();
        options.jobs = config.jobs;
        options.constraints = context.constraints;
        auto const& current = population[i];
        auto report = FullSweep(current.pipeline, context.evaluator, context.catalog, options);
        auto simplified = ApplySimplifications(current.pipeline, report, context.evaluator, context.catalog, config.sa_threshold, options);
        if (simplified.pipeline == current.pipeline) {
            continue;
        }
        Individual updated { context.next_id++, std::move(simplified.pipeline), std::move(simplified.fitness), { { current.id }, "sa" } };
        population[i] = std::move(updated);
        replaced.push_back(i);
    }
    return replaced;
}

auto AnnotationsFrom(SAReport const& report) -> DotAnnotations
{
    DotAnnotations annotations;
    for (auto const& r : report.records) {
        if (!r.feasible || r.action != SaAction::Delete) {
            continue;
        }
        if (r.target == SaTarget::Node) {
            annotations.node_index[r.node_id] = r.index;
        } else {
            annotations.edge_index[r.edge] = r.index;
        }
    }
    return annotations;
}

auto ToDot(Pipeline const& pipeline, SAReport const& report) -> std::string
{
    auto annotations = AnnotationsFrom(report);
    return ToDot(pipeline, &annotations);
}

namespace {

    auto RecordsToJson(std::vector<SensitivityRecord> const& records) -> nlohmann::json
    {
        auto out = nlohmann::json::array();
        for (auto const& r : records) {
            nlohmann::json j {
                { "target", ToString(r.target) },
                { "action", ToString(r.action) },
                { "feasible", r.feasible },
                { "quality_before", r.quality_before },
            };
            if (r.target == SaTarget::Node) {
                j["node"] = r.node_id;
            } else {
                j["edge"] = { r.edge.source, r.edge.target };
            }
            if (!r.replacement_operation.empty()) {
                j["replacement"] = r.replacement_operation;
            }
            if (r.replacement_edge) {
                j["replacement_edge"] = { r.replacement_edge->source, r.replacement_edge->target };
            }
            if (r.feasible) {
                j["index"] = r.index;
                j["quality_after"] = r.quality_after;
            } else {
                j["note"] = r.note;
            }
            out.push_back(std::move(j));
        }
        return out;
    }

} // namespace

auto SerializeReport(SAReport const& report) -> std::string
{
    nlohmann::json doc {
        { "format_version", 1 },
        { "pipeline", PipelineToJson(report.pipeline) },
        { "baseline", FitnessToJson(report.baseline) },
        { "evaluations", report.evaluations },
        { "records", RecordsToJson(report.records) },
    };
    if (!report.metric_reports.empty()) {
        nlohmann::json metrics = nlohmann::json::object();
        for (auto const& [name, records] : report.metric_reports) {
            metrics[name] = RecordsToJson(records);
        }
        doc["metrics"] = std::move(metrics);
    }
    // wall-clock timings are not part of the report
    doc["baseline"].erase("train_seconds");
    doc["baseline"].erase("inference_seconds");
    return doc.dump(2) + "\n";
}

auto RankedSuggestions(SAReport const& report) -> std::vector<SensitivityRecord>
{
    std::vector<SensitivityRecord> out;
    for (auto const& r : report.records) {
        if (r.feasible && r.index > 0.0) {
            out.push_back(r);
        }
    }
    std::ranges::stable_sort(out, std::greater<> {}, &SensitivityRecord::index);
    return out;
}

} // namespace evosa
