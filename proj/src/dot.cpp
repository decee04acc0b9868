#include "evosa/dot.hpp"

#include <fmt/format.h>

namespace evosa {

namespace {

    auto Escape(std::string_view text) -> std::string
    {
        std::string out;
        for (char c : text) {
            if (c == '"' || c == '\\') {
                out += '\\';
            }
            out += c;
        }
        return out;
    }

    auto Quote(std::string_view text) -> std::string
    {
        return "\"" + Escape(text) + "\"";
    }

    auto ColorFor(double index) -> std::string_view
    {
        if (index > 0.0) {
            return "firebrick";
        }
        if (index < 0.0) {
            return "steelblue";
        }
        return "black";
    }

} // namespace

auto ToDot(Pipeline const& pipeline, DotAnnotations const* annotations) -> std::string
{
    bool const annotate = annotations != nullptr && !annotations->Empty();
    std::string out = "digraph pipeline {\n  rankdir=LR;\n  node [shape=box];\n";
    for (auto const& node : pipeline.Nodes()) {
        auto label = Quote(node.operation);
        std::string style;
        if (annotate) {
            if (auto it = annotations->node_index.find(node.id); it != annotations->node_index.end()) {
                // \n is DOT's centered line break, so it goes in unescaped
                label = fmt::format("\"{}\\nS={:.3f}\"", Escape(node.operation), it->second);
                style = fmt::format(", color={}, fontcolor={}", ColorFor(it->second), ColorFor(it->second));
            }
        }
        out += fmt::format("  {} [label={}{}];\n", Quote(node.id), label, style);
    }
    for (auto const& edge : pipeline.Edges()) {
        std::string attrs;
        if (annotate) {
            if (auto it = annotations->edge_index.find(edge); it != annotations->edge_index.end()) {
                attrs = fmt::format(" [label={}, color={}]", Quote(fmt::format("S={:.3f}", it->second)), ColorFor(it->second));
            }
        }
        out += fmt::format("  {} -> {}{};\n", Quote(edge.source), Quote(edge.target), attrs);
    }
    out += "}\n";
    return out;
}

} // namespace evosa
