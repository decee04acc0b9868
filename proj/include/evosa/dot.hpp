#ifndef EVOSA_DOT_HPP
#define EVOSA_DOT_HPP

#include <map>
#include <string>

#include "evosa/pipeline.hpp"

namespace evosa {

// Sensitivity indices attached to graph elements for export.
struct DotAnnotations {
    std::map<std::string, double> node_index;
    std::map<Edge, double> edge_index;

    [[nodiscard]] auto Empty() const -> bool { return node_index.empty() && edge_index.empty(); }
};

// Positive index (removal improves quality) is drawn in red, negative in blue.
auto ToDot(Pipeline const& pipeline, DotAnnotations const* annotations = nullptr) -> std::string;

} // namespace evosa

#endif
