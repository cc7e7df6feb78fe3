#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gs/query.hpp"

namespace gs {

enum class TaskKind { NodeClassification, LinkPrediction };

// Per-instance values substituted into a template.
struct PromptSpec {
    std::string domain = "generic";         // e.g. "Amazon"
    std::string entity = "node";            // e.g. "product", "paper"
    std::string relation = "edges";         // e.g. "co-purchase relationships"
    std::string anchor_text;
    std::string anchor_text_b;              // link prediction second node
    std::size_t degree = 0;
    double avg_degree = 0.0;
    std::vector<std::string> class_list;    // classification only
};

// A prompt template is plain text with {placeholder} fields. The builtin
// templates compose a task block, a tool/format block, a search policy
// block, a worked example, and the per-node context block.
//
// Placeholders: {domain} {entity} {relation} {anchor_text} {anchor_text_b}
//               {degree} {avg_degree} {class_list}
struct PromptTemplate {
    std::string body;

    // three_mode additionally advertises mode=attribute in the flex schema;
    // the two-mode schema is the default.
    static PromptTemplate builtin(TaskKind task, ParsePolicy traversal, bool three_mode = false);
    static PromptTemplate load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    // Substitutes the spec into the body. Throws MissingField when a
    // placeholder cannot be resolved or the class list is required but empty.
    std::string render(const PromptSpec& spec) const;
};

// The flex-mode search schema, byte-exact as it appears in prompts.
inline constexpr const char* kFlexSchemaLine =
    "mode={local|global}, hop={1|2}, query={your query with keywords}";
inline constexpr const char* kFlexSchemaLineThreeMode =
    "mode={local|global|attribute}, hop={1|2}, query={your query with keywords}";

} // namespace gs
