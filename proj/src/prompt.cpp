#include "gs/prompt.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gs/text.hpp"

namespace gs {

namespace {

std::string classification_task_block() {
    return "You are a reasoning assistant for node classification on a {domain} {entity} graph. "
           "Your goal is to select the most likely category for the target node from the "
           "provided list.\n";
}

std::string link_task_block() {
    return "You are a reasoning assistant for link prediction on a {domain} {entity} graph. "
           "Your goal is to decide whether the two target nodes are connected by an edge.\n";
}

std::string flex_format_block(bool three_mode, TaskKind task) {
    std::string out = "\nTools:\n";
    out += "- To perform a search, use this schema exactly: <search> ";
    out += three_mode ? kFlexSchemaLineThreeMode : kFlexSchemaLine;
    out += " </search>\n";
    out += "  - mode=local: recall neighbors within 1-2 hops of the target node and you must "
           "specify hop=1 or hop=2\n";
    out += "  - mode=global: recall from a global nodes pool (e.g., PageRank)\n";
    if (three_mode) {
        out += "  - mode=attribute: recall the nodes most similar to the target node by "
               "attribute text, ignoring the graph structure\n";
    }
    if (task == TaskKind::LinkPrediction) {
        out += "  - optionally add anchor=a or anchor=b to choose which target node anchors "
               "the search (default a)\n";
    }
    out += "- The graph retriever considers both the graph structure and the semantic "
           "similarity of your query, and returns the most relevant data inside "
           "<information> ... </information>.\n";
    return out;
}

std::string recursive_format_block() {
    return "\nTools:\n"
           "- To perform a search, write <search> your query here </search>.\n"
           "- The graph retriever considers both the graph structure and the semantic "
           "similarity of your query, and returns the most relevant data inside "
           "<information> ... </information>.\n"
           "- You can repeat the search process multiple times if necessary.\n";
}

std::string reasoning_protocol_block(bool flex) {
    std::string out = "\nReasoning protocol:\n";
    if (flex) {
        out += "- Begin with <think>...</think> to assess if attributes and graph stats are "
               "sufficient.\n";
    }
    out += "- Whenever you receive new information, first reason inside <think> ... </think>.\n"
           "- If no further information is needed, output only your final choice inside "
           "<answer> ... </answer> (no extra explanation).\n";
    return out;
}

std::string decision_policy_block() {
    return "\nDecision Policy:\n"
           "- Rich attributes → predict after one search.\n"
           "- Weak/incomplete → mode=local, hop=1; if ambiguous and degree moderate/high → "
           "mode=local, hop=2.\n"
           "- Very low degree or conflicting neighbors → mode=global.\n";
}

std::string example_block(TaskKind task) {
    std::string answer = task == TaskKind::NodeClassification ? "Movies" : "yes";
    return "\nExample:\nQuestion: ...\nAssistant:\n"
           "<think> ...your reasoning... </think>\n"
           "<search> ...your query... </search>\n"
           "<information> ...retriever results... </information>\n"
           "<think> ...reasoning with the new information... </think>\n"
           "<answer>" +
           answer + "</answer>\n";
}

std::string context_block(TaskKind task) {
    if (task == TaskKind::NodeClassification) {
        return "\nUse the following information for the node classification task:\n"
               "- The target {entity}'s information: {anchor_text}\n"
               "- The domain knowledge: Each node represents a {entity} and connected to other "
               "{entity}s through {relation}. The degree of target node is {degree}, while the "
               "average degree of the dataset is {avg_degree}.\n"
               "- The category list: {class_list}\n";
    }
    return "\nUse the following information for the link prediction task:\n"
           "- The first target {entity}'s information: {anchor_text}\n"
           "- The second target {entity}'s information: {anchor_text_b}\n"
           "- The domain knowledge: Each node represents a {entity} and connected to other "
           "{entity}s through {relation}. The degree of the first target node is {degree}, "
           "while the average degree of the dataset is {avg_degree}.\n"
           "- Answer \"yes\" if an edge likely exists between the two target nodes, "
           "otherwise \"no\".\n";
}

} // namespace

PromptTemplate PromptTemplate::builtin(TaskKind task, ParsePolicy traversal, bool three_mode) {
    PromptTemplate t;
    t.body = task == TaskKind::NodeClassification ? classification_task_block() : link_task_block();
    if (traversal == ParsePolicy::Flex) {
        t.body += flex_format_block(three_mode, task);
        t.body += reasoning_protocol_block(true);
        t.body += decision_policy_block();
    } else {
        t.body += recursive_format_block();
        t.body += reasoning_protocol_block(false);
    }
    t.body += example_block(task);
    t.body += context_block(task);
    return t;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::ConfigInvalid, "cannot open template " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return PromptTemplate{ss.str()};
}

void PromptTemplate::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::ConfigInvalid, "cannot write template " + path.string());
    out << body;
}

namespace {

bool is_placeholder_name(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::islower(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    return true;
}

} // namespace

std::string PromptTemplate::render(const PromptSpec& spec) const {
    bool needs_classes = body.find("{class_list}") != std::string::npos;
    if (needs_classes && spec.class_list.empty()) {
        raise(ErrorKind::MissingField, "class_list is empty but the template requires it");
    }

    std::string class_list;
    for (std::size_t i = 0; i < spec.class_list.size(); ++i) {
        if (i > 0) class_list += "; ";
        class_list += spec.class_list[i];
    }

    char degree_buf[32], avg_buf[32];
    std::snprintf(degree_buf, sizeof(degree_buf), "%zu", spec.degree);
    std::snprintf(avg_buf, sizeof(avg_buf), "%.2f", spec.avg_degree);

    auto lookup = [&](std::string_view name) -> const std::string* {
        static thread_local std::string scratch;
        if (name == "domain") return &spec.domain;
        if (name == "entity") return &spec.entity;
        if (name == "relation") return &spec.relation;
        if (name == "anchor_text") return &spec.anchor_text;
        if (name == "anchor_text_b") return &spec.anchor_text_b;
        if (name == "degree") { scratch = degree_buf; return &scratch; }
        if (name == "avg_degree") { scratch = avg_buf; return &scratch; }
        if (name == "class_list") { scratch = class_list; return &scratch; }
        return nullptr;
    };

    std::string out;
    out.reserve(body.size() + spec.anchor_text.size());
    std::size_t pos = 0;
    while (pos < body.size()) {
        std::size_t open = body.find('{', pos);
        if (open == std::string::npos) {
            out.append(body, pos, std::string::npos);
            break;
        }
        out.append(body, pos, open - pos);
        std::size_t close = body.find('}', open + 1);
        if (close == std::string::npos) {
            out.append(body, open, std::string::npos);
            break;
        }
        std::string_view name{body.data() + open + 1, close - open - 1};
        if (const std::string* value = lookup(name)) {
            if (value->empty()) {
                raise(ErrorKind::MissingField, "placeholder {" + std::string(name) + "} is empty");
            }
            out += *value;
            pos = close + 1;
        } else if (is_placeholder_name(name)) {
            raise(ErrorKind::MissingField, "unknown placeholder {" + std::string(name) + "}");
        } else {
            // literal braces, e.g. the search schema line
            out.push_back('{');
            pos = open + 1;
        }
    }
    return out;
}

} // namespace gs
