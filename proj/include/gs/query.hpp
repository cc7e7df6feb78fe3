#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gs/error.hpp"

namespace gs {

enum class ScopeKind { Local, Global, Attribute };

struct Scope {
    ScopeKind kind = ScopeKind::Local;
    int hop = 1; // Local only

    bool operator==(const Scope& other) const {
        return kind == other.kind && (kind != ScopeKind::Local || hop == other.hop);
    }
};

enum class AnchorSelector { First, Second };

// Parsed form of a <search> block: a structural scope plus the semantic
// query text, with an anchor selector for link-prediction pairs.
struct StructuredQuery {
    Scope scope;
    std::string text;
    AnchorSelector anchor = AnchorSelector::First;

    std::string serialize() const;

    bool operator==(const StructuredQuery& other) const {
        return scope == other.scope && text == other.text && anchor == other.anchor;
    }
};

enum class ParsePolicy { Flex, Recursive };

struct FallbackEvent {
    std::string reason;
    std::string raw;
};

struct ParsedSearch {
    StructuredQuery query;
    std::optional<FallbackEvent> fallback;
};

// Flex policy parses `mode=`, optional `hop=`, `query=`, optional `anchor=`,
// accepting both the flat form `mode=local, hop=1, query=...` and the
// parenthesized form `mode=(local, hop=1), query=...`. Any malformed
// structural field falls back to local/hop=1 with a recorded event.
// Recursive policy treats the whole block as semantic text; the scope is
// assigned by traversal state, not parsed.
// Throws EmptyQueryText when no usable semantic text remains.
ParsedSearch parse_search_block(std::string_view raw, ParsePolicy policy);

enum class Phase { Think, Search, Information, Answer };

const char* phase_name(Phase p);

struct TaggedSpan {
    Phase phase = Phase::Think;
    std::string text;       // contents between the tags
    std::size_t begin = 0;  // byte range of the contents in the transcript
    std::size_t end = 0;
    bool partial = false;   // open tag without a matching close tag
};

// All well-formed spans in transcript order. An unclosed trailing tag is
// returned as a partial span. Text outside tags is not represented here;
// token accounting attributes it to the think phase.
std::vector<TaggedSpan> extract_spans(std::string_view transcript);

struct Answer {
    enum class Kind { ClassLabel, LinkYesNo };
    Kind kind = Kind::ClassLabel;
    std::string label; // resolved class name
    bool yes = false;  // link prediction

    bool operator==(const Answer& other) const {
        return kind == other.kind && label == other.label && yes == other.yes;
    }
};

struct AnswerSpec {
    Answer::Kind kind = Answer::Kind::ClassLabel;
    std::vector<std::string> class_list; // classification only
};

// Resolves the final answer span. Classification matches the class list
// case-insensitively, exact first and then unique substring; link prediction
// resolves to yes/no. Throws NoAnswerBlock / UnresolvableClass.
Answer parse_answer(std::string_view transcript, const AnswerSpec& spec);
Answer resolve_answer_text(std::string_view answer_text, const AnswerSpec& spec);

} // namespace gs
