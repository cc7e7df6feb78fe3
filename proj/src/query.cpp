#include "gs/query.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "gs/text.hpp"

namespace gs {

namespace {

// Keys the flex grammar recognizes; a bare query value ends where the next
// `, key=` begins so trailing fields are not swallowed into the text.
constexpr std::array<std::string_view, 4> kFieldKeys{"mode", "hop", "query", "anchor"};

bool is_key_boundary(std::string_view s, std::size_t pos) {
    for (auto key : kFieldKeys) {
        if (s.compare(pos, key.size(), key) == 0) {
            std::size_t after = pos + key.size();
            while (after < s.size() && std::isspace(static_cast<unsigned char>(s[after]))) ++after;
            if (after < s.size() && s[after] == '=') return true;
        }
    }
    return false;
}

struct FieldHit {
    std::size_t key_pos = std::string_view::npos;
    std::size_t value_pos = std::string_view::npos; // just past the '='

    bool found() const { return key_pos != std::string_view::npos; }
};

// Finds `key` followed by '=' at a token boundary.
FieldHit find_field(std::string_view s, std::string_view key) {
    for (std::size_t pos = 0; pos + key.size() < s.size(); ++pos) {
        if (pos > 0 && (std::isalnum(static_cast<unsigned char>(s[pos - 1])) || s[pos - 1] == '_'))
            continue;
        if (s.compare(pos, key.size(), key) != 0) continue;
        std::size_t after = pos + key.size();
        while (after < s.size() && std::isspace(static_cast<unsigned char>(s[after]))) ++after;
        if (after < s.size() && s[after] == '=') return {pos, after + 1};
    }
    return {};
}

std::string_view value_until_comma(std::string_view s, std::size_t start) {
    std::size_t end = start;
    while (end < s.size() && s[end] != ',' && s[end] != ')' && s[end] != '\n') ++end;
    return trim(s.substr(start, end - start));
}

// Quoted ("..."/'...'), braced ({...}), or bare up to the next known field.
std::string_view query_value(std::string_view s, std::size_t start) {
    while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
    if (start >= s.size()) return {};
    char c = s[start];
    if (c == '"' || c == '\'') {
        std::size_t close = s.find(c, start + 1);
        if (close != std::string_view::npos) return s.substr(start + 1, close - start - 1);
        return trim(s.substr(start + 1));
    }
    if (c == '{') {
        std::size_t close = s.find('}', start + 1);
        if (close != std::string_view::npos) return trim(s.substr(start + 1, close - start - 1));
        return trim(s.substr(start + 1));
    }
    std::size_t end = start;
    while (end < s.size()) {
        if (s[end] == ',') {
            std::size_t next = end + 1;
            while (next < s.size() && std::isspace(static_cast<unsigned char>(s[next]))) ++next;
            if (next < s.size() && is_key_boundary(s, next)) break;
        }
        ++end;
    }
    return trim(s.substr(start, end - start));
}

std::optional<int> parse_int(std::string_view s) {
    if (s.empty()) return std::nullopt;
    int value = 0;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        value = value * 10 + (c - '0');
        if (value > 1000) return std::nullopt;
    }
    return value;
}

} // namespace

std::string StructuredQuery::serialize() const {
    std::string out = "mode=";
    switch (scope.kind) {
    case ScopeKind::Local:
        out += "local, hop=" + std::to_string(scope.hop);
        break;
    case ScopeKind::Global:
        out += "global";
        break;
    case ScopeKind::Attribute:
        out += "attribute";
        break;
    }
    out += ", query=\"" + text + "\"";
    if (anchor == AnchorSelector::Second) out += ", anchor=b";
    return out;
}

ParsedSearch parse_search_block(std::string_view raw, ParsePolicy policy) {
    std::string_view body = trim(raw);

    if (policy == ParsePolicy::Recursive) {
        if (body.empty() || tokenize_text(body).empty()) {
            raise(ErrorKind::EmptyQueryText, "search block has no usable semantic text");
        }
        ParsedSearch parsed;
        parsed.query.text = std::string(body);
        return parsed;
    }

    ParsedSearch parsed;
    std::optional<std::string> mode_word;
    std::optional<int> hop;
    bool hop_malformed = false;

    // Structural fields live outside the query text, so once the query value
    // is located only the surrounding region is scanned for them. The first
    // query= field wins; later ones are ignored.
    FieldHit query_hit = find_field(body, "query");
    std::string_view query_text;
    std::string_view prefix = body;
    std::string_view suffix;
    if (query_hit.found()) {
        query_text = query_value(body, query_hit.value_pos);
        prefix = body.substr(0, query_hit.key_pos);
        if (!query_text.empty()) {
            std::size_t value_end =
                static_cast<std::size_t>(query_text.data() + query_text.size() - body.data());
            if (value_end < body.size()) suffix = body.substr(value_end);
        }
    }

    FieldHit mode_hit = find_field(prefix, "mode");
    if (mode_hit.found()) {
        std::size_t v = mode_hit.value_pos;
        while (v < prefix.size() && std::isspace(static_cast<unsigned char>(prefix[v]))) ++v;
        if (v < prefix.size() && prefix[v] == '(') {
            // parenthesized: mode=(local, hop=1)
            std::size_t close = prefix.find(')', v + 1);
            std::string_view group =
                prefix.substr(v + 1, close == std::string_view::npos ? std::string_view::npos
                                                                     : close - v - 1);
            mode_word = to_lower(value_until_comma(group, 0));
            FieldHit group_hop = find_field(group, "hop");
            if (group_hop.found()) {
                hop = parse_int(value_until_comma(group, group_hop.value_pos));
                hop_malformed = !hop.has_value();
            }
        } else {
            mode_word = to_lower(value_until_comma(prefix, mode_hit.value_pos));
        }
    }
    if (!hop.has_value() && !hop_malformed) {
        FieldHit hop_hit = find_field(prefix, "hop");
        if (hop_hit.found()) {
            hop = parse_int(value_until_comma(prefix, hop_hit.value_pos));
            hop_malformed = !hop.has_value();
        }
    }

    if (!query_hit.found() && !mode_hit.found()) {
        // No recognized structure at all: salvage the whole block as text.
        query_text = body;
    }
    if (query_text.empty() || tokenize_text(query_text).empty()) {
        raise(ErrorKind::EmptyQueryText, "search block has no usable semantic text");
    }
    parsed.query.text = std::string(query_text);

    for (std::string_view region : {prefix, suffix}) {
        FieldHit anchor_hit = find_field(region, "anchor");
        if (anchor_hit.found()) {
            std::string sel = to_lower(value_until_comma(region, anchor_hit.value_pos));
            if (sel == "b" || sel == "second") parsed.query.anchor = AnchorSelector::Second;
        }
    }

    auto fallback = [&](const std::string& reason) {
        parsed.query.scope = Scope{ScopeKind::Local, 1};
        parsed.fallback = FallbackEvent{reason, std::string(body)};
    };

    if (!mode_word) {
        fallback("missing mode field");
    } else if (*mode_word == "local") {
        int h = hop.value_or(1);
        if (hop_malformed) {
            fallback("malformed hop value");
        } else if (h == 1 || h == 2) {
            parsed.query.scope = Scope{ScopeKind::Local, h};
        } else {
            fallback("hop out of range: " + std::to_string(h));
        }
    } else if (*mode_word == "global") {
        parsed.query.scope = Scope{ScopeKind::Global, 1};
    } else if (*mode_word == "attribute") {
        parsed.query.scope = Scope{ScopeKind::Attribute, 1};
    } else {
        fallback("unknown mode: " + *mode_word);
    }
    return parsed;
}

const char* phase_name(Phase p) {
    switch (p) {
    case Phase::Think: return "think";
    case Phase::Search: return "search";
    case Phase::Information: return "information";
    case Phase::Answer: return "answer";
    }
    return "?";
}

namespace {

struct TagSpec {
    Phase phase;
    std::string_view open;
    std::string_view close;
};

constexpr std::array<TagSpec, 4> kTags{{
    {Phase::Think, "<think>", "</think>"},
    {Phase::Search, "<search>", "</search>"},
    {Phase::Information, "<information>", "</information>"},
    {Phase::Answer, "<answer>", "</answer>"},
}};

} // namespace

std::vector<TaggedSpan> extract_spans(std::string_view transcript) {
    std::vector<TaggedSpan> spans;
    std::size_t cursor = 0;
    while (cursor < transcript.size()) {
        std::size_t best = std::string_view::npos;
        const TagSpec* best_tag = nullptr;
        for (const auto& tag : kTags) {
            std::size_t at = transcript.find(tag.open, cursor);
            if (at < best) {
                best = at;
                best_tag = &tag;
            }
        }
        if (!best_tag) break;
        std::size_t content_begin = best + best_tag->open.size();
        std::size_t close_at = transcript.find(best_tag->close, content_begin);
        TaggedSpan span;
        span.phase = best_tag->phase;
        span.begin = content_begin;
        if (close_at == std::string_view::npos) {
            span.end = transcript.size();
            span.partial = true;
            span.text = std::string(transcript.substr(content_begin));
            spans.push_back(std::move(span));
            break;
        }
        span.end = close_at;
        span.text = std::string(transcript.substr(content_begin, close_at - content_begin));
        spans.push_back(std::move(span));
        cursor = close_at + best_tag->close.size();
    }
    return spans;
}

namespace {

std::string normalize_answer(std::string_view s) {
    return to_lower(trim(s));
}

} // namespace

Answer resolve_answer_text(std::string_view answer_text, const AnswerSpec& spec) {
    std::string norm = normalize_answer(answer_text);

    if (spec.kind == Answer::Kind::LinkYesNo) {
        Answer a;
        a.kind = Answer::Kind::LinkYesNo;
        if (norm == "yes" || norm == "no") {
            a.yes = norm == "yes";
            return a;
        }
        auto tokens = tokenize_text(norm);
        bool has_yes = std::find(tokens.begin(), tokens.end(), "yes") != tokens.end();
        bool has_no = std::find(tokens.begin(), tokens.end(), "no") != tokens.end();
        if (has_yes == has_no) {
            raise(ErrorKind::UnresolvableClass,
                  "answer is not a yes/no: \"" + std::string(trim(answer_text)) + "\"");
        }
        a.yes = has_yes;
        return a;
    }

    Answer a;
    a.kind = Answer::Kind::ClassLabel;
    for (const auto& cls : spec.class_list) {
        if (normalize_answer(cls) == norm) {
            a.label = cls;
            return a;
        }
    }
    // Substring rescue, in either direction, required to be unique.
    const std::string* match = nullptr;
    for (const auto& cls : spec.class_list) {
        std::string cnorm = normalize_answer(cls);
        if (cnorm.empty()) continue;
        if (norm.find(cnorm) != std::string::npos || cnorm.find(norm) != std::string::npos) {
            if (match) {
                raise(ErrorKind::UnresolvableClass, "answer \"" + std::string(trim(answer_text)) +
                                                        "\" matches multiple classes");
            }
            match = &cls;
        }
    }
    if (!match) {
        raise(ErrorKind::UnresolvableClass,
              "answer \"" + std::string(trim(answer_text)) + "\" matches no class");
    }
    a.label = *match;
    return a;
}

Answer parse_answer(std::string_view transcript, const AnswerSpec& spec) {
    auto spans = extract_spans(transcript);
    const TaggedSpan* last_answer = nullptr;
    for (const auto& span : spans) {
        if (span.phase == Phase::Answer && !span.partial) last_answer = &span;
    }
    if (!last_answer) raise(ErrorKind::NoAnswerBlock, "transcript has no closed answer block");
    return resolve_answer_text(last_answer->text, spec);
}

} // namespace gs
