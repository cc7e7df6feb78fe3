#include "gs/backend.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "gs/text.hpp"

namespace gs {

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::ConfigInvalid, "cannot open script " + path.string());

    static const std::regex delim(R"(^--- step [0-9]+ ---$)");
    std::vector<std::string> steps;
    std::string line, current;
    bool in_step = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (std::regex_match(line, delim)) {
            if (in_step) steps.push_back(current);
            current.clear();
            in_step = true;
            continue;
        }
        if (!in_step) continue; // preamble before the first delimiter
        if (!current.empty()) current += "\n";
        current += line;
    }
    if (in_step) steps.push_back(current);
    if (steps.empty()) raise(ErrorKind::ConfigInvalid, path.string() + " contains no steps");
    return from_steps(std::move(steps));
}

ScriptedBackend ScriptedBackend::from_steps(std::vector<std::string> steps) {
    ScriptedBackend b;
    b.steps_ = std::move(steps);
    return b;
}

Generation ScriptedBackend::generate(const std::string&, const GenerationParams& params) {
    if (next_ >= steps_.size()) {
        raise(ErrorKind::ScriptExhausted,
              "script has " + std::to_string(steps_.size()) + " steps but more were requested");
    }
    Generation gen;
    gen.text = steps_[next_++];
    gen.finish = FinishReason::EndOfSequence;
    std::string_view tail = trim(gen.text);
    for (const auto& stop : params.stop) {
        if (tail.size() >= stop.size() && tail.substr(tail.size() - stop.size()) == stop) {
            gen.finish = FinishReason::StopSequence;
            break;
        }
    }
    return gen;
}

RemoteBackend::Options RemoteBackend::from_env() {
    Options opt;
    if (const char* e = std::getenv("GS_MODEL_ENDPOINT")) opt.endpoint = e;
    if (const char* m = std::getenv("GS_MODEL_NAME")) opt.model = m;
    if (const char* k = std::getenv("GS_API_KEY")) opt.api_key = k;
    if (opt.endpoint.empty()) {
        raise(ErrorKind::ConfigInvalid, "GS_MODEL_ENDPOINT is not set");
    }
    return opt;
}

RemoteBackend::RemoteBackend(Options options) : options_(std::move(options)) {
    // split scheme://host[:port] from the request path
    std::size_t scheme = options_.endpoint.find("://");
    if (scheme == std::string::npos) {
        raise(ErrorKind::ConfigInvalid, "endpoint must include a scheme: " + options_.endpoint);
    }
    std::size_t path_at = options_.endpoint.find('/', scheme + 3);
    if (path_at == std::string::npos) {
        host_ = options_.endpoint;
        path_ = "/v1/chat/completions";
    } else {
        host_ = options_.endpoint.substr(0, path_at);
        path_ = options_.endpoint.substr(path_at);
    }
}

Generation RemoteBackend::generate(const std::string& transcript,
                                   const GenerationParams& params) {
    nlohmann::json request{
        {"model", params.model.empty() ? options_.model : params.model},
        {"messages", nlohmann::json::array({nlohmann::json{
                        {"role", "user"}, {"content", transcript}}})},
        {"temperature", params.temperature},
        {"max_tokens", params.max_tokens},
        {"stop", params.stop},
    };
    const std::string body = request.dump();

    std::string last_error;
    for (int attempt = 0; attempt < options_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(options_.retry_backoff_ms << (attempt - 1)));
        }
        httplib::Client client(host_);
        client.set_read_timeout(options_.timeout_seconds, 0);
        client.set_connection_timeout(10, 0);
        httplib::Headers headers;
        if (!options_.api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + options_.api_key);
        }
        auto res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue; // retry
        }
        if (res->status >= 500) {
            last_error = "server error: HTTP " + std::to_string(res->status);
            continue; // retry
        }
        if (res->status != 200) {
            // client-side rejection / refusal: not retried
            raise(ErrorKind::BackendFailure,
                  "HTTP " + std::to_string(res->status) + ": " + res->body);
        }

        nlohmann::json reply;
        try {
            reply = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorKind::BackendFailure, std::string("unparseable response: ") + e.what());
        }
        if (!reply.contains("choices") || reply["choices"].empty()) {
            raise(ErrorKind::BackendFailure, "response has no choices");
        }
        const auto& choice = reply["choices"][0];
        Generation gen;
        if (choice.contains("message") && choice["message"].contains("content")) {
            gen.text = choice["message"]["content"].get<std::string>();
        } else if (choice.contains("text")) {
            gen.text = choice["text"].get<std::string>();
        } else {
            raise(ErrorKind::BackendFailure, "response choice has no content");
        }
        std::string finish =
            choice.value("finish_reason", std::string("stop"));

        gen.finish = FinishReason::EndOfSequence;
        gen.truncated = finish == "length";
        std::string_view tail = trim(gen.text);
        for (const auto& stop : params.stop) {
            if (tail.size() >= stop.size() && tail.substr(tail.size() - stop.size()) == stop) {
                gen.finish = FinishReason::StopSequence;
                break;
            }
        }
        if (gen.finish == FinishReason::EndOfSequence && finish == "stop") {
            // Servers that strip the stop string leave an unclosed <search>.
            std::size_t open = gen.text.rfind("<search>");
            if (open != std::string::npos &&
                gen.text.find("</search>", open) == std::string::npos) {
                gen.text += "</search>";
                gen.finish = FinishReason::StopSequence;
            }
        }
        return gen;
    }
    raise(ErrorKind::BackendFailure, "request failed after " +
                                         std::to_string(options_.max_retries) +
                                         " attempts; last: " + last_error);
}

} // namespace gs
