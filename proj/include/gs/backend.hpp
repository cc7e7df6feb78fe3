#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gs/error.hpp"

namespace gs {

struct GenerationParams {
    std::string model;
    double temperature = 0.7;
    int max_tokens = 8192;
    std::vector<std::string> stop{"</search>"};
};

enum class FinishReason { StopSequence, EndOfSequence };

struct Generation {
    std::string text;
    FinishReason finish = FinishReason::EndOfSequence;
    bool truncated = false; // generation cut by the backend's length limit
};

// A backend continues the transcript it is given. Implementations must be
// safe to drive sequentially from a single rollout; evaluation creates one
// backend per rollout via BackendFactory.
class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    virtual Generation generate(const std::string& transcript, const GenerationParams& params) = 0;
};

using BackendFactory = std::function<std::unique_ptr<ModelBackend>()>;

// Replays pre-scripted generations in order. Trace files are numbered
// blocks: a `--- step N ---` line followed by the raw generation text.
class ScriptedBackend final : public ModelBackend {
public:
    static ScriptedBackend from_file(const std::filesystem::path& path);
    static ScriptedBackend from_steps(std::vector<std::string> steps);

    Generation generate(const std::string& transcript, const GenerationParams& params) override;

    std::size_t steps_remaining() const { return steps_.size() - next_; }

private:
    std::vector<std::string> steps_;
    std::size_t next_ = 0;
};

// Chat-completion style HTTP backend. Sends the accumulated transcript as a
// single user message and expects choices[0].message.content plus a finish
// reason. Stop-sequence hits are detected from the finish reason and from an
// unclosed <search> tag when the server strips the stop string.
class RemoteBackend final : public ModelBackend {
public:
    struct Options {
        std::string endpoint; // e.g. http://host:port/v1/chat/completions
        std::string model;
        std::string api_key;
        int max_retries = 3;
        int retry_backoff_ms = 250; // doubles per attempt
        int timeout_seconds = 300;
    };

    // Reads GS_MODEL_ENDPOINT, GS_MODEL_NAME, GS_API_KEY.
    static Options from_env();

    explicit RemoteBackend(Options options);

    Generation generate(const std::string& transcript, const GenerationParams& params) override;

private:
    Options options_;
    std::string host_;
    std::string path_;
};

} // namespace gs
