// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fastric/agents.hpp"

namespace fastric {

enum class PromptPlacement { System, FirstUser };

/// Chat-completion style endpoint. Loaded from a JSON document whose keys
/// match the field names; only `base_url` and `model` are required.
struct ChatEndpointConfig {
    std::string base_url;                 // e.g. "http://127.0.0.1:8080"
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env = "FASTRIC_API_KEY";
    double timeout_seconds = 60.0;
    int max_retries = 2;
    int backoff_ms = 500;                 // first retry delay, doubled per attempt
    std::string response_pointer = "/choices/0/message/content";
    PromptPlacement placement = PromptPlacement::System;
    std::string options_json = "{}";      // object merged into every request (temperature etc.)
    bool single_session = false;

    /// Throws Error(InvalidArgument).
    void validate() const;
};

ChatEndpointConfig parse_endpoint_config(std::string_view json);
ChatEndpointConfig load_endpoint_config(const std::string& path);

/// Request body: {"model": ..., "messages": [{"role", "content"}...], ...options}.
std::string build_chat_request(const ChatEndpointConfig& config, const RenderedPrompt& prompt,
                               const std::vector<Turn>& history);

/// Extracts the assistant text at `pointer`. Throws
/// SessionError(MalformedResponse).
std::string parse_chat_response(std::string_view body, const std::string& pointer);

/// One round trip with retries. Throws SessionError with code
/// MissingCredential, TransportFailure, Timeout or MalformedResponse.
std::string chat_endpoint_tutor_step(const ChatEndpointConfig& config, const RenderedPrompt& prompt,
                                     const std::vector<Turn>& history);

/// Tutor backed by a live endpoint. The next state is the one the protocol
/// prescribes for the conversation so far.
class EndpointTutor final : public TutorAgent {
public:
    explicit EndpointTutor(ChatEndpointConfig config);

    std::string id() const override { return "endpoint:" + config_.model; }
    bool concurrency_safe() const override { return !config_.single_session; }
    TutorReply step(const TutorInput& in) const override;
    const ChatEndpointConfig& config() const { return config_; }

private:
    ChatEndpointConfig config_;
};

} // namespace fastric
