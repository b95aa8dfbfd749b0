// SPDX-License-Identifier: Apache-2.0

#include "fastric/endpoint.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "fastric/detail/text.hpp"

namespace fastric {

using nlohmann::json;

void ChatEndpointConfig::validate() const
{
    if (base_url.empty())
        throw Error(ErrorCode::InvalidArgument, "endpoint base_url is empty");
    if (model.empty())
        throw Error(ErrorCode::InvalidArgument, "endpoint model is empty");
    if (!(timeout_seconds > 0))
        throw Error(ErrorCode::InvalidArgument, "endpoint timeout must be positive");
    if (max_retries < 0 || backoff_ms < 0)
        throw Error(ErrorCode::InvalidArgument, "endpoint retries and backoff must be non-negative");
    if (api_key_env.empty())
        throw Error(ErrorCode::InvalidArgument, "endpoint api_key_env is empty");
    if (!json::accept(options_json) || !json::parse(options_json).is_object())
        throw Error(ErrorCode::InvalidArgument, "endpoint options must be a JSON object");
}

ChatEndpointConfig parse_endpoint_config(std::string_view text)
{
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw Error(ErrorCode::InvalidArgument, "endpoint config is not a JSON object");
    ChatEndpointConfig c;
    try {
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            const std::string& k = it.key();
            const json& v = it.value();
            if (k == "base_url")
                c.base_url = v.get<std::string>();
            else if (k == "path")
                c.path = v.get<std::string>();
            else if (k == "model")
                c.model = v.get<std::string>();
            else if (k == "api_key_env")
                c.api_key_env = v.get<std::string>();
            else if (k == "timeout_seconds")
                c.timeout_seconds = v.get<double>();
            else if (k == "max_retries")
                c.max_retries = v.get<int>();
            else if (k == "backoff_ms")
                c.backoff_ms = v.get<int>();
            else if (k == "response_pointer")
                c.response_pointer = v.get<std::string>();
            else if (k == "placement") {
                auto p = v.get<std::string>();
                if (p == "system")
                    c.placement = PromptPlacement::System;
                else if (p == "first_user")
                    c.placement = PromptPlacement::FirstUser;
                else
                    throw Error(ErrorCode::InvalidArgument, "placement must be system or first_user");
            } else if (k == "options")
                c.options_json = v.dump();
            else if (k == "single_session")
                c.single_session = v.get<bool>();
            else
                throw Error(ErrorCode::InvalidArgument, "unknown endpoint config key '" + k + "'");
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("endpoint config: ") + e.what());
    }
    c.validate();
    return c;
}

ChatEndpointConfig load_endpoint_config(const std::string& path)
{
    return parse_endpoint_config(detail::read_file(path));
}

std::string build_chat_request(const ChatEndpointConfig& config, const RenderedPrompt& prompt,
                               const std::vector<Turn>& history)
{
    json body = json::parse(config.options_json);
    json messages = json::array();
    messages.push_back({{"role", config.placement == PromptPlacement::System ? "system" : "user"},
                        {"content", prompt.text}});
    for (const auto& t : history)
        messages.push_back({{"role", t.actor == Actor::Executor ? "assistant" : "user"}, {"content", t.text}});
    body["model"] = config.model;
    body["messages"] = std::move(messages);
    return body.dump();
}

std::string parse_chat_response(std::string_view body, const std::string& pointer)
{
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded())
        throw SessionError(ErrorCode::MalformedResponse, "response is not JSON");
    try {
        const json& v = doc.at(json::json_pointer(pointer));
        if (!v.is_string())
            throw SessionError(ErrorCode::MalformedResponse, "response field " + pointer + " is not a string");
        return v.get<std::string>();
    } catch (const json::exception&) {
        throw SessionError(ErrorCode::MalformedResponse, "response has no field " + pointer);
    }
}

std::string chat_endpoint_tutor_step(const ChatEndpointConfig& config, const RenderedPrompt& prompt,
                                     const std::vector<Turn>& history)
{
    const char* key = std::getenv(config.api_key_env.c_str());
    if (!key || !*key)
        throw SessionError(ErrorCode::MissingCredential, "environment variable " + config.api_key_env + " is not set");

    httplib::Client client(config.base_url);
    if (!client.is_valid())
        throw SessionError(ErrorCode::TransportFailure, "cannot use endpoint URL " + config.base_url);
    auto secs = static_cast<time_t>(config.timeout_seconds);
    auto usecs = static_cast<time_t>((config.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    client.set_bearer_token_auth(key);

    const std::string body = build_chat_request(config, prompt, history);
    ErrorCode last_code = ErrorCode::TransportFailure;
    std::string last_message;
    int attempts = 0;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        ++attempts;
        if (attempt > 0 && config.backoff_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long long>(config.backoff_ms)
                                                                  << (attempt - 1)));
        auto res = client.Post(config.path, body, "application/json");
        if (!res) {
            auto err = res.error();
            last_code = err == httplib::Error::Read || err == httplib::Error::Write ||
                                err == httplib::Error::ConnectionTimeout
                            ? ErrorCode::Timeout
                            : ErrorCode::TransportFailure;
            last_message = "request failed: " + httplib::to_string(err);
            continue;
        }
        if (res->status >= 200 && res->status < 300)
            return parse_chat_response(res->body, config.response_pointer);
        last_code = ErrorCode::TransportFailure;
        last_message = "endpoint returned status " + std::to_string(res->status);
        if (res->status < 500 && res->status != 408 && res->status != 429)
            break;
    }
    throw SessionError(last_code, last_message + " after " + std::to_string(attempts) + " attempt(s)");
}

EndpointTutor::EndpointTutor(ChatEndpointConfig config) : config_(std::move(config))
{
    config_.validate();
}

TutorReply EndpointTutor::step(const TutorInput& in) const
{
    std::string text = chat_endpoint_tutor_step(config_, in.prompt, in.history);
    StateId next = oracle_tutor_step(in.protocol, in.history, in.state, in.seed).next_state;
    return {std::move(text), next};
}

} // namespace fastric
