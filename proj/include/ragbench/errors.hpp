#pragma once

#include <stdexcept>
#include <string>

namespace ragbench {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad or inconsistent configuration / input files.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Unknown id (chunk, bundle, provider, ...).
class LookupError : public Error {
public:
    using Error::Error;
};

// A synthesis strategy cannot be applied to the given document/seed;
// callers skip the item and move on.
class StrategyInapplicableError : public Error {
public:
    using Error::Error;
};

// Cross-document link similarity did not clear the minimum bound.
class LinkTooWeakError : public StrategyInapplicableError {
public:
    using StrategyInapplicableError::StrategyInapplicableError;
};

// Token budget too small to hold the required evidence chunks.
class BudgetError : public Error {
public:
    using Error::Error;
};

// ---- provider/transport errors -------------------------------------------

class LlmError : public Error {
public:
    LlmError(const std::string& msg, int status = 0) : Error(msg), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

// 401/403 or missing API key. Never retried.
class AuthError : public LlmError {
public:
    using LlmError::LlmError;
};

// HTTP 429. Retryable.
class RateLimitError : public LlmError {
public:
    using LlmError::LlmError;
};

// HTTP 5xx. Retryable.
class ServerError : public LlmError {
public:
    using LlmError::LlmError;
};

// Connection failure / timeout / TLS trouble. Retryable.
class TransportError : public LlmError {
public:
    using LlmError::LlmError;
};

// Response arrived but could not be interpreted. Never retried; the
// offending body is carried for the transcript log.
class MalformedResponseError : public LlmError {
public:
    MalformedResponseError(const std::string& msg, std::string body)
        : LlmError(msg), body_(std::move(body)) {}
    const std::string& body() const noexcept { return body_; }

private:
    std::string body_;
};

// A scripted mock received a request no rule matches.
class MockScriptError : public Error {
public:
    using Error::Error;
};

}  // namespace ragbench
