#pragma once

#include <stdexcept>
#include <string>

namespace painbench {

// Every pipeline failure carries a stable machine-readable code
// (e.g. "LabelContradiction") so the CLI can report a meaningful
// class of error and tests can match on it.
class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& message) {
    throw PipelineError(code, message);
}

}  // namespace painbench
