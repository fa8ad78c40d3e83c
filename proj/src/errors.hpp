#pragma once

#include <stdexcept>
#include <string>

namespace nvm {

// Invalid argument / precondition violation. Messages name the offending field.
struct ParamError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Instance exceeds a documented size cap.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numeric routine failed to reach its accuracy target.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input text / unreadable file.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ParamError(msg);
}

}  // namespace nvm
