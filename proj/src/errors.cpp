#include "swarmlearn/errors.hpp"

namespace swarmlearn {

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const UsageError*>(&e)) return exit_code::config;
    if (dynamic_cast<const NumericError*>(&e)) return exit_code::numeric;
    if (dynamic_cast<const CoordinationError*>(&e)) return exit_code::coordination;
    return exit_code::failure;
}

}  // namespace swarmlearn
