#pragma once

#include <stdexcept>
#include <string>

namespace swarmlearn {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller passed arguments that violate an operation's preconditions.
class UsageError : public Error {
public:
    using Error::Error;
};

// Input outside the mathematical domain (NaN/Inf coordinates, negative distance).
class DomainError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Non-finite gradient, velocity or position during training.
class NumericError : public Error {
public:
    using Error::Error;
};

// Barrier timeout or a missing peer snapshot.
class CoordinationError : public Error {
public:
    using Error::Error;
};

// Stored payload does not match its recorded checksum.
class IntegrityError : public Error {
public:
    using Error::Error;
};

// A (particle, epoch) cell was published twice.
class ConflictError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class PublishError : public Error {
public:
    using Error::Error;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int config = 2;
inline constexpr int numeric = 3;
inline constexpr int coordination = 4;
}  // namespace exit_code

int exit_code_for(const std::exception& e) noexcept;

}  // namespace swarmlearn
