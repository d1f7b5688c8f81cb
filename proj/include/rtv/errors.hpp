#pragma once

#include <stdexcept>
#include <string>

namespace rtv {

/// Base error carrying a short machine-readable tag.
class Error : public std::runtime_error {
public:
    Error(std::string tag, const std::string& what)
        : std::runtime_error(what), tag_(std::move(tag)) {}
    const std::string& tag() const { return tag_; }

private:
    std::string tag_;
};

/// Invalid argument or evaluation outside the domain of an operation.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what, std::string tag = "domain")
        : Error(std::move(tag), what) {}
};

/// A numerical procedure failed (non-convergence, loss of rank, coercivity).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what, std::string tag = "numerical")
        : Error(std::move(tag), what) {}
};

/// Malformed or inconsistent configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what, std::string tag = "config")
        : Error(std::move(tag), what) {}
};

}  // namespace rtv
