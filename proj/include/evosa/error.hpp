#ifndef EVOSA_ERROR_HPP
#define EVOSA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace evosa {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An edit or traversal would produce (or found) a graph that breaks the DAG rules.
class StructuralError : public Error {
public:
    using Error::Error;
};

// An operation is unknown or not allowed at the requested position.
class ConstraintError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::string const& what, std::string location)
        : Error(location.empty() ? what : location + ": " + what)
        , location_(std::move(location))
    {
    }

    [[nodiscard]] auto Location() const -> std::string const& { return location_; }

private:
    std::string location_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

class EvolutionError : public Error {
public:
    using Error::Error;
};

} // namespace evosa

#endif
