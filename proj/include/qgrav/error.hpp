#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qgrav {

// Base class for all engine errors. Subclasses carry structured payloads so
// callers (and the CLI) can map them to diagnostics and exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised by parse(): byte offset plus the token set the parser would accept.
class SyntaxError : public Error {
public:
    SyntaxError(std::string msg, std::size_t offset, std::vector<std::string> expected)
        : Error(std::move(msg)), offset(offset), expected(std::move(expected)) {}
    std::size_t offset;
    std::vector<std::string> expected;
};

class UnknownFunctionError : public SyntaxError {
public:
    UnknownFunctionError(const std::string& name, std::size_t offset)
        : SyntaxError("unknown function '" + name + "'", offset, {}), name(name) {}
    std::string name;
};

// Division by zero (or ln of an exact zero) discovered while building or
// evaluating an expression. Carries a rendering of the offending subtree.
class PoleError : public Error {
public:
    PoleError(std::string msg, std::string subtree)
        : Error(std::move(msg)), subtree(std::move(subtree)) {}
    std::string subtree;
};

class UnboundSymbolError : public Error {
public:
    explicit UnboundSymbolError(std::vector<std::string> names)
        : Error(make_message(names)), names(std::move(names)) {}
    std::vector<std::string> names;

private:
    static std::string make_message(const std::vector<std::string>& names) {
        std::string s = "unbound symbol(s):";
        for (const auto& n : names) s += " " + n;
        return s;
    }
};

class BindingError : public Error {
public:
    explicit BindingError(const std::string& msg) : Error(msg) {}
};

class DegenerateMetricError : public Error {
public:
    DegenerateMetricError(const std::string& msg, int rank)
        : Error(msg), rank(rank) {}
    int rank;
};

class NoRadialComponentError : public Error {
public:
    NoRadialComponentError() : Error("metric has no radial component (g_rr is identically zero)") {}
};

class NonConvergentError : public Error {
public:
    NonConvergentError(const std::string& msg, double best_value, double estimate)
        : Error(msg), best_value(best_value), estimate(estimate) {}
    double best_value;
    double estimate;
};

// equivalent() hit poles in more than half of its sample points.
class InconclusiveError : public Error {
public:
    explicit InconclusiveError(const std::string& msg) : Error(msg) {}
};

class SpecError : public Error {
public:
    explicit SpecError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace qgrav
