#pragma once

#include <stdexcept>
#include <string>

namespace nneg {

/// Bad parameters, malformed input files, out-of-range lookups. CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A quoted asset admits an arbitrage against the others. CLI exit code 3.
class ArbitrageError : public std::runtime_error {
public:
    explicit ArbitrageError(const std::string& what) : std::runtime_error(what) {}
};

/// An instance exceeds a hard capacity limit (e.g. full state enumeration).
class CapacityError : public ValidationError {
public:
    explicit CapacityError(const std::string& what) : ValidationError(what) {}
};

/// A constructed object violated its own invariants; indicates a bug upstream.
class InternalInconsistency : public std::logic_error {
public:
    explicit InternalInconsistency(const std::string& what) : std::logic_error(what) {}
};

}  // namespace nneg
