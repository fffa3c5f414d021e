#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace awi {

// Thrown when an operation's preconditions are violated (bad sizes, ranges,
// mismatched dimensions). Maps to exit code 2 in the CLI.
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Line-addressed failure while reading a JSONL/JSON file.
struct ParseError : std::runtime_error {
    std::size_t line;
    ParseError(std::size_t line_, const std::string& what_)
        : std::runtime_error("line " + std::to_string(line_) + ": " + what_),
          line(line_) {}
};

// Descriptor capacity exceeded (more objects/bins than the fixed layout).
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// IK target outside the arm's reachable set.
struct UnreachableError : std::runtime_error {
    double closest_distance;  // meters the best pose still misses by
    UnreachableError(const std::string& what_, double closest)
        : std::runtime_error(what_), closest_distance(closest) {}
};

// Iterative solver ran out of iterations.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Depth-image localization found no above-floor blob.
struct NoObjectError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Localization found only blobs below the minimum pixel size.
struct NoiseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace awi
