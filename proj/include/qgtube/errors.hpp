#pragma once

#include <stdexcept>
#include <string>

namespace qgtube {

// Base class for every error raised by the library. `numerical()` separates
// tolerance/convergence failures from bad input so the CLI can pick an exit
// code without a catalogue of types.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, bool numerical = false)
        : std::runtime_error(what), numerical_(numerical) {}
    bool numerical() const noexcept { return numerical_; }

private:
    bool numerical_;
};

struct ParameterError : Error {
    explicit ParameterError(const std::string& w) : Error("parameter error: " + w) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& w) : Error("validation error: " + w) {}
};

/// lambda lies (numerically) in the Dirichlet spectrum of an edge.
struct DirichletSpectrumError : Error {
    DirichletSpectrumError(const std::string& w, double lambda)
        : Error("Dirichlet-spectrum error: " + w), lambda(lambda) {}
    double lambda;
};

struct SingularEdgeError : Error {
    explicit SingularEdgeError(const std::string& w) : Error("singular edge: " + w) {}
};

struct UnsupportedPointError : Error {
    UnsupportedPointError(const std::string& w, double lambda)
        : Error("unsupported point: " + w), lambda(lambda) {}
    double lambda;
};

struct DegenerateStencilError : Error {
    DegenerateStencilError(const std::string& w, double lambda)
        : Error("degenerate stencil: " + w, true), lambda(lambda) {}
    double lambda;
};

struct ClassificationError : Error {
    explicit ClassificationError(const std::string& w) : Error("classification error: " + w, true) {}
};

struct InfeasibleError : Error {
    explicit InfeasibleError(const std::string& w) : Error("infeasible: " + w) {}
};

struct AccuracyError : Error {
    explicit AccuracyError(const std::string& w) : Error("accuracy error: " + w, true) {}
};

struct ConsistencyError : Error {
    explicit ConsistencyError(const std::string& w) : Error("internal consistency error: " + w, true) {}
};

struct ConvergenceError : Error {
    explicit ConvergenceError(const std::string& w) : Error("convergence error: " + w, true) {}
};

struct SizeError : Error {
    explicit SizeError(const std::string& w) : Error("size error: " + w) {}
};

}  // namespace qgtube
