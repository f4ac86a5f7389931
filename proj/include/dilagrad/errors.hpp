#pragma once

#include <stdexcept>
#include <string>

namespace dilagrad {

/// Bad input values: negative extents, points outside a cell, unsupported
/// quadrature degrees, non-finite level-set samples.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Mesh connectivity is broken (non-conforming faces, bad indices).
class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The level set vanishes identically on a whole cell.
class DegenerateCellError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A face patch was requested for a face lying inside the zero level set.
class AlignmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Zero level-set gradient on a cut cell.
class SingularLevelSetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive quadrature failed to reach its tolerance.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double estimate, double error_estimate)
        : std::runtime_error(what), estimate_(estimate), error_estimate_(error_estimate)
    {
    }

    double estimate() const noexcept { return estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double estimate_;
    double error_estimate_;
};

/// Mesh deformation produced a cell with non-positive volume.
class TangledMeshError : public std::runtime_error {
public:
    TangledMeshError(const std::string& what, int cell) : std::runtime_error(what), cell_(cell) {}
    int cell() const noexcept { return cell_; }

private:
    int cell_;
};

/// A precondition on boundary conditions or perturbation support is violated.
class ConstraintError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linear solve failed; carries the smallest cut fraction seen during assembly.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double min_cut_fraction)
        : std::runtime_error(what), min_cut_fraction_(min_cut_fraction)
    {
    }
    double min_cut_fraction() const noexcept { return min_cut_fraction_; }

private:
    double min_cut_fraction_;
};

/// Point evaluation on a face where the field jumps.
class AmbiguousLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested operation is not available for this dimension or input.
class UnsupportedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dilagrad
