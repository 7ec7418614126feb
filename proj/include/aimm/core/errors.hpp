#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace aimm {

// Base class for all failures raised by the engine. Each concrete type
// corresponds to one named failure mode of the public API.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// ---- mesh construction / queries ----

struct NonPositiveArea : Error {
    int triangle;
    explicit NonPositiveArea(int tri)
        : Error("triangle " + std::to_string(tri) + " has non-positive area"), triangle(tri) {}
};

struct NonManifoldEdge : Error {
    int a, b;
    NonManifoldEdge(int a_, int b_)
        : Error("edge (" + std::to_string(a_) + "," + std::to_string(b_) +
                ") is shared by more than two triangles"),
          a(a_), b(b_) {}
};

struct DanglingNode : Error {
    int node;
    explicit DanglingNode(int n)
        : Error("node " + std::to_string(n) + " is not referenced by any triangle"), node(n) {}
};

struct StaleField : Error {
    StaleField(std::uint64_t field_gen, std::uint64_t mesh_gen)
        : Error("field bound to mesh generation " + std::to_string(field_gen) +
                " evaluated on generation " + std::to_string(mesh_gen)) {}
};

struct OutsideDomain : Error {
    explicit OutsideDomain(const std::string& msg) : Error(msg) {}
};

// ---- linear algebra ----

struct IndexOutOfPattern : Error {
    int row, col;
    IndexOutOfPattern(int r, int c)
        : Error("entry (" + std::to_string(r) + "," + std::to_string(c) +
                ") is not present in the sparsity pattern"),
          row(r), col(c) {}
};

struct ConflictingConstraint : Error {
    int dof;
    ConflictingConstraint(int d, double a, double b)
        : Error("dof " + std::to_string(d) + " constrained to both " + std::to_string(a) +
                " and " + std::to_string(b)),
          dof(d) {}
};

struct SingularPreconditioner : Error {
    explicit SingularPreconditioner(const std::string& msg) : Error(msg) {}
};

// Krylov solver failed to reach the requested tolerance. Carries the best
// iterate found so callers can inspect or reuse it.
struct NonConvergence : Error {
    std::vector<double> best_iterate;
    int iterations;
    double relative_residual;
    NonConvergence(std::vector<double> best, int iters, double rel)
        : Error("linear solver did not converge: relative residual " + std::to_string(rel) +
                " after " + std::to_string(iters) + " iterations"),
          best_iterate(std::move(best)), iterations(iters), relative_residual(rel) {}
};

// Newton iteration failed. Carries the convergence history summary and the
// best iterate (smallest residual seen).
struct NewtonDiverged : Error {
    std::vector<double> best_iterate;
    int iterations;
    double initial_residual;
    double final_residual;
    NewtonDiverged(std::vector<double> best, int iters, double r0, double r)
        : Error("Newton iteration did not converge: residual " + std::to_string(r) +
                " (started at " + std::to_string(r0) + ") after " + std::to_string(iters) +
                " iterations"),
          best_iterate(std::move(best)), iterations(iters), initial_residual(r0),
          final_residual(r) {}
};

// ---- solid mechanics ----

struct NonPositiveJacobian : Error {
    int element;  // -1 when not tied to a specific element
    explicit NonPositiveJacobian(int elem = -1)
        : Error(elem >= 0 ? "det F <= 0 on element " + std::to_string(elem) : "det F <= 0"),
          element(elem) {}
};

struct SingularGradient : Error {
    int element;
    explicit SingularGradient(int elem = -1)
        : Error("I - grad(u) is singular" +
                (elem >= 0 ? " on element " + std::to_string(elem) : std::string())),
          element(elem) {}
};

// ---- interface / transfer ----

struct DegeneratePolyline : Error {
    int segment;
    explicit DegeneratePolyline(int seg)
        : Error("polyline segment " + std::to_string(seg) + " has zero length"), segment(seg) {}
};

struct TransferMiss : Error {
    int node;
    explicit TransferMiss(int n)
        : Error("node " + std::to_string(n) +
                " is flagged inside the solid but cannot be located on the solid mesh"),
          node(n) {}
};

// ---- adaptation ----

struct DegeneratePatch : Error {
    int node;
    explicit DegeneratePatch(int n)
        : Error("length distribution tensor is singular at node " + std::to_string(n)), node(n) {}
};

// ---- driver ----

struct CouplingDiverged : Error {
    explicit CouplingDiverged(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct InsufficientSignal : Error {
    explicit InsufficientSignal(const std::string& msg) : Error(msg) {}
};

}  // namespace aimm
