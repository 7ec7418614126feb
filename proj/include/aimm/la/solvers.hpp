#pragma once

#include <memory>
#include <vector>

#include "aimm/la/sparse.hpp"

namespace aimm {

// z = M^{-1} r
class Preconditioner {
  public:
    virtual ~Preconditioner() = default;
    virtual void apply(const std::vector<double>& r, std::vector<double>& z) const = 0;
};

class IdentityPrecond : public Preconditioner {
  public:
    void apply(const std::vector<double>& r, std::vector<double>& z) const override { z = r; }
};

// Inverse diagonal; near-zero diagonals are shifted by 1e-12 (sign-keeping).
class JacobiPrecond : public Preconditioner {
  public:
    explicit JacobiPrecond(const CsrMatrix& A, double shift = 1e-12);
    void apply(const std::vector<double>& r, std::vector<double>& z) const override;

  private:
    std::vector<double> inv_diag_;
};

// Incomplete LU with zero fill-in on the matrix's own pattern.
// Throws SingularPreconditioner on a (near-)zero pivot or missing diagonal.
class Ilu0Precond : public Preconditioner {
  public:
    explicit Ilu0Precond(const CsrMatrix& A);
    void apply(const std::vector<double>& r, std::vector<double>& z) const override;

  private:
    const CsrMatrix* a_;
    std::vector<double> lu_;
    std::vector<int> diag_;
};

struct KrylovResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
};

// Right-preconditioned restarted GMRES. Converges when ||b - A x|| <= tol ||b||.
// Throws NonConvergence (best iterate attached) when the budget runs out.
KrylovResult gmres(const CsrMatrix& A, const std::vector<double>& b, const Preconditioner& M,
                   double tol, int max_iter, int restart,
                   const std::vector<double>* x0 = nullptr);

KrylovResult bicgstab(const CsrMatrix& A, const std::vector<double>& b, const Preconditioner& M,
                      double tol, int max_iter, const std::vector<double>* x0 = nullptr);

// Preconditioned conjugate gradients (SPD systems only).
KrylovResult cg(const CsrMatrix& A, const std::vector<double>& b, const Preconditioner& M,
                double tol, int max_iter, const std::vector<double>* x0 = nullptr);

enum class KrylovMethod { GmresIlu0, BicgstabIlu0, CgJacobi };

struct SolveOpts {
    KrylovMethod method = KrylovMethod::GmresIlu0;
    double tol = 1e-8;
    int max_iter = 2000;
    int restart = 100;
};

// Method dispatch plus the ILU(0) -> shifted-Jacobi fallback when the
// factorization hits a zero pivot.
KrylovResult solve_linear(const CsrMatrix& A, const std::vector<double>& b,
                          const SolveOpts& opts = {}, const std::vector<double>* x0 = nullptr);

}  // namespace aimm
