#include "aimm/la/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aimm {

JacobiPrecond::JacobiPrecond(const CsrMatrix& A, double shift) {
    inv_diag_.resize(A.n());
    for (int r = 0; r < A.n(); ++r) {
        double d = A.get(r, r);
        if (std::abs(d) < shift) d = (d < 0.0) ? -shift : shift;
        inv_diag_[r] = 1.0 / d;
    }
}

void JacobiPrecond::apply(const std::vector<double>& r, std::vector<double>& z) const {
    z.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv_diag_[i] * r[i];
}

Ilu0Precond::Ilu0Precond(const CsrMatrix& A) : a_(&A) {
    const int n = A.n();
    const auto& offsets = A.offsets();
    const auto& cols = A.cols();
    lu_ = A.values();
    diag_.assign(n, -1);
    for (int r = 0; r < n; ++r) {
        int k = A.find(r, r);
        if (k < 0) throw SingularPreconditioner("row " + std::to_string(r) + " has no diagonal entry");
        diag_[r] = k;
    }
    // IKJ Gaussian elimination restricted to the existing pattern
    std::vector<int> pos(n, -1);
    for (int i = 0; i < n; ++i) {
        for (int k = offsets[i]; k < offsets[i + 1]; ++k) pos[cols[k]] = k;
        for (int k = offsets[i]; k < offsets[i + 1] && cols[k] < i; ++k) {
            const int j = cols[k];
            const double pivot = lu_[diag_[j]];
            if (std::abs(pivot) < 1e-300)
                throw SingularPreconditioner("zero pivot at row " + std::to_string(j));
            const double f = lu_[k] / pivot;
            lu_[k] = f;
            for (int m = diag_[j] + 1; m < offsets[j + 1]; ++m) {
                int p = pos[cols[m]];
                if (p >= 0) lu_[p] -= f * lu_[m];
            }
        }
        if (std::abs(lu_[diag_[i]]) < 1e-300)
            throw SingularPreconditioner("zero pivot at row " + std::to_string(i));
        for (int k = offsets[i]; k < offsets[i + 1]; ++k) pos[cols[k]] = -1;
    }
}

void Ilu0Precond::apply(const std::vector<double>& r, std::vector<double>& z) const {
    const int n = a_->n();
    const auto& offsets = a_->offsets();
    const auto& cols = a_->cols();
    z = r;
    for (int i = 0; i < n; ++i) {
        double s = z[i];
        for (int k = offsets[i]; k < offsets[i + 1] && cols[k] < i; ++k) s -= lu_[k] * z[cols[k]];
        z[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = z[i];
        for (int k = diag_[i] + 1; k < offsets[i + 1]; ++k) s -= lu_[k] * z[cols[k]];
        z[i] = s / lu_[diag_[i]];
    }
}

namespace {

struct Best {
    std::vector<double> x;
    double rel = std::numeric_limits<double>::infinity();
    void consider(const std::vector<double>& cand, double r) {
        if (r < rel) {
            rel = r;
            x = cand;
        }
    }
};

[[noreturn]] void give_up(Best& best, int iters) {
    throw NonConvergence(std::move(best.x), iters, best.rel);
}

}  // namespace

KrylovResult gmres(const CsrMatrix& A, const std::vector<double>& b, const Preconditioner& M,
                   double tol, int max_iter, int restart, const std::vector<double>* x0) {
    const int n = A.n();
    std::vector<double> x = x0 ? *x0 : std::vector<double>(n, 0.0);
    const double bnorm = nrm2(b);
    if (bnorm == 0.0) return {std::vector<double>(n, 0.0), 0, 0.0};

    const int m = std::max(1, restart);
    std::vector<std::vector<double>> V(m + 1);
    std::vector<std::vector<double>> H(m + 1, std::vector<double>(m, 0.0));
    std::vector<double> cs(m), sn(m), g(m + 1);
    std::vector<double> w(n), z(n);
    Best best;
    int iters = 0;

    while (true) {
        std::vector<double> r = A.matvec(x);
        for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
        double beta = nrm2(r);
        double rel = beta / bnorm;
        if (!std::isfinite(rel)) give_up(best, iters);
        best.consider(x, rel);
        if (rel <= tol) return {x, iters, rel};
        if (iters >= max_iter) give_up(best, iters);

        V[0] = r;
        scal(1.0 / beta, V[0]);
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        int j = 0;
        for (; j < m && iters < max_iter; ++j, ++iters) {
            M.apply(V[j], z);
            A.matvec(z, w);
            for (int i = 0; i <= j; ++i) {
                H[i][j] = dot(w, V[i]);
                axpy(-H[i][j], V[i], w);
            }
            H[j + 1][j] = nrm2(w);
            bool happy = H[j + 1][j] < 1e-14 * beta;
            if (!happy) {
                V[j + 1] = w;
                scal(1.0 / H[j + 1][j], V[j + 1]);
            }
            // previous Givens rotations, then a new one to keep H triangular
            for (int i = 0; i < j; ++i) {
                double t = cs[i] * H[i][j] + sn[i] * H[i + 1][j];
                H[i + 1][j] = -sn[i] * H[i][j] + cs[i] * H[i + 1][j];
                H[i][j] = t;
            }
            double denom = std::hypot(H[j][j], H[j + 1][j]);
            if (denom < 1e-300) {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = H[j][j] / denom;
                sn[j] = H[j + 1][j] / denom;
            }
            H[j][j] = cs[j] * H[j][j] + sn[j] * H[j + 1][j];
            H[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];
            if (std::abs(g[j + 1]) / bnorm <= tol || happy) {
                ++j;
                ++iters;
                break;
            }
        }
        // back substitution on the triangularized Hessenberg
        std::vector<double> y(j, 0.0);
        for (int i = j - 1; i >= 0; --i) {
            double s = g[i];
            for (int k = i + 1; k < j; ++k) s -= H[i][k] * y[k];
            y[i] = (std::abs(H[i][i]) < 1e-300) ? 0.0 : s / H[i][i];
        }
        std::fill(w.begin(), w.end(), 0.0);
        for (int i = 0; i < j; ++i) axpy(y[i], V[i], w);
        M.apply(w, z);
        axpy(1.0, z, x);
    }
}

KrylovResult bicgstab(const CsrMatrix& A, const std::vector<double>& b, const Preconditioner& M,
                      double tol, int max_iter, const std::vector<double>* x0) {
    const int n = A.n();
    std::vector<double> x = x0 ? *x0 : std::vector<double>(n, 0.0);
    const double bnorm = nrm2(b);
    if (bnorm == 0.0) return {std::vector<double>(n, 0.0), 0, 0.0};

    std::vector<double> r = A.matvec(x);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    std::vector<double> rhat = r, p(n, 0.0), v(n, 0.0), ph(n), sh(n), t(n), s(n);
    double rho_old = 1.0, alpha = 1.0, omega = 1.0;
    Best best;
    best.consider(x, nrm2(r) / bnorm);
    if (best.rel <= tol) return {x, 0, best.rel};

    for (int it = 1; it <= max_iter; ++it) {
        double rho = dot(rhat, r);
        if (std::abs(rho) < 1e-300) give_up(best, it - 1);
        double beta = (rho / rho_old) * (alpha / omega);
        for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        M.apply(p, ph);
        A.matvec(ph, v);
        double rv = dot(rhat, v);
        if (std::abs(rv) < 1e-300) give_up(best, it - 1);
        alpha = rho / rv;
        for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        double srel = nrm2(s) / bnorm;
        if (srel <= tol) {
            axpy(alpha, ph, x);
            best.consider(x, srel);
            return {x, it, srel};
        }
        M.apply(s, sh);
        A.matvec(sh, t);
        double tt = dot(t, t);
        if (tt < 1e-300) give_up(best, it);
        omega = dot(t, s) / tt;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * ph[i] + omega * sh[i];
            r[i] = s[i] - omega * t[i];
        }
        double rel = nrm2(r) / bnorm;
        if (!std::isfinite(rel)) give_up(best, it);
        best.consider(x, rel);
        if (rel <= tol) return {x, it, rel};
        if (std::abs(omega) < 1e-300) give_up(best, it);
        rho_old = rho;
    }
    give_up(best, max_iter);
}

KrylovResult cg(const CsrMatrix& A, const std::vector<double>& b, const Preconditioner& M,
                double tol, int max_iter, const std::vector<double>* x0) {
    const int n = A.n();
    std::vector<double> x = x0 ? *x0 : std::vector<double>(n, 0.0);
    const double bnorm = nrm2(b);
    if (bnorm == 0.0) return {std::vector<double>(n, 0.0), 0, 0.0};

    std::vector<double> r = A.matvec(x);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    std::vector<double> z(n), p(n), Ap(n);
    M.apply(r, z);
    p = z;
    double rz = dot(r, z);
    Best best;
    best.consider(x, nrm2(r) / bnorm);
    if (best.rel <= tol) return {x, 0, best.rel};

    for (int it = 1; it <= max_iter; ++it) {
        A.matvec(p, Ap);
        double pAp = dot(p, Ap);
        if (!(pAp > 0.0)) give_up(best, it - 1);  // not SPD (or breakdown)
        double a = rz / pAp;
        axpy(a, p, x);
        axpy(-a, Ap, r);
        double rel = nrm2(r) / bnorm;
        if (!std::isfinite(rel)) give_up(best, it);
        best.consider(x, rel);
        if (rel <= tol) return {x, it, rel};
        M.apply(r, z);
        double rz_new = dot(r, z);
        double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    give_up(best, max_iter);
}

KrylovResult solve_linear(const CsrMatrix& A, const std::vector<double>& b, const SolveOpts& opts,
                          const std::vector<double>* x0) {
    std::unique_ptr<Preconditioner> M;
    if (opts.method == KrylovMethod::CgJacobi) {
        M = std::make_unique<JacobiPrecond>(A);
        return cg(A, b, *M, opts.tol, opts.max_iter, x0);
    }
    try {
        M = std::make_unique<Ilu0Precond>(A);
    } catch (const SingularPreconditioner&) {
        M = std::make_unique<JacobiPrecond>(A);  // shifted-diagonal fallback
    }
    if (opts.method == KrylovMethod::BicgstabIlu0)
        return bicgstab(A, b, *M, opts.tol, opts.max_iter, x0);
    return gmres(A, b, *M, opts.tol, opts.max_iter, opts.restart, x0);
}

}  // namespace aimm
