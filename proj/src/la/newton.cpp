#include "aimm/la/newton.hpp"

#include <cmath>
#include <limits>

namespace aimm {

std::pair<std::vector<double>, NewtonReport> newton_solve(const NewtonSystem& sys,
                                                          std::vector<double> x0,
                                                          const NewtonOpts& opts) {
    const std::size_t n = x0.size();
    CsrMatrix J;
    std::vector<double> R;
    auto res_norm = [&](const std::vector<double>& x) {
        if (sys.residual) return nrm2(sys.residual(x));
        CsrMatrix Jtmp;
        std::vector<double> Rtmp;
        sys.assemble(x, Jtmp, Rtmp);
        return nrm2(Rtmp);
    };

    std::vector<double> x = std::move(x0);
    sys.assemble(x, J, R);
    double rnorm = nrm2(R);
    const double r0 = rnorm;
    const double target = opts.tol * std::max(1.0, r0);

    NewtonReport rep;
    rep.initial_residual = r0;
    std::vector<double> best_x = x;
    double best_r = rnorm;

    for (int it = 0; it < opts.max_iter; ++it) {
        if (!std::isfinite(rnorm)) break;
        if (rnorm <= target) {
            rep.iterations = it;
            rep.final_residual = rnorm;
            rep.converged = true;
            return {x, rep};
        }
        std::vector<double> neg_r(n);
        for (std::size_t i = 0; i < n; ++i) neg_r[i] = -R[i];
        std::vector<double> d;
        try {
            d = solve_linear(J, neg_r, opts.linear).x;
        } catch (const NonConvergence& e) {
            // a stagnated Krylov iterate is still usually a descent direction
            d = e.best_iterate;
            if (d.size() != n) break;
        }

        // backtracking on the residual norm
        double alpha = opts.relaxation;
        std::vector<double> x_best_try;
        double r_best_try = std::numeric_limits<double>::infinity();
        for (int h = 0; h <= opts.max_halvings; ++h) {
            std::vector<double> xn = x;
            axpy(alpha, d, xn);
            double rn = res_norm(xn);
            if (std::isfinite(rn) && rn < r_best_try) {
                r_best_try = rn;
                x_best_try = std::move(xn);
            }
            if (std::isfinite(rn) && rn < rnorm) break;
            alpha *= 0.5;
        }
        if (x_best_try.empty()) break;  // every trial produced a non-finite residual
        x = std::move(x_best_try);
        sys.assemble(x, J, R);
        rnorm = nrm2(R);
        if (std::isfinite(rnorm) && rnorm < best_r) {
            best_r = rnorm;
            best_x = x;
        }
        rep.iterations = it + 1;
    }

    if (std::isfinite(rnorm) && rnorm <= target) {
        rep.final_residual = rnorm;
        rep.converged = true;
        return {x, rep};
    }
    throw NewtonDiverged(std::move(best_x), rep.iterations, r0,
                         std::isfinite(rnorm) ? rnorm : best_r);
}

}  // namespace aimm
