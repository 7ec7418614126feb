#pragma once

#include <functional>
#include <vector>

#include "aimm/la/solvers.hpp"

namespace aimm {

struct NewtonReport {
    int iterations = 0;
    double initial_residual = 0.0;
    double final_residual = 0.0;
    bool converged = false;
};

struct NewtonOpts {
    double tol = 1e-8;       // on ||R|| <= tol * max(1, ||R0||)
    int max_iter = 25;
    double relaxation = 1.0; // scales every accepted update
    int max_halvings = 8;    // backtracking when a step increases ||R||
    SolveOpts linear{};
};

// Residual and Jacobian of the nonlinear system at a state; the Jacobian is
// already constrained (Dirichlet rows eliminated) so J d = -R is solvable.
struct NewtonSystem {
    std::function<void(const std::vector<double>& x, CsrMatrix& J, std::vector<double>& R)>
        assemble;
    // optional cheaper residual-only evaluation used during backtracking
    std::function<std::vector<double>(const std::vector<double>& x)> residual;
};

// Damped Newton with residual-norm backtracking. Throws NewtonDiverged (best
// iterate attached) if the budget is exhausted before ||R|| meets the target.
std::pair<std::vector<double>, NewtonReport> newton_solve(const NewtonSystem& sys,
                                                          std::vector<double> x0,
                                                          const NewtonOpts& opts = {});

}  // namespace aimm
