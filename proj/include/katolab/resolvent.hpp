#pragma once

#include "katolab/operator.hpp"

namespace katolab {

struct SolverConfig {
    double rel_tol = 1e-10;
    int max_iter = 400;
    int restart = 60;
    bool precondition = true;
};

struct SolveStats {
    int iterations = 0;
    double relres = 0.0;
    bool converged = false;
};

struct ResolventResult {
    Field u;
    SolveStats stats;
};

// surfaced to reports; tolerances are never silently relaxed
class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, SolveStats s) : std::runtime_error(what), stats(s) {}
    SolveStats stats;
};

// Generic driver for (alpha + beta H) u = rhs via restarted GMRES, right
// preconditioned by the exact inverse of the constant-coefficient symbol
// alpha + beta (i tau + |xi|^2) (time sign flipped for the adjoint). For
// A = I the preconditioned matrix is the identity; for BMO perturbations it
// stays a uniformly bounded perturbation of it, which is what keeps iteration
// counts flat across lambda. The reported residual is recomputed from the
// returned iterate, not read off the Givens recurrence.
ResolventResult solve_linear(const ParabolicOperator& op, cplx alpha, cplx beta,
                             const Field& rhs, const SolverConfig& cfg);

// (sigma + H) u = f, Re sigma > 0
ResolventResult solve_shifted(const ParabolicOperator& op, cplx sigma, const Field& f,
                              const SolverConfig& cfg);

// E_lambda f: (1 + lambda^2 H) u = f
ResolventResult resolvent(const ParabolicOperator& op, double lambda, const Field& f,
                          const SolverConfig& cfg);

// lambda E_lambda divx F
ResolventResult resolvent_div(const ParabolicOperator& op, double lambda, const VectorField& F,
                              const SolverConfig& cfg);

// lambda E_lambda Dt^(1/2) f
ResolventResult resolvent_halfdt(const ParabolicOperator& op, double lambda, const Field& f,
                                 const SolverConfig& cfg);

} // namespace katolab
