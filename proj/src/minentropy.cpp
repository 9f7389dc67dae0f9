#include "qmajor/minentropy.hpp"

#include <cmath>
#include <sstream>

namespace qmajor::minent {

using linalg::Complex;
using linalg::hermitian_basis;
using linalg::partial_trace;
using linalg::Subsystem;
using sdp::ProblemBuilder;
using sdp::SdpSolution;
using sdp::SdpStatus;

namespace {

constexpr double kGapTol = 1e-6;

void require_converged(const SdpSolution& sol, const char* who) {
    if (sol.status != SdpStatus::optimal) {
        std::ostringstream os;
        os << who << ": solver did not converge (primal residual " << sol.primal_residual
           << ", dual residual " << sol.dual_residual << ", gap " << sol.gap << ")";
        throw NumericalError(os.str());
    }
}

// min Tr tau  s.t.  I_A (x) tau - Lambda = omega,  tau, Lambda >= 0
SdpSolution solve_primal(const Matrix& omega, int dim_a, int dim_b) {
    ProblemBuilder pb;
    const int tau = pb.add_block(dim_b);
    const int lam = pb.add_block(dim_a * dim_b);
    pb.set_objective(tau, Matrix::identity(dim_b));
    for (const auto& e : hermitian_basis(dim_a * dim_b)) {
        const int c = pb.add_constraint(sdp::inner(e, omega));
        pb.add_term(c, tau, partial_trace(e, dim_a, dim_b, Subsystem::A));
        Matrix me = e;
        me *= Complex(-1.0);
        pb.add_term(c, lam, std::move(me));
    }
    SdpSolution sol = sdp::solve(pb.take());
    require_converged(sol, "min_entropy(primal)");
    return sol;
}

// max <omega, X>  s.t.  Tr_A X = I_B,  X >= 0
SdpSolution solve_dual(const Matrix& omega, int dim_a, int dim_b) {
    ProblemBuilder pb;
    const int x = pb.add_block(dim_a * dim_b);
    pb.set_objective(x, omega);
    pb.set_maximize(true);
    const Matrix id_a = Matrix::identity(dim_a);
    for (const auto& e : hermitian_basis(dim_b)) {
        const int c = pb.add_constraint(std::real(e.trace()));
        pb.add_term(c, x, linalg::kron(id_a, e));
    }
    SdpSolution sol = sdp::solve(pb.take());
    require_converged(sol, "min_entropy(dual)");
    return sol;
}

}  // namespace

MinEntropyResult min_entropy(const Matrix& omega, int dim_a, int dim_b) {
    if (omega.rows() != dim_a * dim_b || !omega.square())
        throw ValidationError("min_entropy: dimensions do not match the state");
    if (!linalg::is_hermitian(omega)) throw ValidationError("min_entropy: state not Hermitian");

    const SdpSolution primal = solve_primal(omega, dim_a, dim_b);
    const SdpSolution dual = solve_dual(omega, dim_a, dim_b);

    const double log2e = 1.4426950408889634;
    const double vp = -std::log(primal.primal_objective) * log2e;
    const double vd = -std::log(dual.primal_objective) * log2e;

    MinEntropyResult out;
    out.value = vp;
    out.optimal_tau = primal.primal[0];
    out.optimal_x = dual.primal[0];
    out.gap = std::abs(vp - vd);
    if (out.gap > kGapTol) {
        std::ostringstream os;
        os << "min_entropy: primal/dual disagree beyond tolerance (primal " << vp << ", dual "
           << vd << " bits)";
        throw NumericalError(os.str());
    }
    return out;
}

MinEntropyResult min_entropy(const DensityOperator& omega) {
    if (!omega.bipartite()) throw ValidationError("min_entropy: state must be bipartite");
    return min_entropy(omega.mat(), omega.dim(0), omega.dim(1));
}

double guessing_probability(const Ensemble& ens) {
    const int d = ens.dim();
    const int n = static_cast<int>(ens.size());
    ProblemBuilder pb;
    const int tau = pb.add_block(d);
    pb.set_objective(tau, Matrix::identity(d));
    std::vector<int> slacks(n);
    for (int i = 0; i < n; ++i) slacks[i] = pb.add_block(d);
    const auto basis = hermitian_basis(d);
    for (int i = 0; i < n; ++i) {
        Matrix target = ens.states[i].mat();
        target *= Complex(ens.weights[i]);
        for (const auto& e : basis) {
            const int c = pb.add_constraint(sdp::inner(e, target));
            pb.add_term(c, tau, e);
            Matrix me = e;
            me *= Complex(-1.0);
            pb.add_term(c, slacks[i], std::move(me));
        }
    }
    SdpSolution sol = sdp::solve(pb.take());
    require_converged(sol, "guessing_probability");
    return sol.primal_objective;
}

double helstrom_pair(const Ensemble& ens, const std::vector<double>& r1,
                     const std::vector<double>& r2) {
    if (r1.size() != ens.size() || r2.size() != ens.size())
        throw ValidationError("helstrom_pair: weight rows must match the ensemble size");
    for (size_t i = 0; i < ens.size(); ++i)
        if (r1[i] < 0.0 || r1[i] > 1.0 || r2[i] < 0.0 || r2[i] > 1.0)
            throw ValidationError("helstrom_pair: reference weights must lie in [0,1]");
    Matrix diff(ens.dim(), ens.dim());
    for (size_t i = 0; i < ens.size(); ++i) {
        Matrix term = ens.states[i].mat();
        term *= Complex(ens.weights[i] * (r1[i] - r2[i]));
        diff += term;
    }
    return 0.5 + 0.5 * linalg::trace_norm(diff);
}

double min_entropy_classical(const std::vector<std::vector<double>>& p) {
    if (p.empty() || p.front().empty()) throw ValidationError("min_entropy_classical: empty matrix");
    const size_t cols = p.front().size();
    double total = 0.0;
    for (const auto& row : p) {
        if (row.size() != cols) throw ValidationError("min_entropy_classical: ragged matrix");
        for (double v : row) {
            if (v < 0.0) throw ValidationError("min_entropy_classical: negative entry");
            total += v;
        }
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw ValidationError("min_entropy_classical: entries must sum to one");
    double s = 0.0;
    for (size_t y = 0; y < cols; ++y) {
        double best = 0.0;
        for (const auto& row : p) best = std::max(best, row[y]);
        s += best;
    }
    return -std::log2(s);
}

}  // namespace qmajor::minent
