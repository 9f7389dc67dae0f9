#include "qmajor/majorization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qmajor::major {

using linalg::Complex;
using linalg::Eig;
using linalg::hermitian_basis;
using linalg::kron;
using linalg::multiply;
using linalg::partial_trace;
using linalg::Subsystem;
using minent::min_entropy;
using sdp::ProblemBuilder;
using sdp::SdpSolution;
using sdp::SdpStatus;

namespace {

void require_converged(const SdpSolution& sol, const char* who) {
    if (sol.status != SdpStatus::optimal) {
        std::ostringstream os;
        os << who << ": solver did not converge (residuals " << sol.primal_residual << ", "
           << sol.dual_residual << ", gap " << sol.gap << ")";
        throw NumericalError(os.str());
    }
}

// normalize Tr_out(J) = I exactly; eigenvalue clamp first
Matrix repair_choi(const Matrix& j, int d_in, int d_out) {
    const Eig eig = linalg::eig_hermitian(j);
    const int n = j.rows();
    Matrix psd(n, n);
    for (int k = 0; k < n; ++k) {
        const double lk = std::max(0.0, eig.values[k]);
        if (lk == 0.0) continue;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                psd(r, c) += eig.vectors(r, k) * lk * std::conj(eig.vectors(c, k));
    }
    const Matrix m = partial_trace(psd, d_in, d_out, Subsystem::B);
    const Matrix a = linalg::inv_sqrt_psd(m);
    const Matrix lift = kron(a, Matrix::identity(d_out));
    return multiply(multiply(lift, psd), lift.adjoint());
}

}  // namespace

ConversionProblem::ConversionProblem(Ensemble in, std::vector<DensityOperator> out)
    : inputs(std::move(in)), targets(std::move(out)) {
    if (targets.size() != inputs.size())
        throw ValidationError("ConversionProblem: input/target count mismatch");
    const int dc = targets.front().total_dim();
    for (const auto& t : targets)
        if (t.total_dim() != dc) throw ValidationError("ConversionProblem: targets of unequal dimension");
}

Matrix partial_pairing(const Matrix& e_ab, const Matrix& rho_b, int da, int db) {
    Matrix out(da, da);
    for (int a = 0; a < da; ++a)
        for (int ap = 0; ap < da; ++ap) {
            Complex s = 0.0;
            for (int b = 0; b < db; ++b)
                for (int bp = 0; bp < db; ++bp) s += e_ab(a * db + b, ap * db + bp) * rho_b(bp, b);
            out(a, ap) = s;
        }
    return out;
}

Matrix bipartite_action_coefficient(const Matrix& e_ac, const Matrix& rho_ab, int da, int db,
                                    int dc) {
    Matrix k(db * dc, db * dc);
    for (int b = 0; b < db; ++b)
        for (int c = 0; c < dc; ++c)
            for (int bp = 0; bp < db; ++bp)
                for (int cp = 0; cp < dc; ++cp) {
                    Complex s = 0.0;
                    for (int a = 0; a < da; ++a)
                        for (int ap = 0; ap < da; ++ap)
                            s += e_ac(ap * dc + c, a * dc + cp) * rho_ab(a * db + bp, ap * db + b);
                    k(b * dc + c, bp * dc + cp) = s;
                }
    return k;
}

AlphaResult compute_alpha(const ConversionProblem& p) {
    const int da = p.dim_c();  // witness system has the target dimension
    const int db = p.dim_b();
    const int n = static_cast<int>(p.size());

    ProblemBuilder pb;
    const int lam = pb.add_block(da * db);
    const int z = pb.add_block(db);
    std::vector<int> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = pb.add_block(da);
    pb.set_objective(z, Matrix::identity(db));

    for (const auto& e : hermitian_basis(da * db)) {
        const int c = pb.add_constraint(0.0);
        pb.add_term(c, z, partial_trace(e, da, db, Subsystem::A));
        for (int i = 0; i < n; ++i) {
            Matrix coef = partial_pairing(e, p.inputs.states[i].mat(), da, db);
            coef *= Complex(-1.0);
            pb.add_term(c, xs[i], std::move(coef));
        }
        Matrix me = e;
        me *= Complex(-1.0);
        pb.add_term(c, lam, std::move(me));
    }
    const int norm = pb.add_constraint(1.0);
    for (int i = 0; i < n; ++i) pb.add_term(norm, xs[i], p.targets[i].mat().transpose());

    SdpSolution sol = sdp::solve(pb.take());
    require_converged(sol, "compute_alpha");

    AlphaResult out;
    out.alpha = sol.primal_objective;
    out.z = sol.primal[z];
    for (int i = 0; i < n; ++i) out.x.push_back(sol.primal[xs[i]]);
    return out;
}

BetaResult compute_beta(const ConversionProblem& p) {
    const int da = p.dim_c();
    const int db = p.dim_b();
    const int n = static_cast<int>(p.size());

    ProblemBuilder pb;
    const int tau = pb.add_block(da * db);
    const int yp = pb.add_block(1);
    const int ym = pb.add_block(1);
    const int s0 = pb.add_block(db);
    std::vector<int> si(n);
    for (int i = 0; i < n; ++i) si[i] = pb.add_block(da);

    Matrix one(1, 1), mone(1, 1);
    one(0, 0) = 1.0;
    mone(0, 0) = -1.0;
    pb.set_objective(yp, one);
    pb.set_objective(ym, mone);
    pb.set_maximize(true);

    // tau^B + S0 = I
    for (const auto& e : hermitian_basis(db)) {
        const int c = pb.add_constraint(std::real(e.trace()));
        pb.add_term(c, tau, kron(Matrix::identity(da), e));
        pb.add_term(c, s0, e);
    }
    // Tr_B[tau (I (x) rho_i)] - y sigma_i^T - S_i = 0
    for (int i = 0; i < n; ++i) {
        const Matrix sigma_t = p.targets[i].mat().transpose();
        for (const auto& e : hermitian_basis(da)) {
            const int c = pb.add_constraint(0.0);
            pb.add_term(c, tau, kron(e, p.inputs.states[i].mat()));
            const double coef = sdp::inner(e, sigma_t);
            Matrix cp(1, 1), cm(1, 1);
            cp(0, 0) = -coef;
            cm(0, 0) = coef;
            pb.add_term(c, yp, std::move(cp));
            pb.add_term(c, ym, std::move(cm));
            Matrix me = e;
            me *= Complex(-1.0);
            pb.add_term(c, si[i], std::move(me));
        }
    }

    SdpSolution sol = sdp::solve(pb.take());
    require_converged(sol, "compute_beta");

    BetaResult out;
    out.beta = sol.primal_objective;
    out.y = sol.primal[yp](0, 0).real() - sol.primal[ym](0, 0).real();
    out.tau = sol.primal[tau];
    return out;
}

std::vector<WitnessState> extract_witness(const ConversionProblem& p, const AlphaResult& a) {
    if (a.alpha >= 1.0 - kFeasTol)
        throw ValidationError("extract_witness: instance is not infeasible (alpha too close to 1)");
    const int dc = p.dim_c();
    std::vector<WitnessState> witness;
    double total = 0.0;
    std::vector<double> traces;
    for (const auto& x : a.x) {
        const double t = std::real(x.trace());
        traces.push_back(t);
        if (t >= 1e-10) total += t;
    }
    if (total <= 0.0) throw NumericalError("extract_witness: all witness components vanish");
    for (size_t i = 0; i < a.x.size(); ++i) {
        if (traces[i] < 1e-10) continue;
        witness.push_back({traces[i] / total, quantum::project_to_state({dc}, a.x[i])});
    }
    return witness;
}

namespace {

// slack-minimization Choi SDP for E(rho_i) = sigma_i; returns (optimum, J)
std::pair<double, Matrix> direct_conversion_sdp(const ConversionProblem& p) {
    const int db = p.dim_b();
    const int dc = p.dim_c();
    const int n = static_cast<int>(p.size());

    ProblemBuilder pb;
    const int jb = pb.add_block(db * dc);
    std::vector<int> sp(n), sm(n);
    for (int i = 0; i < n; ++i) {
        sp[i] = pb.add_block(dc);
        sm[i] = pb.add_block(dc);
        pb.set_objective(sp[i], Matrix::identity(dc));
        pb.set_objective(sm[i], Matrix::identity(dc));
    }
    for (const auto& e : hermitian_basis(db)) {
        const int c = pb.add_constraint(std::real(e.trace()));
        pb.add_term(c, jb, kron(e, Matrix::identity(dc)));
    }
    for (int i = 0; i < n; ++i) {
        const Matrix rho_t = p.inputs.states[i].mat().transpose();
        for (const auto& e : hermitian_basis(dc)) {
            const int c = pb.add_constraint(sdp::inner(e, p.targets[i].mat()));
            pb.add_term(c, jb, kron(rho_t, e));
            Matrix me = e;
            me *= Complex(-1.0);
            pb.add_term(c, sp[i], std::move(me));
            pb.add_term(c, sm[i], e);
        }
    }
    SdpSolution sol = sdp::solve(pb.take());
    require_converged(sol, "decide_ensemble_conversion(direct)");
    return {sol.primal_objective, sol.primal[jb]};
}

void attach_witness(ConversionReport& report, const ConversionProblem& p, const AlphaResult& a) {
    if (a.alpha >= 1.0 - kFeasTol)
        throw ValidationError("extract_witness: instance is not infeasible (alpha too close to 1)");
    const int dc = p.dim_c();
    const int db = p.dim_b();

    std::vector<double> traces;
    double total = 0.0;
    for (const auto& x : a.x) {
        const double t = std::max(0.0, std::real(x.trace()));
        traces.push_back(t);
        if (t >= 1e-10) total += t;
    }
    if (total <= 0.0) throw NumericalError("extract_witness: all witness components vanish");

    Matrix omega_b(dc * db, dc * db);
    Matrix omega_c(dc * dc, dc * dc);
    for (size_t i = 0; i < a.x.size(); ++i) {
        if (traces[i] < 1e-10) continue;
        const double w = traces[i] / total;
        DensityOperator omega = quantum::project_to_state({dc}, a.x[i]);
        Matrix tb = kron(omega.mat(), p.inputs.states[i].mat());
        tb *= Complex(w);
        omega_b += tb;
        Matrix tc = kron(omega.mat(), p.targets[i].mat());
        tc *= Complex(w);
        omega_c += tc;
        report.witness.push_back({w, std::move(omega)});
    }

    const double h_b = min_entropy(omega_b, dc, db).value;
    const double h_c = min_entropy(omega_c, dc, dc).value;
    report.witness_violation = h_b - h_c;
    if (report.witness_violation < kFeasTol) {
        report.witness.clear();
        std::ostringstream os;
        os << "witness rejected: min-entropy recomputation gives H(A'|B)-H(A'|C) = "
           << report.witness_violation;
        throw NumericalError(os.str());
    }
}

}  // namespace

ConversionReport decide_ensemble_conversion(const ConversionProblem& p) {
    ConversionReport report;

    auto [slack, jmat] = direct_conversion_sdp(p);
    const AlphaResult alpha = compute_alpha(p);
    const BetaResult beta = compute_beta(p);

    report.slack = slack;
    report.alpha = alpha.alpha;
    report.beta = beta.beta;

    const bool feasible_direct = slack <= kFeasTol;
    const bool feasible_alpha = alpha.alpha >= 1.0 - kFeasTol;
    const double margin = std::abs(alpha.alpha - 1.0);
    report.marginal = margin < kMarginalBand;

    if (std::abs(alpha.alpha - beta.beta) > 1e-5) {
        std::ostringstream os;
        os << "decide_ensemble_conversion: weak duality violated (alpha " << alpha.alpha
           << ", beta " << beta.beta << ")";
        throw NumericalError(os.str());
    }
    if (!report.marginal && feasible_direct != feasible_alpha) {
        std::ostringstream os;
        os << "decide_ensemble_conversion: route disagreement (alpha " << alpha.alpha
           << ", direct slack " << slack << ")";
        throw NumericalError(os.str());
    }

    report.feasible = feasible_direct;
    if (report.marginal) report.notes = "marginal instance: |alpha-1| inside the 1e-4 band";

    if (report.feasible) {
        report.channel = QuantumChannel(p.dim_b(), p.dim_c(), repair_choi(jmat, p.dim_b(), p.dim_c()));
    } else if (!report.marginal) {
        attach_witness(report, p, alpha);
    }
    return report;
}

ConversionReport decide_bipartite_qmaj(const DensityOperator& rho_ab,
                                       const DensityOperator& sigma_ac) {
    if (!rho_ab.bipartite() || !sigma_ac.bipartite())
        throw ValidationError("decide_bipartite_qmaj: states must be bipartite");
    const int da = rho_ab.dim(0);
    if (sigma_ac.dim(0) != da)
        throw ValidationError("decide_bipartite_qmaj: common system A dimension mismatch");
    const int db = rho_ab.dim(1);
    const int dc = sigma_ac.dim(1);

    ConversionReport report;

    // compatibility condition on the A marginals
    Matrix diff = quantum::marginal_a(rho_ab);
    diff -= quantum::marginal_a(sigma_ac);
    if (linalg::trace_norm(diff) > 1e-7) {
        report.feasible = false;
        report.alpha = 0.0;
        report.beta = 0.0;
        report.notes = "incompatible marginals";
        return report;
    }

    // direct SDP over the Choi matrix of the B->C channel
    double slack = 0.0;
    Matrix jmat;
    {
        ProblemBuilder pb;
        const int jb = pb.add_block(db * dc);
        const int sp = pb.add_block(da * dc);
        const int sm = pb.add_block(da * dc);
        pb.set_objective(sp, Matrix::identity(da * dc));
        pb.set_objective(sm, Matrix::identity(da * dc));
        for (const auto& e : hermitian_basis(db)) {
            const int c = pb.add_constraint(std::real(e.trace()));
            pb.add_term(c, jb, kron(e, Matrix::identity(dc)));
        }
        for (const auto& e : hermitian_basis(da * dc)) {
            const int c = pb.add_constraint(sdp::inner(e, sigma_ac.mat()));
            pb.add_term(c, jb, bipartite_action_coefficient(e, rho_ab.mat(), da, db, dc));
            Matrix me = e;
            me *= Complex(-1.0);
            pb.add_term(c, sp, std::move(me));
            pb.add_term(c, sm, e);
        }
        SdpSolution sol = sdp::solve(pb.take());
        require_converged(sol, "decide_bipartite_qmaj(direct)");
        slack = sol.primal_objective;
        jmat = sol.primal[jb];
    }

    // measure-and-prepare reduction route (fixed IC POVM, shared perturbation)
    const auto reduction = quantum::reduce_bipartite_with_povm(rho_ab, quantum::ic_povm(da));
    const auto reduced_sigma = quantum::reduce_bipartite_to_ensemble(sigma_ac, reduction.povm);
    for (size_t j = 0; j < reduction.ensemble.size(); ++j)
        if (std::abs(reduction.ensemble.weights[j] - reduced_sigma.weights[j]) > 1e-8)
            throw NumericalError("decide_bipartite_qmaj: reduction weights incompatible");
    ConversionProblem reduced(reduction.ensemble, reduced_sigma.states);
    ConversionReport ens_report = decide_ensemble_conversion(reduced);

    const bool feasible_direct = slack <= kFeasTol;
    if (!ens_report.marginal && !(std::abs(slack - kFeasTol) < 0.5 * kFeasTol) &&
        feasible_direct != ens_report.feasible) {
        std::ostringstream os;
        os << "decide_bipartite_qmaj: route disagreement (direct slack " << slack
           << ", reduction alpha " << ens_report.alpha << ")";
        throw NumericalError(os.str());
    }

    report.feasible = feasible_direct;
    report.marginal = ens_report.marginal;
    report.alpha = ens_report.alpha;
    report.beta = ens_report.beta;
    report.slack = slack;
    report.witness = std::move(ens_report.witness);
    report.witness_violation = ens_report.witness_violation;
    report.notes = std::move(ens_report.notes);
    if (report.feasible) report.channel = QuantumChannel(db, dc, repair_choi(jmat, db, dc));
    return report;
}

double verify_monotone_necessity(const DensityOperator& rho_ab, const DensityOperator& sigma_ac,
                                 int trials, std::uint64_t seed) {
    const int da = rho_ab.dim(0);
    const int db = rho_ab.dim(1);
    const int dc = sigma_ac.dim(1);

    const auto red_rho = quantum::reduce_bipartite_with_povm(rho_ab, quantum::ic_povm(da));
    const auto red_sig = quantum::reduce_bipartite_to_ensemble(sigma_ac, red_rho.povm);
    const auto& weights = red_rho.ensemble.weights;
    const size_t n = weights.size();

    double worst = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        std::vector<Matrix> omegas;
        omegas.reserve(n);
        for (size_t j = 0; j < n; ++j)
            omegas.push_back(
                quantum::random_state({dc}, seed + 1000003ULL * t + 17ULL * j).mat());
        Matrix omega_b(dc * db, dc * db);
        Matrix omega_c(dc * dc, dc * dc);
        for (size_t j = 0; j < n; ++j) {
            Matrix tb = kron(omegas[j], red_rho.ensemble.states[j].mat());
            tb *= Complex(weights[j]);
            omega_b += tb;
            Matrix tc = kron(omegas[j], red_sig.states[j].mat());
            tc *= Complex(weights[j]);
            omega_c += tc;
        }
        const double h_b = min_entropy(omega_b, dc, db).value;
        const double h_c = min_entropy(omega_c, dc, dc).value;
        worst = std::max(worst, h_b - h_c);
    }
    return worst;
}

bool matrix_majorization(const Matrix& p, const Matrix& q) {
    if (p.rows() != q.rows() || p.rows() == 0)
        throw ValidationError("matrix_majorization: row counts must match");
    for (int i = 0; i < p.rows(); ++i) {
        for (int j = 0; j < p.cols(); ++j)
            if (p(i, j).real() < 0 || std::abs(p(i, j).imag()) > 0)
                throw ValidationError("matrix_majorization: entries must be nonnegative reals");
        for (int j = 0; j < q.cols(); ++j)
            if (q(i, j).real() < 0 || std::abs(q(i, j).imag()) > 0)
                throw ValidationError("matrix_majorization: entries must be nonnegative reals");
    }
    const int n = p.rows(), c1 = p.cols(), c2 = q.cols();

    ProblemBuilder pb;
    std::vector<int> xb(c1 * c2);
    for (auto& b : xb) b = pb.add_block(1);
    std::vector<int> tp(n * c2), tm(n * c2);
    Matrix one(1, 1);
    one(0, 0) = 1.0;
    for (int k = 0; k < n * c2; ++k) {
        tp[k] = pb.add_block(1);
        tm[k] = pb.add_block(1);
        pb.set_objective(tp[k], one);
        pb.set_objective(tm[k], one);
    }
    // row-stochastic X
    for (int y = 0; y < c1; ++y) {
        const int c = pb.add_constraint(1.0);
        for (int z = 0; z < c2; ++z) pb.add_term(c, xb[y * c2 + z], one);
    }
    // P X - T+ + T- = Q
    Matrix mone(1, 1);
    mone(0, 0) = -1.0;
    for (int i = 0; i < n; ++i)
        for (int z = 0; z < c2; ++z) {
            const int c = pb.add_constraint(q(i, z).real());
            for (int y = 0; y < c1; ++y) {
                if (p(i, y).real() == 0.0) continue;
                Matrix coef(1, 1);
                coef(0, 0) = p(i, y).real();
                pb.add_term(c, xb[y * c2 + z], std::move(coef));
            }
            pb.add_term(c, tp[i * c2 + z], mone);
            pb.add_term(c, tm[i * c2 + z], one);
        }
    SdpSolution sol = sdp::solve(pb.take());
    require_converged(sol, "matrix_majorization");
    return sol.primal_objective <= 1e-8;
}

bool gibbs_dichotomy_check(const std::vector<double>& p, const std::vector<double>& gamma_p,
                           const std::vector<double>& q, const std::vector<double>& gamma_q) {
    if (p.size() != gamma_p.size() || q.size() != gamma_q.size())
        throw ValidationError("gibbs_dichotomy_check: length mismatch");
    for (double g : gamma_p)
        if (g < 1e-12) throw ValidationError("gibbs_dichotomy_check: reference weight too small");
    for (double g : gamma_q)
        if (g < 1e-12) throw ValidationError("gibbs_dichotomy_check: reference weight too small");

    std::vector<double> breakpoints{0.0};
    double tmax = 1.0;
    for (size_t k = 0; k < p.size(); ++k) {
        breakpoints.push_back(p[k] / gamma_p[k]);
        tmax = std::max(tmax, p[k] / gamma_p[k]);
    }
    for (size_t k = 0; k < q.size(); ++k) {
        breakpoints.push_back(q[k] / gamma_q[k]);
        tmax = std::max(tmax, q[k] / gamma_q[k]);
    }
    breakpoints.push_back(tmax + 1.0);

    for (double t : breakpoints) {
        double lhs = 0.0, rhs = 0.0;
        for (size_t k = 0; k < p.size(); ++k) lhs += std::abs(p[k] - t * gamma_p[k]);
        for (size_t k = 0; k < q.size(); ++k) rhs += std::abs(q[k] - t * gamma_q[k]);
        if (lhs < rhs - 1e-12) return false;
    }
    return true;
}

bool thermo_majorization_check(const std::vector<double>& p, const std::vector<double>& q,
                               const std::vector<double>& gamma) {
    if (p.size() != q.size() || p.size() != gamma.size())
        throw ValidationError("thermo_majorization_check: all vectors must have the same length");
    return gibbs_dichotomy_check(p, gamma, q, gamma);
}

bool sublinear_criterion(const Matrix& p, const Matrix& q,
                         const std::vector<std::vector<double>>& functionals) {
    if (p.cols() != q.cols()) throw ValidationError("sublinear_criterion: column dimension mismatch");
    const int n = p.cols();
    for (const auto& r : functionals)
        if (static_cast<int>(r.size()) != n)
            throw ValidationError("sublinear_criterion: functional dimension mismatch");

    auto value = [&](const Matrix& m) {
        double total = 0.0;
        for (int row = 0; row < m.rows(); ++row) {
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& r : functionals) {
                double dot = 0.0;
                for (int c = 0; c < n; ++c) dot += r[c] * m(row, c).real();
                best = std::max(best, dot);
            }
            total += best;
        }
        return total;
    };
    return value(p) >= value(q) - 1e-12;
}

}  // namespace qmajor::major
