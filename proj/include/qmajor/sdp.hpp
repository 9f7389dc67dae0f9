#pragma once

#include <ostream>
#include <vector>

#include "qmajor/linalg.hpp"

namespace qmajor::sdp {

using linalg::Matrix;

// Standard-form conic program:
//   optimize  sum_b <objective[b], X_b>
//   subject to sum_b <lhs[j][b], X_b> = rhs[j]   for every constraint j
//   X_b Hermitian PSD (block of dimension 1 = nonnegative scalar)
// <A, B> denotes Re Tr(A^dagger B).
struct SdpProblem {
    struct Constraint {
        std::vector<Matrix> lhs;  // one entry per block; empty matrix = zero
        double rhs = 0.0;
    };

    std::vector<int> blocks;
    std::vector<Matrix> objective;  // empty matrix = zero block objective
    std::vector<Constraint> constraints;
    bool maximize = false;
    // Objective values of this problem are reported divided by this factor.
    // embed_complex sets it to 2 so that solving the embedding reproduces the
    // original objective.
    double objective_scale = 1.0;
};

enum class SdpStatus { optimal, infeasible_certificate, max_iterations };

struct SdpSolution {
    SdpStatus status = SdpStatus::max_iterations;
    std::vector<Matrix> primal;    // per-block PSD matrices
    std::vector<double> dual;      // multiplier per constraint
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double primal_residual = 0.0;  // relative affine residual + cone violation
    double dual_residual = 0.0;    // cone violation of the dual slack
    double gap = 0.0;              // relative primal-dual gap
    std::vector<double> certificate;  // improving ray when infeasible
    int iterations = 0;
    bool polished = false;
};

struct SdpSettings {
    double tolerance = 1e-8;
    int max_iterations = 200000;
    std::ostream* trace = nullptr;  // per-interval line: iter primal dual gap
};

// Maps each Hermitian d x d block X = A + iB to the real symmetric 2d x 2d
// block [[A, -B], [B, A]]. Inner products double, so constraint rhs values
// are doubled and objective_scale is set to 2.
SdpProblem embed_complex(const SdpProblem& p);

SdpSolution solve(const SdpProblem& p, const SdpSettings& settings = {});

// Re Tr(a^dagger b); the real inner product all constraints are built on.
double inner(const Matrix& a, const Matrix& b);

// Incremental assembly of SdpProblem instances.
class ProblemBuilder {
public:
    int add_block(int dim) {
        p_.blocks.push_back(dim);
        p_.objective.emplace_back();
        return static_cast<int>(p_.blocks.size()) - 1;
    }
    void set_objective(int block, Matrix m) { p_.objective[block] = std::move(m); }
    int add_constraint(double rhs) {
        SdpProblem::Constraint c;
        c.lhs.resize(p_.blocks.size());
        c.rhs = rhs;
        p_.constraints.push_back(std::move(c));
        return static_cast<int>(p_.constraints.size()) - 1;
    }
    void add_term(int constraint, int block, Matrix h) {
        auto& slot = p_.constraints[constraint].lhs[block];
        if (slot.empty())
            slot = std::move(h);
        else
            slot += h;
    }
    void set_maximize(bool maximize) { p_.maximize = maximize; }
    SdpProblem take() {
        for (auto& c : p_.constraints) c.lhs.resize(p_.blocks.size());
        return std::move(p_);
    }

private:
    SdpProblem p_;
};

}  // namespace qmajor::sdp
