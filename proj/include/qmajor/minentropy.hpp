#pragma once

#include "qmajor/quantum.hpp"
#include "qmajor/sdp.hpp"

namespace qmajor::minent {

using linalg::Matrix;
using quantum::DensityOperator;
using quantum::Ensemble;

struct MinEntropyResult {
    double value = 0.0;      // bits
    Matrix optimal_tau;      // primal witness on B: I (x) tau >= Omega
    Matrix optimal_x;        // dual witness: X >= 0, Tr_A X = I_B
    double gap = 0.0;        // |primal - dual| in bits
};

// Conditional min-entropy H_min(A|B) = -log2 min{Tr tau : I_A (x) tau >= Omega}.
// Solves the primal and the dual program and accepts only when they agree to
// 1e-6 bits; otherwise throws NumericalError. Sub-normalized omega (trace
// below one) is accepted.
MinEntropyResult min_entropy(const Matrix& omega, int dim_a, int dim_b);
MinEntropyResult min_entropy(const DensityOperator& omega);

// Optimal discrimination probability min{Tr tau : tau >= q_i rho_i for all i};
// equals 2^{-H_min(R|A)} of the classical-quantum embedding.
double guessing_probability(const Ensemble& ens);

// Two-outcome closed form  1/2 + 1/2 || sum_i q_i (r1_i - r2_i) rho_i ||_1
double helstrom_pair(const Ensemble& ens, const std::vector<double>& r1,
                     const std::vector<double>& r2);

// Fully classical closed form: 2^{-H_min} = sum_y max_x p(x,y).
// p is a joint probability matrix with rows indexed by x.
double min_entropy_classical(const std::vector<std::vector<double>>& p);

}  // namespace qmajor::minent
