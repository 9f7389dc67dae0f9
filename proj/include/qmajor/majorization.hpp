#pragma once

#include <optional>
#include <string>

#include "qmajor/minentropy.hpp"
#include "qmajor/quantum.hpp"
#include "qmajor/sdp.hpp"

namespace qmajor::major {

using linalg::Matrix;
using quantum::DensityOperator;
using quantum::Ensemble;
using quantum::QuantumChannel;

constexpr double kFeasTol = 1e-6;      // feasibility threshold on alpha and slack
constexpr double kMarginalBand = 1e-4; // |alpha-1| below this is flagged marginal

// Convert the ensemble {(q_i, rho_i)} on B into the targets {sigma_i} on C.
struct ConversionProblem {
    Ensemble inputs;
    std::vector<DensityOperator> targets;

    ConversionProblem(Ensemble in, std::vector<DensityOperator> out);
    size_t size() const { return inputs.size(); }
    int dim_b() const { return inputs.dim(); }
    int dim_c() const { return targets.front().total_dim(); }
};

struct WitnessState {
    double weight;
    DensityOperator state;
};

struct ConversionReport {
    bool feasible = false;
    bool marginal = false;  // |alpha - 1| inside the marginal band
    double alpha = 0.0;
    double beta = 0.0;
    double slack = 0.0;  // direct-SDP optimum: sum of trace-norm action residuals
    std::optional<QuantumChannel> channel;
    std::vector<WitnessState> witness;
    double witness_violation = 0.0;  // bits
    double covariance_residual = 0.0;  // used by the covariant variant
    std::string notes;
};

struct AlphaResult {
    double alpha = 0.0;
    Matrix z;
    std::vector<Matrix> x;  // subnormalized witness candidates on A ~ C
};

struct BetaResult {
    double beta = 0.0;
    double y = 0.0;
    Matrix tau;  // on A (x) B
};

// alpha = min Tr Z  s.t.  I (x) Z >= sum_i X_i (x) rho_i,
//                         sum_i Tr(sigma_i^T X_i) = 1,  X_i >= 0
AlphaResult compute_alpha(const ConversionProblem& p);

// beta = max y  s.t.  tau >= 0,  tau^B <= I,
//                     y sigma_i^T <= Tr_B[tau (I (x) rho_i)]  for all i
BetaResult compute_beta(const ConversionProblem& p);

// Normalizes the optimal X_i into weighted witness states; requires
// alpha < 1 - kFeasTol.
std::vector<WitnessState> extract_witness(const ConversionProblem& p, const AlphaResult& a);

// Direct Choi feasibility SDP cross-checked against the alpha program; the
// two verdicts must agree whenever |alpha-1| clears the marginal band.
ConversionReport decide_ensemble_conversion(const ConversionProblem& p);

// Bipartite quantum majorization: marginal compatibility check, direct SDP on
// the Choi of the B->C channel, and the measure-and-prepare reduction route.
ConversionReport decide_bipartite_qmaj(const DensityOperator& rho_ab,
                                       const DensityOperator& sigma_ac);

// Samples measure-and-prepare channels on A and returns the largest violation
// of the min-entropy ordering (bits); expected <= 1e-6 on feasible pairs.
double verify_monotone_necessity(const DensityOperator& rho_ab, const DensityOperator& sigma_ac,
                                 int trials, std::uint64_t seed);

// Row-stochastic matrix factorization test: true iff Q = P X for some row
// stochastic X >= 0 (rows of P and Q are distributions over outcomes).
bool matrix_majorization(const Matrix& p, const Matrix& q);

// sum_k |p_k - t g_k| >= sum_k |q_k - t h_k| at every breakpoint; both sides
// are piecewise linear in t with equal endpoints slopes, so the breakpoint
// grid is exhaustive.
bool gibbs_dichotomy_check(const std::vector<double>& p, const std::vector<double>& gamma_p,
                           const std::vector<double>& q, const std::vector<double>& gamma_q);
bool thermo_majorization_check(const std::vector<double>& p, const std::vector<double>& q,
                               const std::vector<double>& gamma);

// Dahl-style criterion with f(s) = max_x r_x . s applied to the rows of P
// and Q (rows are per-outcome vectors across the n compared distributions).
bool sublinear_criterion(const Matrix& p, const Matrix& q,
                         const std::vector<std::vector<double>>& functionals);

// Tr[partial_pairing(E, rho) X] = Tr[E (X (x) rho)] for X on the first factor.
Matrix partial_pairing(const Matrix& e_ab, const Matrix& rho_b, int da, int db);

// K with Tr[K J] = <E, (id_A (x) Channel_J)(rho_ab)> for E on A (x) C and the
// Choi matrix J on B (x) C.
Matrix bipartite_action_coefficient(const Matrix& e_ac, const Matrix& rho_ab, int da, int db,
                                    int dc);

}  // namespace qmajor::major
