#pragma once

#include <vector>

#include "qmajor/linalg.hpp"

namespace qmajor::quantum {

using linalg::Complex;
using linalg::HermitianMatrix;
using linalg::Matrix;

// Positive semidefinite unit-trace operator with declared subsystem splits.
// Validation tolerances: min eigenvalue >= -1e-9, |Tr - 1| <= 1e-9. Inputs
// outside tolerance are rejected, never projected.
class DensityOperator {
public:
    DensityOperator() = default;
    DensityOperator(std::vector<int> dims, Matrix m);

    const std::vector<int>& dims() const { return dims_; }
    int total_dim() const;
    int dim(size_t factor) const { return dims_.at(factor); }
    const Matrix& mat() const { return mat_.mat(); }

    bool bipartite() const { return dims_.size() == 2; }

private:
    std::vector<int> dims_;
    HermitianMatrix mat_;
};

// CPTP map as its Choi matrix on input (x) output, with the action
//   E(rho) = Tr_in[ J (rho^T (x) I_out) ].
class QuantumChannel {
public:
    QuantumChannel() = default;
    QuantumChannel(int d_in, int d_out, Matrix choi);

    int d_in() const { return d_in_; }
    int d_out() const { return d_out_; }
    const Matrix& choi() const { return choi_.mat(); }

private:
    int d_in_ = 0;
    int d_out_ = 0;
    HermitianMatrix choi_;
};

// Weighted family of equal-dimension states; weights strictly positive
// (floor 1e-12) and summing to one within 1e-12.
struct Ensemble {
    std::vector<double> weights;
    std::vector<DensityOperator> states;

    Ensemble() = default;
    Ensemble(std::vector<double> w, std::vector<DensityOperator> s);

    size_t size() const { return weights.size(); }
    int dim() const { return states.empty() ? 0 : states.front().total_dim(); }
};

// Informationally complete POVM together with its dual frame:
// Tr[M_j Q_k] = delta_jk, sum_j M_j = I.
class PovmBasis {
public:
    PovmBasis(int dim, std::vector<Matrix> elements, std::vector<Matrix> duals);

    int dim() const { return dim_; }
    size_t size() const { return elements_.size(); }
    const std::vector<Matrix>& elements() const { return elements_; }
    const std::vector<Matrix>& duals() const { return duals_; }

    // (M_j + delta I) / (1 + d^2 delta), duals recomputed
    PovmBasis perturbed(double delta) const;

private:
    int dim_;
    std::vector<Matrix> elements_;
    std::vector<Matrix> duals_;
};

// --- channel machinery ---

Matrix apply_channel(const QuantumChannel& ch, const Matrix& rho);
DensityOperator apply_channel(const QuantumChannel& ch, const DensityOperator& rho);

// (id_A (x) E) acting on a bipartite state with first factor dimension dim_a
Matrix apply_channel_on_b(const QuantumChannel& ch, const Matrix& rho_ab, int dim_a);

std::vector<Matrix> choi_to_kraus(const QuantumChannel& ch);
QuantumChannel kraus_to_choi(const std::vector<Matrix>& kraus, int d_in, int d_out);
QuantumChannel compose(const QuantumChannel& second, const QuantumChannel& first);

QuantumChannel identity_channel(int d);
QuantumChannel replace_channel(int d_in, const DensityOperator& target);

// --- states ---

DensityOperator max_entangled(int d);
Matrix marginal_a(const DensityOperator& bipartite);
Matrix marginal_b(const DensityOperator& bipartite);

// rank-1 projector |v><v| (v need not be normalized)
Matrix projector(const std::vector<Complex>& v);
std::vector<Complex> basis_ket(int d, int k);

// eigenvalue clamp + renormalization; deliberate construction step for
// turning solver output into states, not a validation bypass
DensityOperator project_to_state(std::vector<int> dims, const Matrix& m);

// --- tomography frame ---

PovmBasis ic_povm(int d);

struct Reduction {
    Ensemble ensemble;
    PovmBasis povm;  // the frame actually used (possibly perturbed)
};

// Conditional ensemble {(p_j, Tr_A[(M_j (x) I) rho]/p_j)}. If some outcome
// probability falls below delta_povm = 1e-6 the frame is perturbed once with
// delta = 1e-6 and the reduction recomputed.
Reduction reduce_bipartite_with_povm(const DensityOperator& rho_ab, const PovmBasis& povm);
Ensemble reduce_bipartite_to_ensemble(const DensityOperator& rho_ab, const PovmBasis& povm);

// --- generators (explicit-seed, reproducible) ---

DensityOperator random_state(std::vector<int> dims, std::uint64_t seed);
QuantumChannel random_channel(int d_in, int d_out, std::uint64_t seed);
DensityOperator random_pure_state(std::vector<int> dims, std::uint64_t seed);

}  // namespace qmajor::quantum
