#include "qmajor/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qmajor::quantum {

using linalg::Eig;
using linalg::eig_hermitian;
using linalg::kron;
using linalg::multiply;
using linalg::partial_trace;
using linalg::Subsystem;

namespace {

constexpr double kEigFloor = -1e-9;
constexpr double kTraceTol = 1e-9;
constexpr double kChoiMarginalTol = 1e-8;
constexpr double kPovmDeltaFloor = 1e-6;

int product(const std::vector<int>& dims) {
    int n = 1;
    for (int d : dims) {
        if (d < 1) throw ValidationError("dimension must be positive");
        n *= d;
    }
    return n;
}

}  // namespace

DensityOperator::DensityOperator(std::vector<int> dims, Matrix m) : dims_(std::move(dims)) {
    if (dims_.empty()) throw ValidationError("DensityOperator: no dimensions declared");
    const int n = product(dims_);
    if (m.rows() != n || m.cols() != n)
        throw ValidationError("DensityOperator: matrix size does not match declared dims");
    mat_ = HermitianMatrix(std::move(m));
    const Eig eig = eig_hermitian(mat_.mat());
    if (eig.values.front() < kEigFloor)
        throw ValidationError("DensityOperator: negative eigenvalue beyond tolerance");
    const double tr = std::real(mat_.mat().trace());
    if (std::abs(tr - 1.0) > kTraceTol)
        throw ValidationError("DensityOperator: trace differs from one beyond tolerance");
}

int DensityOperator::total_dim() const { return mat_.dim(); }

QuantumChannel::QuantumChannel(int d_in, int d_out, Matrix choi) : d_in_(d_in), d_out_(d_out) {
    if (d_in < 1 || d_out < 1) throw ValidationError("QuantumChannel: bad dimensions");
    if (choi.rows() != d_in * d_out)
        throw ValidationError("QuantumChannel: Choi size does not match d_in*d_out");
    choi_ = HermitianMatrix(std::move(choi));
    if (eig_hermitian(choi_.mat()).values.front() < kEigFloor)
        throw ValidationError("QuantumChannel: Choi not positive semidefinite within tolerance");
    Matrix tp = partial_trace(choi_.mat(), d_in_, d_out_, Subsystem::B);
    tp -= Matrix::identity(d_in_);
    if (tp.frobenius_norm() > kChoiMarginalTol)
        throw ValidationError("QuantumChannel: trace preservation violated");
}

Ensemble::Ensemble(std::vector<double> w, std::vector<DensityOperator> s)
    : weights(std::move(w)), states(std::move(s)) {
    if (weights.size() != states.size() || weights.empty())
        throw ValidationError("Ensemble: weight/state count mismatch");
    double sum = 0.0;
    for (double q : weights) {
        if (q < 1e-12) throw ValidationError("Ensemble: weights must be strictly positive");
        sum += q;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("Ensemble: weights must sum to one");
    const int d = states.front().total_dim();
    for (const auto& st : states)
        if (st.total_dim() != d) throw ValidationError("Ensemble: states of unequal dimension");
}

PovmBasis::PovmBasis(int dim, std::vector<Matrix> elements, std::vector<Matrix> duals)
    : dim_(dim), elements_(std::move(elements)), duals_(std::move(duals)) {
    if (elements_.size() != static_cast<size_t>(dim_) * dim_ || duals_.size() != elements_.size())
        throw ValidationError("PovmBasis: expected d^2 elements with duals");
    Matrix sum(dim_, dim_);
    for (const auto& m : elements_) sum += m;
    sum -= Matrix::identity(dim_);
    if (sum.frobenius_norm() > 1e-10) throw ValidationError("PovmBasis: elements do not sum to identity");
    double worst = 0.0;
    for (size_t j = 0; j < elements_.size(); ++j)
        for (size_t k = 0; k < duals_.size(); ++k) {
            const Complex t = multiply(elements_[j], duals_[k]).trace();
            const double target = (j == k) ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(t - Complex(target)));
        }
    if (worst > 1e-8) throw ValidationError("PovmBasis: dual frame residual too large");
}

namespace {

// dual frame via Gram inversion; throws if the frame is ill conditioned
std::vector<Matrix> dual_frame(int d, const std::vector<Matrix>& elements) {
    const int n = static_cast<int>(elements.size());
    Matrix gram(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) {
            const double g = std::real(multiply(elements[j], elements[k]).trace());
            gram(j, k) = g;
            gram(k, j) = g;
        }
    const Eig eig = eig_hermitian(gram);
    if (eig.values.front() <= 0.0 || eig.values.back() / eig.values.front() > 1e12)
        throw NumericalError("ic_povm: frame Gram matrix ill conditioned");
    // G^{-1} columns give the dual expansion coefficients
    std::vector<Matrix> duals(n, Matrix(d, d));
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            Complex coef = 0.0;
            for (int l = 0; l < n; ++l)
                coef += eig.vectors(k, l) * (1.0 / eig.values[l]) * std::conj(eig.vectors(j, l));
            duals[k] += coef * elements[j];
        }
    }
    return duals;
}

}  // namespace

PovmBasis PovmBasis::perturbed(double delta) const {
    const double scale = 1.0 / (1.0 + dim_ * dim_ * delta);
    std::vector<Matrix> elems;
    elems.reserve(elements_.size());
    for (const auto& m : elements_) {
        Matrix e = m;
        e += Complex(delta) * Matrix::identity(dim_);
        e *= Complex(scale);
        elems.push_back(std::move(e));
    }
    std::vector<Matrix> duals = dual_frame(dim_, elems);
    return PovmBasis(dim_, std::move(elems), std::move(duals));
}

Matrix apply_channel(const QuantumChannel& ch, const Matrix& rho) {
    if (rho.rows() != ch.d_in() || rho.cols() != ch.d_in())
        throw ValidationError("apply_channel: state dimension mismatch");
    const int din = ch.d_in(), dout = ch.d_out();
    const Matrix& j = ch.choi();
    Matrix out(dout, dout);
    for (int o = 0; o < dout; ++o)
        for (int op = 0; op < dout; ++op) {
            Complex s = 0.0;
            for (int i = 0; i < din; ++i)
                for (int ip = 0; ip < din; ++ip) s += rho(i, ip) * j(i * dout + o, ip * dout + op);
            out(o, op) = s;
        }
    return out;
}

DensityOperator apply_channel(const QuantumChannel& ch, const DensityOperator& rho) {
    return DensityOperator({ch.d_out()}, apply_channel(ch, rho.mat()));
}

Matrix apply_channel_on_b(const QuantumChannel& ch, const Matrix& rho_ab, int dim_a) {
    if (rho_ab.rows() != dim_a * ch.d_in())
        throw ValidationError("apply_channel_on_b: dimension mismatch");
    const auto kraus = choi_to_kraus(ch);
    Matrix out(dim_a * ch.d_out(), dim_a * ch.d_out());
    const Matrix id_a = Matrix::identity(dim_a);
    for (const auto& k : kraus) {
        const Matrix lift = kron(id_a, k);
        out += multiply(multiply(lift, rho_ab), lift.adjoint());
    }
    return out;
}

std::vector<Matrix> choi_to_kraus(const QuantumChannel& ch) {
    const int din = ch.d_in(), dout = ch.d_out();
    const Eig eig = eig_hermitian(ch.choi());
    if (eig.values.front() < kEigFloor)
        throw ValidationError("choi_to_kraus: negative Choi eigenvalue beyond tolerance");
    const double cutoff = 1e-13 * std::max(1.0, eig.values.back());
    std::vector<Matrix> kraus;
    for (int a = 0; a < din * dout; ++a) {
        if (eig.values[a] <= cutoff) continue;
        const double root = std::sqrt(eig.values[a]);
        Matrix k(dout, din);
        for (int i = 0; i < din; ++i)
            for (int o = 0; o < dout; ++o) k(o, i) = root * eig.vectors(i * dout + o, a);
        kraus.push_back(std::move(k));
    }
    return kraus;
}

QuantumChannel kraus_to_choi(const std::vector<Matrix>& kraus, int d_in, int d_out) {
    Matrix j(d_in * d_out, d_in * d_out);
    for (const auto& k : kraus) {
        if (k.rows() != d_out || k.cols() != d_in)
            throw ValidationError("kraus_to_choi: operator shape mismatch");
        for (int i = 0; i < d_in; ++i)
            for (int o = 0; o < d_out; ++o)
                for (int ip = 0; ip < d_in; ++ip)
                    for (int op = 0; op < d_out; ++op)
                        j(i * d_out + o, ip * d_out + op) += k(o, i) * std::conj(k(op, ip));
    }
    return QuantumChannel(d_in, d_out, std::move(j));
}

QuantumChannel compose(const QuantumChannel& second, const QuantumChannel& first) {
    if (first.d_out() != second.d_in()) throw ValidationError("compose: dimension mismatch");
    const auto k1 = choi_to_kraus(first);
    const auto k2 = choi_to_kraus(second);
    std::vector<Matrix> ks;
    ks.reserve(k1.size() * k2.size());
    for (const auto& a : k2)
        for (const auto& b : k1) ks.push_back(multiply(a, b));
    return kraus_to_choi(ks, first.d_in(), second.d_out());
}

QuantumChannel identity_channel(int d) {
    Matrix j(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int ip = 0; ip < d; ++ip) j(i * d + i, ip * d + ip) = 1.0;
    return QuantumChannel(d, d, std::move(j));
}

QuantumChannel replace_channel(int d_in, const DensityOperator& target) {
    const Matrix& sigma = target.mat();
    const int dout = target.total_dim();
    Matrix j(d_in * dout, d_in * dout);
    for (int i = 0; i < d_in; ++i)
        for (int o = 0; o < dout; ++o)
            for (int op = 0; op < dout; ++op) j(i * dout + o, i * dout + op) = sigma(o, op);
    return QuantumChannel(d_in, dout, std::move(j));
}

DensityOperator max_entangled(int d) {
    if (d < 2) throw ValidationError("max_entangled: dimension must be at least 2");
    Matrix m(d * d, d * d);
    const double v = 1.0 / d;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i * d + i, j * d + j) = v;
    return DensityOperator({d, d}, std::move(m));
}

Matrix marginal_a(const DensityOperator& rho) {
    if (!rho.bipartite()) throw ValidationError("marginal_a: state not bipartite");
    return partial_trace(rho.mat(), rho.dim(0), rho.dim(1), Subsystem::B);
}

Matrix marginal_b(const DensityOperator& rho) {
    if (!rho.bipartite()) throw ValidationError("marginal_b: state not bipartite");
    return partial_trace(rho.mat(), rho.dim(0), rho.dim(1), Subsystem::A);
}

Matrix projector(const std::vector<Complex>& v) {
    const int d = static_cast<int>(v.size());
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = v[i] * std::conj(v[j]);
    return m;
}

std::vector<Complex> basis_ket(int d, int k) {
    std::vector<Complex> v(d, 0.0);
    v[k] = 1.0;
    return v;
}

DensityOperator project_to_state(std::vector<int> dims, const Matrix& m) {
    const Eig eig = eig_hermitian(m);
    const int n = m.rows();
    Matrix out(n, n);
    double tr = 0.0;
    for (int k = 0; k < n; ++k) {
        const double lk = std::max(0.0, eig.values[k]);
        tr += lk;
        if (lk == 0.0) continue;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out(i, j) += eig.vectors(i, k) * lk * std::conj(eig.vectors(j, k));
    }
    if (tr <= 0.0) throw ValidationError("project_to_state: matrix has no positive part");
    out *= Complex(1.0 / tr);
    return DensityOperator(std::move(dims), std::move(out));
}

PovmBasis ic_povm(int d) {
    if (d < 2) throw ValidationError("ic_povm: dimension must be at least 2");
    std::vector<Matrix> frame;
    frame.reserve(static_cast<size_t>(d) * d);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int m = 0; m < d; ++m) frame.push_back(projector(basis_ket(d, m)));
    for (int m = 0; m < d; ++m)
        for (int n = m + 1; n < d; ++n) {
            std::vector<Complex> plus(d, 0.0), phase(d, 0.0);
            plus[m] = inv_sqrt2;
            plus[n] = inv_sqrt2;
            phase[m] = inv_sqrt2;
            phase[n] = Complex(0.0, inv_sqrt2);
            frame.push_back(projector(plus));
            frame.push_back(projector(phase));
        }

    Matrix t(d, d);
    for (const auto& f : frame) t += f;
    const Matrix tinv = linalg::inv_sqrt_psd(t);
    std::vector<Matrix> elements;
    elements.reserve(frame.size());
    for (const auto& f : frame) elements.push_back(multiply(multiply(tinv, f), tinv));
    std::vector<Matrix> duals = dual_frame(d, elements);
    return PovmBasis(d, std::move(elements), std::move(duals));
}

Reduction reduce_bipartite_with_povm(const DensityOperator& rho_ab, const PovmBasis& povm) {
    if (!rho_ab.bipartite()) throw ValidationError("reduce_bipartite: state not bipartite");
    const int da = rho_ab.dim(0), db = rho_ab.dim(1);
    if (povm.dim() != da) throw ValidationError("reduce_bipartite: POVM dimension mismatch");

    auto run = [&](const PovmBasis& basis) {
        std::vector<double> p;
        std::vector<Matrix> cond;
        for (const auto& m : basis.elements()) {
            const Matrix lifted = kron(m, Matrix::identity(db));
            Matrix tilde = partial_trace(multiply(lifted, rho_ab.mat()), da, db, Subsystem::A);
            const double pj = std::real(tilde.trace());
            p.push_back(pj);
            cond.push_back(std::move(tilde));
        }
        return std::make_pair(std::move(p), std::move(cond));
    };

    auto [p, cond] = run(povm);
    const bool degenerate = *std::min_element(p.begin(), p.end()) < kPovmDeltaFloor;
    PovmBasis used = degenerate ? povm.perturbed(kPovmDeltaFloor) : povm;
    if (degenerate) std::tie(p, cond) = run(used);

    std::vector<DensityOperator> states;
    states.reserve(cond.size());
    for (size_t j = 0; j < cond.size(); ++j) {
        cond[j] *= Complex(1.0 / p[j]);
        // symmetrize away the rounding from the lifted product
        Matrix h(db, db);
        for (int a = 0; a < db; ++a)
            for (int b = 0; b < db; ++b) h(a, b) = 0.5 * (cond[j](a, b) + std::conj(cond[j](b, a)));
        states.push_back(project_to_state({db}, h));
    }
    double sum = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& x : p) x /= sum;  // exact unit sum for the Ensemble invariant
    return Reduction{Ensemble(std::move(p), std::move(states)), std::move(used)};
}

Ensemble reduce_bipartite_to_ensemble(const DensityOperator& rho_ab, const PovmBasis& povm) {
    return reduce_bipartite_with_povm(rho_ab, povm).ensemble;
}

DensityOperator random_state(std::vector<int> dims, std::uint64_t seed) {
    const int n = product(dims);
    Rng rng(seed);
    Matrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = Complex(rng.gaussian(), rng.gaussian());
    Matrix rho = multiply(g, g.adjoint());
    rho *= Complex(1.0 / std::real(rho.trace()));
    // exact hermitization of the product
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const Complex avg = 0.5 * (rho(i, j) + std::conj(rho(j, i)));
            rho(i, j) = avg;
            rho(j, i) = std::conj(avg);
        }
    return DensityOperator(std::move(dims), std::move(rho));
}

DensityOperator random_pure_state(std::vector<int> dims, std::uint64_t seed) {
    const int n = product(dims);
    Rng rng(seed);
    std::vector<Complex> v(n);
    double norm2 = 0.0;
    for (auto& x : v) {
        x = Complex(rng.gaussian(), rng.gaussian());
        norm2 += std::norm(x);
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : v) x *= inv;
    return DensityOperator(std::move(dims), projector(v));
}

QuantumChannel random_channel(int d_in, int d_out, std::uint64_t seed) {
    const int denv = d_in * d_out;
    const int rows = d_out * denv;
    Rng rng(seed);
    // random isometry: Gaussian block, columns orthonormalized
    Matrix v(rows, d_in);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < d_in; ++j) v(i, j) = Complex(rng.gaussian(), rng.gaussian());
    for (int c = 0; c < d_in; ++c) {
        for (int prev = 0; prev < c; ++prev) {
            Complex dot = 0.0;
            for (int i = 0; i < rows; ++i) dot += std::conj(v(i, prev)) * v(i, c);
            for (int i = 0; i < rows; ++i) v(i, c) -= dot * v(i, prev);
        }
        double norm2 = 0.0;
        for (int i = 0; i < rows; ++i) norm2 += std::norm(v(i, c));
        const double inv = 1.0 / std::sqrt(norm2);
        for (int i = 0; i < rows; ++i) v(i, c) *= inv;
    }
    std::vector<Matrix> kraus;
    kraus.reserve(denv);
    for (int e = 0; e < denv; ++e) {
        Matrix k(d_out, d_in);
        for (int o = 0; o < d_out; ++o)
            for (int i = 0; i < d_in; ++i) k(o, i) = v(o * denv + e, i);
        kraus.push_back(std::move(k));
    }
    return kraus_to_choi(kraus, d_in, d_out);
}

}  // namespace qmajor::quantum
