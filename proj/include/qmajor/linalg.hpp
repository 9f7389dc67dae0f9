#pragma once

#include <complex>
#include <vector>

#include "qmajor/common.hpp"

namespace qmajor::linalg {

using Complex = std::complex<double>;

// Dense complex matrix, row-major. Value type: cheap to copy at the sizes
// this project works with (per-factor dimensions up to a few dozen).
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}

    static Matrix identity(int d) {
        Matrix m(d, d);
        for (int i = 0; i < d; ++i) m(i, i) = 1.0;
        return m;
    }
    static Matrix zero(int rows, int cols) { return Matrix(rows, cols); }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }
    bool square() const { return rows_ == cols_ && rows_ > 0; }

    Complex& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    const Complex& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    Complex* data() { return a_.data(); }
    const Complex* data() const { return a_.data(); }

    Matrix& operator+=(const Matrix& o);
    Matrix& operator-=(const Matrix& o);
    Matrix& operator*=(Complex s);

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, Complex s) { return a *= s; }
    friend Matrix operator*(Complex s, Matrix a) { return a *= s; }

    Matrix adjoint() const;
    Matrix transpose() const;
    Matrix conj() const;

    Complex trace() const;
    double frobenius_norm() const;
    double max_abs() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<Complex> a_;
};

enum class Subsystem { A, B };

// Production kernels. multiply/kron switch to OpenMP-parallel loops above a
// size threshold; below it they run serially (the solver's working sets are
// small and per-instance parallelism lives in the batch drivers instead).
Matrix multiply(const Matrix& a, const Matrix& b);
Matrix kron(const Matrix& a, const Matrix& b);
Matrix partial_trace(const Matrix& m, int dim_a, int dim_b, Subsystem traced);

struct Eig {
    std::vector<double> values;  // ascending
    Matrix vectors;              // unitary, columns are eigenvectors
};

// Hermitian eigendecomposition: Householder tridiagonalization followed by
// implicit-shift QL. Throws ValidationError if the input is not Hermitian
// within 1e-12 * ||M||.
Eig eig_hermitian(const Matrix& m);

double trace_norm(const Matrix& m);
Matrix matrix_exp_hermitian(const Matrix& m);

// f applied to the spectrum of a Hermitian matrix
Matrix hermitian_function(const Matrix& m, double (*f)(double));
Matrix sqrt_psd(const Matrix& m);
Matrix inv_sqrt_psd(const Matrix& m);

bool is_hermitian(const Matrix& m, double tol_rel = 1e-12);
double hermiticity_residual(const Matrix& m);
double min_eigenvalue(const Matrix& m);

// Hermitian matrix with validated symmetry (residual <= 1e-12 * ||M||).
class HermitianMatrix {
public:
    HermitianMatrix() = default;
    explicit HermitianMatrix(Matrix m);

    int dim() const { return mat_.rows(); }
    const Matrix& mat() const { return mat_; }
    operator const Matrix&() const { return mat_; }

private:
    Matrix mat_;
};

// Orthonormal basis of the real vector space of d x d Hermitian matrices:
// diagonal units, then (e_ij + e_ji)/sqrt(2), then i(e_ij - e_ji)/sqrt(2).
std::vector<Matrix> hermitian_basis(int d);

// Serial reference implementations kept as independent oracles for the
// production kernels; used by the test and benchmark targets only.
namespace ref {
Matrix multiply(const Matrix& a, const Matrix& b);
Matrix kron(const Matrix& a, const Matrix& b);
Matrix partial_trace(const Matrix& m, int dim_a, int dim_b, Subsystem traced);
Eig eig_jacobi(const Matrix& m);
}  // namespace ref

}  // namespace qmajor::linalg
