#include "qmajor/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <omp.h>

namespace qmajor::linalg {

namespace {

// flop threshold below which the parallel kernels stay serial
constexpr double kParallelFlops = 8.0e6;

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError(std::string(op) + ": shape mismatch");
}

}  // namespace

Matrix& Matrix::operator+=(const Matrix& o) {
    check_same_shape(*this, o, "operator+");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
    check_same_shape(*this, o, "operator-");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

Matrix& Matrix::operator*=(Complex s) {
    for (auto& x : a_) x *= s;
    return *this;
}

Matrix Matrix::adjoint() const {
    Matrix out(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
}

Matrix Matrix::transpose() const {
    Matrix out(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
}

Matrix Matrix::conj() const {
    Matrix out(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) out(i, j) = std::conj((*this)(i, j));
    return out;
}

Complex Matrix::trace() const {
    if (!square()) throw ValidationError("trace: matrix not square");
    Complex t = 0.0;
    for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
}

double Matrix::frobenius_norm() const {
    double s = 0.0;
    for (const auto& x : a_) s += std::norm(x);
    return std::sqrt(s);
}

double Matrix::max_abs() const {
    double s = 0.0;
    for (const auto& x : a_) s = std::max(s, std::abs(x));
    return s;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ValidationError("multiply: inner dimension mismatch");
    const int r = a.rows(), c = b.cols(), inner = a.cols();
    Matrix out(r, c);
    const double flops = 2.0 * r * c * inner;
    if (flops >= kParallelFlops) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < r; ++i) {
            for (int k = 0; k < inner; ++k) {
                const Complex aik = a(i, k);
                if (aik == Complex(0.0)) continue;
                for (int j = 0; j < c; ++j) out(i, j) += aik * b(k, j);
            }
        }
    } else {
        for (int i = 0; i < r; ++i) {
            for (int k = 0; k < inner; ++k) {
                const Complex aik = a(i, k);
                if (aik == Complex(0.0)) continue;
                for (int j = 0; j < c; ++j) out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    const int ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
    Matrix out(ra * rb, ca * cb);
    const double work = static_cast<double>(ra) * ca * rb * cb;
    const bool parallel = work >= kParallelFlops;
#pragma omp parallel for schedule(static) if (parallel)
    for (int i = 0; i < ra; ++i) {
        for (int j = 0; j < ca; ++j) {
            const Complex aij = a(i, j);
            if (aij == Complex(0.0)) continue;
            for (int k = 0; k < rb; ++k)
                for (int l = 0; l < cb; ++l) out(i * rb + k, j * cb + l) = aij * b(k, l);
        }
    }
    return out;
}

Matrix partial_trace(const Matrix& m, int dim_a, int dim_b, Subsystem traced) {
    if (!m.square() || m.rows() != dim_a * dim_b)
        throw ValidationError("partial_trace: dimension mismatch");
    if (traced == Subsystem::B) {
        Matrix out(dim_a, dim_a);
        for (int i = 0; i < dim_a; ++i)
            for (int j = 0; j < dim_a; ++j) {
                Complex s = 0.0;
                for (int b = 0; b < dim_b; ++b) s += m(i * dim_b + b, j * dim_b + b);
                out(i, j) = s;
            }
        return out;
    }
    Matrix out(dim_b, dim_b);
    for (int a = 0; a < dim_a; ++a)
        for (int i = 0; i < dim_b; ++i)
            for (int j = 0; j < dim_b; ++j) out(i, j) += m(a * dim_b + i, a * dim_b + j);
    return out;
}

double hermiticity_residual(const Matrix& m) {
    if (!m.square()) throw ValidationError("hermiticity_residual: matrix not square");
    double s = 0.0;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) s += std::norm(m(i, j) - std::conj(m(j, i)));
    return std::sqrt(s);
}

bool is_hermitian(const Matrix& m, double tol_rel) {
    if (!m.square()) return false;
    const double scale = std::max(1.0, m.frobenius_norm());
    return hermiticity_residual(m) <= tol_rel * scale;
}

HermitianMatrix::HermitianMatrix(Matrix m) : mat_(std::move(m)) {
    if (!mat_.square()) throw ValidationError("HermitianMatrix: not square");
    if (!is_hermitian(mat_)) throw ValidationError("HermitianMatrix: hermiticity residual too large");
}

namespace {

// Householder reduction of a Hermitian matrix to complex tridiagonal form,
// followed by a diagonal phase similarity that makes the subdiagonal real.
// On return: d = diagonal, e = real subdiagonal (e[i] = T(i,i+1)), q = the
// accumulated unitary with A = q T q^dagger.
void tridiagonalize(Matrix a, std::vector<double>& d, std::vector<double>& e, Matrix& q) {
    const int n = a.rows();
    q = Matrix::identity(n);
    d.assign(n, 0.0);
    e.assign(n, 0.0);

    std::vector<Complex> v(n), p(n);
    for (int k = 0; k + 2 < n; ++k) {
        const int m = n - k - 1;
        // 1-norm column scaling guards the squared norms against underflow;
        // divide entrywise, the scale itself may be denormal
        double scale = 0.0;
        for (int i = k + 1; i < n; ++i)
            scale += std::abs(a(i, k).real()) + std::abs(a(i, k).imag());
        if (scale == 0.0) continue;

        double xnorm2 = 0.0;
        for (int i = k + 2; i < n; ++i) xnorm2 += std::norm(a(i, k) / scale);
        if (xnorm2 == 0.0) continue;
        const Complex alpha = a(k + 1, k) / scale;
        const double total = std::sqrt(std::norm(alpha) + xnorm2);

        const Complex phase = (std::abs(alpha) > 0.0) ? alpha / std::abs(alpha) : Complex(1.0);
        const Complex beta = -phase * total;

        double vnorm2 = 0.0;
        v[0] = alpha - beta;
        vnorm2 += std::norm(v[0]);
        for (int i = 1; i < m; ++i) {
            v[i] = a(k + 1 + i, k) / scale;
            vnorm2 += std::norm(v[i]);
        }
        const double tau = 2.0 / vnorm2;

        // apply the reflector to the trailing block: B <- H B H
        Complex vdotp = 0.0;
        for (int i = 0; i < m; ++i) {
            Complex s = 0.0;
            for (int j = 0; j < m; ++j) s += a(k + 1 + i, k + 1 + j) * v[j];
            p[i] = tau * s;
            vdotp += std::conj(v[i]) * p[i];
        }
        const Complex kappa = 0.5 * tau * vdotp;
        for (int i = 0; i < m; ++i) p[i] -= kappa * v[i];
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                a(k + 1 + i, k + 1 + j) -= v[i] * std::conj(p[j]) + p[i] * std::conj(v[j]);

        a(k + 1, k) = beta * scale;
        a(k, k + 1) = std::conj(beta) * scale;
        for (int i = k + 2; i < n; ++i) {
            a(i, k) = 0.0;
            a(k, i) = 0.0;
        }

        // accumulate q <- q H on columns k+1..n-1
        for (int r = 0; r < n; ++r) {
            Complex s = 0.0;
            for (int j = 0; j < m; ++j) s += q(r, k + 1 + j) * v[j];
            s *= tau;
            for (int j = 0; j < m; ++j) q(r, k + 1 + j) -= s * std::conj(v[j]);
        }
    }

    // phase similarity: make the subdiagonal real nonnegative
    std::vector<Complex> dphase(n, Complex(1.0));
    for (int i = 0; i + 1 < n; ++i) {
        const Complex ei = a(i + 1, i) * dphase[i];
        const double mag = std::abs(ei);
        dphase[i + 1] = (mag > 0.0) ? ei / mag : dphase[i];
        e[i] = mag;
    }
    for (int i = 0; i < n; ++i) d[i] = std::real(a(i, i));
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r) q(r, c) *= dphase[c];
}

// Implicit-shift QL on a real symmetric tridiagonal, rotations accumulated
// into the complex columns of q.
void tql_implicit(std::vector<double>& d, std::vector<double>& e, Matrix& q) {
    const int n = static_cast<int>(d.size());
    const double eps = std::numeric_limits<double>::epsilon();
    double anorm = 0.0;
    for (int i = 0; i < n; ++i) anorm = std::max(anorm, std::abs(d[i]) + std::abs(e[i]));
    // deflation needs an absolute floor as well: with clustered zero
    // eigenvalues the neighbouring diagonal entries vanish and a purely
    // relative test never fires
    const double floor = eps * anorm;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd + floor) break;
            }
            if (m != l) {
                if (iter++ == 64) throw NumericalError("eig_hermitian: QL failed to converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < q.rows(); ++k) {
                        const Complex fk = q(k, i + 1);
                        q(k, i + 1) = s * q(k, i) + c * fk;
                        q(k, i) = c * q(k, i) - s * fk;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

void sort_eig(Eig& eig) {
    const int n = static_cast<int>(eig.values.size());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return eig.values[a] < eig.values[b]; });
    std::vector<double> vals(n);
    Matrix vecs(n, n);
    for (int c = 0; c < n; ++c) {
        vals[c] = eig.values[idx[c]];
        for (int r = 0; r < n; ++r) vecs(r, c) = eig.vectors(r, idx[c]);
    }
    eig.values = std::move(vals);
    eig.vectors = std::move(vecs);
}

void require_hermitian(const Matrix& m, const char* who) {
    if (!m.square()) throw ValidationError(std::string(who) + ": matrix not square");
    if (!is_hermitian(m)) throw ValidationError(std::string(who) + ": input not Hermitian");
}

}  // namespace

Eig eig_hermitian(const Matrix& m) {
    require_hermitian(m, "eig_hermitian");
    const int n = m.rows();
    Eig out;
    if (n == 1) {
        out.values = {std::real(m(0, 0))};
        out.vectors = Matrix::identity(1);
        return out;
    }
    // symmetrize once so rounding in the input cannot bias the reduction
    Matrix h(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));

    std::vector<double> d, e;
    tridiagonalize(std::move(h), d, e, out.vectors);
#ifdef QMAJOR_EIG_DEBUG_DUMP
    try {
        tql_implicit(d, e, out.vectors);
    } catch (const NumericalError&) {
        FILE* f = fopen("/tmp/failmat.txt", "w");
        fprintf(f, "%d\n", n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                fprintf(f, "%.17e %.17e\n", m(i, j).real(), m(i, j).imag());
        fclose(f);
        throw;
    }
#else
    tql_implicit(d, e, out.vectors);
#endif
    out.values = std::move(d);
    sort_eig(out);
    return out;
}

double min_eigenvalue(const Matrix& m) {
    return eig_hermitian(m).values.front();
}

double trace_norm(const Matrix& m) {
    if (!m.square()) throw ValidationError("trace_norm: matrix not square");
    if (is_hermitian(m)) {
        const Eig eig = eig_hermitian(m);
        double s = 0.0;
        for (double v : eig.values) s += std::abs(v);
        return s;
    }
    const Matrix gram = multiply(m.adjoint(), m);
    const Eig eig = eig_hermitian(gram);
    double s = 0.0;
    for (double v : eig.values) s += std::sqrt(std::max(0.0, v));
    return s;
}

Matrix hermitian_function(const Matrix& m, double (*f)(double)) {
    require_hermitian(m, "hermitian_function");
    const Eig eig = eig_hermitian(m);
    const int n = m.rows();
    Matrix out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Complex s = 0.0;
            for (int k = 0; k < n; ++k)
                s += eig.vectors(i, k) * f(eig.values[k]) * std::conj(eig.vectors(j, k));
            out(i, j) = s;
        }
    // clean rounding so the result is Hermitian to machine precision
    for (int i = 0; i < n; ++i) {
        out(i, i) = std::real(out(i, i));
        for (int j = i + 1; j < n; ++j) {
            const Complex avg = 0.5 * (out(i, j) + std::conj(out(j, i)));
            out(i, j) = avg;
            out(j, i) = std::conj(avg);
        }
    }
    return out;
}

Matrix matrix_exp_hermitian(const Matrix& m) {
    return hermitian_function(m, [](double x) { return std::exp(x); });
}

Matrix sqrt_psd(const Matrix& m) {
    return hermitian_function(m, [](double x) { return std::sqrt(std::max(0.0, x)); });
}

Matrix inv_sqrt_psd(const Matrix& m) {
    require_hermitian(m, "inv_sqrt_psd");
    const Eig eig = eig_hermitian(m);
    const double floor = 1e-14 * std::max(1.0, eig.values.back());
    if (eig.values.front() <= floor)
        throw NumericalError("inv_sqrt_psd: matrix numerically singular");
    const int n = m.rows();
    Matrix out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Complex s = 0.0;
            for (int k = 0; k < n; ++k)
                s += eig.vectors(i, k) * (1.0 / std::sqrt(eig.values[k])) * std::conj(eig.vectors(j, k));
            out(i, j) = s;
        }
    return out;
}

std::vector<Matrix> hermitian_basis(int d) {
    std::vector<Matrix> basis;
    basis.reserve(static_cast<size_t>(d) * d);
    for (int i = 0; i < d; ++i) {
        Matrix m(d, d);
        m(i, i) = 1.0;
        basis.push_back(std::move(m));
    }
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            Matrix s(d, d);
            s(i, j) = inv_sqrt2;
            s(j, i) = inv_sqrt2;
            basis.push_back(std::move(s));
            Matrix a(d, d);
            a(i, j) = Complex(0.0, inv_sqrt2);
            a(j, i) = Complex(0.0, -inv_sqrt2);
            basis.push_back(std::move(a));
        }
    return basis;
}

namespace ref {

Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ValidationError("ref::multiply: inner dimension mismatch");
    Matrix out(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j) {
            Complex s = 0.0;
            for (int k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            out(i, j) = s;
        }
    return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j)
            out(i, j) = a(i / b.rows(), j / b.cols()) * b(i % b.rows(), j % b.cols());
    return out;
}

Matrix partial_trace(const Matrix& m, int dim_a, int dim_b, Subsystem traced) {
    if (!m.square() || m.rows() != dim_a * dim_b)
        throw ValidationError("ref::partial_trace: dimension mismatch");
    const int keep = (traced == Subsystem::B) ? dim_a : dim_b;
    Matrix out(keep, keep);
    // deliberately naive index sum, kept as the oracle
    for (int i = 0; i < dim_a; ++i)
        for (int j = 0; j < dim_a; ++j)
            for (int k = 0; k < dim_b; ++k)
                for (int l = 0; l < dim_b; ++l) {
                    const Complex x = m(i * dim_b + k, j * dim_b + l);
                    if (traced == Subsystem::B) {
                        if (k == l) out(i, j) += x;
                    } else {
                        if (i == j) out(k, l) += x;
                    }
                }
    return out;
}

Eig eig_jacobi(const Matrix& m) {
    if (!m.square()) throw ValidationError("ref::eig_jacobi: matrix not square");
    if (!is_hermitian(m)) throw ValidationError("ref::eig_jacobi: input not Hermitian");
    const int n = m.rows();
    Matrix a = m;
    Matrix v = Matrix::identity(n);
    const double scale = std::max(1.0, a.frobenius_norm());

    for (int sweep = 0; sweep < 128; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += std::norm(a(p, q));
        if (std::sqrt(2.0 * off) <= 1e-15 * n * scale) break;

        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const Complex apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag <= 1e-18 * scale) continue;
                const Complex phase = apq / mag;
                const double app = std::real(a(p, p));
                const double aqq = std::real(a(q, q));
                const double tau = (aqq - app) / (2.0 * mag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                // columns: (p q) <- (p q) * [[c, s*phase], [-s*conj(phase), c]]
                for (int k = 0; k < n; ++k) {
                    const Complex akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * std::conj(phase) * akq;
                    a(k, q) = s * phase * akp + c * akq;
                }
                // rows: J^dagger from the left
                for (int k = 0; k < n; ++k) {
                    const Complex apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * phase * aqk;
                    a(q, k) = s * std::conj(phase) * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const Complex vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * std::conj(phase) * vkq;
                    v(k, q) = s * phase * vkp + c * vkq;
                }
            }
    }

    Eig out;
    out.values.resize(n);
    for (int i = 0; i < n; ++i) out.values[i] = std::real(a(i, i));
    out.vectors = std::move(v);
    sort_eig(out);
    return out;
}

}  // namespace ref

}  // namespace qmajor::linalg
