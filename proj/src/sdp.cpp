#include "qmajor/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace qmajor::sdp {

using linalg::Complex;
using linalg::Eig;
using linalg::eig_hermitian;
using linalg::hermitian_basis;

double inner(const Matrix& a, const Matrix& b) {
    if (a.empty() || b.empty()) return 0.0;
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError("sdp::inner: shape mismatch");
    double s = 0.0;
    const Complex* pa = a.data();
    const Complex* pb = b.data();
    const size_t n = static_cast<size_t>(a.rows()) * a.cols();
    for (size_t i = 0; i < n; ++i)
        s += pa[i].real() * pb[i].real() + pa[i].imag() * pb[i].imag();
    return s;
}

namespace {

Matrix embed_matrix(const Matrix& m) {
    const int d = m.rows();
    Matrix e(2 * d, 2 * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const double re = m(i, j).real();
            const double im = m(i, j).imag();
            e(i, j) = re;
            e(i, d + j) = -im;
            e(d + i, j) = im;
            e(d + i, d + j) = re;
        }
    return e;
}

}  // namespace

SdpProblem embed_complex(const SdpProblem& p) {
    SdpProblem out;
    out.maximize = p.maximize;
    out.objective_scale = p.objective_scale * 2.0;
    out.blocks.reserve(p.blocks.size());
    for (int d : p.blocks) out.blocks.push_back(2 * d);
    out.objective.reserve(p.objective.size());
    for (const auto& c : p.objective) out.objective.push_back(c.empty() ? Matrix() : embed_matrix(c));
    out.constraints.reserve(p.constraints.size());
    for (const auto& con : p.constraints) {
        SdpProblem::Constraint ec;
        ec.rhs = 2.0 * con.rhs;
        ec.lhs.reserve(con.lhs.size());
        for (const auto& h : con.lhs) ec.lhs.push_back(h.empty() ? Matrix() : embed_matrix(h));
        out.constraints.push_back(std::move(ec));
    }
    return out;
}

namespace {

struct Term {
    int block;
    Matrix h;
};

// Problem normalized to minimize sense with unit-norm constraint rows and
// O(1) objective / rhs scales.
struct Normalized {
    std::vector<int> dims;
    std::vector<Matrix> obj;                // scaled; empty = zero
    std::vector<std::vector<Term>> rows;    // kept constraints
    std::vector<double> b;                  // scaled rhs
    std::vector<int> row_index;             // original constraint index per row
    std::vector<double> row_scale;          // s_j for kept rows
    double c_scale = 1.0;
    double b_scale = 1.0;
    bool flipped = false;
    int m = 0;
};

std::vector<double> apply_forward(const Normalized& np, const std::vector<Matrix>& x) {
    std::vector<double> out(np.m, 0.0);
    for (int j = 0; j < np.m; ++j) {
        double s = 0.0;
        for (const auto& t : np.rows[j]) s += inner(t.h, x[t.block]);
        out[j] = s;
    }
    return out;
}

std::vector<Matrix> apply_adjoint(const Normalized& np, const std::vector<double>& y) {
    std::vector<Matrix> out(np.dims.size());
    for (size_t b = 0; b < np.dims.size(); ++b) out[b] = Matrix::zero(np.dims[b], np.dims[b]);
    for (int j = 0; j < np.m; ++j) {
        if (y[j] == 0.0) continue;
        for (const auto& t : np.rows[j]) out[t.block] += Complex(y[j]) * t.h;
    }
    return out;
}

// eigendecomposition-backed pseudo-inverse of a real symmetric matrix
struct PseudoInverse {
    Eig eig;
    double floor = 0.0;

    explicit PseudoInverse(const Matrix& g) {
        eig = eig_hermitian(g);
        const double lmax = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
        floor = 1e-12 * std::max(1.0, lmax);
    }

    std::vector<double> apply(const std::vector<double>& r) const {
        const int n = static_cast<int>(r.size());
        std::vector<double> t(n, 0.0), out(n, 0.0);
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += eig.vectors(i, k).real() * r[i];
            t[k] = (eig.values[k] > floor) ? s / eig.values[k] : 0.0;
        }
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += eig.vectors(i, k).real() * t[k];
            out[i] = s;
        }
        return out;
    }

    // projection of r onto the range of the matrix
    std::vector<double> project_range(const std::vector<double>& r) const {
        const int n = static_cast<int>(r.size());
        std::vector<double> out(n, 0.0);
        for (int k = 0; k < n; ++k) {
            if (eig.values[k] <= floor) continue;
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += eig.vectors(i, k).real() * r[i];
            for (int i = 0; i < n; ++i) out[i] += eig.vectors(i, k).real() * s;
        }
        return out;
    }
};

Matrix project_psd(const Matrix& m) {
    if (m.rows() == 1) {
        Matrix out(1, 1);
        out(0, 0) = std::max(0.0, m(0, 0).real());
        return out;
    }
    // symmetrize before projecting; ADMM iterates accumulate tiny skew
    const int n = m.rows();
    Matrix h(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    const Eig eig = eig_hermitian(h);
    Matrix out(n, n);
    for (int k = 0; k < n; ++k) {
        const double lk = eig.values[k];
        if (lk <= 0.0) continue;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out(i, j) += eig.vectors(i, k) * lk * std::conj(eig.vectors(j, k));
    }
    return out;
}

double block_min_eigenvalue(const Matrix& m) {
    if (m.empty()) return 0.0;
    if (m.rows() == 1) return m(0, 0).real();
    return eig_hermitian(m).values.front();
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

struct Assessment {
    double affine = 0.0;
    double primal_cone = 0.0;
    double dual_cone = 0.0;
    double gap = 0.0;
    double pobj = 0.0;
    double dobj = 0.0;
    double score() const { return std::max({affine, primal_cone, dual_cone, gap}); }
};

// residuals of a candidate (x, y) measured against the original problem data
Assessment assess(const SdpProblem& p, const std::vector<Matrix>& x, const std::vector<double>& y) {
    Assessment a;
    const int nb = static_cast<int>(p.blocks.size());
    const double sign = p.maximize ? -1.0 : 1.0;

    double bnorm = 0.0, cnorm = 0.0;
    for (const auto& c : p.objective)
        if (!c.empty()) cnorm += inner(c, c);
    cnorm = std::sqrt(cnorm);

    double affine2 = 0.0;
    for (size_t j = 0; j < p.constraints.size(); ++j) {
        double s = 0.0;
        for (int b = 0; b < nb; ++b)
            if (!p.constraints[j].lhs[b].empty()) s += inner(p.constraints[j].lhs[b], x[b]);
        const double r = s - p.constraints[j].rhs;
        affine2 += r * r;
        bnorm += p.constraints[j].rhs * p.constraints[j].rhs;
    }
    bnorm = std::sqrt(bnorm);
    a.affine = std::sqrt(affine2) / (1.0 + bnorm);

    for (int b = 0; b < nb; ++b)
        a.primal_cone = std::max(a.primal_cone, -block_min_eigenvalue(x[b]) / (1.0 + x[b].frobenius_norm()));

    // dual slack: sign*(C - A^T y) must be PSD (sign = -1 for maximize)
    std::vector<Matrix> s(nb);
    for (int b = 0; b < nb; ++b)
        s[b] = p.objective[b].empty() ? Matrix::zero(p.blocks[b], p.blocks[b]) : p.objective[b];
    for (size_t j = 0; j < p.constraints.size(); ++j) {
        if (y[j] == 0.0) continue;
        for (int b = 0; b < nb; ++b)
            if (!p.constraints[j].lhs[b].empty()) s[b] -= Complex(y[j]) * p.constraints[j].lhs[b];
    }
    for (int b = 0; b < nb; ++b) {
        s[b] *= Complex(sign);
        a.dual_cone = std::max(a.dual_cone, -block_min_eigenvalue(s[b]) / (1.0 + cnorm));
    }

    double pobj = 0.0;
    for (int b = 0; b < nb; ++b)
        if (!p.objective[b].empty()) pobj += inner(p.objective[b], x[b]);
    double dobj = 0.0;
    for (size_t j = 0; j < p.constraints.size(); ++j) dobj += p.constraints[j].rhs * y[j];

    a.pobj = pobj / p.objective_scale;
    a.dobj = dobj / p.objective_scale;
    a.gap = std::abs(a.pobj - a.dobj) / (1.0 + std::abs(a.pobj) + std::abs(a.dobj));
    return a;
}

struct Candidate {
    std::vector<Matrix> x;
    std::vector<double> y;
    Assessment a;
    bool polished = false;
    bool valid = false;
};

// KKT refinement on the face identified by the eigenstructure of (z, s).
// Solves two decoupled least-squares systems: the dual multipliers from the
// stationarity condition restricted to the face, and the face coordinates of
// the primal block from the affine constraints.
std::optional<Candidate> polish(const SdpProblem& p, const Normalized& np,
                                const std::vector<Matrix>& z, std::vector<double> y_hat) {
    (void)p;
    const int nb = static_cast<int>(np.dims.size());

    // dual slack in scaled space
    std::vector<Matrix> s = apply_adjoint(np, y_hat);
    for (int b = 0; b < nb; ++b) {
        s[b] *= Complex(-1.0);
        if (!np.obj[b].empty()) s[b] += np.obj[b];
    }

    // face of each block: eigenvectors of z whose eigenvalue dominates the
    // matching Rayleigh quotient of the dual slack
    std::vector<Matrix> faces(nb);
    std::vector<int> ranks(nb, 0);
    for (int b = 0; b < nb; ++b) {
        const int d = np.dims[b];
        Matrix zb = z[b];
        const Eig eig = eig_hermitian(zb);
        std::vector<int> keep;
        for (int k = 0; k < d; ++k) {
            Complex sv = 0.0;
            for (int i = 0; i < d; ++i) {
                Complex row = 0.0;
                for (int j = 0; j < d; ++j) row += s[b](i, j) * eig.vectors(j, k);
                sv += std::conj(eig.vectors(i, k)) * row;
            }
            const double zval = std::max(0.0, eig.values[k]);
            if (zval > std::abs(sv.real())) keep.push_back(k);
        }
        ranks[b] = static_cast<int>(keep.size());
        Matrix v(d, ranks[b]);
        for (int c = 0; c < ranks[b]; ++c)
            for (int i = 0; i < d; ++i) v(i, c) = eig.vectors(i, keep[c]);
        faces[b] = std::move(v);
    }

    // (1) multipliers: least squares on  (C - A^T y) V_b = 0  for all blocks
    const int m = np.m;
    {
        std::vector<std::vector<double>> ata(m, std::vector<double>(m, 0.0));
        std::vector<double> atf(m, 0.0);
        for (int b = 0; b < nb; ++b) {
            if (ranks[b] == 0) continue;
            const Matrix& v = faces[b];
            std::vector<Matrix> hv(m);
            for (int j = 0; j < m; ++j) {
                const auto& row = np.rows[j];
                for (const auto& t : row)
                    if (t.block == b) hv[j] = linalg::multiply(t.h, v);
            }
            Matrix cv = np.obj[b].empty() ? Matrix::zero(np.dims[b], ranks[b])
                                          : linalg::multiply(np.obj[b], v);
            for (int j = 0; j < m; ++j) {
                if (hv[j].empty()) continue;
                for (int k = j; k < m; ++k) {
                    if (hv[k].empty()) continue;
                    double dot = 0.0;
                    for (int r = 0; r < hv[j].rows(); ++r)
                        for (int c = 0; c < hv[j].cols(); ++c)
                            dot += hv[j](r, c).real() * hv[k](r, c).real() +
                                   hv[j](r, c).imag() * hv[k](r, c).imag();
                    ata[j][k] += dot;
                    if (k != j) ata[k][j] += dot;
                }
                double dotf = 0.0;
                for (int r = 0; r < cv.rows(); ++r)
                    for (int c = 0; c < cv.cols(); ++c)
                        dotf += hv[j](r, c).real() * cv(r, c).real() +
                                hv[j](r, c).imag() * cv(r, c).imag();
                atf[j] += dotf;
            }
        }
        Matrix g(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) g(i, j) = ata[i][j];
        // keep the solve anchored near the ADMM multipliers: solve for the
        // correction around y_hat
        std::vector<double> rhs(m, 0.0);
        for (int i = 0; i < m; ++i) {
            double acc = 0.0;
            for (int j = 0; j < m; ++j) acc += ata[i][j] * y_hat[j];
            rhs[i] = atf[i] - acc;
        }
        PseudoInverse pinv(g);
        const std::vector<double> dy = pinv.apply(rhs);
        for (int i = 0; i < m; ++i) y_hat[i] += dy[i];
    }

    // (2) face coordinates: least squares on  A(V M V^dag) = b
    int nparams = 0;
    std::vector<int> offset(nb, 0);
    std::vector<std::vector<Matrix>> bases(nb);
    for (int b = 0; b < nb; ++b) {
        offset[b] = nparams;
        if (ranks[b] > 0) {
            bases[b] = hermitian_basis(ranks[b]);
            nparams += static_cast<int>(bases[b].size());
        }
    }
    if (nparams == 0) return std::nullopt;

    std::vector<std::vector<double>> coef(m, std::vector<double>(nparams, 0.0));
    for (int j = 0; j < m; ++j)
        for (const auto& t : np.rows[j]) {
            const int b = t.block;
            if (ranks[b] == 0) continue;
            const Matrix w = linalg::multiply(linalg::multiply(faces[b].adjoint(), t.h), faces[b]);
            for (size_t k = 0; k < bases[b].size(); ++k)
                coef[j][offset[b] + k] = inner(w, bases[b][k]);
        }

    Matrix g(nparams, nparams);
    std::vector<double> rhs(nparams, 0.0);
    for (int j = 0; j < m; ++j) {
        for (int r = 0; r < nparams; ++r) {
            if (coef[j][r] == 0.0) continue;
            rhs[r] += coef[j][r] * np.b[j];
            for (int c = 0; c < nparams; ++c)
                g(r, c) += Complex(coef[j][r] * coef[j][c]);
        }
    }
    PseudoInverse pinv(g);
    std::vector<double> rrr(nparams);
    for (int i = 0; i < nparams; ++i) rrr[i] = rhs[i];
    const std::vector<double> theta = pinv.apply(rrr);

    Candidate cand;
    cand.x.resize(nb);
    for (int b = 0; b < nb; ++b) {
        const int d = np.dims[b];
        if (ranks[b] == 0) {
            cand.x[b] = Matrix::zero(d, d);
            continue;
        }
        Matrix mcoord(ranks[b], ranks[b]);
        for (size_t k = 0; k < bases[b].size(); ++k)
            mcoord += Complex(theta[offset[b] + k]) * bases[b][k];
        cand.x[b] = linalg::multiply(linalg::multiply(faces[b], mcoord), faces[b].adjoint());
    }
    cand.y = y_hat;
    cand.polished = true;
    cand.valid = true;
    return cand;
}

void unscale(const SdpProblem& p, const Normalized& np, const std::vector<Matrix>& x_hat,
             const std::vector<double>& y_hat, std::vector<Matrix>& x, std::vector<double>& y) {
    const int nb = static_cast<int>(np.dims.size());
    x.resize(nb);
    for (int b = 0; b < nb; ++b) {
        x[b] = x_hat[b];
        x[b] *= Complex(np.b_scale);
    }
    y.assign(p.constraints.size(), 0.0);
    const double sign = np.flipped ? -1.0 : 1.0;
    for (int j = 0; j < np.m; ++j)
        y[np.row_index[j]] = sign * y_hat[j] * np.c_scale / np.row_scale[j];
}

}  // namespace

SdpSolution solve(const SdpProblem& p, const SdpSettings& settings) {
    const int nb = static_cast<int>(p.blocks.size());
    if (nb == 0) throw ValidationError("sdp::solve: no blocks");
    if (p.constraints.empty()) throw ValidationError("sdp::solve: at least one constraint required");
    for (int b = 0; b < nb; ++b) {
        if (p.blocks[b] < 1) throw ValidationError("sdp::solve: block dimension must be positive");
        if (!p.objective[b].empty() && p.objective[b].rows() != p.blocks[b])
            throw ValidationError("sdp::solve: objective dimension mismatch");
    }
    for (const auto& c : p.constraints) {
        if (static_cast<int>(c.lhs.size()) != nb)
            throw ValidationError("sdp::solve: constraint block count mismatch");
        for (int b = 0; b < nb; ++b)
            if (!c.lhs[b].empty() && c.lhs[b].rows() != p.blocks[b])
                throw ValidationError("sdp::solve: constraint dimension mismatch");
        if (!std::isfinite(c.rhs)) throw ValidationError("sdp::solve: non-finite rhs");
    }

    // ---- normalize ----
    Normalized np;
    np.dims = p.blocks;
    np.flipped = p.maximize;
    double cnorm2 = 0.0;
    for (const auto& c : p.objective)
        if (!c.empty()) cnorm2 += inner(c, c);
    np.c_scale = std::max(1e-12, std::sqrt(cnorm2));
    np.obj.resize(nb);
    for (int b = 0; b < nb; ++b)
        if (!p.objective[b].empty()) {
            np.obj[b] = p.objective[b];
            np.obj[b] *= Complex((np.flipped ? -1.0 : 1.0) / np.c_scale);
        }

    std::vector<double> b_pre;
    for (size_t j = 0; j < p.constraints.size(); ++j) {
        const auto& c = p.constraints[j];
        double s2 = 0.0;
        for (int b = 0; b < nb; ++b)
            if (!c.lhs[b].empty()) s2 += inner(c.lhs[b], c.lhs[b]);
        const double s = std::sqrt(s2);
        if (s < 1e-14) {
            if (std::abs(c.rhs) > 1e-12) {
                // zero row with nonzero rhs: trivially inconsistent
                SdpSolution sol;
                sol.status = SdpStatus::infeasible_certificate;
                sol.certificate.assign(p.constraints.size(), 0.0);
                sol.certificate[j] = (c.rhs > 0) ? 1.0 : -1.0;
                sol.primal.resize(nb);
                for (int b = 0; b < nb; ++b) sol.primal[b] = Matrix::zero(p.blocks[b], p.blocks[b]);
                sol.dual.assign(p.constraints.size(), 0.0);
                return sol;
            }
            continue;  // vacuous constraint
        }
        std::vector<Term> row;
        for (int b = 0; b < nb; ++b)
            if (!c.lhs[b].empty()) {
                Matrix h = c.lhs[b];
                h *= Complex(1.0 / s);
                row.push_back({b, std::move(h)});
            }
        np.rows.push_back(std::move(row));
        b_pre.push_back(c.rhs / s);
        np.row_index.push_back(static_cast<int>(j));
        np.row_scale.push_back(s);
    }
    np.m = static_cast<int>(np.rows.size());
    if (np.m == 0) throw ValidationError("sdp::solve: all constraints vacuous");
    np.b_scale = std::max(1.0, norm2(b_pre));
    np.b = b_pre;
    for (double& x : np.b) x /= np.b_scale;

    // ---- Gram operator of the constraint rows ----
    Matrix gram(np.m, np.m);
    for (int j = 0; j < np.m; ++j)
        for (int k = j; k < np.m; ++k) {
            double s = 0.0;
            for (const auto& tj : np.rows[j])
                for (const auto& tk : np.rows[k])
                    if (tj.block == tk.block) s += inner(tj.h, tk.h);
            gram(j, k) = s;
            gram(k, j) = s;
        }
    PseudoInverse gram_pinv(gram);

    // structural consistency: b must lie in the range of A A^T
    {
        std::vector<double> b_range = gram_pinv.project_range(np.b);
        std::vector<double> b_res(np.m);
        for (int j = 0; j < np.m; ++j) b_res[j] = np.b[j] - b_range[j];
        if (norm2(b_res) > 1e-9 * std::max(1.0, norm2(np.b))) {
            SdpSolution sol;
            sol.status = SdpStatus::infeasible_certificate;
            sol.certificate.assign(p.constraints.size(), 0.0);
            for (int j = 0; j < np.m; ++j)
                sol.certificate[np.row_index[j]] = b_res[j] / np.row_scale[j];
            sol.primal.resize(nb);
            for (int b = 0; b < nb; ++b) sol.primal[b] = Matrix::zero(p.blocks[b], p.blocks[b]);
            sol.dual.assign(p.constraints.size(), 0.0);
            return sol;
        }
    }

    // ---- ADMM with over-relaxation ----
    const double relax = 1.6;
    double sigma = 1.0;
    std::vector<Matrix> x(nb), z(nb), u(nb), zprev(nb);
    for (int b = 0; b < nb; ++b) {
        x[b] = Matrix::zero(np.dims[b], np.dims[b]);
        z[b] = x[b];
        u[b] = x[b];
    }
    std::vector<double> nu(np.m, 0.0), y_hat(np.m, 0.0);

    Candidate best;
    const int check_every = 25;
    int last_polish = -1000;
    int iter = 0;
    const int max_iter = std::max(10, settings.max_iterations);
    const double tol = settings.tolerance;

    auto evaluate = [&](const std::vector<Matrix>& xs, const std::vector<double>& ys,
                        bool from_polish) -> Assessment {
        std::vector<Matrix> xo;
        std::vector<double> yo;
        unscale(p, np, xs, ys, xo, yo);
        Assessment a = assess(p, xo, yo);
        if (!best.valid || a.score() < best.a.score()) {
            best.x = std::move(xo);
            best.y = std::move(yo);
            best.a = a;
            best.polished = from_polish;
            best.valid = true;
        }
        return a;
    };

    for (iter = 0; iter < max_iter; ++iter) {
        // X-update: project onto the affine subspace
        for (int b = 0; b < nb; ++b) {
            x[b] = z[b];
            x[b] -= u[b];
            if (!np.obj[b].empty()) x[b] -= Complex(1.0 / sigma) * np.obj[b];
        }
        std::vector<double> r = apply_forward(np, x);
        for (int j = 0; j < np.m; ++j) r[j] -= np.b[j];
        nu = gram_pinv.apply(r);
        {
            std::vector<Matrix> corr = apply_adjoint(np, nu);
            for (int b = 0; b < nb; ++b) x[b] -= corr[b];
        }
        for (int j = 0; j < np.m; ++j) y_hat[j] = -sigma * nu[j];

        // Z-update: over-relaxed projection onto the PSD cone
        for (int b = 0; b < nb; ++b) {
            zprev[b] = z[b];
            Matrix t = x[b];
            t *= Complex(relax);
            t += Complex(1.0 - relax) * zprev[b];
            Matrix arg = t;
            arg += u[b];
            z[b] = project_psd(arg);
            u[b] += t;
            u[b] -= z[b];
        }

        if ((iter + 1) % check_every != 0) continue;

        const Assessment a = evaluate(z, y_hat, false);
        if (settings.trace)
            (*settings.trace) << iter + 1 << ' ' << a.affine << ' '
                              << std::max(a.primal_cone, a.dual_cone) << ' ' << a.gap << '\n';
        if (best.a.score() <= tol) break;

        // polish attempt once the iterates are in the basin
        if (a.score() < 1e-3 && iter - last_polish >= 200) {
            last_polish = iter;
            auto cand = polish(p, np, z, y_hat);
            if (cand) {
                evaluate(cand->x, cand->y, true);
                if (best.a.score() <= tol) break;
            }
        }

        // residual balancing
        if (iter < 20000) {
            double rp = 0.0, rd = 0.0;
            for (int b = 0; b < nb; ++b) {
                Matrix dx = x[b];
                dx -= z[b];
                rp += dx.frobenius_norm();
                Matrix dz = z[b];
                dz -= zprev[b];
                rd += sigma * dz.frobenius_norm();
            }
            if (rp > 10.0 * rd && sigma < 1e6) {
                sigma *= 2.0;
                for (auto& ub : u) ub *= Complex(0.5);
            } else if (rd > 10.0 * rp && sigma > 1e-6) {
                sigma *= 0.5;
                for (auto& ub : u) ub *= Complex(2.0);
            }
        }
    }

    if (!best.valid) evaluate(z, y_hat, false);

    // final polish from the last iterate
    if (best.a.score() > tol) {
        auto cand = polish(p, np, z, y_hat);
        if (cand) evaluate(cand->x, cand->y, true);
    }

    SdpSolution sol;
    sol.iterations = std::min(iter + 1, max_iter);
    sol.primal = best.x;
    sol.dual = best.y;
    sol.polished = best.polished;
    sol.primal_objective = best.a.pobj;
    sol.dual_objective = best.a.dobj;
    sol.primal_residual = std::max(best.a.affine, best.a.primal_cone);
    sol.dual_residual = best.a.dual_cone;
    sol.gap = best.a.gap;
    sol.status = (best.a.score() <= tol) ? SdpStatus::optimal : SdpStatus::max_iterations;

    if (sol.status == SdpStatus::max_iterations) {
        // try to read off a Farkas ray from the dual trajectory
        std::vector<double> ray(p.constraints.size(), 0.0);
        for (int j = 0; j < np.m; ++j)
            ray[np.row_index[j]] = (np.flipped ? -1.0 : 1.0) * y_hat[j] / np.row_scale[j];
        double bm = 0.0;
        for (size_t j = 0; j < p.constraints.size(); ++j) bm += ray[j] * p.constraints[j].rhs;
        const double rn = norm2(ray);
        if (rn > 0 && bm > 1e-7 * rn) {
            std::vector<Matrix> ah(nb);
            for (int b = 0; b < nb; ++b) ah[b] = Matrix::zero(p.blocks[b], p.blocks[b]);
            for (size_t j = 0; j < p.constraints.size(); ++j) {
                if (ray[j] == 0.0) continue;
                for (int b = 0; b < nb; ++b)
                    if (!p.constraints[j].lhs[b].empty()) ah[b] += Complex(ray[j]) * p.constraints[j].lhs[b];
            }
            double lmax = -std::numeric_limits<double>::infinity();
            for (int b = 0; b < nb; ++b) {
                const Eig e = eig_hermitian(ah[b]);
                lmax = std::max(lmax, e.values.back());
            }
            if (lmax <= 1e-7 * rn) {
                sol.status = SdpStatus::infeasible_certificate;
                sol.certificate = ray;
            }
        }
    }
    return sol;
}

}  // namespace qmajor::sdp
