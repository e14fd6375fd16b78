#include "dicat/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace dicat {

CMatrix CMatrix::identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

bool CMatrix::finite() const {
    for (const auto& z : a_) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
}

CMatrix CMatrix::operator*(const CMatrix& rhs) const {
    if (cols_ != rhs.rows_) throw LinalgError("matmul shape mismatch");
    CMatrix out(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const cplx v = at(i, k);
            if (v == cplx(0.0, 0.0)) continue;
            for (std::size_t j = 0; j < rhs.cols_; ++j) out.at(i, j) += v * rhs.at(k, j);
        }
    }
    return out;
}

CMatrix CMatrix::operator+(const CMatrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw LinalgError("add shape mismatch");
    CMatrix out = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] += rhs.a_[i];
    return out;
}

CMatrix CMatrix::operator-(const CMatrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw LinalgError("sub shape mismatch");
    CMatrix out = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] -= rhs.a_[i];
    return out;
}

CMatrix CMatrix::scaled(cplx c) const {
    CMatrix out = *this;
    for (auto& z : out.a_) z *= c;
    return out;
}

CMatrix CMatrix::transpose() const {
    CMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) out.at(j, i) = at(i, j);
    return out;
}

CMatrix CMatrix::conj_transpose() const {
    CMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) out.at(j, i) = std::conj(at(i, j));
    return out;
}

CMatrix CMatrix::hcat(const std::vector<CMatrix>& blocks) {
    if (blocks.empty()) return CMatrix();
    std::size_t rows = blocks.front().rows();
    std::size_t cols = 0;
    for (const auto& b : blocks) {
        if (b.rows() != rows) throw LinalgError("hcat row mismatch");
        cols += b.cols();
    }
    CMatrix out(rows, cols);
    std::size_t off = 0;
    for (const auto& b : blocks) {
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < b.cols(); ++j) out.at(i, off + j) = b.at(i, j);
        off += b.cols();
    }
    return out;
}

CMatrix CMatrix::col(std::size_t j) const {
    CMatrix out(rows_, 1);
    for (std::size_t i = 0; i < rows_; ++i) out.at(i, 0) = at(i, j);
    return out;
}

double CMatrix::fro_norm() const {
    double s = 0.0;
    for (const auto& z : a_) s += std::norm(z);
    return std::sqrt(s);
}

double CMatrix::max_abs() const {
    double s = 0.0;
    for (const auto& z : a_) s = std::max(s, std::abs(z));
    return s;
}

namespace {

// Row echelon elimination on a copy with deterministic pivoting: scan
// columns left to right, pick the row with the largest magnitude entry
// (ties broken by smallest row index). Returns pivot column list; `work`
// ends in reduced echelon form.
std::vector<std::size_t> reduced_echelon(CMatrix& work, double tol, double* min_pivot,
                                         double* max_dropped) {
    const std::size_t m = work.rows(), n = work.cols();
    double scale = std::max(1.0, work.max_abs());
    std::vector<std::size_t> pivots;
    if (min_pivot) *min_pivot = 0.0;
    if (max_dropped) *max_dropped = 0.0;
    std::size_t r = 0;
    for (std::size_t c = 0; c < n && r < m; ++c) {
        std::size_t best = r;
        double best_mag = std::abs(work.at(r, c));
        for (std::size_t i = r + 1; i < m; ++i) {
            double mag = std::abs(work.at(i, c));
            if (mag > best_mag) { best_mag = mag; best = i; }
        }
        if (best_mag <= tol * scale) {
            if (max_dropped) *max_dropped = std::max(*max_dropped, best_mag / scale);
            continue;
        }
        if (min_pivot) {
            double rel = best_mag / scale;
            *min_pivot = pivots.empty() ? rel : std::min(*min_pivot, rel);
        }
        if (best != r) {
            for (std::size_t j = 0; j < n; ++j) std::swap(work.at(best, j), work.at(r, j));
        }
        const cplx inv = 1.0 / work.at(r, c);
        for (std::size_t j = c; j < n; ++j) work.at(r, j) *= inv;
        work.at(r, c) = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == r) continue;
            const cplx f = work.at(i, c);
            if (f == cplx(0.0, 0.0)) continue;
            for (std::size_t j = c; j < n; ++j) work.at(i, j) -= f * work.at(r, j);
            work.at(i, c) = 0.0;
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

}  // namespace

CMatrix kernel(const CMatrix& m, double tol) {
    if (tol <= 0.0) throw LinalgError("kernel: tol must be positive");
    CMatrix work = m;
    std::vector<std::size_t> pivots = reduced_echelon(work, tol, nullptr, nullptr);
    const std::size_t n = m.cols();
    std::vector<bool> is_pivot(n, false);
    for (auto c : pivots) is_pivot[c] = true;
    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0; c < n; ++c)
        if (!is_pivot[c]) free_cols.push_back(c);

    CMatrix basis(n, free_cols.size());
    for (std::size_t k = 0; k < free_cols.size(); ++k) {
        const std::size_t fc = free_cols[k];
        basis.at(fc, k) = 1.0;
        for (std::size_t r = 0; r < pivots.size(); ++r) {
            basis.at(pivots[r], k) = -work.at(r, fc);
        }
    }
    return basis;
}

std::size_t rank(const CMatrix& m, double tol) {
    if (tol <= 0.0) throw LinalgError("rank: tol must be positive");
    CMatrix work = m;
    double min_pivot = 0.0, max_dropped = 0.0;
    std::vector<std::size_t> pivots = reduced_echelon(work, tol, &min_pivot, &max_dropped);
    // Guard band: magnitudes within a decade of the cut on either side mean
    // the rank decision is ambiguous and must not be silently thresholded.
    if (max_dropped > tol / 10.0 || (!pivots.empty() && min_pivot < tol * 10.0)) {
        throw IllConditioned("rank decision ambiguous near tolerance: dropped " +
                             std::to_string(max_dropped) + ", smallest pivot " +
                             std::to_string(min_pivot));
    }
    return pivots.size();
}

QuotientPresentation quotient(std::size_t ambient_dim, const CMatrix& relations, double tol) {
    if (relations.rows() != ambient_dim && relations.cols() != 0)
        throw LinalgError("quotient: relations must have ambient_dim rows");
    QuotientPresentation q;
    q.ambient_dim = ambient_dim;
    q.relation_span = relations.rows() == ambient_dim ? relations : CMatrix(ambient_dim, 0);

    // Echelonize relations^T to find a reduced spanning set and the pivot
    // coordinates; ill-conditioning is surfaced through rank().
    CMatrix rt = q.relation_span.transpose();
    double min_pivot = 0.0, max_dropped = 0.0;
    CMatrix work = rt;
    std::vector<std::size_t> pivots = reduced_echelon(work, tol, &min_pivot, &max_dropped);
    if (max_dropped > tol / 10.0 || (!pivots.empty() && min_pivot < tol * 10.0)) {
        throw IllConditioned("ill-conditioned quotient: relation rank ambiguous near tolerance");
    }
    const std::size_t r = pivots.size();
    const std::size_t qdim = ambient_dim - r;

    std::vector<bool> is_pivot(ambient_dim, false);
    for (auto c : pivots) is_pivot[c] = true;
    std::vector<std::size_t> free_coords;
    for (std::size_t c = 0; c < ambient_dim; ++c)
        if (!is_pivot[c]) free_coords.push_back(c);

    // Section: free coordinates give a complement basis; on pivot coordinates
    // subtract the echelonized relation rows so the image is transversal.
    // With rows of `work` as relations in reduced form, a complement to the
    // span is {e_f - sum_r work(r,f) e_{pivot_r}} ... we instead use the
    // standard construction: quotient coordinates are the free coordinates,
    // projection x -> x_free - R * x_pivots where the relation rows rewrite
    // pivot coordinates in terms of free ones.
    //
    // From reduced echelon form: relation row r reads
    //   e_{p_r} + sum_{f free} work(r, f) e_f  = 0 (mod relations)
    // so modulo relations, e_{p_r} = -sum_f work(r,f) e_f.
    CMatrix proj(qdim, ambient_dim);
    for (std::size_t k = 0; k < qdim; ++k) {
        proj.at(k, free_coords[k]) = 1.0;
        for (std::size_t rr = 0; rr < r; ++rr) {
            proj.at(k, pivots[rr]) = -work.at(rr, free_coords[k]);
        }
    }
    CMatrix sect(ambient_dim, qdim);
    for (std::size_t k = 0; k < qdim; ++k) sect.at(free_coords[k], k) = 1.0;

    q.projection = proj;
    q.section = sect;
    return q;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    const std::size_t rows = a.rows() * b.rows();
    const std::size_t cols = a.cols() * b.cols();
    if (rows > kKronDimCap || cols > kKronDimCap)
        throw LinalgError("kron: dimension product exceeds cap");
    CMatrix out(rows, cols);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const cplx v = a.at(i, j);
            if (v == cplx(0.0, 0.0)) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    out.at(i * b.rows() + k, j * b.cols() + l) = v * b.at(k, l);
        }
    return out;
}

ApproxResult approx_eq(const CMatrix& a, const CMatrix& b, double tol) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw LinalgError("approx_eq shape mismatch");
    ApproxResult r;
    double diff = (a - b).fro_norm();
    double scale = std::max(1.0, a.fro_norm());
    r.residual = diff / scale;
    r.equal = r.residual <= tol;
    return r;
}

CMatrix solve(const CMatrix& a, const CMatrix& b, double tol) {
    if (a.rows() != a.cols()) throw LinalgError("solve: matrix not square");
    if (a.rows() != b.rows()) throw LinalgError("solve: rhs row mismatch");
    const std::size_t n = a.rows();
    CMatrix work = CMatrix::hcat({a, b});
    double scale = std::max(1.0, a.max_abs());
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t best = c;
        double best_mag = std::abs(work.at(c, c));
        for (std::size_t i = c + 1; i < n; ++i) {
            double mag = std::abs(work.at(i, c));
            if (mag > best_mag) { best_mag = mag; best = i; }
        }
        if (best_mag <= tol * scale) throw LinalgError("solve: singular matrix");
        if (best != c)
            for (std::size_t j = 0; j < work.cols(); ++j) std::swap(work.at(best, j), work.at(c, j));
        const cplx inv = 1.0 / work.at(c, c);
        for (std::size_t j = c; j < work.cols(); ++j) work.at(c, j) *= inv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c) continue;
            const cplx f = work.at(i, c);
            if (f == cplx(0.0, 0.0)) continue;
            for (std::size_t j = c; j < work.cols(); ++j) work.at(i, j) -= f * work.at(c, j);
        }
    }
    CMatrix x(n, b.cols());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) x.at(i, j) = work.at(i, n + j);
    return x;
}

CMatrix inverse(const CMatrix& a, double tol) {
    return solve(a, CMatrix::identity(a.rows()), tol);
}

std::vector<CMatrix> commutant(const std::vector<CMatrix>& generators, std::size_t n, double tol) {
    for (const auto& g : generators)
        if (g.rows() != n || g.cols() != n) throw LinalgError("commutant: generator shape");
    // Commutator map X -> (XG - GX) stacked over generators, acting on
    // row-major vec(X). Coefficient of X_kl in (XG-GX)_ij is
    // G_lj d_ik - G_ik d_lj.
    const std::size_t n2 = n * n;
    CMatrix stacked(n2 * std::max<std::size_t>(1, generators.size()), n2);
    if (generators.empty()) {
        stacked = CMatrix(0, n2);
    } else {
        for (std::size_t g = 0; g < generators.size(); ++g) {
            const CMatrix& G = generators[g];
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    const std::size_t row = g * n2 + i * n + j;
                    for (std::size_t l = 0; l < n; ++l)
                        stacked.at(row, i * n + l) += G.at(l, j);
                    for (std::size_t k = 0; k < n; ++k)
                        stacked.at(row, k * n + j) -= G.at(i, k);
                }
        }
    }
    CMatrix basis = kernel(stacked, tol);
    std::vector<CMatrix> out;
    for (std::size_t c = 0; c < basis.cols(); ++c) {
        CMatrix X(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) X.at(i, j) = basis.at(i * n + j, c);
        out.push_back(X);
    }
    return out;
}

bool spans_contain(const CMatrix& span_basis, const CMatrix& vectors, double tol) {
    if (vectors.cols() == 0) return true;
    if (span_basis.rows() != vectors.rows()) throw LinalgError("spans_contain shape");
    const std::size_t r0 = rank(span_basis, tol);
    const std::size_t r1 = rank(CMatrix::hcat({span_basis, vectors}), tol);
    return r0 == r1;
}

bool span_equal(const CMatrix& a, const CMatrix& b, double tol) {
    return spans_contain(a, b, tol) && spans_contain(b, a, tol);
}

std::uint64_t Rng::next_u64() {
    // splitmix64
    state_ += 0x9E3779B97f4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double Rng::next_unit() {
    return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
}

double Rng::next_sym() { return 2.0 * next_unit() - 1.0; }

cplx Rng::next_cplx() { return cplx(next_sym(), next_sym()); }

std::size_t Rng::next_index(std::size_t n) {
    return n == 0 ? 0 : static_cast<std::size_t>(next_u64() % n);
}

CMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
    CMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = rng.next_cplx();
    return m;
}

CMatrix random_invertible(Rng& rng, std::size_t n, double tol) {
    if (n == 0) return CMatrix(0, 0);
    for (int attempt = 0; attempt < 64; ++attempt) {
        CMatrix m = random_matrix(rng, n, n);
        // Bias towards the identity for conditioning.
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) += 2.0;
        try {
            CMatrix inv = inverse(m, tol);
            if (inv.max_abs() < 1e6) return m;
        } catch (const LinalgError&) {
            continue;
        }
    }
    throw LinalgError("random_invertible: failed to sample a well-conditioned matrix");
}

}  // namespace dicat
