#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dicat {

using cplx = std::complex<double>;

// Dense complex matrix, row-major. Sized for desk-scale dims; every
// decision path (pivoting, rank cuts) is deterministic so that computed
// bases are bit-identical across runs.
class CMatrix {
public:
    CMatrix() : rows_(0), cols_(0) {}
    CMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols, cplx(0.0, 0.0)) {}

    static CMatrix identity(std::size_t n);
    static CMatrix zero(std::size_t rows, std::size_t cols) { return CMatrix(rows, cols); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cplx& at(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const cplx& at(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    const std::vector<cplx>& data() const { return a_; }
    std::vector<cplx>& data() { return a_; }

    bool finite() const;

    CMatrix operator*(const CMatrix& rhs) const;
    CMatrix operator+(const CMatrix& rhs) const;
    CMatrix operator-(const CMatrix& rhs) const;
    CMatrix scaled(cplx c) const;
    CMatrix transpose() const;
    CMatrix conj_transpose() const;

    // Horizontal concatenation of column blocks.
    static CMatrix hcat(const std::vector<CMatrix>& blocks);

    CMatrix col(std::size_t j) const;

    double fro_norm() const;
    double max_abs() const;

private:
    std::size_t rows_, cols_;
    std::vector<cplx> a_;
};

struct LinearSpace {
    std::size_t dim = 0;
    std::string label;
};

// Explicit basis data for an ambient/quotient pair: projection kills the
// relation span, section splits it, projection*section = id.
struct QuotientPresentation {
    std::size_t ambient_dim = 0;
    CMatrix relation_span;  // ambient_dim x k, columns span the relations
    CMatrix projection;     // q x ambient_dim
    CMatrix section;        // ambient_dim x q
    std::size_t quotient_dim() const { return projection.rows(); }
};

struct LinalgError : std::runtime_error {
    explicit LinalgError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when singular values straddle the rank cut within tol; the caller
// must not silently pick a rank in that situation.
struct IllConditioned : LinalgError {
    explicit IllConditioned(const std::string& msg) : LinalgError(msg) {}
};

// Basis of {v : m v = 0}. Deterministic column-pivoted reduced echelon
// elimination, pivot = leftmost column of largest magnitude entry.
CMatrix kernel(const CMatrix& m, double tol);

// Rank with an explicit ill-conditioned check: eliminated column magnitudes
// within a factor `guard_band` of the cut on both sides raise IllConditioned.
std::size_t rank(const CMatrix& m, double tol);

QuotientPresentation quotient(std::size_t ambient_dim, const CMatrix& relations, double tol);

// Kronecker product; index convention (i,j) -> i*dim_b + j on both axes.
CMatrix kron(const CMatrix& a, const CMatrix& b);

inline constexpr std::size_t kKronDimCap = 4096;

struct ApproxResult {
    bool equal = false;
    double residual = 0.0;
};

// Frobenius comparison, relative to max(1, |a|_F).
ApproxResult approx_eq(const CMatrix& a, const CMatrix& b, double tol);

// Solve a x = b for square well-conditioned a (partial pivoting).
CMatrix solve(const CMatrix& a, const CMatrix& b, double tol);
CMatrix inverse(const CMatrix& a, double tol);

// Basis of {X : [X, g] = 0 for all generators g} inside n x n matrices,
// computed as the kernel of the stacked commutator map. Columns are
// vectorized row-major.
std::vector<CMatrix> commutant(const std::vector<CMatrix>& generators, std::size_t n, double tol);

// True iff every column of `vectors` lies in the column span of `span_basis`.
bool spans_contain(const CMatrix& span_basis, const CMatrix& vectors, double tol);
bool span_equal(const CMatrix& a, const CMatrix& b, double tol);

// Deterministic seeded generators (splitmix64 based; platform independent).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64();
    double next_unit();                 // [0,1)
    double next_sym();                  // [-1,1)
    cplx next_cplx();                   // complex in the unit box
    std::size_t next_index(std::size_t n);

private:
    std::uint64_t state_;
};

CMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols);
// Invertible matrix with unit-scale entries and determinant bounded away
// from zero (resampled until well conditioned).
CMatrix random_invertible(Rng& rng, std::size_t n, double tol = 1e-9);

}  // namespace dicat
