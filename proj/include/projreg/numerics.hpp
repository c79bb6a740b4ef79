#pragma once

// Dense kernels shared by every other module: symmetric eigendecomposition,
// thin SVD, Moore-Penrose pseudo-inverse, rank-k truncation and orthogonal
// projectors. All functions are pure and reject non-finite input.
//
// Rank policy: a singular value s is treated as zero when
// s <= rank_tol * s_max. The default rank_tol = 1e-12 matters near the
// interpolation point p ~ n where s_min -> 0, so it is a parameter everywhere
// it influences a result.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "projreg/error.hpp"

namespace projreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultRankTol = 1e-12;

/// Eigenvalues in descending order; eigenvectors as matching orthonormal columns.
struct SpectralDecomposition {
    Vector values;
    Matrix vectors;

    Matrix reconstruct() const { return vectors * values.asDiagonal() * vectors.transpose(); }
};

/// Thin SVD: m = u * diag(s) * v^T with s descending and nonnegative.
struct SvdDecomposition {
    Matrix u;
    Vector s;
    Matrix v;

    Matrix reconstruct() const { return u * s.asDiagonal() * v.transpose(); }

    /// Number of singular values above rank_tol * s_max.
    Eigen::Index rank(double rank_tol = kDefaultRankTol) const {
        if (s.size() == 0 || s(0) <= 0.0) return 0;
        const double cut = rank_tol * s(0);
        return static_cast<Eigen::Index>(std::count_if(s.begin(), s.end(), [cut](double v) { return v > cut; }));
    }
};

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
    if (!m.allFinite()) fail(ErrorCode::NotFinite, std::string(what) + " contains NaN or Inf");
}

namespace detail {

inline bool is_diagonal(const Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (i != j && m(i, j) != 0.0) return false;
    return true;
}

// Deterministic sign: the largest-magnitude entry of each column is positive.
inline void fix_column_signs(Matrix& v) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        Eigen::Index imax = 0;
        v.col(j).cwiseAbs().maxCoeff(&imax);
        if (v(imax, j) < 0.0) v.col(j) = -v.col(j);
    }
}

}  // namespace detail

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
///
/// Exactly diagonal input is decomposed directly (stable sort of the
/// diagonal, axis eigenvectors), so repeated eigenvalues keep their original
/// axis order. Otherwise ties keep the order produced by the solver. When
/// lambda_k == lambda_{k+1} the top-k eigenspace is therefore a convention,
/// not a property of the matrix.
inline SpectralDecomposition eig_sym(const Matrix& m) {
    if (m.rows() != m.cols()) fail(ErrorCode::NotSymmetric, "matrix is not square");
    require_finite(m, "eig_sym input");
    const Eigen::Index p = m.rows();
    SpectralDecomposition out;
    if (p == 0) return out;

    if (detail::is_diagonal(m)) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return m(a, a) > m(b, b); });
        out.values.resize(p);
        out.vectors = Matrix::Zero(p, p);
        for (Eigen::Index j = 0; j < p; ++j) {
            out.values(j) = m(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(j)]);
            out.vectors(order[static_cast<std::size_t>(j)], j) = 1.0;
        }
        return out;
    }

    const Matrix sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) fail(ErrorCode::NotFinite, "eigen solver did not converge");
    const double op_norm = solver.eigenvalues().cwiseAbs().maxCoeff();
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * std::max(op_norm, std::numeric_limits<double>::min()))
        fail(ErrorCode::NotSymmetric, "asymmetry " + std::to_string(asym) + " exceeds 1e-10*||m||_op");

    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    detail::fix_column_signs(out.vectors);
    return out;
}

/// Thin SVD with deterministic singular-vector signs.
inline SvdDecomposition svd(const Matrix& m) {
    require_finite(m, "svd input");
    SvdDecomposition out;
    if (m.size() == 0) {
        out.u = Matrix::Zero(m.rows(), 0);
        out.v = Matrix::Zero(m.cols(), 0);
        return out;
    }
    Eigen::BDCSVD<Matrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u = solver.matrixU();
    out.s = solver.singularValues();
    out.v = solver.matrixV();
    for (Eigen::Index j = 0; j < out.v.cols(); ++j) {
        Eigen::Index imax = 0;
        out.v.col(j).cwiseAbs().maxCoeff(&imax);
        if (out.v(imax, j) < 0.0) {
            out.v.col(j) = -out.v.col(j);
            out.u.col(j) = -out.u.col(j);
        }
    }
    return out;
}

/// Pseudo-inverse from an existing SVD.
inline Matrix pseudo_inverse(const SvdDecomposition& d, double rank_tol = kDefaultRankTol) {
    const Eigen::Index r = d.rank(rank_tol);
    const Vector inv = d.s.head(r).cwiseInverse();
    return d.v.leftCols(r) * inv.asDiagonal() * d.u.leftCols(r).transpose();
}

/// Moore-Penrose pseudo-inverse; singular values <= rank_tol * s_max are inverted as zero.
inline Matrix pseudo_inverse(const Matrix& m, double rank_tol = kDefaultRankTol) {
    if (!(rank_tol > 0.0 && rank_tol < 1.0)) fail(ErrorCode::BadParams, "rank_tol must lie in (0,1)");
    return pseudo_inverse(svd(m), rank_tol);
}

/// Best rank-k approximation sum_{i<=k} s_i u_i v_i^T.
inline Matrix rank_k_approx(const Matrix& m, Eigen::Index k) {
    const Eigen::Index kmax = std::min(m.rows(), m.cols());
    if (k < 1 || k > kmax)
        fail(ErrorCode::BadRank, "k=" + std::to_string(k) + " outside [1," + std::to_string(kmax) + "]");
    const SvdDecomposition d = svd(m);
    return d.u.leftCols(k) * d.s.head(k).asDiagonal() * d.v.leftCols(k).transpose();
}

/// Orthonormal basis (columns) of the column space of m under the rank policy.
inline Matrix column_space_basis(const Matrix& m, double rank_tol = kDefaultRankTol) {
    const SvdDecomposition d = svd(m);
    return d.u.leftCols(d.rank(rank_tol));
}

/// Orthogonal projector onto span of the columns of m.
inline Matrix projector_onto_columns(const Matrix& m, double rank_tol = kDefaultRankTol) {
    const Matrix b = column_space_basis(m, rank_tol);
    return b * b.transpose();
}

inline Eigen::Index numerical_rank(const Matrix& m, double rank_tol = kDefaultRankTol) {
    return svd(m).rank(rank_tol);
}

/// Largest singular value.
inline double operator_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return svd(m).s(0);
}

/// Largest absolute eigenvalue of a symmetric matrix.
inline double symmetric_operator_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// Symmetric PSD square root V diag(sqrt(max(l,0))) V^T.
inline Matrix psd_sqrt(const SpectralDecomposition& d) {
    const Vector r = d.values.cwiseMax(0.0).cwiseSqrt();
    return d.vectors * r.asDiagonal() * d.vectors.transpose();
}

}  // namespace projreg
