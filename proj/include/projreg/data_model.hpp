#pragma once

// Population models (C_xx, beta, sigma) and Gaussian sampling from them.
//
// Covariance families (all with lambda_1 = 1 except wishart_gapped):
//   isotropic       lambda_i = 1
//   gapped          lambda_i = 1 for i <= k_gap, gap_ratio otherwise
//   exp_decay       lambda_i = 2^{-exp_rate (i-1)}          (exp_rate = 0.5)
//   poly_decay      lambda_i = i^{-poly_power}              (poly_power = 2)
//   wishart_gapped  W W^T for an N x N standard Gaussian W, with its top
//                   k_gap eigenvalues multiplied by `rescale`; not normalized.
// wishart_gapped is built at the ambient size N and reduced to p features by
// truncate_model (leading p x p block).

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "projreg/error.hpp"
#include "projreg/numerics.hpp"
#include "projreg/rng.hpp"

namespace projreg {

enum class CovarianceKind { isotropic, gapped, exp_decay, poly_decay, wishart_gapped };
enum class BetaKind { gaussian_iso, aligned_constant, misaligned_ramp, fixed };

inline std::string_view to_string(CovarianceKind k) {
    switch (k) {
    case CovarianceKind::isotropic: return "isotropic";
    case CovarianceKind::gapped: return "gapped";
    case CovarianceKind::exp_decay: return "exp_decay";
    case CovarianceKind::poly_decay: return "poly_decay";
    case CovarianceKind::wishart_gapped: return "wishart_gapped";
    }
    return "?";
}

inline std::string_view to_string(BetaKind k) {
    switch (k) {
    case BetaKind::gaussian_iso: return "gaussian_iso";
    case BetaKind::aligned_constant: return "aligned_constant";
    case BetaKind::misaligned_ramp: return "misaligned_ramp";
    case BetaKind::fixed: return "fixed";
    }
    return "?";
}

struct CovarianceSpec {
    CovarianceKind kind = CovarianceKind::isotropic;
    Eigen::Index p = 1;
    Eigen::Index k_gap = 16;
    double gap_ratio = 0.01;
    double exp_rate = 0.5;
    double poly_power = 2.0;
    double rescale = 100.0;
    Eigen::Index ambient = 512;
};

struct BetaSpec {
    BetaKind kind = BetaKind::gaussian_iso;
    std::optional<double> snr;    // sigma = ||beta|| / snr
    std::optional<double> sigma;  // explicit noise level, overrides snr
    Vector fixed;                 // used when kind == fixed
    std::optional<double> norm;   // rescale beta to this length before sigma is set
    // Keep the noise level of an isotropic Gaussian beta at the same snr
    // (same seed) instead of rescaling to this beta's norm.
    bool match_gaussian_noise = false;
};

/// Ground truth consumed by every risk and bound computation.
struct DataModel {
    Matrix cxx;
    Vector beta;
    double sigma = 0.0;
    SpectralDecomposition spectral;
    Matrix cxx_sqrt;

    static DataModel create(Matrix cxx, Vector beta, double sigma) {
        if (cxx.rows() != cxx.cols() || cxx.rows() != beta.size())
            fail(ErrorCode::BadSpec, "C_xx must be p x p with p = len(beta)");
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail(ErrorCode::BadSpec, "sigma must be finite and >= 0");
        require_finite(beta, "beta");
        DataModel m;
        m.spectral = eig_sym(cxx);
        const double top = m.spectral.values.size() ? m.spectral.values(0) : 0.0;
        if (m.spectral.values.size() && m.spectral.values.minCoeff() < -1e-10 * std::abs(top))
            fail(ErrorCode::BadSpec, "C_xx is not positive semidefinite");
        m.cxx = std::move(cxx);
        m.beta = std::move(beta);
        m.sigma = sigma;
        m.cxx_sqrt = psd_sqrt(m.spectral);
        return m;
    }

    Eigen::Index dim() const { return beta.size(); }
    double noise_variance() const { return sigma * sigma; }
    /// beta^T C_xx beta, the signal power of y.
    double signal_power() const { return beta.dot(cxx * beta); }
};

struct Dataset {
    Matrix x;
    Vector y;
    std::uint64_t seed = 0;
    std::shared_ptr<const DataModel> model;  // null for imported data

    Eigen::Index n() const { return x.rows(); }
    Eigen::Index p() const { return x.cols(); }
};

namespace detail {

inline Vector spectrum_for(const CovarianceSpec& s) {
    Vector l(s.p);
    for (Eigen::Index i = 0; i < s.p; ++i) {
        const double idx = static_cast<double>(i + 1);
        switch (s.kind) {
        case CovarianceKind::isotropic: l(i) = 1.0; break;
        case CovarianceKind::gapped: l(i) = (i < s.k_gap) ? 1.0 : s.gap_ratio; break;
        case CovarianceKind::exp_decay: l(i) = std::exp2(-s.exp_rate * (idx - 1.0)); break;
        case CovarianceKind::poly_decay: l(i) = std::pow(idx, -s.poly_power); break;
        case CovarianceKind::wishart_gapped: break;
        }
    }
    return l;
}

}  // namespace detail

/// Population covariance. Diagonal for the four closed-form families
/// (p x p); ambient x ambient for wishart_gapped.
inline Matrix build_covariance(const CovarianceSpec& spec, std::uint64_t seed) {
    switch (spec.kind) {
    case CovarianceKind::gapped:
        if (!(spec.gap_ratio > 0.0 && spec.gap_ratio < 1.0) || spec.k_gap < 1)
            fail(ErrorCode::BadSpec, "gapped covariance needs k_gap >= 1 and gap_ratio in (0,1)");
        break;
    case CovarianceKind::exp_decay:
        if (!(spec.exp_rate > 0.0)) fail(ErrorCode::BadSpec, "exp_rate must be > 0");
        break;
    case CovarianceKind::poly_decay:
        if (!(spec.poly_power > 0.0)) fail(ErrorCode::BadSpec, "poly_power must be > 0");
        break;
    default: break;
    }
    if (spec.kind != CovarianceKind::wishart_gapped) {
        if (spec.p < 1) fail(ErrorCode::BadSpec, "p must be >= 1");
        return detail::spectrum_for(spec).asDiagonal();
    }

    const Eigen::Index n_amb = spec.ambient;
    if (n_amb < 1 || spec.k_gap < 0 || spec.k_gap > n_amb || !(spec.rescale > 0.0))
        fail(ErrorCode::BadSpec, "wishart_gapped needs ambient >= k_gap >= 0 and rescale > 0");
    Rng rng(derive_seed(seed, {0x57A7u}));
    Matrix w(n_amb, n_amb);
    for (Eigen::Index i = 0; i < n_amb; ++i)
        for (Eigen::Index j = 0; j < n_amb; ++j) w(i, j) = rng.normal();
    const Matrix sigma_n = w * w.transpose();
    SpectralDecomposition d = eig_sym(sigma_n);
    d.values.head(spec.k_gap) *= spec.rescale;
    Matrix out = d.reconstruct();
    return 0.5 * (out + out.transpose());
}

struct BetaDraw {
    Vector beta;
    double sigma = 0.0;
};

/// Regression coefficients and noise level. Eigenbasis-defined kinds use the
/// columns of `spectral.vectors` (descending eigenvalue order).
inline BetaDraw build_beta(const BetaSpec& spec, const SpectralDecomposition& spectral, std::uint64_t seed) {
    const Eigen::Index p = spectral.values.size();
    if (spec.snr && !(*spec.snr > 0.0)) fail(ErrorCode::BadSpec, "snr must be > 0");
    if (spec.sigma && !(*spec.sigma >= 0.0)) fail(ErrorCode::BadSpec, "sigma must be >= 0");
    if (!spec.snr && !spec.sigma) fail(ErrorCode::BadSpec, "beta spec needs snr or sigma");

    auto gaussian = [&] {
        Rng rng(derive_seed(seed, {0xBE7Au}));
        Vector b(p);
        for (Eigen::Index i = 0; i < p; ++i) b(i) = rng.normal();
        return b;
    };

    BetaDraw out;
    switch (spec.kind) {
    case BetaKind::gaussian_iso: out.beta = gaussian(); break;
    case BetaKind::aligned_constant: out.beta = spectral.vectors * Vector::Ones(p); break;
    case BetaKind::misaligned_ramp: out.beta = spectral.vectors * Vector::LinSpaced(p, 1.0, static_cast<double>(p)); break;
    case BetaKind::fixed:
        if (spec.fixed.size() != p) fail(ErrorCode::BadSpec, "fixed beta has wrong length");
        out.beta = spec.fixed;
        break;
    }
    if (spec.norm) {
        if (!(*spec.norm > 0.0)) fail(ErrorCode::BadSpec, "beta norm must be > 0");
        const double len = out.beta.norm();
        if (!(len > 0.0)) fail(ErrorCode::BadSpec, "cannot rescale a zero beta");
        out.beta *= *spec.norm / len;
    }
    if (spec.sigma) {
        out.sigma = *spec.sigma;
    } else if (spec.match_gaussian_noise) {
        out.sigma = (spec.norm ? *spec.norm : gaussian().norm()) / *spec.snr;
    } else {
        out.sigma = out.beta.norm() / *spec.snr;
    }
    return out;
}

/// Leading p x p block of C_xx and leading p entries of beta; sigma unchanged.
inline DataModel truncate_model(const DataModel& big, Eigen::Index p) {
    if (p < 1 || p > big.dim())
        fail(ErrorCode::BadRank, "cannot truncate a " + std::to_string(big.dim()) + "-dim model to p=" + std::to_string(p));
    if (p == big.dim()) return big;
    return DataModel::create(big.cxx.topLeftCorner(p, p), big.beta.head(p), big.sigma);
}

/// Full model at the ambient size of the covariance spec (spec.p for the
/// closed-form kinds, spec.ambient for wishart_gapped).
inline DataModel build_ambient_model(const CovarianceSpec& cov, const BetaSpec& beta, std::uint64_t seed) {
    Matrix c = build_covariance(cov, derive_seed(seed, {1}));
    SpectralDecomposition d = eig_sym(c);
    BetaDraw b = build_beta(beta, d, derive_seed(seed, {2}));
    return DataModel::create(std::move(c), std::move(b.beta), b.sigma);
}

/// Model with exactly cov.p features (truncating the ambient model if needed).
inline DataModel build_model(const CovarianceSpec& cov, const BetaSpec& beta, std::uint64_t seed) {
    DataModel big = build_ambient_model(cov, beta, seed);
    if (big.dim() == cov.p) return big;
    return truncate_model(big, cov.p);
}

/// n i.i.d. rows x ~ N(0, C_xx) (X = Z C_xx^{1/2}) and y = X beta + eps.
/// Z is read row-major from stream derive_seed(seed, {1}); eps from {2}.
inline Dataset sample(const std::shared_ptr<const DataModel>& model, Eigen::Index n, std::uint64_t seed) {
    if (!model) fail(ErrorCode::BadSpec, "sample needs a model");
    if (n < 1) fail(ErrorCode::BadSpec, "n must be >= 1");
    const Eigen::Index p = model->dim();
    Matrix z(n, p);
    Rng zr(derive_seed(seed, {1}));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) z(i, j) = zr.normal();
    Vector eps(n);
    Rng er(derive_seed(seed, {2}));
    for (Eigen::Index i = 0; i < n; ++i) eps(i) = model->sigma * er.normal();
    Dataset d;
    d.x = z * model->cxx_sqrt;
    d.y = d.x * model->beta + eps;
    d.seed = seed;
    d.model = model;
    return d;
}

inline Dataset sample(const DataModel& model, Eigen::Index n, std::uint64_t seed) {
    return sample(std::make_shared<const DataModel>(model), n, seed);
}

// CSV exchange: header x_1,...,x_p,y; one row per sample; 17 significant digits.

inline void write_dataset_csv(std::ostream& os, const Dataset& d) {
    for (Eigen::Index j = 0; j < d.p(); ++j) os << "x_" << (j + 1) << ',';
    os << "y\n";
    os << std::setprecision(17);
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        for (Eigen::Index j = 0; j < d.p(); ++j) os << d.x(i, j) << ',';
        os << d.y(i) << '\n';
    }
}

inline Dataset read_dataset_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) fail(ErrorCode::Io, "empty dataset csv");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 2 || header.back() != "y") fail(ErrorCode::Io, "dataset header must end with y");
    const auto p = static_cast<Eigen::Index>(header.size() - 1);
    for (Eigen::Index j = 0; j < p; ++j)
        if (header[static_cast<std::size_t>(j)] != "x_" + std::to_string(j + 1))
            fail(ErrorCode::Io, "unexpected header column " + header[static_cast<std::size_t>(j)]);

    std::vector<double> vals;
    Eigen::Index rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        Eigen::Index count = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                fail(ErrorCode::Io, "bad number '" + cell + "' on data row " + std::to_string(rows + 1));
            }
            ++count;
        }
        if (count != p + 1) fail(ErrorCode::Io, "row " + std::to_string(rows + 1) + " has wrong column count");
        ++rows;
    }
    Dataset d;
    d.x.resize(rows, p);
    d.y.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) d.x(i, j) = vals[static_cast<std::size_t>(i * (p + 1) + j)];
        d.y(i) = vals[static_cast<std::size_t>(i * (p + 1) + p)];
    }
    require_finite(d.x, "dataset x");
    require_finite(d.y, "dataset y");
    return d;
}

inline void write_dataset_csv(const std::string& path, const Dataset& d) {
    std::ofstream os(path);
    if (!os) fail(ErrorCode::Io, "cannot open " + path);
    write_dataset_csv(os, d);
}

inline Dataset read_dataset_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail(ErrorCode::Io, "cannot open " + path);
    return read_dataset_csv(is);
}

}  // namespace projreg
