#include "esncast/linalg.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace esncast {

bool cholesky_solve_inplace(Matrix& A, std::vector<double>& b) {
    const int n = A.rows;
    if (A.cols != n || static_cast<int>(b.size()) != n) {
        throw InternalError("cholesky_solve_inplace: shape mismatch");
    }
    // Lower-triangular factor written into A.
    for (int j = 0; j < n; ++j) {
        double d = A.at(j, j);
        for (int k = 0; k < j; ++k) d -= A.at(j, k) * A.at(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        A.at(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = A.at(i, j);
            for (int k = 0; k < j; ++k) s -= A.at(i, k) * A.at(j, k);
            A.at(i, j) = s / ljj;
        }
    }
    // Forward then back substitution.
    for (int i = 0; i < n; ++i) {
        double s = b[static_cast<size_t>(i)];
        for (int k = 0; k < i; ++k) s -= A.at(i, k) * b[static_cast<size_t>(k)];
        b[static_cast<size_t>(i)] = s / A.at(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[static_cast<size_t>(i)];
        for (int k = i + 1; k < n; ++k) s -= A.at(k, i) * b[static_cast<size_t>(k)];
        b[static_cast<size_t>(i)] = s / A.at(i, i);
    }
    return true;
}

std::vector<double> pinv_solve(const Matrix& A, const std::vector<double>& b, double rcond) {
    const int n = A.rows;
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> ma(
        A.data(), n, n);
    Eigen::Map<const Eigen::VectorXd> mb(b.data(), n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ma);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double cutoff = rcond * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        if (ev[i] > cutoff) inv[i] = 1.0 / ev[i];
    }
    Eigen::VectorXd x = es.eigenvectors() * (inv.asDiagonal() * (es.eigenvectors().transpose() * mb));
    return std::vector<double>(x.data(), x.data() + n);
}

double spectral_radius(const Matrix& A) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> ma(
        A.data(), A.rows, A.cols);
    Eigen::EigenSolver<Eigen::MatrixXd> es(ma, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double max_singular_value(const Matrix& A) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> ma(
        A.data(), A.rows, A.cols);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ma);
    return svd.singularValues()(0);
}

void symmetric_eigen(const Matrix& A, std::vector<double>& values, Matrix& vectors) {
    const int n = A.rows;
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> ma(
        A.data(), n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ma);
    if (es.info() != Eigen::Success) throw InternalError("symmetric eigendecomposition failed");
    values.resize(static_cast<size_t>(n));
    vectors = Matrix(n, n);
    // Eigen returns ascending order; flip to descending.
    for (int j = 0; j < n; ++j) {
        const int src = n - 1 - j;
        values[static_cast<size_t>(j)] = es.eigenvalues()(src);
        for (int i = 0; i < n; ++i) vectors.at(i, j) = es.eigenvectors()(i, src);
    }
}

}  // namespace esncast
