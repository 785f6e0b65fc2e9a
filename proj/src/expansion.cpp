#include "tilekit/expansion.hpp"

#include <Eigen/Dense>
#include <sstream>

namespace tilekit {

namespace {
Eigen::MatrixXd to_eigen(const Mat& m) {
    Eigen::MatrixXd e(m.dim, m.dim);
    for (int i = 0; i < m.dim; ++i)
        for (int j = 0; j < m.dim; ++j) e(i, j) = m.at(i, j);
    return e;
}
}  // namespace

double sigma_min(const Mat& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
    return svd.singularValues()(m.dim - 1);
}

double sigma_max(const Mat& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
    return svd.singularValues()(0);
}

ExpansionMap adapted_expansion(const Mat& matrix, int max_power, double tol) {
    check_dim(matrix.dim);
    Eigen::MatrixXd e = to_eigen(matrix);
    if (std::abs(e.determinant()) < 1e-12) throw NotExpandingError("matrix is singular");
    Eigen::EigenSolver<Eigen::MatrixXd> es(e);
    for (int i = 0; i < matrix.dim; ++i) {
        double mod = std::abs(es.eigenvalues()(i));
        if (mod <= 1.0 + tol) {
            std::ostringstream ss;
            ss << "eigenvalue modulus " << mod << " is not > 1 + " << tol;
            throw NotExpandingError(ss.str());
        }
    }
    for (int ell = 1; ell <= max_power; ++ell) {
        double s = sigma_min(mat_pow(matrix, ell));
        if (s > 1.0) {
            ExpansionMap m;
            m.dim = matrix.dim;
            m.matrix = matrix;
            m.ell = ell;
            m.lambda = s;
            return m;
        }
    }
    throw PowerExhaustedError("no power <= " + std::to_string(max_power) +
                              " has sigma_min > 1");
}

}  // namespace tilekit
