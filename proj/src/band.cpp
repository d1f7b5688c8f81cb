#include "rtv/band.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <lapacke.h>

#include "rtv/errors.hpp"

namespace rtv {

SymBand::SymBand(std::size_t n, std::size_t kd) : n_(n), kd_(kd), ab_((kd + 1) * n, 0.0) {}

void SymBand::add(std::size_t i, std::size_t j, double v) {
    if (i > j) std::swap(i, j);
    if (j - i > kd_) throw std::out_of_range("SymBand::add outside band");
    ab_[kd_ + i - j + j * (kd_ + 1)] += v;
}

double SymBand::operator()(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    if (j - i > kd_) return 0.0;
    return ab_[kd_ + i - j + j * (kd_ + 1)];
}

Eigen::VectorXd SymBand::multiply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
    for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t i0 = j >= kd_ ? j - kd_ : 0;
        for (std::size_t i = i0; i <= j; ++i) {
            const double a = ab_[kd_ + i - j + j * (kd_ + 1)];
            y[i] += a * x[j];
            if (i != j) y[j] += a * x[i];
        }
    }
    return y;
}

double SymBand::frobenius() const {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t i0 = j >= kd_ ? j - kd_ : 0;
        for (std::size_t i = i0; i <= j; ++i) {
            const double a = ab_[kd_ + i - j + j * (kd_ + 1)];
            s += (i == j ? 1.0 : 2.0) * a * a;
        }
    }
    return std::sqrt(s);
}

Eigen::MatrixXd SymBand::dense() const {
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t i0 = j >= kd_ ? j - kd_ : 0;
        for (std::size_t i = i0; i <= j; ++i) {
            const double a = ab_[kd_ + i - j + j * (kd_ + 1)];
            m(i, j) = a;
            m(j, i) = a;
        }
    }
    return m;
}

SymBand& SymBand::operator+=(const SymBand& o) {
    if (o.n_ != n_ || o.kd_ != kd_) throw std::invalid_argument("SymBand shape mismatch");
    for (std::size_t i = 0; i < ab_.size(); ++i) ab_[i] += o.ab_[i];
    return *this;
}

SymBand& SymBand::operator*=(double s) {
    for (double& a : ab_) a *= s;
    return *this;
}

SymBand operator+(SymBand a, const SymBand& b) { return a += b; }
SymBand operator*(double s, SymBand a) { return a *= s; }

GeneralizedEigen band_generalized_eigen(const SymBand& A, const SymBand& B, int il, int iu, bool vectors) {
    const auto n = static_cast<lapack_int>(A.size());
    if (B.size() != A.size()) throw std::invalid_argument("pencil size mismatch");
    if (il < 1 || iu > n || il > iu) throw DomainError("eigenvalue index range outside the matrix size");
    const auto ka = static_cast<lapack_int>(A.bandwidth()), kb = static_cast<lapack_int>(B.bandwidth());
    std::vector<double> ab = A.data(), bb = B.data();
    std::vector<double> q(static_cast<std::size_t>(n) * n), w(n), z(static_cast<std::size_t>(n) * (iu - il + 1));
    std::vector<lapack_int> ifail(n);
    lapack_int m = 0;
    const lapack_int info = LAPACKE_dsbgvx(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'I', 'U', n, ka, kb, ab.data(),
                                           ka + 1, bb.data(), kb + 1, q.data(), n, 0.0, 0.0, il, iu, 0.0, &m,
                                           w.data(), z.data(), n, ifail.data());
    if (info != 0) {
        std::ostringstream os;
        os << "banded generalized eigensolver failed (info=" << info << ")";
        if (info > n) os << "; right-hand matrix is not positive definite, re-check coercivity";
        throw NumericalError(os.str(), info > n ? "factorization" : "eigensolver");
    }
    GeneralizedEigen out;
    out.values = Eigen::Map<Eigen::VectorXd>(w.data(), m);
    if (vectors) out.vectors = Eigen::Map<Eigen::MatrixXd>(z.data(), n, m);
    return out;
}

}  // namespace rtv
