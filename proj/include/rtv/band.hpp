#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace rtv {

/// Symmetric band matrix in LAPACK upper band storage (column-major, ldab = kd + 1).
class SymBand {
public:
    SymBand() = default;
    SymBand(std::size_t n, std::size_t kd);

    std::size_t size() const { return n_; }
    std::size_t bandwidth() const { return kd_; }

    /// Adds v to entry (i, j); entries below the diagonal are folded onto (j, i).
    void add(std::size_t i, std::size_t j, double v);
    double operator()(std::size_t i, std::size_t j) const;

    Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
    double quadratic(const Eigen::VectorXd& x) const { return x.dot(multiply(x)); }
    double frobenius() const;
    Eigen::MatrixXd dense() const;

    SymBand& operator+=(const SymBand& o);
    SymBand& operator*=(double s);

    std::vector<double>& data() { return ab_; }
    const std::vector<double>& data() const { return ab_; }

private:
    std::size_t n_ = 0;
    std::size_t kd_ = 0;
    std::vector<double> ab_;
};

SymBand operator+(SymBand a, const SymBand& b);
SymBand operator*(double s, SymBand a);

struct GeneralizedEigen {
    Eigen::VectorXd values;   ///< ascending
    Eigen::MatrixXd vectors;  ///< B-orthonormal columns
};

/// Eigenpairs il..iu (1-based, ascending order) of A x = w B x with B positive definite.
GeneralizedEigen band_generalized_eigen(const SymBand& A, const SymBand& B, int il, int iu, bool vectors = true);

}  // namespace rtv
