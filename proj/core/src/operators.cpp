#include "evostab/operators.hpp"

#include "evostab/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <string>

namespace evostab {

namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

void require_same_space(const VectorSpace& a, const VectorSpace& b) {
    if (!(a == b)) {
        throw InvalidOperator(fmt::format("space mismatch: dim {} vs {}", a.dim, b.dim));
    }
}

} // namespace

NormKind parse_norm_kind(std::string_view name) {
    if (name == "euclidean" || name == "2") return NormKind::euclidean;
    if (name == "one" || name == "one-norm" || name == "1") return NormKind::one;
    if (name == "inf" || name == "inf-norm") return NormKind::inf;
    throw ValidationError({fmt::format("norm: unknown norm kind '{}'", name)});
}

std::string_view to_string(NormKind kind) {
    switch (kind) {
    case NormKind::euclidean: return "euclidean";
    case NormKind::one: return "one";
    case NormKind::inf: return "inf";
    }
    return "?";
}

VectorSpace::VectorSpace(int d, NormKind n) : dim(d), norm(n) {
    if (d < 1) throw InvalidOperator(fmt::format("vector space dimension must be >= 1, got {}", d));
}

double vector_norm(const ColumnVector& v, NormKind kind) {
    switch (kind) {
    case NormKind::euclidean: return v.norm();
    case NormKind::one: return v.lpNorm<1>();
    case NormKind::inf: return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
    }
    return 0.0;
}

double matrix_norm(const Matrix& m, NormKind kind) {
    if (m.size() == 0) return 0.0;
    switch (kind) {
    case NormKind::one: return m.cwiseAbs().colwise().sum().maxCoeff();
    case NormKind::inf: return m.cwiseAbs().rowwise().sum().maxCoeff();
    case NormKind::euclidean:
        if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
        // Two-sided Jacobi is accurate to a few ulps relative to sigma_max.
        return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
    }
    return 0.0;
}

Operator::Operator(Matrix entries, VectorSpace space) : m_(std::move(entries)), space_(space) {
    if (m_.rows() != space_.dim || m_.cols() != space_.dim) {
        throw InvalidOperator(fmt::format("operator is {}x{} but space has dim {}", m_.rows(),
                                          m_.cols(), space_.dim));
    }
    if (!all_finite(m_)) throw InvalidOperator("operator has non-finite entries");
}

Operator Operator::identity(VectorSpace space) {
    return {Matrix::Identity(space.dim, space.dim), space};
}

Operator Operator::zero(VectorSpace space) { return {Matrix::Zero(space.dim, space.dim), space}; }

Operator Operator::operator*(const Operator& rhs) const {
    require_same_space(space_, rhs.space_);
    return {m_ * rhs.m_, space_};
}

Operator Operator::operator+(const Operator& rhs) const {
    require_same_space(space_, rhs.space_);
    return {m_ + rhs.m_, space_};
}

Operator Operator::operator-(const Operator& rhs) const {
    require_same_space(space_, rhs.space_);
    return {m_ - rhs.m_, space_};
}

Operator Operator::operator*(double s) const { return {m_ * s, space_}; }

Vector::Vector(ColumnVector entries, VectorSpace space) : v_(std::move(entries)), space_(space) {
    if (v_.size() != space_.dim) {
        throw InvalidOperator(
            fmt::format("vector has length {} but space has dim {}", v_.size(), space_.dim));
    }
    if (!v_.allFinite()) throw InvalidOperator("vector has non-finite entries");
}

Vector Vector::zero(VectorSpace space) { return {ColumnVector::Zero(space.dim), space}; }

Vector Vector::operator-(const Vector& rhs) const {
    require_same_space(space_, rhs.space_);
    return {v_ - rhs.v_, space_};
}

Vector operator*(const Operator& m, const Vector& v) {
    require_same_space(m.space(), v.space());
    return {m.matrix() * v.entries(), v.space()};
}

double op_norm(const Operator& m) { return matrix_norm(m.matrix(), m.space().norm); }

double condition_number(const Operator& m) {
    Eigen::FullPivLU<Matrix> lu(m.matrix());
    if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
    return op_norm(m) * matrix_norm(lu.inverse(), m.space().norm);
}

Operator invert(const Operator& m, InvertOptions opts) {
    const Matrix& a = m.matrix();
    const auto n = a.rows();
    Eigen::FullPivLU<Matrix> lu(a);
    if (!lu.isInvertible()) {
        throw SingularOperator("operator is singular", std::numeric_limits<double>::infinity());
    }
    Matrix x = lu.inverse();
    // One step of iterative refinement: X <- X + X (I - A X).
    const Matrix residual = Matrix::Identity(n, n) - a * x;
    x += x * residual;
    const double cond = matrix_norm(a, m.space().norm) * matrix_norm(x, m.space().norm);
    if (!(cond <= opts.condition_cap)) {
        throw SingularOperator(
            fmt::format("operator is ill-conditioned (cond ~ {:.3e}, cap {:.1e})", cond,
                        opts.condition_cap),
            cond);
    }
    return {std::move(x), m.space()};
}

ValidationError::ValidationError(std::vector<std::string> fields)
    : Error([&] {
          std::string msg = "invalid configuration:";
          for (const auto& f : fields) msg += "\n  - " + f;
          return msg;
      }()),
      fields_(std::move(fields)) {}

} // namespace evostab
