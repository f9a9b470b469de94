#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace evostab {

using Matrix = Eigen::MatrixXd;
using ColumnVector = Eigen::VectorXd;

enum class NormKind { euclidean, one, inf };

NormKind parse_norm_kind(std::string_view name);
std::string_view to_string(NormKind kind);

/// The state space R^r together with the norm used for every estimate on it.
struct VectorSpace {
    int dim = 1;
    NormKind norm = NormKind::euclidean;

    VectorSpace() = default;
    VectorSpace(int dim, NormKind norm);

    friend bool operator==(const VectorSpace&, const VectorSpace&) = default;
};

/// Vector norm of `v` for the given kind.
double vector_norm(const ColumnVector& v, NormKind kind);

/// Induced operator norm of a raw square matrix. The euclidean case is the
/// largest singular value.
double matrix_norm(const Matrix& m, NormKind kind);

/// Linear endomorphism of a VectorSpace. Entries are always finite.
class Operator {
public:
    Operator(Matrix entries, VectorSpace space);

    static Operator identity(VectorSpace space);
    static Operator zero(VectorSpace space);

    const Matrix& matrix() const noexcept { return m_; }
    const VectorSpace& space() const noexcept { return space_; }
    int dim() const noexcept { return space_.dim; }
    double operator()(int i, int j) const { return m_(i, j); }

    Operator operator*(const Operator& rhs) const;
    Operator operator+(const Operator& rhs) const;
    Operator operator-(const Operator& rhs) const;
    Operator operator*(double s) const;

private:
    Matrix m_;
    VectorSpace space_;
};

class Vector {
public:
    Vector(ColumnVector entries, VectorSpace space);

    static Vector zero(VectorSpace space);

    const ColumnVector& entries() const noexcept { return v_; }
    const VectorSpace& space() const noexcept { return space_; }
    double operator[](int i) const { return v_(i); }

    double norm() const { return vector_norm(v_, space_.norm); }

    Vector operator-(const Vector& rhs) const;

private:
    ColumnVector v_;
    VectorSpace space_;
};

Vector operator*(const Operator& m, const Vector& v);

double op_norm(const Operator& m);

struct InvertOptions {
    double condition_cap = 1e12;
};

/// Inverse via a pivoted LU solve. Throws SingularOperator (carrying the
/// condition estimate) when cond(M) exceeds the cap.
Operator invert(const Operator& m, InvertOptions opts = {});

/// Condition number in the operator's own norm.
double condition_number(const Operator& m);

} // namespace evostab
