#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "gsk/common.hpp"

namespace gsk {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct LogDet {
  cplx value;                  // sum of log(pivot) plus i pi per row swap parity
  double growth_factor = 1.0;  // max|U| / max|M|
};

namespace detail {

inline LogDet logdet_from_lu(const Eigen::PartialPivLU<Matrix>& lu, double max_entry) {
  const Matrix& packed = lu.matrixLU();
  LogDet out;
  out.value = 0.0;
  double max_u = 0.0;
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    const cplx pivot = packed(i, i);
    if (pivot == cplx{}) fail(ErrorKind::numeric, "logdet_lu: exact zero pivot, matrix singular");
    out.value += std::log(pivot);
    for (Eigen::Index j = i; j < packed.cols(); ++j) max_u = std::max(max_u, std::abs(packed(i, j)));
  }
  if (lu.permutationP().determinant() < 0) out.value += I * pi;
  out.growth_factor = max_entry > 0.0 ? max_u / max_entry : 1.0;
  return out;
}

}  // namespace detail

/// log det of a square complex matrix by LU with partial pivoting.
inline LogDet logdet_lu(const Matrix& m) {
  if (m.rows() != m.cols()) fail(ErrorKind::config, "logdet_lu: matrix is not square");
  if (m.rows() == 0) return {cplx{}, 1.0};
  const Eigen::PartialPivLU<Matrix> lu(m);
  return detail::logdet_from_lu(lu, m.cwiseAbs().maxCoeff());
}

}  // namespace gsk
