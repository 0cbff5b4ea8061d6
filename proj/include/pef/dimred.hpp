#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <vector>

#include "pef/error.hpp"

namespace pef {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error("invalid argument", "empty matrix");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size())
      throw Error("invalid argument", "ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

struct Standardizer {
  Vector mean;
  Vector scale;  // population std, floored at 1 for near-constant columns

  Matrix apply(const Matrix& x) const {
    if (x.cols() != mean.size())
      throw Error("dimension mismatch", "feature count != standardizer dimension");
    return (x.rowwise() - mean.transpose()).array().rowwise() /
           scale.transpose().array();
  }
};

inline Standardizer fit_standardizer(const Matrix& train) {
  if (train.rows() < 2)
    throw Error("invalid argument", "standardizer needs at least 2 rows");
  Standardizer s;
  s.mean = train.colwise().mean();
  const Matrix centered = train.rowwise() - s.mean.transpose();
  s.scale = (centered.array().square().colwise().sum() /
             static_cast<double>(train.rows()))
                .sqrt();
  for (Eigen::Index j = 0; j < s.scale.size(); ++j)
    if (s.scale(j) < 1e-12) s.scale(j) = 1.0;
  return s;
}

struct PcaModel {
  Vector mean;             // column means of the (standardized) fit data
  Matrix components;       // d x k, orthonormal columns
  Vector singular_values;  // length min(n, d), nonincreasing
  Eigen::Index k = 0;
  Eigen::Index d = 0;
  Eigen::Index n_fit = 0;
};

namespace detail {

// Largest-magnitude entry of each component made positive, so fitted models
// are reproducible across SVD backends.
inline void canonicalize_signs(Matrix& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index arg = 0;
    v.col(j).cwiseAbs().maxCoeff(&arg);
    if (v(arg, j) < 0.0) v.col(j) = -v.col(j);
  }
}

}  // namespace detail

// PCA by SVD of the centered data. Small problems use an exact Jacobi SVD;
// large flat matrices (n << d) go through the n x n Gram matrix, which gives
// the same right singular vectors at a fraction of the cost.
inline PcaModel fit_pca(const Matrix& train, Eigen::Index k) {
  const Eigen::Index n = train.rows();
  const Eigen::Index d = train.cols();
  if (k < 1 || k > std::min(n, d))
    throw Error("invalid argument", "component count out of range");
  if (!train.allFinite()) throw Error("invalid argument", "non-finite input");

  PcaModel model;
  model.k = k;
  model.d = d;
  model.n_fit = n;
  model.mean = train.colwise().mean();
  const Matrix centered = train.rowwise() - model.mean.transpose();

  if (std::min(n, d) <= 256) {
    Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeThinV);
    model.singular_values = svd.singularValues();
    model.components = svd.matrixV().leftCols(k);
  } else if (n < d) {
    const Matrix gram = centered * centered.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    model.singular_values.resize(n);
    model.components.resize(d, k);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double lambda = std::max(eig.eigenvalues()(n - 1 - j), 0.0);
      model.singular_values(j) = std::sqrt(lambda);
    }
    for (Eigen::Index j = 0; j < k; ++j) {
      const double sigma = model.singular_values(j);
      if (sigma < 1e-12)
        throw Error("rank deficient", "requested components exceed numerical rank");
      model.components.col(j) =
          centered.transpose() * eig.eigenvectors().col(n - 1 - j) / sigma;
    }
  } else {
    Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
    model.singular_values = svd.singularValues();
    model.components = svd.matrixV().leftCols(k);
  }
  detail::canonicalize_signs(model.components);
  return model;
}

inline Matrix project(const PcaModel& model, const Matrix& features) {
  if (features.cols() != model.d)
    throw Error("dimension mismatch", "feature count != PCA dimension");
  return (features.rowwise() - model.mean.transpose()) * model.components;
}

inline Matrix reconstruct(const PcaModel& model, const Matrix& projected) {
  return (projected * model.components.transpose()).rowwise() +
         model.mean.transpose();
}

}  // namespace pef
