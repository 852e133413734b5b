#ifndef ADAPTIVE_OPE_KERNELS_HPP
#define ADAPTIVE_OPE_KERNELS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

// Gaussian-kernel ridge regression and multiclass kernel logistic regression.
// Training points are stored one per row.

namespace aope {

/// k(a, b) = exp(-gamma * ||a - b||^2) between every row of `a` and every row of `b`.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> gaussian_kernel(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
    typename DerivedA::Scalar gamma) {
  using Scalar = typename DerivedA::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix out(a.rows(), b.rows());
  if (a.cols() == 0) {
    out.setOnes();
    return out;
  }
  const auto an = a.rowwise().squaredNorm().eval();
  const auto bn = b.rowwise().squaredNorm().eval();
  out.noalias() = a * b.transpose();
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      const Scalar d2 = std::max(Scalar(0), an[i] + bn[j] - Scalar(2) * out(i, j));
      out(i, j) = std::exp(-gamma * d2);
    }
  }
  return out;
}

/// Kernel vector k(x) against every row of `points`.
template <typename DerivedP, typename DerivedX>
Eigen::Matrix<typename DerivedP::Scalar, Eigen::Dynamic, 1> gaussian_kernel_vector(
    const Eigen::MatrixBase<DerivedP>& points, const Eigen::MatrixBase<DerivedX>& x,
    typename DerivedP::Scalar gamma) {
  using Scalar = typename DerivedP::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> k(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    k[i] = std::exp(-gamma * (points.row(i).transpose() - x).squaredNorm());
  }
  return k;
}

/// Closed-form kernel ridge: predictor(x) = c + k(x)^T (K + lambda I)^{-1} (y - c).
/// c is the mean of y when `center` is set and 0 otherwise.
template <typename Scalar = double>
class KernelRidge {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  KernelRidge() = default;

  template <typename DerivedX, typename DerivedY>
  KernelRidge(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
              Scalar lambda, Scalar gamma, bool center = false)
      : points_(x), gamma_(gamma), lambda_(lambda) {
    if (lambda <= Scalar(0)) throw std::domain_error("ridge penalty must be positive");
    if (x.rows() != y.size()) throw std::invalid_argument("x/y size mismatch");
    if (center && y.size() > 0) offset_ = y.mean();
    Matrix gram = gaussian_kernel(points_, points_, gamma);
    gram.diagonal().array() += lambda;
    coef_ = Eigen::LLT<Matrix>(gram).solve((y.array() - offset_).matrix());
  }

  template <typename DerivedX>
  Scalar predict(const Eigen::MatrixBase<DerivedX>& x) const {
    if (points_.rows() == 0) return Scalar(0);
    return offset_ + gaussian_kernel_vector(points_, x, gamma_).dot(coef_);
  }

  template <typename DerivedX>
  Vector predict_rows(const Eigen::MatrixBase<DerivedX>& x) const {
    if (points_.rows() == 0) return Vector::Zero(x.rows());
    return (gaussian_kernel(x, points_, gamma_) * coef_).array() + offset_;
  }

  Scalar offset() const { return offset_; }

  Eigen::Index size() const { return points_.rows(); }
  Scalar lambda() const { return lambda_; }
  Scalar gamma() const { return gamma_; }

 private:
  Matrix points_;
  Vector coef_;
  Scalar offset_ = Scalar(0);
  Scalar gamma_ = Scalar(1);
  Scalar lambda_ = Scalar(1);
};

/// Row-wise softmax of a score matrix.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> softmax_rows(
    const Eigen::MatrixBase<Derived>& scores) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> p =
      (scores.colwise() - scores.rowwise().maxCoeff()).array().exp().matrix();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

/// Multiclass kernel logistic regression without intercept:
///   min (1/n) sum_i CE(labels_i, softmax(K alpha)_i) + (lambda/2) sum_c alpha_c^T K alpha_c.
/// Solved by accelerated gradient in the whitened coordinates w = L^T alpha, K = L L^T.
template <typename Scalar = double>
class KernelLogistic {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Options {
    int max_iterations = 5000;
    Scalar tolerance = Scalar(1e-9);
    Scalar jitter = Scalar(1e-8);
  };

  KernelLogistic() = default;

  /// `labels` are zero-based classes in [0, num_classes).
  template <typename DerivedX>
  KernelLogistic(const Eigen::MatrixBase<DerivedX>& x, const std::vector<int>& labels,
                 int num_classes, Scalar lambda, Scalar gamma, Options options = {})
      : points_(x), gamma_(gamma), lambda_(lambda), num_classes_(num_classes) {
    if (lambda <= Scalar(0)) throw std::domain_error("logistic penalty must be positive");
    const Eigen::Index n = x.rows();
    if (n != static_cast<Eigen::Index>(labels.size())) {
      throw std::invalid_argument("x/labels size mismatch");
    }
    if (n == 0) {
      coef_ = Matrix::Zero(0, num_classes);
      return;
    }
    Matrix targets = Matrix::Zero(n, num_classes);
    for (Eigen::Index i = 0; i < n; ++i) targets(i, labels[static_cast<std::size_t>(i)]) = 1;

    Matrix gram = gaussian_kernel(points_, points_, gamma);
    gram.diagonal().array() += options.jitter;
    const Eigen::LLT<Matrix> llt(gram);
    const Matrix lower = llt.matrixL();

    const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);
    // Multinomial log-loss Hessian is bounded by I/2 in score space; ||L||^2 <= trace(K).
    const Scalar smooth = lambda + Scalar(0.5) * inv_n * gram.trace();
    const Scalar step = Scalar(1) / smooth;
    const Scalar ratio = std::sqrt(smooth / lambda);
    const Scalar momentum = (ratio - Scalar(1)) / (ratio + Scalar(1));

    Matrix w = Matrix::Zero(n, num_classes);
    Matrix w_prev = w;
    Matrix v = w;
    Matrix grad(n, num_classes);
    for (iterations_ = 0; iterations_ < options.max_iterations; ++iterations_) {
      const Matrix scores = lower.template triangularView<Eigen::Lower>() * v;
      const Matrix resid = softmax_rows(scores) - targets;
      grad.noalias() = lower.transpose().template triangularView<Eigen::Upper>() * resid;
      grad = inv_n * grad + lambda * v;
      if (grad.norm() <= options.tolerance) {
        w = v;
        break;
      }
      w_prev = w;
      w = v - step * grad;
      v = w + momentum * (w - w_prev);
    }
    coef_ = lower.transpose().template triangularView<Eigen::Upper>().solve(w);
  }

  /// Class probabilities at a single point.
  template <typename DerivedX>
  Vector probabilities(const Eigen::MatrixBase<DerivedX>& x) const {
    if (points_.rows() == 0) return Vector::Constant(num_classes_, Scalar(1) / num_classes_);
    const Matrix s = (gaussian_kernel_vector(points_, x, gamma_).transpose() * coef_);
    return softmax_rows(s).row(0).transpose();
  }

  /// Class probabilities for every row of `x`.
  template <typename DerivedX>
  Matrix probabilities_rows(const Eigen::MatrixBase<DerivedX>& x) const {
    if (points_.rows() == 0) {
      return Matrix::Constant(x.rows(), num_classes_, Scalar(1) / num_classes_);
    }
    return softmax_rows(gaussian_kernel(x, points_, gamma_) * coef_);
  }

  int iterations() const { return iterations_; }
  Eigen::Index size() const { return points_.rows(); }
  Scalar lambda() const { return lambda_; }
  Scalar gamma() const { return gamma_; }

 private:
  Matrix points_;
  Matrix coef_;
  Scalar gamma_ = Scalar(1);
  Scalar lambda_ = Scalar(1);
  int num_classes_ = 2;
  int iterations_ = 0;
};

}  // namespace aope

#endif  // ADAPTIVE_OPE_KERNELS_HPP
