#ifndef NNSTOKES_TENSOR_HPP
#define NNSTOKES_TENSOR_HPP

#include <Eigen/Dense>

namespace nnstokes {

/// Square n x n tensor, n in {2, 3}. Fixed maximum size keeps it on the stack.
using Tensor2 = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

inline Tensor2 symmetrize(const Tensor2& q) { return 0.5 * (q + q.transpose()); }

/// Frobenius product Q . P = sum_ij Q_ij P_ij.
inline double frobenius(const Tensor2& q, const Tensor2& p) { return q.cwiseProduct(p).sum(); }

inline double frobenius_norm(const Tensor2& q) { return q.norm(); }

inline Tensor2 identity_tensor(int n) { return Tensor2::Identity(n, n); }

}  // namespace nnstokes

#endif  // NNSTOKES_TENSOR_HPP
