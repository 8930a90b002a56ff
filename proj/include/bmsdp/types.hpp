#pragma once

#include <Eigen/Dense>

namespace bmsdp {

using Scalar = double;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Largest integer p with p(p+1)/2 <= m_prime.
int pataki_bound(int m_prime);

} // namespace bmsdp
