#include "auvfleet/nlp.hpp"

#include <limits>

namespace auvfleet {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

VectorXd NlpProblem::lower_bounds() const {
  return VectorXd::Constant(num_vars(), -kInf);
}

VectorXd NlpProblem::upper_bounds() const {
  return VectorXd::Constant(num_vars(), kInf);
}

VectorXd NlpProblem::equalities(const VectorXd&) const { return VectorXd(0); }

VectorXd NlpProblem::inequalities(const VectorXd&) const { return VectorXd(0); }

MatrixXd NlpProblem::equality_jacobian(const VectorXd& x) const {
  return MatrixXd::Zero(0, x.size());
}

MatrixXd NlpProblem::inequality_jacobian(const VectorXd& x) const {
  return MatrixXd::Zero(0, x.size());
}

}  // namespace auvfleet
