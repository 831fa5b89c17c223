#include "latentflow/pareto.hpp"

namespace latentflow {

template std::vector<Eigen::Index> paretoFilter(const Eigen::MatrixBase<Eigen::MatrixXd>&);
template double hypervolume(const Eigen::MatrixBase<Eigen::MatrixXd>&, const Eigen::MatrixBase<Eigen::VectorXd>&);
template class SortedFront2<double>;

}  // namespace latentflow
