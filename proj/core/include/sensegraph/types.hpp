#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace sensegraph {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

using NodeId = std::string;
using VerbId = std::string;
using SenseId = std::string;

}  // namespace sensegraph
