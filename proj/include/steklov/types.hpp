#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SparseCore>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace steklov {

using Index = Eigen::Index;
using Vec3 = Eigen::Vector3d;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using Faces = Eigen::Matrix<int, Eigen::Dynamic, 3>;
using Cells = Eigen::Matrix<int, Eigen::Dynamic, 4>;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Base class for all library errors; concrete subtypes name the failure mode.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct DegenerateVolume : Error { using Error::Error; };
struct EmptyMesh : Error { using Error::Error; };
struct NonManifoldEdge : Error { using Error::Error; };
struct InvertedTet : Error { using Error::Error; };
struct CoincidentPoints : Error { using Error::Error; };
struct SingularEvaluation : Error { using Error::Error; };
struct DegenerateTriangle : Error { using Error::Error; };
struct BreakdownError : Error { using Error::Error; };
struct IllConditionedBasis : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct InnerSolveDiverged : Error { using Error::Error; };
struct SolveDiverged : Error { using Error::Error; };
struct RankDeficient : Error { using Error::Error; };
struct SingularInteriorBlock : Error { using Error::Error; };
struct SingularGram : Error { using Error::Error; };

}  // namespace steklov
