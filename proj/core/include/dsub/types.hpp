#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace dsub {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Full data: n rows of p covariates, plus an optional response column.
struct DataMatrix {
  Matrix x;
  std::optional<Vector> y;

  Index n() const { return x.rows(); }
  Index p() const { return x.cols(); }
  bool has_response() const { return y.has_value(); }
};

enum class SelectionSource { uniform, iboss, oss, custom };

std::string_view to_string(SelectionSource source);

/// Ordered index set S of size k. Slot order matters to the exchange
/// algorithms, which visit slots front to back.
struct Selection {
  std::vector<Index> indices;
  SelectionSource source = SelectionSource::custom;

  std::size_t size() const { return indices.size(); }
};

/// Throws std::invalid_argument unless indices are distinct and < n.
void validate_selection(const Selection& sel, Index n);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Selected rows do not span the augmented covariate space.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// A rank-one downdate would leave the factor indefinite.
class DowndateError : public Error {
 public:
  using Error::Error;
};

}  // namespace dsub
