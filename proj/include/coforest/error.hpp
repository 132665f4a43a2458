#pragma once

#include <stdexcept>

namespace coforest {

/// Input data that cannot be turned into a usable dataset: unreadable files,
/// ragged rows, unknown columns, nothing left after missing-value removal.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace coforest
