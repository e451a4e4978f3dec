#pragma once

#include <stdexcept>

namespace uwbloc {

// Malformed configuration files or inconsistent option sets.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unreadable or structurally invalid data files (corpora, checkpoints).
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An estimator could not produce a finite result.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace uwbloc
