#pragma once

#include <stdexcept>
#include <string>

namespace gwre {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid or failing environment kernel (bad rows, sampler failure, ...).
struct KernelError : Error {
  using Error::Error;
};

/// Tree addressed through a vertex that was never realized.
struct UnrealizedAncestorError : Error {
  using Error::Error;
};

/// Config-file schema violations; message carries the field path.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace gwre
