#pragma once

namespace morreylab {

/// Applies the MORREYLAB_THREADS cap (if set) to the OpenMP runtime and returns
/// the thread count in effect. A no-op returning 1 without OpenMP.
int configure_threads();

}  // namespace morreylab
