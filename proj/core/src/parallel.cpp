#include "morreylab/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace morreylab {

int configure_threads() {
#ifdef _OPENMP
  if (const char* env = std::getenv("MORREYLAB_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0) omp_set_num_threads(cap);
    } catch (const std::exception&) {
      // ignore malformed values
    }
  }
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace morreylab
