#include "noisewarp/parallel.hpp"

#include <omp.h>

#include <algorithm>

namespace noisewarp {

void set_num_threads(int n) { omp_set_num_threads(std::max(1, n)); }

int num_threads() { return omp_get_max_threads(); }

}  // namespace noisewarp
