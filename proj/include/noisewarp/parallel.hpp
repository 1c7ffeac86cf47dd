#pragma once

namespace noisewarp {

// Thread count used by the OpenMP regions inside the engine. Results never
// depend on this value.
void set_num_threads(int n);
int num_threads();

}  // namespace noisewarp
