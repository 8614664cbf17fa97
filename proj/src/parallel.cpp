#include "hollow/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hollow {

void serial_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  for (std::size_t i = 0; i < n; ++i) body(i);
}

void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& body) {
#ifdef _OPENMP
  if (jobs > 1 && n > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      body(static_cast<std::size_t>(i));
    return;
  }
#else
  (void)jobs;
#endif
  serial_for(n, body);
}

int default_jobs() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace hollow
