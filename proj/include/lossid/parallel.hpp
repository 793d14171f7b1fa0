#pragma once

#include <cstddef>
#include <functional>

namespace lossid {

// Process-wide worker cap, set once by the CLI's --jobs flag.
// 0 means "use hardware concurrency".
void set_max_jobs(std::size_t jobs);
std::size_t max_jobs();

// Runs fn(i) for i in [0, n). Tasks must be independent and write only to
// their own result slots; callers derive any randomness from (seed, i) so the
// outcome does not depend on the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace lossid
