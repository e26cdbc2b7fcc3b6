#pragma once

#include <mutex>

namespace hdd::detail {

// FFTW's planner is not re-entrant; plan execution is.
std::mutex& fftw_planner_mutex();

}  // namespace hdd::detail
