#include "hede/parallel.hpp"

#include "hede/errors.hpp"

#include <omp.h>

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace hede {

void set_thread_count(int threads)
{
    if (threads < 1) throw InvalidArgument("thread count must be >= 1");
    omp_set_num_threads(threads);
}

int thread_count()
{
    return omp_get_max_threads();
}

std::optional<int> resolve_thread_request(std::optional<int> flag)
{
    if (flag) return flag;
    const char* env = std::getenv("HEDE_THREADS");
    if (env == nullptr || *env == '\0') return std::nullopt;
    int value = 0;
    const char* end = env + std::strlen(env);
    auto [ptr, ec] = std::from_chars(env, end, value);
    if (ec != std::errc() || ptr != end || value < 1) {
        throw InvalidArgument(std::string("HEDE_THREADS must be a positive integer, got '") + env + "'");
    }
    return value;
}

} // namespace hede
