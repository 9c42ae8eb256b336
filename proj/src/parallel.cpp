#include "lidarsim/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <string>

namespace lidarsim
{

namespace
{

std::atomic<int> g_override{0};

int default_workers()
{
    if (const char* env = std::getenv("LIDARSIM_THREADS"))
    {
        try
        {
            const int n = std::stoi(env);
            if (n > 0)
                return n;
        }
        catch (const std::exception&)
        {
        }
    }
    return omp_get_max_threads();
}

} // namespace

int worker_count()
{
    const int n = g_override.load();
    return n > 0 ? n : default_workers();
}

void set_worker_count(int n)
{
    g_override.store(n > 0 ? n : 0);
}

ScopedWorkers::ScopedWorkers(int n)
    : previous_(g_override.load())
{
    set_worker_count(n);
}

ScopedWorkers::~ScopedWorkers()
{
    g_override.store(previous_);
}

} // namespace lidarsim
