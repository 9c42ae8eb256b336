#pragma once

namespace lidarsim
{

/// Worker count used by all parallel loops. Defaults to the LIDARSIM_THREADS
/// environment variable if set, otherwise the OpenMP default.
int worker_count();

/// Override the worker count; values < 1 restore the default.
void set_worker_count(int n);

/// RAII override of the worker count.
class ScopedWorkers
{
public:
    explicit ScopedWorkers(int n);
    ~ScopedWorkers();
    ScopedWorkers(const ScopedWorkers&) = delete;
    ScopedWorkers& operator=(const ScopedWorkers&) = delete;

private:
    int previous_;
};

} // namespace lidarsim
