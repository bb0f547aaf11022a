// SPDX-License-Identifier: Apache-2.0
//
// chanbench: wireless channel simulation and ML transfer-evaluation toolkit
// Copyright (C) 2026 The chanbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace chanbench::eval {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work items are
/// claimed in index order and results must be written to per-index slots,
/// so the outcome does not depend on scheduling. The exception of the
/// lowest failing index is rethrown after all workers have joined.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)> &fn)
{
    if (n == 0)
        return;
    const auto workers = static_cast<std::size_t>(std::clamp<long long>(jobs, 1, static_cast<long long>(n)));
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t i = next++; i < n; i = next++)
        {
            try
            {
                fn(i);
            }
            catch (...)
            {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1)
    {
        work();
    }
    else
    {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            threads.emplace_back(work);
        for (auto &t : threads)
            t.join();
    }
    for (auto &e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace chanbench::eval
