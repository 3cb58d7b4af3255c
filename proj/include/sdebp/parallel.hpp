/*
 Copyright 2026 The sdebp Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef SDEBP_PARALLEL_HPP
#define SDEBP_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace sdebp {

/// Worker count: `requested` when positive, else hardware concurrency; always
/// capped by the SDE_BACKPROP_THREADS environment variable when it is set.
int resolve_thread_count(int requested = 0);

/// Runs task(i) for i in [0, count) on up to `threads` workers. Tasks write to
/// their own slots, so results do not depend on scheduling. The first
/// exception thrown by a task is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task, int threads);

}  // namespace sdebp

#endif  // SDEBP_PARALLEL_HPP
