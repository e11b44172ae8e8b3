// Copyright 2026 The crowdplan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CROWDPLAN_PARALLEL_H_
#define CROWDPLAN_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace crowdplan {

// Worker count from CROWDPLAN_THREADS, or 1 when unset or invalid.
unsigned default_threads();

// Runs fn(i) for i in [0, n) on up to `threads` threads. Callers must write
// results into per-index slots; any reduction happens afterwards in index
// order. The first exception thrown by fn is rethrown on the caller.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace crowdplan

#endif  // CROWDPLAN_PARALLEL_H_
