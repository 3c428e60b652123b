// Copyright 2026 The pprlkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PPRL_PARALLEL_H_
#define PPRL_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace pprl {

// Logical cores, at least 1.
int HardwareThreads();

// Caps the worker count used when callers pass threads <= 0. Zero restores
// the hardware default.
void SetDefaultThreads(int threads);
int DefaultThreads();

// Splits [0, n) into at most `threads` contiguous shards and runs
// fn(shard_index, begin, end) on each, joining before return. Shard
// boundaries depend only on (n, shard count), so results merged in shard
// order are deterministic. threads <= 0 means DefaultThreads().
void ParallelFor(size_t n, int threads,
                 const std::function<void(int, size_t, size_t)>& fn);

// Number of shards ParallelFor will use for (n, threads).
int ShardCount(size_t n, int threads);

}  // namespace pprl

#endif  // PPRL_PARALLEL_H_
