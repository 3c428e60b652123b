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

#include "pprl/parallel.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace pprl {
namespace {

std::atomic<int> g_default_threads{0};

}  // namespace

int HardwareThreads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

void SetDefaultThreads(int threads) {
  g_default_threads.store(std::max(threads, 0));
}

int DefaultThreads() {
  int t = g_default_threads.load();
  return t > 0 ? t : HardwareThreads();
}

int ShardCount(size_t n, int threads) {
  if (threads <= 0) threads = DefaultThreads();
  if (n == 0) return 0;
  return static_cast<int>(std::min<size_t>(n, static_cast<size_t>(threads)));
}

void ParallelFor(size_t n, int threads,
                 const std::function<void(int, size_t, size_t)>& fn) {
  const int shards = ShardCount(n, threads);
  if (shards == 0) return;
  auto bounds = [&](int s) { return n * static_cast<size_t>(s) / shards; };
  if (shards == 1) {
    fn(0, 0, n);
    return;
  }
  std::vector<std::exception_ptr> errors(shards);
  std::vector<std::thread> workers;
  workers.reserve(shards - 1);
  for (int s = 1; s < shards; ++s) {
    workers.emplace_back([&, s] {
      try {
        fn(s, bounds(s), bounds(s + 1));
      } catch (...) {
        errors[s] = std::current_exception();
      }
    });
  }
  try {
    fn(0, 0, bounds(1));
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (std::thread& w : workers) w.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace pprl
