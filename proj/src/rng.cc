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

#include "pprl/rng.h"

#include <string>

#include "pprl/hashcore.h"

namespace pprl {

uint64_t DeriveSeed(uint64_t master, absl::string_view label) {
  std::string buf(8, '\0');
  for (int i = 0; i < 8; ++i) {
    buf[i] = static_cast<char>(master >> (56 - 8 * i));
  }
  buf.append(label.data(), label.size());
  return LoadBigEndian64(Sha256(buf));
}

}  // namespace pprl
