/*
 * Copyright 2025 The ivsid Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdlib>
#include <stdexcept>

#include "ivsid/kernels.hpp"

namespace ivsid::kern {
namespace {

const Kernels* g_active = nullptr;

const Kernels& pick(const std::string& name) {
  if (name == "scalar") return scalar_kernels();
#if defined(__x86_64__) || defined(__i386__)
  if (name == "avx2") {
    if (!avx2_supported())
      throw std::runtime_error("kernels: avx2 requested but not supported");
    return avx2_kernels();
  }
#else
  if (name == "avx2")
    throw std::runtime_error("kernels: avx2 unavailable on this architecture");
#endif
  if (name == "auto") {
#if defined(__x86_64__) || defined(__i386__)
    if (avx2_supported()) return avx2_kernels();
#endif
    return scalar_kernels();
  }
  throw std::invalid_argument("kernels: unknown variant '" + name + "'");
}

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Kernels& active() {
  if (g_active == nullptr) {
    const char* env = std::getenv("IVSID_KERNELS");
    g_active = &pick(env != nullptr ? env : "auto");
  }
  return *g_active;
}

void select(const std::string& name) { g_active = &pick(name); }

}  // namespace ivsid::kern
