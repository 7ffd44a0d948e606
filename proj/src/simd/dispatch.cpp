#include <atomic>
#include <cstdlib>
#include <string_view>
#include <vector>

#include "dvit/simd/kernels.hpp"

namespace dvit::simd {

namespace {

std::vector<const KernelSet*> detect() {
  std::vector<const KernelSet*> sets{&scalar_kernels()};
#if defined(DVIT_HAVE_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    sets.push_back(&avx2_kernels());
#endif
#if defined(DVIT_HAVE_NEON)
  sets.push_back(&neon_kernels());
#endif
  return sets;
}

const std::vector<const KernelSet*>& registry() {
  static const std::vector<const KernelSet*> sets = detect();
  return sets;
}

const KernelSet* find(std::string_view name) {
  for (const KernelSet* set : registry())
    if (name == set->name) return set;
  return nullptr;
}

const KernelSet* initial() {
  if (const char* env = std::getenv("DVIT_KERNELS")) {
    if (const KernelSet* set = find(env)) return set;
  }
  return registry().back();
}

std::atomic<const KernelSet*>& current() {
  static std::atomic<const KernelSet*> set{initial()};
  return set;
}

}  // namespace

std::span<const KernelSet* const> available_kernels() { return registry(); }

const KernelSet& active_kernels() { return *current().load(std::memory_order_acquire); }

bool select_kernels(std::string_view name) {
  const KernelSet* set = find(name);
  if (set == nullptr) return false;
  current().store(set, std::memory_order_release);
  return true;
}

}  // namespace dvit::simd
