#include <cstdlib>
#include <cstring>

#include "calib6/kernels/link_batch.hpp"

namespace calib6::kern {

namespace {

LinkBatchFn choose() {
  const char* env = std::getenv("CALIB6_KERNEL");
  if (env && std::strcmp(env, "scalar") == 0) return scalar_impl();
  if (env && std::strcmp(env, "avx2") == 0) {
    LinkBatchFn f = avx2_impl();
    return f ? f : scalar_impl();
  }
#if defined(__x86_64__) || defined(__i386__)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    LinkBatchFn f = avx2_impl();
    if (f) return f;
  }
#endif
  return scalar_impl();
}

}  // namespace

LinkBatchFn active_impl() {
  static LinkBatchFn fn = choose();
  return fn;
}

const char* active_name() {
  return active_impl() == scalar_impl() ? "scalar" : "avx2";
}

}  // namespace calib6::kern
