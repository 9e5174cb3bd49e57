#include "tdlab/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace tdlab::kernels {

namespace scalar { extern const Ops kOps; }
#ifdef TDLAB_HAVE_AVX2_OBJECT
namespace avx2 { extern const Ops kOps; }
#endif
#ifdef TDLAB_HAVE_NEON_OBJECT
namespace neon { extern const Ops kOps; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(TDLAB_HAVE_AVX2_OBJECT) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa pick_default() {
  if (const char* env = std::getenv("TDLAB_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0 && available(Isa::avx2)) return Isa::avx2;
    if (std::strcmp(env, "neon") == 0 && available(Isa::neon)) return Isa::neon;
  }
#ifdef TDLAB_HAVE_NEON_OBJECT
  return Isa::neon;
#else
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
#endif
}

Isa g_active = pick_default();

}  // namespace

bool available(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return cpu_has_avx2();
    case Isa::neon:
#ifdef TDLAB_HAVE_NEON_OBJECT
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Ops& ops(Isa isa) {
  switch (isa) {
    case Isa::scalar: return scalar::kOps;
#ifdef TDLAB_HAVE_AVX2_OBJECT
    case Isa::avx2:
      if (cpu_has_avx2()) return avx2::kOps;
      break;
#endif
#ifdef TDLAB_HAVE_NEON_OBJECT
    case Isa::neon: return neon::kOps;
#endif
    default: break;
  }
  throw std::invalid_argument("kernel variant not available on this CPU");
}

Isa active() { return g_active; }

void force(Isa isa) {
  if (!available(isa)) throw std::invalid_argument("kernel variant not available on this CPU");
  g_active = isa;
}

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "?";
}

}  // namespace tdlab::kernels
