#include "esncast/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "esncast/common.hpp"

namespace esncast::kernels {

const FnTable* scalar_table();
const FnTable* avx2_table();
const FnTable* neon_table();

namespace {

const FnTable* table_for(Impl impl) {
    switch (impl) {
        case Impl::Scalar: return scalar_table();
        case Impl::Avx2: return avx2_table();
        case Impl::Neon: return neon_table();
    }
    return nullptr;
}

bool cpu_supports(Impl impl) {
    if (table_for(impl) == nullptr) return false;
#if defined(__x86_64__)
    if (impl == Impl::Avx2) {
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }
#endif
#if defined(__aarch64__)
    if (impl == Impl::Neon) return true;
#endif
    return impl == Impl::Scalar;
}

Impl detect() {
    if (const char* env = std::getenv("ESNCAST_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Impl::Scalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_supports(Impl::Avx2)) return Impl::Avx2;
        if (std::strcmp(env, "neon") == 0 && cpu_supports(Impl::Neon)) return Impl::Neon;
    }
    if (cpu_supports(Impl::Avx2)) return Impl::Avx2;
    if (cpu_supports(Impl::Neon)) return Impl::Neon;
    return Impl::Scalar;
}

std::atomic<const FnTable*> g_active{nullptr};
std::atomic<Impl> g_active_impl{Impl::Scalar};

const FnTable* active_table() {
    const FnTable* t = g_active.load(std::memory_order_acquire);
    if (t == nullptr) {
        Impl impl = detect();
        t = table_for(impl);
        g_active_impl.store(impl, std::memory_order_relaxed);
        g_active.store(t, std::memory_order_release);
    }
    return t;
}

}  // namespace

Impl active() {
    active_table();
    return g_active_impl.load(std::memory_order_relaxed);
}

const char* name(Impl impl) {
    switch (impl) {
        case Impl::Scalar: return "scalar";
        case Impl::Avx2: return "avx2";
        case Impl::Neon: return "neon";
    }
    return "?";
}

bool available(Impl impl) { return cpu_supports(impl); }

void force_impl(Impl impl) {
    if (!cpu_supports(impl)) {
        throw ConfigError(std::string("kernel implementation unavailable: ") + name(impl));
    }
    g_active_impl.store(impl, std::memory_order_relaxed);
    g_active.store(table_for(impl), std::memory_order_release);
}

const FnTable& table(Impl impl) {
    const FnTable* t = table_for(impl);
    if (t == nullptr) {
        throw ConfigError(std::string("kernel implementation not compiled in: ") + name(impl));
    }
    return *t;
}

double dot(const double* a, const double* b, size_t n) { return active_table()->dot(a, b, n); }

void axpy(double a, const double* x, double* y, size_t n) { active_table()->axpy(a, x, y, n); }

void matvec(const double* A, size_t rows, size_t cols, const double* x, double* y) {
    active_table()->matvec(A, rows, cols, x, y);
}

void rank1_update(double* G, const double* x, size_t n) { active_table()->rank1_update(G, x, n); }

double sq_err_sum(const double* a, const double* b, size_t n) {
    return active_table()->sq_err_sum(a, b, n);
}

void scale_add(double* out, double c1, const double* u, double c2, const double* v, size_t n) {
    active_table()->scale_add(out, c1, u, c2, v, n);
}

}  // namespace esncast::kernels
