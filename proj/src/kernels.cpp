#include "dsde/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace dsde::kernels {
namespace {

struct Selection {
    const Ops* ops;
    std::string name;
};

Selection select() {
#ifdef DSDE_HAVE_AVX2
    bool want_avx2 = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    if (const char* env = std::getenv("DSDE_KERNEL")) {
        const std::string v(env);
        if (v == "scalar") want_avx2 = false;
        else if (v == "avx2") want_avx2 = true;
    }
    if (want_avx2) return {&avx2_ops, "avx2"};
#else
    if (const char* env = std::getenv("DSDE_KERNEL"); env && std::string(env) == "avx2")
        throw std::runtime_error("avx2 kernels not built in this binary");
#endif
    return {&scalar_ops, "scalar"};
}

Selection& current() {
    static Selection sel = select();
    return sel;
}

}  // namespace

const Ops& active() { return *current().ops; }

std::string backend_name() { return current().name; }

void force_backend(const std::string& name) {
    if (name == "scalar") {
        current() = {&scalar_ops, "scalar"};
        return;
    }
#ifdef DSDE_HAVE_AVX2
    if (name == "avx2") {
        current() = {&avx2_ops, "avx2"};
        return;
    }
#endif
    throw std::invalid_argument("unknown kernel backend: " + name);
}

}  // namespace dsde::kernels
