#include <cstdio>

#include "lindyn/golden.hpp"

int main() {
    const auto results = lindyn::run_acceptance();
    bool all = true;
    for (const auto& r : results) {
        std::printf("criterion %2d [%s]: %s (%.2f s)%s%s\n", r.id, r.name.c_str(),
                    r.pass ? "PASS" : "FAIL", r.seconds, r.detail.empty() ? "" : " ",
                    r.detail.c_str());
        all = all && r.pass;
    }
    return all ? 0 : 1;
}
