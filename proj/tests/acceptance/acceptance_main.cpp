// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate: one pass/fail line per criterion. Exit code is the number
// of failed criteria.

#include <cstdio>
#include <cstring>
#include <string>

#include "criteria.hpp"

int main(int argc, char** argv) {
    std::set<int> which;
    std::filesystem::path source_dir = ".";
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            which.insert(std::atoi(argv[++i]));
        } else if (std::strcmp(argv[i], "--source-dir") == 0 && i + 1 < argc) {
            source_dir = argv[++i];
        } else {
            std::fprintf(stderr,
                         "usage: acceptance [--criterion N]... [--source-dir PATH]\n");
            return 64;
        }
    }

    const auto results = acceptance::run_criteria(which, source_dir);
    int failures = 0;
    for (const auto& r : results) {
        failures += !r.pass;
        std::printf("[%s] criterion %2d: %s —%s", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                    r.detail.c_str());
        if (r.has_repro_check)
            std::printf(" [repeat run %s]", r.reproducible ? "bit-identical" : "DIVERGED");
        if (r.seconds > 0.0) std::printf(" (%.1fs)", r.seconds);
        std::printf("\n");
    }
    if (results.empty()) {
        std::fprintf(stderr, "no criteria selected\n");
        return 64;
    }
    return failures;
}
