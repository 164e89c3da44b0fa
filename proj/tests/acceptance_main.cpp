// SPDX-License-Identifier: Apache-2.0
// Runs every acceptance check; pass criterion numbers to run a subset.
#include "acceptance_checks.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    const auto results = lstdpred::acceptance::run_all(only, std::cout);
    int failed = 0;
    for (const auto& r : results) failed += !r.passed;
    std::cout << results.size() - failed << '/' << results.size() << " acceptance checks passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
