// Acceptance suite: one pass/fail line per criterion. Tolerances are pinned in the validation library.
// NEXTJUMP_ACCEPTANCE_LEVEL=fast selects the reduced ensembles.
#include "nextjump/validation.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

int main() {
    nextjump::validation::Options o;
    const char* lvl = std::getenv("NEXTJUMP_ACCEPTANCE_LEVEL");
    if (lvl && std::string(lvl) == "fast") o.level = nextjump::validation::Level::fast;
    int failed = 0;
    for (int id = 1; id <= nextjump::validation::criterion_count; ++id) {
        const auto r = nextjump::validation::run_criterion(id, o);
        std::cout << nextjump::validation::format_line(r) << std::endl;
        if (!r.pass) ++failed;
    }
    std::cout << (failed == 0 ? "acceptance: all criteria pass" : "acceptance: " + std::to_string(failed) + " failing")
              << std::endl;
    return failed == 0 ? 0 : 1;
}
