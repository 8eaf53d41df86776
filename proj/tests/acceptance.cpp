// Acceptance suite: runs the quick and the full verification levels at unit tolerance scale
// and prints one PASS/FAIL line per criterion. A criterion passes only if every one of its
// checks passes at both levels. Exit status is nonzero if any criterion fails.

#include <cstdio>
#include <map>

#include "cmm/report.hpp"
#include "cmm/verify.hpp"

using namespace cmm;

int main() {
    std::map<int, std::pair<int, int>> tally;  // criterion -> (checks, failed)
    double seconds[2] = {0.0, 0.0};
    int slot = 0;
    for (VerifyLevel level : {VerifyLevel::Quick, VerifyLevel::Full}) {
        VerifyOptions opts;
        opts.level = level;
        opts.tolerance_scale = 1.0;  // pinned; the environment override is for the CLI only
        opts.on_row = [](const CheckRow& r) {
            std::fprintf(stderr, "  [%s] %-24s error %-12s bound %-8s %s\n", r.pass ? "pass" : "FAIL", r.id.c_str(),
                         format_double(r.error).c_str(), format_double(r.tolerance).c_str(), r.note.c_str());
        };
        std::fprintf(stderr, "== %s level\n", to_string(level).c_str());
        const VerifyReport rep = run_verification(opts);
        seconds[slot++] = rep.seconds;
        for (const CheckRow& r : rep.rows) {
            auto& t = tally[r.criterion];
            ++t.first;
            if (!r.pass) ++t.second;
        }
    }

    bool all = true;
    for (int k = 1; k <= 15; ++k) {
        const auto it = tally.find(k);
        const bool pass = it != tally.end() && it->second.first > 0 && it->second.second == 0;
        all = all && pass;
        const int checks = it == tally.end() ? 0 : it->second.first;
        const int failed = it == tally.end() ? 0 : it->second.second;
        std::printf("criterion %2d: %s  %s (%d/%d checks)\n", k, pass ? "PASS" : "FAIL", criterion_title(k).c_str(),
                    checks - failed, checks);
    }
    std::printf("quick level %.1f s, full level %.1f s\n", seconds[0], seconds[1]);
    std::printf("%s\n", all ? "acceptance: all criteria pass" : "acceptance: FAILED");
    return all ? 0 : 1;
}
